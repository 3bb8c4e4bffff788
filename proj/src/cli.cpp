#include "dbnbeat/cli.hpp"

#include <CLI11.hpp>

#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "dbnbeat/io.hpp"
#include "dbnbeat/pipeline.hpp"
#include "dbnbeat/scoring.hpp"
#include "dbnbeat/synth.hpp"

namespace dbnbeat {

namespace {

struct Options {
  std::string spec, record, config, out, truth, trace, ecg_ann, abp_ann;
  std::vector<std::string> refs, tests;
  double fs = 0.0;
  double tol_ms = 150.0;
};

std::optional<RawAnnotations> maybe_annotations(const std::string& path, double fs) {
  if (path.empty()) return std::nullopt;
  return read_annotations(path, fs);
}

int cmd_synth(const Options& o, std::ostream& out) {
  const SynthSpec spec = read_synth_spec(o.spec);
  const SynthRecord rec = generate(spec);
  Record record{spec.fs, {"ECG", "ABP"}, {rec.ecg, rec.abp}};

  AtomicWriter writer;
  writer.add(o.out, format_record(record));
  writer.add(o.truth, format_annotations(rec.truth));
  writer.commit();

  out << "samples=" << record.length() << "\n"
      << "fs=" << spec.fs << "\n"
      << "beats=" << rec.truth.size() << "\n";
  return 0;
}

int cmd_detect(const Options& o, std::ostream& out) {
  const Record rec = read_record(o.record);
  const FeatureConfig cfg = o.config.empty() ? FeatureConfig{} : read_run_config(o.config).features;
  const Detections d = detect(rec.channel("ECG"), rec.channel("ABP"), rec.fs, cfg);

  AtomicWriter writer;
  writer.add(o.ecg_ann, format_annotations(d.ecg));
  writer.add(o.abp_ann, format_annotations(d.abp));
  writer.commit();

  out << "ecg_annotations=" << d.ecg.size() << "\n"
      << "abp_annotations=" << d.abp.size() << "\n";
  return 0;
}

int cmd_run(const Options& o, std::ostream& out) {
  const Record rec = read_record(o.record);
  const RunConfig cfg = o.config.empty() ? RunConfig{} : read_run_config(o.config);
  const auto ext_ecg = maybe_annotations(o.ecg_ann, rec.fs);
  const auto ext_abp = maybe_annotations(o.abp_ann, rec.fs);

  const PipelineResult result = annotate(rec, cfg, ext_ecg, ext_abp);

  AtomicWriter writer;
  writer.add(o.out, format_annotations(result.filter.beats));
  if (!o.trace.empty()) writer.add(o.trace, format_trace(result.filter.trace));
  writer.commit();

  out << "windows=" << result.filter.trace.windows.size() << "\n"
      << "beats=" << result.filter.beats.size() << "\n"
      << "degenerate_steps=" << result.filter.trace.degenerate_steps() << "\n";
  return 0;
}

void print_report(std::ostream& out, const ScoreReport& r) {
  out << "tp=" << r.tp << "\n"
      << "fp=" << r.fp << "\n"
      << "fn=" << r.fn << "\n"
      << "sensitivity=" << r.sensitivity << "\n"
      << "positive_predictivity=" << r.positive_predictivity << "\n";
}

int cmd_score(const Options& o, std::ostream& out) {
  if (o.refs.size() != o.tests.size())
    throw std::invalid_argument("score: every --ref needs a matching --test");
  const double tol_s = o.tol_ms / 1000.0;

  std::vector<ScoreReport> reports;
  for (std::size_t i = 0; i < o.refs.size(); ++i)
    reports.push_back(
        score(read_annotations(o.refs[i], o.fs), read_annotations(o.tests[i], o.fs), tol_s));

  out << std::setprecision(10);
  if (reports.size() == 1) {
    print_report(out, reports.front());
    return 0;
  }
  for (std::size_t i = 0; i < reports.size(); ++i) {
    out << "record=" << i << "\n";
    print_report(out, reports[i]);
  }
  const AggregateScore mean = aggregate(reports);
  out << "records=" << reports.size() << "\n"
      << "mean_sensitivity=" << mean.mean_sensitivity << "\n"
      << "mean_positive_predictivity=" << mean.mean_positive_predictivity << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heart-beat annotation by particle filtering over ECG and arterial pressure"};
  app.require_subcommand(1);
  Options o;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic record and its true beats");
  synth->add_option("--spec", o.spec, "Synthetic record spec (key=value)")->required();
  synth->add_option("--out", o.out, "Output record file")->required();
  synth->add_option("--truth", o.truth, "Output true-beat annotation file")->required();

  auto* detect_cmd = app.add_subcommand("detect", "Run the stand-in ECG and ABP beat detectors");
  detect_cmd->add_option("--record", o.record, "Input record")->required();
  detect_cmd->add_option("--config", o.config, "Run configuration (key=value)");
  detect_cmd->add_option("--ecg-ann", o.ecg_ann, "Output ECG annotations")->required();
  detect_cmd->add_option("--abp-ann", o.abp_ann, "Output ABP annotations")->required();

  auto* run = app.add_subcommand("run", "Annotate beats with the particle filter");
  run->add_option("--record", o.record, "Input record")->required();
  run->add_option("--config", o.config, "Run configuration (key=value)");
  run->add_option("--out", o.out, "Output beat annotations")->required();
  run->add_option("--trace", o.trace, "Output per-window trace CSV");
  run->add_option("--ecg-ann", o.ecg_ann, "External ECG annotations replacing the stand-in detector");
  run->add_option("--abp-ann", o.abp_ann, "External ABP annotations replacing the stand-in detector");

  auto* score_cmd = app.add_subcommand("score", "Beat-by-beat comparison against reference beats");
  score_cmd->add_option("--ref", o.refs, "Reference annotation file (repeat for several records)")
      ->required();
  score_cmd->add_option("--test", o.tests, "Test annotation file, paired with --ref in order")
      ->required();
  score_cmd->add_option("--fs", o.fs, "Sampling rate of the annotation files, Hz")
      ->required()
      ->check(CLI::PositiveNumber);
  score_cmd->add_option("--tol-ms", o.tol_ms, "Match tolerance in milliseconds")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*synth) return cmd_synth(o, out);
    if (*detect_cmd) return cmd_detect(o, out);
    if (*run) return cmd_run(o, out);
    if (*score_cmd) return cmd_score(o, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace dbnbeat
