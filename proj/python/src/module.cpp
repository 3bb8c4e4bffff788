#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dbnbeat/features.hpp"
#include "dbnbeat/filter.hpp"
#include "dbnbeat/io.hpp"
#include "dbnbeat/model.hpp"
#include "dbnbeat/pipeline.hpp"
#include "dbnbeat/scoring.hpp"
#include "dbnbeat/synth.hpp"

namespace py = pybind11;
using namespace dbnbeat;

namespace {

RawAnnotations to_annotations(const std::vector<std::int64_t>& samples, double fs) {
  if (!strictly_increasing(samples)) throw std::invalid_argument("annotations must be strictly increasing");
  return {samples, fs};
}

std::optional<RawAnnotations> maybe(const std::optional<std::vector<std::int64_t>>& s, double fs) {
  if (!s) return std::nullopt;
  return to_annotations(*s, fs);
}

py::dict trace_columns(const FilterTrace& tr) {
  py::dict out;
  const auto column = [&](double TraceEntry::*m) {
    std::vector<double> v;
    v.reserve(tr.windows.size());
    for (const auto& e : tr.windows) v.push_back(e.*m);
    return v;
  };
  out["rest_hr"] = column(&TraceEntry::rest_hr);
  out["latency"] = column(&TraceEntry::latency);
  out["true_hr"] = column(&TraceEntry::true_hr);
  out["ecg_peak"] = column(&TraceEntry::ecg_peak);
  out["ecg_last_peak"] = column(&TraceEntry::ecg_last_peak);
  out["abp_peak"] = column(&TraceEntry::abp_peak);
  out["abp_last_peak"] = column(&TraceEntry::abp_last_peak);
  out["ecg_artifact"] = column(&TraceEntry::ecg_artifact);
  out["abp_artifact"] = column(&TraceEntry::abp_artifact);
  out["weight_sum"] = column(&TraceEntry::weight_sum);
  std::vector<bool> deg;
  for (const auto& e : tr.windows) deg.push_back(e.degenerate);
  out["degenerate"] = deg;
  return out;
}

}  // namespace

PYBIND11_MODULE(_dbnbeat, m) {
  m.doc() = "Particle-filter heart-beat annotation over ECG and arterial pressure";

  m.def("binomial_pmf_general", &binomial_pmf_general, py::arg("x"), py::arg("n"), py::arg("p"));
  m.def("beat_window", &beat_window, py::arg("true_hr"), py::arg("window_s"));
  m.def("peak_probability", &peak_probability, py::arg("diff"), py::arg("bw"));
  m.def("hr_likelihood", &hr_likelihood, py::arg("true_hr"), py::arg("hr_obs"),
        py::arg("sigma_floor_bpm") = 20.0);
  m.def(
      "annotation_likelihood",
      [](bool peak, bool artifact, bool ann, double beat_prob) {
        return annotation_likelihood(peak, artifact, ann, beat_prob);
      },
      py::arg("peak"), py::arg("artifact"), py::arg("ann"), py::arg("beat_prob"));

  m.def(
      "generate",
      [](const std::string& spec_text) {
        const SynthSpec spec = parse_synth_spec(spec_text, "<spec>");
        const SynthRecord rec = generate(spec);
        return py::make_tuple(rec.ecg, rec.abp, rec.truth.sample_indices, spec.fs);
      },
      py::arg("spec") = "",
      "Synthesize a record from key=value spec text; returns (ecg, abp, truth, fs).");

  m.def(
      "detect_qrs",
      [](const std::vector<double>& x, double fs, double scale) {
        return detect_qrs(x, fs, scale).sample_indices;
      },
      py::arg("signal"), py::arg("fs"), py::arg("threshold_scale") = 1.0);
  m.def(
      "detect_abp_pulses",
      [](const std::vector<double>& x, double fs) { return detect_abp_pulses(x, fs).sample_indices; },
      py::arg("signal"), py::arg("fs"));

  m.def(
      "annotate",
      [](const std::vector<double>& ecg, const std::vector<double>& abp, double fs, const std::string& config,
         const std::optional<std::vector<std::int64_t>>& ecg_ann,
         const std::optional<std::vector<std::int64_t>>& abp_ann) {
        const RunConfig cfg = parse_run_config(config, "<config>");
        PipelineResult r;
        {
          py::gil_scoped_release release;
          r = annotate(ecg, abp, fs, cfg, maybe(ecg_ann, fs), maybe(abp_ann, fs));
        }
        return py::make_tuple(r.filter.beats.sample_indices, trace_columns(r.filter.trace));
      },
      py::arg("ecg"), py::arg("abp"), py::arg("fs"), py::arg("config") = "", py::arg("ecg_ann") = py::none(),
      py::arg("abp_ann") = py::none(),
      "Run detectors and the particle filter; returns (beats, trace columns).");

  m.def(
      "score",
      [](const std::vector<std::int64_t>& ref, const std::vector<std::int64_t>& test, double fs, double tol_s) {
        const auto r = score(to_annotations(ref, fs), to_annotations(test, fs), tol_s);
        py::dict d;
        d["tp"] = r.tp;
        d["fp"] = r.fp;
        d["fn"] = r.fn;
        d["sensitivity"] = r.sensitivity;
        d["positive_predictivity"] = r.positive_predictivity;
        return d;
      },
      py::arg("reference"), py::arg("test"), py::arg("fs"), py::arg("tol_s") = kDefaultMatchTolerance);

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
}
