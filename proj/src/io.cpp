#include "dbnbeat/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <system_error>

namespace dbnbeat {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

bool to_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

template <typename Int>
bool to_int(const std::string& s, Int& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool is_header_line(const std::string& line, std::string& key, std::string& value) {
  const auto eq = line.find('=');
  if (eq == std::string::npos) return false;
  key = trim(std::string_view(line).substr(0, eq));
  value = trim(std::string_view(line).substr(eq + 1));
  return true;
}

void check_format(const std::string& value, const std::string& source, std::size_t line) {
  int v = 0;
  if (!to_int(value, v) || v != kFormatVersion)
    throw ParseError(source, line, "unsupported format version '" + value + "'");
}

// key=value files shared by the run configuration and synthetic specs.
using Setter = std::function<void(const std::string&)>;

void parse_key_values(const std::string& text, const std::string& source,
                      const std::map<std::string, Setter>& setters) {
  const auto lines = lines_of(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    std::string line = lines[i];
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::string key, value;
    if (!is_header_line(line, key, value))
      throw ParseError(source, lineno, "expected key=value, got '" + line + "'");
    if (key == "format") {
      check_format(value, source, lineno);
      continue;
    }
    const auto it = setters.find(key);
    if (it == setters.end()) throw ParseError(source, lineno, "unknown key '" + key + "'");
    if (value.empty()) throw ParseError(source, lineno, "missing value for key '" + key + "'");
    try {
      it->second(value);
    } catch (const std::invalid_argument& e) {
      throw ParseError(source, lineno, "invalid value for key '" + key + "': " + e.what());
    }
  }
}

double parse_double(const std::string& v) {
  double d = 0.0;
  if (!to_double(v, d)) throw std::invalid_argument("not a number: '" + v + "'");
  return d;
}

template <typename Int>
Int parse_integer(const std::string& v) {
  Int i{};
  if (!to_int(v, i)) throw std::invalid_argument("not an integer: '" + v + "'");
  return i;
}

bool parse_bool(const std::string& v) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  throw std::invalid_argument("not a boolean: '" + v + "'");
}

Setter real(double& target) {
  return [&target](const std::string& v) { target = parse_double(v); };
}

std::vector<double> colon_fields(const std::string& item, std::size_t expected) {
  const auto parts = split(item, ':');
  if (parts.size() != expected)
    throw std::invalid_argument("expected " + std::to_string(expected) + " ':'-separated fields in '" +
                                item + "'");
  std::vector<double> out;
  for (const auto& p : parts) out.push_back(parse_double(p));
  return out;
}

std::vector<Interval> parse_intervals(const std::string& v) {
  std::vector<Interval> out;
  if (v == "none") return out;
  for (const auto& item : split(v, ',')) {
    const auto f = colon_fields(item, 2);
    out.push_back({f[0], f[1]});
  }
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

}  // namespace

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

const std::vector<double>& Record::channel(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return channels[i];
  throw std::out_of_range("record has no channel '" + name + "'");
}

std::string format_record(const Record& rec) {
  std::string out = "fs=" + num(rec.fs) + "\nformat=" + std::to_string(kFormatVersion) + "\n";
  for (std::size_t c = 0; c < rec.names.size(); ++c) out += (c ? "," : "") + rec.names[c];
  out += '\n';
  for (std::size_t i = 0; i < rec.length(); ++i) {
    for (std::size_t c = 0; c < rec.channels.size(); ++c) out += (c ? "," : "") + num(rec.channels[c][i]);
    out += '\n';
  }
  return out;
}

Record parse_record(const std::string& text, const std::string& source) {
  const auto lines = lines_of(text);
  Record rec;
  bool have_fs = false;
  std::size_t i = 0;
  std::string key, value;
  for (; i < lines.size() && is_header_line(lines[i], key, value); ++i) {
    if (key == "fs") {
      if (!to_double(value, rec.fs) || !(rec.fs > 0.0))
        throw ParseError(source, i + 1, "invalid sampling rate '" + value + "'");
      have_fs = true;
    } else if (key == "format") {
      check_format(value, source, i + 1);
    } else {
      throw ParseError(source, i + 1, "unknown header key '" + key + "'");
    }
  }
  if (!have_fs) throw ParseError(source, i + 1, "missing 'fs=<Hz>' header");
  if (i >= lines.size() || trim(lines[i]).empty())
    throw ParseError(source, i + 1, "missing channel name line");
  rec.names = split(lines[i], ',');
  for (const auto& n : rec.names)
    if (n.empty()) throw ParseError(source, i + 1, "empty channel name");
  rec.channels.assign(rec.names.size(), {});
  for (++i; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto fields = split(lines[i], ',');
    if (fields.size() != rec.names.size())
      throw ParseError(source, i + 1,
                       "expected " + std::to_string(rec.names.size()) + " values, got " +
                           std::to_string(fields.size()));
    for (std::size_t c = 0; c < fields.size(); ++c) {
      double v = 0.0;
      if (!to_double(fields[c], v)) throw ParseError(source, i + 1, "not a number: '" + fields[c] + "'");
      rec.channels[c].push_back(v);
    }
  }
  return rec;
}

std::string format_annotations(const RawAnnotations& ann) {
  std::string out = "format=" + std::to_string(kFormatVersion) + "\n";
  for (const auto s : ann.sample_indices) out += std::to_string(s) + '\n';
  return out;
}

RawAnnotations parse_annotations(const std::string& text, double fs, const std::string& source) {
  if (!(fs > 0.0)) throw std::invalid_argument("parse_annotations: fs must be positive");
  RawAnnotations ann;
  ann.fs = fs;
  const auto lines = lines_of(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = trim(lines[i]);
    if (line.empty()) continue;
    std::string key, value;
    if (is_header_line(line, key, value)) {
      if (key != "format" || !ann.empty())
        throw ParseError(source, i + 1, "unexpected header line '" + line + "'");
      check_format(value, source, i + 1);
      continue;
    }
    std::int64_t s = 0;
    if (!to_int(line, s) || s < 0) throw ParseError(source, i + 1, "not a sample index: '" + line + "'");
    if (!ann.empty() && s <= ann.sample_indices.back())
      throw ParseError(source, i + 1, "annotations must be strictly increasing");
    ann.sample_indices.push_back(s);
  }
  return ann;
}

std::string format_trace(const FilterTrace& trace) {
  std::string out = "format=" + std::to_string(kFormatVersion) + "\nwindow";
  for (const auto c : kTraceColumns) out += "," + std::string(c);
  out += ",degenerate\n";
  for (std::size_t w = 0; w < trace.windows.size(); ++w) {
    const auto& e = trace.windows[w];
    out += std::to_string(w);
    for (const double v : {e.rest_hr, e.latency, e.true_hr, e.ecg_peak, e.ecg_last_peak, e.abp_peak,
                           e.abp_last_peak, e.ecg_artifact, e.abp_artifact, e.weight_sum})
      out += "," + num(v);
    out += e.degenerate ? ",1\n" : ",0\n";
  }
  return out;
}

RunConfig parse_run_config(const std::string& text, const std::string& source) {
  RunConfig cfg;
  auto& f = cfg.filter;
  auto& m = cfg.filter.model;
  auto& x = cfg.features;
  const std::map<std::string, Setter> setters = {
      {"n_particles", [&](const std::string& v) { f.n_particles = parse_integer<std::size_t>(v); }},
      {"peak_fraction_threshold", real(f.peak_fraction_threshold)},
      {"refractory_windows", [&](const std::string& v) { f.refractory_windows = parse_integer<std::int64_t>(v); }},
      {"seed", [&](const std::string& v) { f.seed = parse_integer<std::uint64_t>(v); }},
      {"threads", [&](const std::string& v) { f.threads = parse_integer<int>(v); }},
      {"avg_hr", real(m.avg_hr)},
      {"rest_hr_sigma", real(m.rest_hr_sigma)},
      {"true_hr_init_sigma", real(m.true_hr_init_sigma)},
      {"true_hr_noise_sigma", real(m.true_hr_noise_sigma)},
      {"latency_prior_mean_ms", real(m.latency_prior_mean_ms)},
      {"latency_prior_sigma_windows", real(m.latency_prior_sigma_windows)},
      {"peak_prior_prob", real(m.peak_prior_prob)},
      {"artifact_prior_prob", real(m.artifact_prior_prob)},
      {"artifact_stay_prob", real(m.artifact_stay_prob)},
      {"peak_ann_prob", real(m.peak_ann_prob)},
      {"peak_artifact_ann_prob", real(m.peak_artifact_ann_prob)},
      {"min_hr", real(m.min_hr)},
      {"hr_sigma_floor_bpm", real(m.hr_sigma_floor_bpm)},
      {"ecg_sqi_threshold", real(m.ecg_sqi_threshold)},
      {"exclusive_gating", [&](const std::string& v) { m.exclusive_gating = parse_bool(v); }},
      {"window_s", real(x.nominal_window_s)},
      {"hr_window_s", real(x.hr_window_s)},
      {"sqi_window_s", real(x.sqi_window_s)},
      {"sqi_match_tol_s", real(x.sqi_match_tol_s)},
      {"sqi_stale_s", real(x.sqi_stale_s)},
      {"secondary_threshold_scale", real(x.secondary_threshold_scale)},
  };
  parse_key_values(text, source, setters);
  try {
    cfg.features.validate();
    cfg.filter.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(source, 0, e.what());
  }
  return cfg;
}

SynthSpec parse_synth_spec(const std::string& text, const std::string& source) {
  SynthSpec s;
  const std::map<std::string, Setter> setters = {
      {"duration_s", real(s.duration_s)},
      {"fs", real(s.fs)},
      {"hr_profile",
       [&](const std::string& v) {
         s.hr_profile.clear();
         for (const auto& item : split(v, ',')) {
           const auto f = colon_fields(item, 2);
           s.hr_profile.push_back({f[0], f[1]});
         }
       }},
      {"latency_ms", real(s.latency_ms)},
      {"ecg_dropouts", [&](const std::string& v) { s.ecg_dropouts = parse_intervals(v); }},
      {"abp_dropouts", [&](const std::string& v) { s.abp_dropouts = parse_intervals(v); }},
      {"artifact_bursts",
       [&](const std::string& v) {
         s.artifact_bursts.clear();
         if (v == "none") return;
         for (const auto& item : split(v, ',')) {
           const auto colon = item.find(':');
           const std::string channel = item.substr(0, colon);
           if (channel != "ecg" && channel != "abp")
             throw std::invalid_argument("burst channel must be 'ecg' or 'abp'");
           if (colon == std::string::npos) throw std::invalid_argument("burst needs channel:start:end:amplitude");
           const auto f = colon_fields(item.substr(colon + 1), 3);
           s.artifact_bursts.push_back(
               {channel == "ecg" ? SignalChannel::ecg : SignalChannel::abp, f[0], f[1], f[2]});
         }
       }},
      {"double_spike", [&](const std::string& v) { s.double_spike = parse_bool(v); }},
      {"seed", [&](const std::string& v) { s.seed = parse_integer<std::uint64_t>(v); }},
      {"noise_fraction", real(s.noise_fraction)},
      {"abp_systolic", real(s.abp_systolic)},
      {"abp_diastolic", real(s.abp_diastolic)},
  };
  parse_key_values(text, source, setters);
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(source, 0, e.what());
  }
  return s;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Record read_record(const fs::path& path) { return parse_record(read_text(path), path.string()); }

void write_record(const Record& rec, const fs::path& path) { write_file(path, format_record(rec)); }

RawAnnotations read_annotations(const fs::path& path, double fs) {
  return parse_annotations(read_text(path), fs, path.string());
}

void write_annotations(const RawAnnotations& ann, const fs::path& path) {
  write_file(path, format_annotations(ann));
}

void write_trace(const FilterTrace& trace, const fs::path& path) { write_file(path, format_trace(trace)); }

RunConfig read_run_config(const fs::path& path) { return parse_run_config(read_text(path), path.string()); }

SynthSpec read_synth_spec(const fs::path& path) { return parse_synth_spec(read_text(path), path.string()); }

AtomicWriter::~AtomicWriter() {
  std::error_code ec;
  for (const auto& [tmp, final_path] : staged_) fs::remove(tmp, ec);
}

void AtomicWriter::add(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  write_file(tmp, content);
  staged_.emplace_back(tmp, path);
}

void AtomicWriter::commit() {
  for (const auto& [tmp, final_path] : staged_) fs::rename(tmp, final_path);
  staged_.clear();
}

}  // namespace dbnbeat
