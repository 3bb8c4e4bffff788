#pragma once

// Plain-text file formats: records, annotations, filter traces, and the
// key=value files used for run configuration and synthetic record specs.

#include <cstddef>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "dbnbeat/annotations.hpp"
#include "dbnbeat/features.hpp"
#include "dbnbeat/filter.hpp"
#include "dbnbeat/synth.hpp"

namespace dbnbeat {

inline constexpr int kFormatVersion = 1;

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct Record {
  double fs = 250.0;
  std::vector<std::string> names;
  std::vector<std::vector<double>> channels;

  std::size_t length() const { return channels.empty() ? 0 : channels.front().size(); }
  /// Throws std::out_of_range if the record has no such channel.
  const std::vector<double>& channel(const std::string& name) const;
};

struct RunConfig {
  FilterConfig filter;
  FeatureConfig features;
};

// Text serializers. Parsers throw ParseError carrying the offending line.
std::string format_record(const Record& rec);
Record parse_record(const std::string& text, const std::string& source = "<record>");
std::string format_annotations(const RawAnnotations& ann);
RawAnnotations parse_annotations(const std::string& text, double fs,
                                 const std::string& source = "<annotations>");
std::string format_trace(const FilterTrace& trace);
RunConfig parse_run_config(const std::string& text, const std::string& source = "<config>");
SynthSpec parse_synth_spec(const std::string& text, const std::string& source = "<spec>");

Record read_record(const std::filesystem::path& path);
void write_record(const Record& rec, const std::filesystem::path& path);
RawAnnotations read_annotations(const std::filesystem::path& path, double fs);
void write_annotations(const RawAnnotations& ann, const std::filesystem::path& path);
void write_trace(const FilterTrace& trace, const std::filesystem::path& path);
RunConfig read_run_config(const std::filesystem::path& path);
SynthSpec read_synth_spec(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);

/// Stage several files and move them into place only once all are written.
/// Nothing under the final names changes if any write fails.
class AtomicWriter {
 public:
  AtomicWriter() = default;
  AtomicWriter(const AtomicWriter&) = delete;
  AtomicWriter& operator=(const AtomicWriter&) = delete;
  ~AtomicWriter();

  void add(const std::filesystem::path& path, const std::string& content);
  void commit();

 private:
  std::vector<std::pair<std::filesystem::path, std::filesystem::path>> staged_;
};

}  // namespace dbnbeat
