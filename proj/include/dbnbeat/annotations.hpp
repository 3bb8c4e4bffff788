#pragma once

#include <cstdint>
#include <vector>

namespace dbnbeat {

/// Beat positions in samples, strictly increasing, with the sampling rate they
/// refer to. Used for detector output, reference beats and filter output.
struct RawAnnotations {
  std::vector<std::int64_t> sample_indices;
  double fs = 250.0;

  std::size_t size() const { return sample_indices.size(); }
  bool empty() const { return sample_indices.empty(); }
  double time_of(std::size_t i) const { return static_cast<double>(sample_indices[i]) / fs; }
};

using BeatAnnotations = RawAnnotations;

bool strictly_increasing(const std::vector<std::int64_t>& v);

}  // namespace dbnbeat
