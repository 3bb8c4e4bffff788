#pragma once

// Bootstrap (SIR) particle filter over the heart-beat network.

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "dbnbeat/annotations.hpp"
#include "dbnbeat/model.hpp"

namespace dbnbeat {

struct FilterConfig {
  std::size_t n_particles = 2000;
  double peak_fraction_threshold = 0.15;
  std::int64_t refractory_windows = 10;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: OpenMP default
  ModelConfig model;

  void validate() const;
};

/// Across-particle means of the state variables for one window, weighted by
/// the normalized observation likelihoods (booleans become fractions).
struct TraceEntry {
  double rest_hr = 0.0;
  double latency = 0.0;
  double true_hr = 0.0;
  double ecg_peak = 0.0;
  double ecg_last_peak = 0.0;
  double abp_peak = 0.0;
  double abp_last_peak = 0.0;
  double ecg_artifact = 0.0;
  double abp_artifact = 0.0;
  double weight_sum = 0.0;  // unnormalized
  bool degenerate = false;  // all weights vanished; reset to uniform
};

inline constexpr std::array<std::string_view, 10> kTraceColumns = {
    "rest_hr",      "latency",       "true_hr",      "ecg_peak",     "ecg_last_peak",
    "abp_peak",     "abp_last_peak", "ecg_artifact", "abp_artifact", "weight_sum"};

struct FilterTrace {
  std::vector<TraceEntry> windows;
  std::int64_t window_samples = 6;
  double fs = 250.0;

  std::size_t degenerate_steps() const;
};

struct FilterResult {
  FilterTrace trace;
  BeatAnnotations beats;
};

/// Systematic resampling: one uniform offset strides the weight CDF.
/// Throws DegenerateWeights if no weight is positive.
std::vector<std::size_t> systematic_resample(std::span<const double> weights, Rng& rng);

/// Same scheme with the offset u in [0,1) supplied directly.
std::vector<std::size_t> systematic_resample(std::span<const double> weights, double u);

struct DegenerateWeights : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Convert thresholded, latency-backshifted ABP peak fractions into beats.
BeatAnnotations extract_beats(const FilterTrace& trace, const FilterConfig& cfg);

/// Run the filter over a window sequence. Deterministic given cfg.seed,
/// independent of thread count. window_samples and fs only place the output
/// beats in samples; cfg.model.window_s must already match them.
FilterResult run_filter(std::span<const WindowObservation> obs, const FilterConfig& cfg,
                        std::int64_t window_samples, double fs);

}  // namespace dbnbeat
