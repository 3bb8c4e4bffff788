#pragma once

// Signal front end: stand-in beat detectors, local heart rate, signal quality
// indices and the reduction of all of them to per-window observations.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dbnbeat/annotations.hpp"
#include "dbnbeat/model.hpp"

namespace dbnbeat {

struct AbpSqiRanges {
  double systolic_min = 40.0, systolic_max = 250.0;
  double map_min = 30.0, map_max = 200.0;
  double pulse_pressure_min = 10.0;
  double hr_min = 20.0, hr_max = 240.0;
};

struct FeatureConfig {
  double nominal_window_s = 0.025;
  double hr_window_s = 10.0;
  double sqi_window_s = 10.0;
  double sqi_match_tol_s = 0.15;
  double sqi_stale_s = 3.0;  // longest admissible beat period (20 bpm)
  double secondary_threshold_scale = 1.5;
  AbpSqiRanges abp_ranges;

  void validate() const;
};

/// round(nominal_window_s * fs), at least 1.
std::int64_t window_samples_for(double fs, double nominal_window_s = 0.025);

/// Derivative-energy QRS detector: band-pass by moving-average difference,
/// squared slope, moving-window integration and an adaptive signal/noise
/// threshold, with a 250 ms refractory period. threshold_scale multiplies the
/// adaptive threshold.
RawAnnotations detect_qrs(std::span<const double> signal, double fs,
                          double threshold_scale = 1.0);

/// Slope-sum-function pulse onset detector for arterial pressure.
RawAnnotations detect_abp_pulses(std::span<const double> signal, double fs);

/// Median inter-beat interval over (t - window_s, t] as beats/min; empty when
/// fewer than two annotations fall in the window.
std::optional<double> local_heart_rate(const RawAnnotations& ann, double t,
                                       double window_s = 10.0);

/// Fraction of beats over (t - window_s, t] on which two ECG detectors agree
/// within tol_s: matched / max(|primary|, |secondary|). Zero if either is
/// empty, or if the primary detector has been silent for more than stale_s.
double ecg_sqi(const RawAnnotations& primary, const RawAnnotations& secondary, double t,
               double window_s = 10.0, double tol_s = 0.15, double stale_s = 3.0);

/// Physiological range check on the most recent complete pulse before t.
bool abp_sqi(std::span<const double> pressure, const RawAnnotations& pulses, double t,
             const AbpSqiRanges& ranges = {});

struct ObservationProviders {
  std::function<std::optional<double>(double)> ecg_hr;
  std::function<std::optional<double>(double)> abp_hr;
  std::function<double(double)> ecg_sqi;
  std::function<bool(double)> abp_sqi;
};

/// Reduce annotations and quality measures to one observation per window.
/// Annotation flags mark windows containing at least one beat; providers are
/// sampled at each window's end time. Throws if the two channels disagree on fs.
std::vector<WindowObservation> windowize(const RawAnnotations& ecg_ann,
                                         const RawAnnotations& abp_ann,
                                         const ObservationProviders& providers,
                                         std::int64_t window_samples, std::size_t n_windows);

struct Detections {
  RawAnnotations ecg;            // annotations the filter observes
  RawAnnotations ecg_secondary;  // second opinion used only for the SQI
  RawAnnotations abp;
};

/// Run the stand-in detectors. Externally supplied annotations replace the
/// corresponding primary detector.
Detections detect(std::span<const double> ecg, std::span<const double> abp, double fs,
                  const FeatureConfig& cfg,
                  const std::optional<RawAnnotations>& external_ecg = std::nullopt,
                  const std::optional<RawAnnotations>& external_abp = std::nullopt);

/// Full feature pipeline for a two-channel record.
std::vector<WindowObservation> build_observations(std::span<const double> abp, double fs,
                                                  const Detections& detections,
                                                  std::size_t n_samples,
                                                  const FeatureConfig& cfg);

}  // namespace dbnbeat
