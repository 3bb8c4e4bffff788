#pragma once

// Synthetic two-channel records with known beat positions.

#include <cstdint>
#include <vector>

#include "dbnbeat/annotations.hpp"

namespace dbnbeat {

struct HrKnot {
  double time_s;
  double bpm;
};

struct Interval {
  double start_s;
  double end_s;
};

enum class SignalChannel { ecg, abp };

struct ArtifactBurst {
  SignalChannel channel;
  double start_s;
  double end_s;
  double amplitude;  // standard deviation of the added noise, signal units
};

struct SynthSpec {
  double duration_s = 60.0;
  double fs = 250.0;
  std::vector<HrKnot> hr_profile{{0.0, 60.0}};  // piecewise linear, held at the ends
  double latency_ms = 200.0;
  std::vector<Interval> ecg_dropouts;
  std::vector<Interval> abp_dropouts;
  std::vector<ArtifactBurst> artifact_bursts;
  bool double_spike = false;
  std::uint64_t seed = 1;
  double noise_fraction = 0.02;
  double abp_systolic = 120.0;
  double abp_diastolic = 80.0;

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
};

struct SynthRecord {
  std::vector<double> ecg;  // mV
  std::vector<double> abp;  // mmHg
  RawAnnotations truth;
};

double heart_rate_at(const std::vector<HrKnot>& profile, double t);

SynthRecord generate(const SynthSpec& spec);

}  // namespace dbnbeat
