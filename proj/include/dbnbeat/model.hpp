#pragma once

// Dynamic Bayesian network of patient physiology: state types, priors,
// propagation and observation likelihoods. Everything here is a pure function
// of its arguments plus an explicit random engine.

#include <cstdint>
#include <optional>
#include <random>

namespace dbnbeat {

using Rng = std::mt19937_64;

struct StaticParams {
  double rest_hr = 70.0;  // beats/min
  int latency = 8;        // ECG -> ABP delay, windows
};

struct DynamicState {
  double true_hr = 70.0;  // beats/min
  bool ecg_peak = false;
  std::int64_t ecg_last_peak = -1;
  bool abp_peak = false;
  std::int64_t abp_last_peak = -1;
  bool ecg_artifact = false;
  bool abp_artifact = false;
};

struct ParticleState {
  StaticParams static_params;
  DynamicState dynamic;
};

struct WindowObservation {
  bool ecg_ann = false;
  bool abp_ann = false;
  std::optional<double> ecg_hr;
  std::optional<double> abp_hr;
  double ecg_sqi = 1.0;
  bool abp_sqi = true;
};

enum class Channel { ecg, abp };

struct ModelConfig {
  double avg_hr = 70.0;
  double rest_hr_sigma = 10.0;
  double true_hr_init_sigma = 5.0;
  double true_hr_noise_sigma = 15.0;
  double latency_prior_mean_ms = 200.0;
  double latency_prior_sigma_windows = 2.0;
  double peak_prior_prob = 0.01;
  double artifact_prior_prob = 0.01;
  double artifact_stay_prob = 0.99;
  double window_s = 0.025;

  // Annotation CPT rows for peak=1 (probability of ann=1).
  double peak_ann_prob = 0.99;
  double peak_artifact_ann_prob = 0.7;

  double min_hr = 20.0;             // floor applied to sampled heart rates
  double hr_sigma_floor_bpm = 20.0; // HR likelihood sigma = max(obs, floor) / 4
  double ecg_sqi_threshold = 0.8;

  // When false the non-gated channel also contributes its factors.
  bool exclusive_gating = true;

  void validate() const;
};

/// Binomial pmf extended to real-valued x and n through the log-gamma
/// function. Zero outside [0, n]; equal to the ordinary pmf at integers.
/// Throws std::domain_error unless n > 0 and 0 < p < 1.
double binomial_pmf_general(double x, double n, double p);

/// Windows per heart beat: 60 / (window_s * true_hr).
double beat_window(double true_hr, double window_s);

/// Peak probability as a function of windows elapsed since the last peak.
/// Periodic in diff with period bw; x = (diff mod bw) + bw, n = 1.5 bw,
/// p = 2/3.
double peak_probability(double diff, double bw);

/// Prior draw of all nine variables at window 0.
ParticleState init_particle(const ModelConfig& cfg, Rng& rng);

/// Transition from window t_next - 1 to t_next. mean_latency is the ensemble
/// mean of the latency parameter, shared by every particle.
ParticleState propagate_particle(const ParticleState& prev, std::int64_t t_next,
                                 double mean_latency, const ModelConfig& cfg,
                                 Rng& rng);

/// Pr(ann | peak, artifact) from the annotation table.
double annotation_likelihood(bool peak, bool artifact, bool ann, double beat_prob,
                             const ModelConfig& cfg);
double annotation_likelihood(bool peak, bool artifact, bool ann, double beat_prob);

/// Artifact transition table entry Pr(next | current).
double artifact_transition(bool current, bool next, const ModelConfig& cfg);

double hr_likelihood(double true_hr, double hr_obs, double sigma_floor_bpm = 20.0);

Channel gate(double ecg_sqi, bool abp_sqi, double ecg_threshold = 0.8);

/// Observation likelihood of one particle at window t.
double particle_weight(const ParticleState& p, const WindowObservation& obs,
                       std::int64_t t, const ModelConfig& cfg);

}  // namespace dbnbeat
