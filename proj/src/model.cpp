#include "dbnbeat/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dbnbeat {

namespace {

bool open_unit(double p) { return p > 0.0 && p < 1.0; }

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("ModelConfig: " + what);
}

double channel_beat_prob(std::int64_t t, std::int64_t last_peak, double true_hr,
                         double window_s) {
  const auto diff = static_cast<double>(std::max<std::int64_t>(t - last_peak, 0));
  return peak_probability(diff, beat_window(true_hr, window_s));
}

double channel_factor(bool peak, bool artifact, bool ann, std::int64_t last_peak,
                      const std::optional<double>& hr_obs, double true_hr,
                      std::int64_t t, const ModelConfig& cfg) {
  // beat_prob only enters the peak=0 rows.
  const double beat_prob =
      peak ? 0.0 : channel_beat_prob(t, last_peak, true_hr, cfg.window_s);
  double w = annotation_likelihood(peak, artifact, ann, beat_prob, cfg);
  if (hr_obs) w *= hr_likelihood(true_hr, *hr_obs, cfg.hr_sigma_floor_bpm);
  return w;
}

}  // namespace

void ModelConfig::validate() const {
  require(avg_hr > 0.0, "avg_hr must be positive");
  require(rest_hr_sigma >= 0.0, "rest_hr_sigma must be >= 0");
  require(true_hr_init_sigma >= 0.0, "true_hr_init_sigma must be >= 0");
  require(true_hr_noise_sigma >= 0.0, "true_hr_noise_sigma must be >= 0");
  require(latency_prior_mean_ms >= 0.0, "latency_prior_mean_ms must be >= 0");
  require(latency_prior_sigma_windows >= 0.0, "latency_prior_sigma_windows must be >= 0");
  require(open_unit(peak_prior_prob), "peak_prior_prob must be in (0,1)");
  require(open_unit(artifact_prior_prob), "artifact_prior_prob must be in (0,1)");
  require(open_unit(artifact_stay_prob), "artifact_stay_prob must be in (0,1)");
  require(open_unit(peak_ann_prob), "peak_ann_prob must be in (0,1)");
  require(open_unit(peak_artifact_ann_prob), "peak_artifact_ann_prob must be in (0,1)");
  require(window_s > 0.0, "window_s must be positive");
  require(min_hr > 0.0, "min_hr must be positive");
  require(hr_sigma_floor_bpm > 0.0, "hr_sigma_floor_bpm must be positive");
  require(ecg_sqi_threshold >= 0.0 && ecg_sqi_threshold <= 1.0,
          "ecg_sqi_threshold must be in [0,1]");
}

double binomial_pmf_general(double x, double n, double p) {
  if (!(n > 0.0) || !std::isfinite(n)) throw std::domain_error("binomial_pmf_general: n must be > 0");
  if (!open_unit(p)) throw std::domain_error("binomial_pmf_general: p must be in (0,1)");
  if (!(x >= 0.0) || x > n) return 0.0;
  const double log_pmf = std::lgamma(n + 1.0) - std::lgamma(x + 1.0) -
                         std::lgamma(n - x + 1.0) + x * std::log(p) +
                         (n - x) * std::log1p(-p);
  return std::exp(log_pmf);
}

double beat_window(double true_hr, double window_s) {
  if (!(true_hr > 0.0) || !(window_s > 0.0))
    throw std::domain_error("beat_window: heart rate and window must be positive");
  return 60.0 / (window_s * true_hr);
}

double peak_probability(double diff, double bw) {
  if (!(diff >= 0.0)) throw std::domain_error("peak_probability: diff must be >= 0");
  if (!(bw > 0.0)) throw std::domain_error("peak_probability: bw must be > 0");
  // max(diff mod bw, diff mod bw + bw) is always the second argument.
  const double x = std::fmod(diff, bw) + bw;
  return std::clamp(binomial_pmf_general(x, 1.5 * bw, 2.0 / 3.0), 0.0, 1.0);
}

ParticleState init_particle(const ModelConfig& cfg, Rng& rng) {
  std::normal_distribution<double> unit(0.0, 1.0);
  ParticleState s;

  s.static_params.rest_hr = std::max(cfg.avg_hr + cfg.rest_hr_sigma * unit(rng), cfg.min_hr);
  const double latency_mean = cfg.latency_prior_mean_ms / 1000.0 / cfg.window_s;
  const double latency = std::round(latency_mean + cfg.latency_prior_sigma_windows * unit(rng));
  s.static_params.latency = static_cast<int>(std::max(latency, 0.0));

  DynamicState& d = s.dynamic;
  d.true_hr = std::max(s.static_params.rest_hr + cfg.true_hr_init_sigma * unit(rng), cfg.min_hr);

  const auto bw = static_cast<std::int64_t>(
      std::max(1.0, std::floor(beat_window(d.true_hr, cfg.window_s))));
  std::uniform_int_distribution<std::int64_t> last_peak(-bw, -1);
  d.ecg_last_peak = last_peak(rng);
  d.ecg_peak = std::bernoulli_distribution(cfg.peak_prior_prob)(rng);
  if (d.ecg_peak) d.ecg_last_peak = 0;

  // The pressure pulse of the last ECG beat may still be pending at window 0;
  // fall back to the pulse one beat earlier so abp_last_peak never exceeds t.
  std::int64_t abp_last = d.ecg_last_peak + s.static_params.latency;
  while (abp_last > 0) abp_last -= bw;
  d.abp_last_peak = abp_last;
  d.abp_peak = (abp_last == 0);

  std::bernoulli_distribution artifact(cfg.artifact_prior_prob);
  d.ecg_artifact = artifact(rng);
  d.abp_artifact = artifact(rng);
  return s;
}

ParticleState propagate_particle(const ParticleState& prev, std::int64_t t_next,
                                 double mean_latency, const ModelConfig& cfg,
                                 Rng& rng) {
  std::normal_distribution<double> unit(0.0, 1.0);
  ParticleState s = prev;
  const DynamicState& p = prev.dynamic;
  DynamicState& d = s.dynamic;

  d.true_hr = std::max(0.8 * p.true_hr + 0.2 * prev.static_params.rest_hr +
                           cfg.true_hr_noise_sigma * unit(rng),
                       cfg.min_hr);

  const double diff = static_cast<double>(std::max<std::int64_t>(t_next - p.ecg_last_peak, 0));
  const double prob = peak_probability(diff, beat_window(p.true_hr, cfg.window_s));
  d.ecg_peak = std::bernoulli_distribution(prob)(rng);
  d.ecg_last_peak = d.ecg_peak ? t_next : p.ecg_last_peak;

  // One pressure pulse per ECG beat, at the first window on or after the
  // shared latency offset (the rounded offset may move between windows).
  const bool pending = p.abp_last_peak < d.ecg_last_peak;
  d.abp_peak = pending && t_next >= d.ecg_last_peak + std::llround(mean_latency);
  d.abp_last_peak = d.abp_peak ? t_next : p.abp_last_peak;

  const auto flip = [&](bool current) {
    return std::bernoulli_distribution(artifact_transition(current, true, cfg))(rng);
  };
  d.ecg_artifact = flip(p.ecg_artifact);
  d.abp_artifact = flip(p.abp_artifact);
  return s;
}

double annotation_likelihood(bool peak, bool artifact, bool ann, double beat_prob,
                             const ModelConfig& cfg) {
  double p_ann;
  if (peak) {
    p_ann = artifact ? cfg.peak_artifact_ann_prob : cfg.peak_ann_prob;
  } else {
    p_ann = artifact ? (0.5 + beat_prob) / 2.0 : beat_prob;
  }
  return ann ? p_ann : 1.0 - p_ann;
}

double annotation_likelihood(bool peak, bool artifact, bool ann, double beat_prob) {
  static const ModelConfig defaults{};
  return annotation_likelihood(peak, artifact, ann, beat_prob, defaults);
}

double artifact_transition(bool current, bool next, const ModelConfig& cfg) {
  const double p_one = current ? cfg.artifact_stay_prob : 1.0 - cfg.artifact_stay_prob;
  return next ? p_one : 1.0 - p_one;
}

double hr_likelihood(double true_hr, double hr_obs, double sigma_floor_bpm) {
  const double sigma = std::max(hr_obs, sigma_floor_bpm) / 4.0;
  const double z = (true_hr - hr_obs) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

Channel gate(double ecg_sqi, bool abp_sqi, double ecg_threshold) {
  return (ecg_sqi < ecg_threshold && abp_sqi) ? Channel::abp : Channel::ecg;
}

double particle_weight(const ParticleState& p, const WindowObservation& obs,
                       std::int64_t t, const ModelConfig& cfg) {
  const DynamicState& d = p.dynamic;
  const auto ecg = [&] {
    return channel_factor(d.ecg_peak, d.ecg_artifact, obs.ecg_ann, d.ecg_last_peak,
                          obs.ecg_hr, d.true_hr, t, cfg);
  };
  const auto abp = [&] {
    return channel_factor(d.abp_peak, d.abp_artifact, obs.abp_ann, d.abp_last_peak,
                          obs.abp_hr, d.true_hr, t, cfg);
  };
  if (!cfg.exclusive_gating) return ecg() * abp();
  return gate(obs.ecg_sqi, obs.abp_sqi, cfg.ecg_sqi_threshold) == Channel::abp ? abp() : ecg();
}

}  // namespace dbnbeat
