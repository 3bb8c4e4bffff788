#include "dbnbeat/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dbnbeat {

namespace {

Rng stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

constexpr std::uint64_t kResampleStream = ~std::uint64_t{0};

int thread_count(const FilterConfig& cfg) {
#ifdef _OPENMP
  return cfg.threads > 0 ? cfg.threads : omp_get_max_threads();
#else
  (void)cfg;
  return 1;
#endif
}

TraceEntry weighted_means(std::span<const ParticleState> particles,
                          std::span<const double> weights, double total) {
  TraceEntry e;
  for (std::size_t i = 0; i < particles.size(); ++i) {
    const double w = weights[i] / total;
    const auto& s = particles[i];
    e.rest_hr += w * s.static_params.rest_hr;
    e.latency += w * s.static_params.latency;
    e.true_hr += w * s.dynamic.true_hr;
    e.ecg_peak += w * s.dynamic.ecg_peak;
    e.ecg_last_peak += w * static_cast<double>(s.dynamic.ecg_last_peak);
    e.abp_peak += w * s.dynamic.abp_peak;
    e.abp_last_peak += w * static_cast<double>(s.dynamic.abp_last_peak);
    e.ecg_artifact += w * s.dynamic.ecg_artifact;
    e.abp_artifact += w * s.dynamic.abp_artifact;
  }
  // Rounding can push a fraction a hair past 1.
  for (double* f : {&e.ecg_peak, &e.abp_peak, &e.ecg_artifact, &e.abp_artifact})
    *f = std::clamp(*f, 0.0, 1.0);
  return e;
}

}  // namespace

void FilterConfig::validate() const {
  if (n_particles < 2) throw std::invalid_argument("FilterConfig: n_particles must be >= 2");
  if (!(peak_fraction_threshold > 0.0 && peak_fraction_threshold <= 1.0))
    throw std::invalid_argument("FilterConfig: peak_fraction_threshold must be in (0,1]");
  if (refractory_windows < 0)
    throw std::invalid_argument("FilterConfig: refractory_windows must be >= 0");
  if (threads < 0) throw std::invalid_argument("FilterConfig: threads must be >= 0");
  model.validate();
}

std::size_t FilterTrace::degenerate_steps() const {
  return static_cast<std::size_t>(
      std::count_if(windows.begin(), windows.end(), [](const auto& e) { return e.degenerate; }));
}

std::vector<std::size_t> systematic_resample(std::span<const double> weights, double u) {
  const std::size_t n = weights.size();
  std::vector<double> cdf(n);
  double total = 0.0;
  std::size_t last_positive = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i]))
      throw std::invalid_argument("systematic_resample: weights must be finite and nonnegative");
    total += weights[i];
    cdf[i] = total;
    if (weights[i] > 0.0) last_positive = i;
  }
  if (!(total > 0.0)) throw DegenerateWeights("systematic_resample: all weights are zero");

  std::vector<std::size_t> parents(n);
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double target = (u + static_cast<double>(i)) / static_cast<double>(n) * total;
    while (j < last_positive && cdf[j] <= target) ++j;
    parents[i] = j;
  }
  return parents;
}

std::vector<std::size_t> systematic_resample(std::span<const double> weights, Rng& rng) {
  return systematic_resample(weights, std::uniform_real_distribution<double>(0.0, 1.0)(rng));
}

BeatAnnotations extract_beats(const FilterTrace& trace, const FilterConfig& cfg) {
  struct Candidate {
    std::int64_t window;
    double fraction;
  };
  std::vector<Candidate> kept;
  for (std::size_t w = 0; w < trace.windows.size(); ++w) {
    const auto& e = trace.windows[w];
    if (e.abp_peak < cfg.peak_fraction_threshold) continue;
    const std::int64_t beat = static_cast<std::int64_t>(w) - std::llround(e.latency);
    if (beat < 0) continue;
    if (!kept.empty() && beat - kept.back().window < cfg.refractory_windows) {
      if (e.abp_peak > kept.back().fraction) kept.back() = {beat, e.abp_peak};
      continue;
    }
    kept.push_back({beat, e.abp_peak});
  }

  BeatAnnotations beats;
  beats.fs = trace.fs;
  for (const auto& c : kept) {
    const std::int64_t sample = c.window * trace.window_samples + trace.window_samples / 2;
    if (beats.empty() || sample > beats.sample_indices.back())
      beats.sample_indices.push_back(sample);
  }
  return beats;
}

FilterResult run_filter(std::span<const WindowObservation> obs, const FilterConfig& cfg,
                        std::int64_t window_samples, double fs) {
  cfg.validate();
  if (obs.empty()) throw std::invalid_argument("run_filter: no observations");
  if (window_samples < 1 || !(fs > 0.0))
    throw std::invalid_argument("run_filter: invalid window geometry");

  const std::size_t n = cfg.n_particles;
  const auto n_signed = static_cast<std::ptrdiff_t>(n);
  const int threads = thread_count(cfg);
  const ModelConfig& model = cfg.model;

  std::vector<Rng> engines;
  engines.reserve(n);
  for (std::size_t i = 0; i < n; ++i) engines.push_back(stream(cfg.seed, i));
  Rng resample_rng = stream(cfg.seed, kResampleStream);

  std::vector<ParticleState> particles(n);
  std::vector<ParticleState> next(n);
  std::vector<double> weights(n);

  FilterResult result;
  result.trace.window_samples = window_samples;
  result.trace.fs = fs;
  result.trace.windows.reserve(obs.size());

  for (std::size_t t = 0; t < obs.size(); ++t) {
    const auto window = static_cast<std::int64_t>(t);
    const WindowObservation& y = obs[t];

    if (t == 0) {
#pragma omp parallel for num_threads(threads) schedule(static)
      for (std::ptrdiff_t i = 0; i < n_signed; ++i)
        particles[i] = init_particle(model, engines[i]);
    } else {
      // Particles carry equal weight after resampling.
      double latency_sum = 0.0;
      for (const auto& p : particles) latency_sum += p.static_params.latency;
      const double mean_latency = latency_sum / static_cast<double>(n);

#pragma omp parallel for num_threads(threads) schedule(static)
      for (std::ptrdiff_t i = 0; i < n_signed; ++i)
        particles[i] = propagate_particle(particles[i], window, mean_latency, model, engines[i]);
    }

#pragma omp parallel for num_threads(threads) schedule(static)
    for (std::ptrdiff_t i = 0; i < n_signed; ++i)
      weights[i] = particle_weight(particles[i], y, window, model);

    double total = 0.0;
    for (const double w : weights) total += w;
    bool degenerate = !(total > 0.0) || !std::isfinite(total);
    if (degenerate) std::fill(weights.begin(), weights.end(), 1.0);
    const double norm = degenerate ? static_cast<double>(n) : total;

    TraceEntry entry = weighted_means(particles, weights, norm);
    entry.weight_sum = degenerate ? 0.0 : total;
    entry.degenerate = degenerate;
    result.trace.windows.push_back(entry);

    const auto parents = systematic_resample(weights, resample_rng);
    for (std::size_t i = 0; i < n; ++i) next[i] = particles[parents[i]];
    particles.swap(next);
  }

  result.beats = extract_beats(result.trace, cfg);
  return result;
}

}  // namespace dbnbeat
