#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "dbnbeat/filter.hpp"
#include "dbnbeat/scoring.hpp"

using namespace dbnbeat;

namespace {

std::vector<std::size_t> multiplicity(const std::vector<std::size_t>& parents, std::size_t n) {
  std::vector<std::size_t> m(n, 0);
  for (const auto p : parents) ++m[p];
  return m;
}

// Perfect detector output at 60 bpm with 25 ms windows (fs 240, 6 samples).
struct CleanScenario {
  std::vector<WindowObservation> obs;
  RawAnnotations truth{{}, 240.0};
};

CleanScenario clean_scenario(std::size_t n_windows, int latency) {
  CleanScenario s;
  s.obs.resize(n_windows);
  for (std::size_t w = 20; w < n_windows; w += 40) {
    s.obs[w].ecg_ann = true;
    if (w + latency < n_windows) s.obs[w + latency].abp_ann = true;
    s.truth.sample_indices.push_back(static_cast<std::int64_t>(w) * 6 + 3);
  }
  for (std::size_t w = 0; w < n_windows; ++w) {
    if (w >= 80) {
      s.obs[w].ecg_hr = 60.0;
      s.obs[w].abp_hr = 60.0;
    }
  }
  return s;
}

}  // namespace

TEST_CASE("systematic resampling examples") {
  CHECK(systematic_resample(std::vector<double>(7, 0.3), 0.5) ==
        std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6});
  CHECK(systematic_resample(std::vector<double>{0, 0, 1, 0}, 0.99) ==
        std::vector<std::size_t>{2, 2, 2, 2});
  CHECK_THROWS_AS(systematic_resample(std::vector<double>{0, 0}, 0.5), DegenerateWeights);
  CHECK_THROWS_AS(systematic_resample(std::vector<double>{1, -1}, 0.5), std::invalid_argument);
}

TEST_CASE("systematic resampling of (0.75, 0.25) over all offsets") {
  const std::vector<double> w{0.75, 0.25, 0.0, 0.0};
  for (int k = 0; k < 1000; ++k) {
    const double u = k / 1000.0;
    const auto m = multiplicity(systematic_resample(w, u), 4);
    CHECK(m == std::vector<std::size_t>{3, 1, 0, 0});
  }
}

TEST_CASE("systematic resampling matches expected multiplicities") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> w(50);
    for (auto& x : w) x = U(rng) < 0.3 ? 0.0 : U(rng);
    if (std::accumulate(w.begin(), w.end(), 0.0) == 0.0) w[0] = 1.0;
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    const auto m = multiplicity(systematic_resample(w, U(rng)), w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double expect = w.size() * w[i] / total;
      CHECK(static_cast<double>(m[i]) >= std::floor(expect) - 1e-9);
      CHECK(static_cast<double>(m[i]) <= std::ceil(expect) + 1e-9);
    }
  }
}

TEST_CASE("beat extraction") {
  FilterTrace tr;
  tr.window_samples = 6;
  tr.windows.resize(200);
  for (auto& e : tr.windows) e.latency = 8;
  FilterConfig cfg;
  cfg.peak_fraction_threshold = 0.3;

  tr.windows[100].abp_peak = 0.5;
  auto b = extract_beats(tr, cfg);
  CHECK(b.sample_indices == std::vector<std::int64_t>{92 * 6 + 3});

  tr.windows[100].abp_peak = 0.4;
  tr.windows[102].abp_peak = 0.45;
  b = extract_beats(tr, cfg);
  CHECK(b.sample_indices == std::vector<std::int64_t>{94 * 6 + 3});

  tr.windows[100].abp_peak = 0.2;
  tr.windows[102].abp_peak = 0.1;
  CHECK(extract_beats(tr, cfg).empty());
}

TEST_CASE("filter on a single window") {
  FilterConfig cfg;
  cfg.n_particles = 200;
  const std::vector<WindowObservation> obs(1);
  const auto r = run_filter(obs, cfg, 6, 240);
  CHECK(r.trace.windows.size() == 1);
  CHECK(r.beats.empty());
  CHECK_THROWS(run_filter(std::vector<WindowObservation>{}, cfg, 6, 240));
}

TEST_CASE("filter annotates perfect detector output") {
  FilterConfig cfg;
  const auto s = clean_scenario(2400, 8);
  const auto r = run_filter(s.obs, cfg, 6, 240);
  const auto sc = score(s.truth, r.beats);
  CHECK(sc.sensitivity >= 0.99);
  CHECK(sc.positive_predictivity >= 0.99);
  CHECK(r.trace.degenerate_steps() == 0);
}

TEST_CASE("filter stays quiet without annotations") {
  FilterConfig cfg;
  cfg.n_particles = 500;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    cfg.seed = seed;
    const std::vector<WindowObservation> obs(2400);
    const auto r = run_filter(obs, cfg, 6, 240);
    CHECK(r.beats.size() <= 2);
  }
}

TEST_CASE("trace fractions stay in range") {
  FilterConfig cfg;
  cfg.n_particles = 300;
  const auto s = clean_scenario(800, 8);
  const auto r = run_filter(s.obs, cfg, 6, 240);
  for (const auto& e : r.trace.windows)
    for (double v : {e.ecg_peak, e.abp_peak, e.ecg_artifact, e.abp_artifact}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
}

TEST_CASE("filter is deterministic across thread counts") {
  FilterConfig cfg;
  cfg.n_particles = 400;
  const auto s = clean_scenario(1000, 8);
  cfg.threads = 1;
  const auto a = run_filter(s.obs, cfg, 6, 240);
  cfg.threads = 4;
  const auto b = run_filter(s.obs, cfg, 6, 240);
  REQUIRE(a.trace.windows.size() == b.trace.windows.size());
  for (std::size_t w = 0; w < a.trace.windows.size(); ++w) {
    CHECK(a.trace.windows[w].true_hr == b.trace.windows[w].true_hr);
    CHECK(a.trace.windows[w].abp_peak == b.trace.windows[w].abp_peak);
    CHECK(a.trace.windows[w].weight_sum == b.trace.windows[w].weight_sum);
  }
  CHECK(a.beats.sample_indices == b.beats.sample_indices);
  cfg.seed = 2;
  const auto c = run_filter(s.obs, cfg, 6, 240);
  CHECK(c.trace.windows[500].true_hr != a.trace.windows[500].true_hr);
}

TEST_CASE("posterior heart rate tracks a trajectory simulated from the model") {
  ModelConfig model;
  Rng rng(2718);
  auto x = init_particle(model, rng);
  const std::size_t n_windows = 4800;
  std::vector<WindowObservation> obs(n_windows);
  std::vector<double> truth_hr(n_windows);
  std::normal_distribution<double> hr_noise(0.0, 2.0);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (std::size_t t = 0; t < n_windows; ++t) {
    if (t > 0) x = propagate_particle(x, static_cast<std::int64_t>(t), x.static_params.latency, model, rng);
    const auto& d = x.dynamic;
    const double bp =
        peak_probability(static_cast<double>(t - d.ecg_last_peak), beat_window(d.true_hr, model.window_s));
    obs[t].ecg_ann = U(rng) < annotation_likelihood(d.ecg_peak, d.ecg_artifact, true, bp, model);
    obs[t].ecg_hr = d.true_hr + hr_noise(rng);
    truth_hr[t] = d.true_hr;
  }

  FilterConfig cfg;
  cfg.model = model;
  cfg.n_particles = 1000;
  const auto r = run_filter(obs, cfg, 6, 240);
  double err = 0.0;
  std::size_t n = 0;
  for (std::size_t t = 1200; t < n_windows; ++t, ++n) err += std::abs(r.trace.windows[t].true_hr - truth_hr[t]);
  CHECK(err / n < 10.0);
}
