#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dbnbeat/synth.hpp"

using namespace dbnbeat;

TEST_CASE("constant rate gives evenly spaced beats") {
  SynthSpec s;
  const auto rec = generate(s);
  CHECK(rec.truth.size() >= 59);
  CHECK(rec.truth.size() <= 61);
  for (std::size_t i = 1; i < rec.truth.size(); ++i)
    CHECK(rec.truth.sample_indices[i] - rec.truth.sample_indices[i - 1] == doctest::Approx(250).epsilon(0.005));
  CHECK(rec.ecg.size() == 15000);
  CHECK(rec.abp.size() == 15000);
}

TEST_CASE("heart rate profile interpolation") {
  const std::vector<HrKnot> p{{10, 60}, {20, 120}};
  CHECK(heart_rate_at(p, 0) == 60);
  CHECK(heart_rate_at(p, 15) == doctest::Approx(90));
  CHECK(heart_rate_at(p, 30) == 120);

  SynthSpec s;
  s.hr_profile = p;
  s.duration_s = 30;
  const auto rec = generate(s);
  // 10 s at 60, 10 s ramp averaging 90, 10 s at 120
  CHECK(std::abs(static_cast<double>(rec.truth.size()) - 45.0) <= 1.0);
}

TEST_CASE("pressure upstroke lags the electrical beat by the latency") {
  SynthSpec s;
  s.noise_fraction = 0;
  const auto rec = generate(s);
  const std::size_t n = rec.abp.size();
  std::vector<double> onset(n, 0.0);
  for (std::size_t i = 2; i < n; ++i)
    if (rec.abp[i] > rec.abp[i - 1] && rec.abp[i - 1] <= rec.abp[i - 2]) onset[i - 1] = 1.0;

  int best_lag = -1;
  double best = -1.0;
  for (int lag = 0; lag <= 125; ++lag) {
    double c = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) c += rec.ecg[i] * onset[i + lag];
    if (c > best) {
      best = c;
      best_lag = lag;
    }
  }
  CHECK(std::abs(best_lag - 50) <= 1);
}

TEST_CASE("dropouts flatten the channel but keep the beats") {
  SynthSpec s;
  s.duration_s = 30;
  const auto base = generate(s);
  s.ecg_dropouts = {{10, 20}};
  const auto rec = generate(s);
  for (std::size_t i = 2500; i < 5000; ++i) CHECK(rec.ecg[i] == rec.ecg[2500]);
  CHECK(rec.truth.sample_indices == base.truth.sample_indices);
  CHECK(rec.abp == base.abp);
}

TEST_CASE("faults never move truth") {
  SynthSpec s;
  s.duration_s = 30;
  const auto base = generate(s);
  s.artifact_bursts = {{SignalChannel::ecg, 5, 15, 1.0}, {SignalChannel::abp, 10, 12, 30.0}};
  s.abp_dropouts = {{20, 25}};
  s.double_spike = true;
  const auto rec = generate(s);
  CHECK(rec.truth.sample_indices == base.truth.sample_indices);
}

TEST_CASE("double spike adds a second complex 120 ms later") {
  SynthSpec s;
  s.duration_s = 10;
  s.noise_fraction = 0;
  s.double_spike = true;
  const auto rec = generate(s);
  for (const auto b : rec.truth.sample_indices) {
    CHECK(rec.ecg[b] == doctest::Approx(1.0));
    if (b + 30 < static_cast<std::int64_t>(rec.ecg.size())) CHECK(rec.ecg[b + 30] == doctest::Approx(1.0));
  }
}

TEST_CASE("generation is reproducible") {
  SynthSpec s;
  s.duration_s = 20;
  s.artifact_bursts = {{SignalChannel::ecg, 5, 10, 0.5}};
  const auto a = generate(s);
  const auto b = generate(s);
  CHECK(a.ecg == b.ecg);
  CHECK(a.abp == b.abp);
  s.seed = 2;
  CHECK(generate(s).ecg != a.ecg);
}

TEST_CASE("invalid specs are rejected") {
  SynthSpec s;
  s.ecg_dropouts = {{20, 10}};
  CHECK_THROWS(generate(s));
  s.ecg_dropouts = {{50, 70}};
  CHECK_THROWS(generate(s));
  s = {};
  s.hr_profile = {{0, 300}};
  CHECK_THROWS(generate(s));
  s = {};
  s.fs = 0;
  CHECK_THROWS(generate(s));
}
