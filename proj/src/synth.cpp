#include "dbnbeat/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace dbnbeat {

namespace {

constexpr double kQrsHalfWidth_s = 0.02;
constexpr double kSecondSpikeDelay_s = 0.12;
constexpr double kUpstroke_s = 0.1;
constexpr double kDecay_s = 0.3;
constexpr double kBurstBandwidthWindow_s = 0.02;

void check_interval(double start, double end, double duration, const std::string& what) {
  if (!(start >= 0.0 && end > start && end <= duration))
    throw std::invalid_argument("SynthSpec: " + what + " interval [" + std::to_string(start) +
                                ", " + std::to_string(end) + "] must satisfy 0 <= start < end <= duration");
}

std::mt19937_64 component_rng(std::uint64_t seed, std::uint32_t component) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), component};
  return std::mt19937_64(seq);
}

std::size_t to_sample(double t, double fs) { return static_cast<std::size_t>(std::llround(t * fs)); }

}  // namespace

void SynthSpec::validate() const {
  if (!(duration_s > 0.0)) throw std::invalid_argument("SynthSpec: duration_s must be positive");
  if (!(fs > 0.0)) throw std::invalid_argument("SynthSpec: fs must be positive");
  if (hr_profile.empty()) throw std::invalid_argument("SynthSpec: hr_profile is empty");
  for (std::size_t i = 0; i < hr_profile.size(); ++i) {
    const auto& k = hr_profile[i];
    if (!(k.bpm >= 20.0 && k.bpm <= 240.0))
      throw std::invalid_argument("SynthSpec: hr_profile values must lie in [20, 240] bpm");
    if (k.time_s < 0.0 || k.time_s > duration_s)
      throw std::invalid_argument("SynthSpec: hr_profile time outside the record");
    if (i > 0 && !(k.time_s > hr_profile[i - 1].time_s))
      throw std::invalid_argument("SynthSpec: hr_profile times must increase");
  }
  if (!(latency_ms >= 0.0)) throw std::invalid_argument("SynthSpec: latency_ms must be >= 0");
  if (!(noise_fraction >= 0.0)) throw std::invalid_argument("SynthSpec: noise_fraction must be >= 0");
  if (!(abp_systolic >= abp_diastolic))
    throw std::invalid_argument("SynthSpec: abp_systolic must be >= abp_diastolic");
  for (const auto& d : ecg_dropouts) check_interval(d.start_s, d.end_s, duration_s, "ecg dropout");
  for (const auto& d : abp_dropouts) check_interval(d.start_s, d.end_s, duration_s, "abp dropout");
  for (const auto& b : artifact_bursts) {
    check_interval(b.start_s, b.end_s, duration_s, "artifact burst");
    if (!(b.amplitude >= 0.0)) throw std::invalid_argument("SynthSpec: burst amplitude must be >= 0");
  }
}

double heart_rate_at(const std::vector<HrKnot>& profile, double t) {
  if (t <= profile.front().time_s) return profile.front().bpm;
  for (std::size_t i = 1; i < profile.size(); ++i) {
    if (t <= profile[i].time_s) {
      const auto& a = profile[i - 1];
      const auto& b = profile[i];
      return a.bpm + (b.bpm - a.bpm) * (t - a.time_s) / (b.time_s - a.time_s);
    }
  }
  return profile.back().bpm;
}

SynthRecord generate(const SynthSpec& spec) {
  spec.validate();
  const double fs = spec.fs;
  const std::size_t n = to_sample(spec.duration_s, fs);

  SynthRecord rec;
  rec.truth.fs = fs;
  rec.ecg.assign(n, 0.0);
  rec.abp.assign(n, spec.abp_diastolic);

  // Beats fall where the integrated rate crosses k + 1/2 cycles.
  double phase = 0.0;
  double next_beat = 0.5;
  for (std::size_t i = 0; i < n; ++i) {
    if (phase >= next_beat - 1e-9) {
      rec.truth.sample_indices.push_back(static_cast<std::int64_t>(i));
      next_beat += 1.0;
    }
    phase += heart_rate_at(spec.hr_profile, static_cast<double>(i) / fs) / 60.0 / fs;
  }

  const auto add_spike = [&](double center_s) {
    const auto half = static_cast<std::int64_t>(std::ceil(kQrsHalfWidth_s * fs));
    const auto c = std::llround(center_s * fs);
    for (std::int64_t k = c - half; k <= c + half; ++k) {
      if (k < 0 || k >= static_cast<std::int64_t>(n)) continue;
      const double dt = std::abs(static_cast<double>(k) / fs - center_s);
      if (dt < kQrsHalfWidth_s) rec.ecg[k] += 1.0 - dt / kQrsHalfWidth_s;
    }
  };
  for (const auto s : rec.truth.sample_indices) {
    const double t = static_cast<double>(s) / fs;
    add_spike(t);
    if (spec.double_spike) add_spike(t + kSecondSpikeDelay_s);
  }

  // Pressure: raised-cosine upstroke from the current level to systolic, then
  // exponential decay towards diastolic.
  const double sys = spec.abp_systolic;
  const double dia = spec.abp_diastolic;
  const auto decay = [&](double since_top) {
    return dia + (sys - dia) * std::exp(-since_top / kDecay_s);
  };
  std::vector<double> onsets;
  for (const auto s : rec.truth.sample_indices)
    onsets.push_back(static_cast<double>(s) / fs + spec.latency_ms / 1000.0);
  std::size_t k = 0;
  double start_level = dia;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    while (k < onsets.size() && onsets[k] <= t) {
      if (k > 0) {
        const double since = onsets[k] - onsets[k - 1];
        start_level = since < kUpstroke_s ? sys : decay(since - kUpstroke_s);
      }
      ++k;
    }
    if (k == 0) continue;
    const double tau = t - onsets[k - 1];
    rec.abp[i] = tau < kUpstroke_s
                     ? start_level + (sys - start_level) *
                                         (1.0 - std::cos(std::numbers::pi * tau / kUpstroke_s)) / 2.0
                     : decay(tau - kUpstroke_s);
  }

  if (spec.noise_fraction > 0.0) {
    auto ecg_rng = component_rng(spec.seed, 1);
    auto abp_rng = component_rng(spec.seed, 2);
    std::normal_distribution<double> ecg_noise(0.0, spec.noise_fraction * 1.0);
    std::normal_distribution<double> abp_noise(0.0, spec.noise_fraction * (sys - dia));
    for (auto& v : rec.ecg) v += ecg_noise(ecg_rng);
    for (auto& v : rec.abp) v += abp_noise(abp_rng);
  }

  auto burst_rng = component_rng(spec.seed, 3);
  const auto smoothing = static_cast<std::size_t>(std::max(1.0, std::round(kBurstBandwidthWindow_s * fs)));
  for (const auto& b : spec.artifact_bursts) {
    auto& target = b.channel == SignalChannel::ecg ? rec.ecg : rec.abp;
    const std::size_t lo = to_sample(b.start_s, fs);
    const std::size_t hi = std::min(n, to_sample(b.end_s, fs));
    std::normal_distribution<double> white(0.0, 1.0);
    std::vector<double> raw(hi - lo + smoothing);
    for (auto& v : raw) v = white(burst_rng);
    const double scale = b.amplitude / std::sqrt(static_cast<double>(smoothing));
    double acc = 0.0;
    for (std::size_t j = 0; j < smoothing; ++j) acc += raw[j];
    for (std::size_t i = lo; i < hi; ++i) {
      target[i] += scale * acc;
      acc += raw[i - lo + smoothing] - raw[i - lo];
    }
  }

  for (const auto& d : spec.ecg_dropouts)
    for (std::size_t i = to_sample(d.start_s, fs); i < std::min(n, to_sample(d.end_s, fs)); ++i)
      rec.ecg[i] = 0.0;
  for (const auto& d : spec.abp_dropouts)
    for (std::size_t i = to_sample(d.start_s, fs); i < std::min(n, to_sample(d.end_s, fs)); ++i)
      rec.abp[i] = 0.0;

  return rec;
}

}  // namespace dbnbeat
