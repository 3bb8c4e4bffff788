#include "dbnbeat/features.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <stdexcept>

#include "dbnbeat/scoring.hpp"

namespace dbnbeat {

namespace {

constexpr double kRefractory_s = 0.25;

std::int64_t samples(double seconds, double fs) {
  return std::max<std::int64_t>(1, std::llround(seconds * fs));
}

// Centered moving average of width w (shrinking at the edges).
std::vector<double> moving_average(std::span<const double> x, std::int64_t w) {
  const auto n = static_cast<std::int64_t>(x.size());
  std::vector<double> prefix(x.size() + 1, 0.0);
  for (std::int64_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
  std::vector<double> out(x.size());
  const std::int64_t half = w / 2;
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t lo = std::max<std::int64_t>(0, i - half);
    const std::int64_t hi = std::min(n, i - half + w);
    out[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }
  return out;
}

void require_rate(double fs) {
  if (!(fs > 0.0) || !std::isfinite(fs)) throw std::invalid_argument("sampling rate must be positive");
}

// Range [first, last) of annotation indices with sample time in (t - span, t].
std::pair<std::size_t, std::size_t> trailing(const RawAnnotations& ann, double t, double span) {
  const auto& v = ann.sample_indices;
  const double hi_sample = t * ann.fs;
  const double lo_sample = (t - span) * ann.fs;
  auto last = std::upper_bound(v.begin(), v.end(), hi_sample,
                               [](double s, std::int64_t i) { return s < static_cast<double>(i); });
  auto first = std::upper_bound(v.begin(), last, lo_sample,
                                [](double s, std::int64_t i) { return s < static_cast<double>(i); });
  return {static_cast<std::size_t>(first - v.begin()), static_cast<std::size_t>(last - v.begin())};
}

// Value at quantile q of x (nearest rank).
double quantile(std::vector<double> x, double q) {
  if (x.empty()) return 0.0;
  const auto k = static_cast<std::size_t>(q * static_cast<double>(x.size() - 1));
  std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(k), x.end());
  return x[k];
}

double peak_magnitude(std::span<const double> x) {
  double m = 0.0;
  for (const double v : x) m = std::max(m, std::abs(v));
  return m;
}

RawAnnotations slice(const RawAnnotations& ann, std::pair<std::size_t, std::size_t> r) {
  RawAnnotations out;
  out.fs = ann.fs;
  out.sample_indices.assign(ann.sample_indices.begin() + static_cast<std::ptrdiff_t>(r.first),
                            ann.sample_indices.begin() + static_cast<std::ptrdiff_t>(r.second));
  return out;
}

}  // namespace

void FeatureConfig::validate() const {
  if (!(nominal_window_s > 0.0)) throw std::invalid_argument("nominal_window_s must be positive");
  if (!(hr_window_s > 0.0)) throw std::invalid_argument("hr_window_s must be positive");
  if (!(sqi_window_s > 0.0)) throw std::invalid_argument("sqi_window_s must be positive");
  if (!(sqi_match_tol_s > 0.0)) throw std::invalid_argument("sqi_match_tol_s must be positive");
  if (!(sqi_stale_s > 0.0)) throw std::invalid_argument("sqi_stale_s must be positive");
  if (!(secondary_threshold_scale > 0.0))
    throw std::invalid_argument("secondary_threshold_scale must be positive");
}

std::int64_t window_samples_for(double fs, double nominal_window_s) {
  require_rate(fs);
  return samples(nominal_window_s, fs);
}

RawAnnotations detect_qrs(std::span<const double> signal, double fs, double threshold_scale) {
  require_rate(fs);
  RawAnnotations out;
  out.fs = fs;
  if (signal.empty()) return out;
  const auto n = static_cast<std::int64_t>(signal.size());

  const auto smooth = moving_average(signal, samples(0.016, fs));
  const auto baseline = moving_average(signal, samples(0.2, fs));
  std::vector<double> band(signal.size());
  for (std::int64_t i = 0; i < n; ++i) band[i] = smooth[i] - baseline[i];

  std::vector<double> energy(signal.size(), 0.0);
  for (std::int64_t i = 1; i + 1 < n; ++i) {
    const double d = band[i + 1] - band[i - 1];
    energy[i] = d * d;
  }
  const auto integ = moving_average(energy, samples(0.1, fs));

  // Thresholds never drop below a small fraction of the record's QRS energy,
  // nor below the rounding level of the filters on a flat line.
  const double scale = peak_magnitude(signal);
  const double floor = std::max(0.01 * quantile(integ, 0.99), 1e-12 * scale * scale);

  const std::int64_t learn = std::min(n, samples(2.0, fs));
  double spki = 0.25 * *std::max_element(integ.begin(), integ.begin() + learn);
  double npki = 0.5 * std::accumulate(integ.begin(), integ.begin() + learn, 0.0) /
                static_cast<double>(learn);

  const std::int64_t refractory = samples(kRefractory_s, fs);
  const std::int64_t search = samples(0.1, fs);
  std::int64_t last = -refractory - 1;

  // After a long silence the signal level estimate halves, so the detector
  // recovers when a burst of large noise has inflated it.
  const std::int64_t silence = samples(1.5, fs);
  std::int64_t quiet_since = 0;

  for (std::int64_t i = 1; i + 1 < n; ++i) {
    if (i - std::max(last, quiet_since) > silence) {
      spki *= 0.5;
      quiet_since = i;
    }
    const double v = integ[i];
    if (!(v > integ[i - 1] && v >= integ[i + 1])) continue;
    const double threshold =
        threshold_scale * std::max(npki + 0.25 * (spki - npki), floor);
    if (v > threshold) {
      // R peak: largest band-passed excursion around the energy maximum.
      const std::int64_t lo = std::max<std::int64_t>(0, i - search);
      const std::int64_t hi = std::min(n, i + search + 1);
      std::int64_t r = lo;
      for (std::int64_t k = lo; k < hi; ++k)
        if (std::abs(band[k]) > std::abs(band[r])) r = k;
      if (r - last >= refractory) {
        spki = 0.125 * v + 0.875 * spki;
        out.sample_indices.push_back(r);
        last = r;
      }
    } else {
      npki = 0.125 * v + 0.875 * npki;
    }
  }
  return out;
}

RawAnnotations detect_abp_pulses(std::span<const double> signal, double fs) {
  require_rate(fs);
  RawAnnotations out;
  out.fs = fs;
  if (signal.empty()) return out;
  const auto n = static_cast<std::int64_t>(signal.size());

  const auto lp = moving_average(signal, samples(0.04, fs));
  const std::int64_t w = samples(0.128, fs);
  std::vector<double> ssf(signal.size(), 0.0);
  double acc = 0.0;
  const auto rise = [&](std::int64_t k) {
    return k >= 1 && k < n ? std::max(0.0, lp[k] - lp[k - 1]) : 0.0;
  };
  for (std::int64_t i = 0; i < n; ++i) {
    acc += rise(i) - rise(i - w);
    ssf[i] = std::max(acc, 0.0);
  }

  const double floor = std::max(0.01 * quantile(ssf, 0.99), 1e-9 * peak_magnitude(signal));
  const std::int64_t learn = std::min(n, samples(10.0, fs));
  double threshold = std::max(
      3.0 * std::accumulate(ssf.begin(), ssf.begin() + learn, 0.0) / static_cast<double>(learn),
      floor);
  std::deque<double> recent_maxima;

  const std::int64_t refractory = samples(kRefractory_s, fs);
  const std::int64_t foot_search = samples(0.25, fs);
  const std::int64_t upstroke_search = samples(0.1, fs);
  const std::int64_t pulse_span = samples(0.15, fs);
  std::int64_t last = -refractory - 1;

  const std::int64_t silence = samples(2.0, fs);
  std::int64_t quiet_since = 0;

  for (std::int64_t i = 1; i + 1 < n; ++i) {
    if (i - std::max(last, quiet_since) > silence) {
      threshold = std::max(0.5 * threshold, floor);
      quiet_since = i;
    }
    if (!(ssf[i] > threshold && ssf[i - 1] <= threshold)) continue;
    // Onset by intersecting tangents: the steepest point of the upstroke
    // projected back onto the preceding diastolic level.
    const std::int64_t hi_slope = std::min(n - 1, i + upstroke_search);
    std::int64_t steepest = i;
    for (std::int64_t k = i; k < hi_slope; ++k)
      if (lp[k + 1] - lp[k] > lp[steepest + 1] - lp[steepest]) steepest = k;
    const double slope = lp[steepest + 1] - lp[steepest];
    const std::int64_t lo = std::max<std::int64_t>(0, i - foot_search);
    const double diastolic = *std::min_element(lp.begin() + lo, lp.begin() + i + 1);
    std::int64_t foot = steepest;
    if (slope > 0.0)
      foot = steepest - std::llround((lp[steepest] - diastolic) / slope);
    foot = std::clamp<std::int64_t>(foot, lo, steepest);
    if (foot - last < refractory) continue;
    out.sample_indices.push_back(foot);
    last = foot;

    const std::int64_t hi = std::min(n, i + pulse_span);
    recent_maxima.push_back(*std::max_element(ssf.begin() + i, ssf.begin() + hi));
    if (recent_maxima.size() > 5) recent_maxima.pop_front();
    threshold = std::max(0.6 * std::accumulate(recent_maxima.begin(), recent_maxima.end(), 0.0) /
                             static_cast<double>(recent_maxima.size()),
                         floor);
  }
  return out;
}

std::optional<double> local_heart_rate(const RawAnnotations& ann, double t, double window_s) {
  const auto [first, last] = trailing(ann, t, window_s);
  if (last - first < 2) return std::nullopt;
  std::vector<double> intervals;
  intervals.reserve(last - first - 1);
  for (std::size_t i = first + 1; i < last; ++i)
    intervals.push_back(static_cast<double>(ann.sample_indices[i] - ann.sample_indices[i - 1]) /
                        ann.fs);
  const auto mid = intervals.begin() + static_cast<std::ptrdiff_t>(intervals.size() / 2);
  std::nth_element(intervals.begin(), mid, intervals.end());
  double median = *mid;
  if (intervals.size() % 2 == 0) median = (median + *std::max_element(intervals.begin(), mid)) / 2.0;
  return 60.0 / median;
}

double ecg_sqi(const RawAnnotations& primary, const RawAnnotations& secondary, double t,
               double window_s, double tol_s, double stale_s) {
  const auto a = slice(primary, trailing(primary, t, window_s));
  const auto b = slice(secondary, trailing(secondary, t, window_s));
  if (a.empty() || b.empty()) return 0.0;
  if (t - a.time_of(a.size() - 1) > stale_s) return 0.0;
  const auto counts = match_beats(a, b, tol_s);
  return static_cast<double>(counts.tp) / static_cast<double>(std::max(a.size(), b.size()));
}

bool abp_sqi(std::span<const double> pressure, const RawAnnotations& pulses, double t,
             const AbpSqiRanges& ranges) {
  const auto& v = pulses.sample_indices;
  const double now = t * pulses.fs;
  const auto it = std::upper_bound(v.begin(), v.end(), now,
                                   [](double s, std::int64_t i) { return s < static_cast<double>(i); });
  if (it - v.begin() < 2) return false;
  const std::int64_t end = *(it - 1);
  const std::int64_t begin = *(it - 2);
  if (end > static_cast<std::int64_t>(pressure.size()) || begin < 0) return false;

  // A pulse that has not recurred within the slowest admissible period is stale.
  const double since_last = (now - static_cast<double>(end)) / pulses.fs;
  if (since_last > 60.0 / ranges.hr_min) return false;

  const auto beat = pressure.subspan(static_cast<std::size_t>(begin),
                                     static_cast<std::size_t>(end - begin));
  const auto [lo, hi] = std::minmax_element(beat.begin(), beat.end());
  const double systolic = *hi;
  const double diastolic = *lo;
  const double map = std::accumulate(beat.begin(), beat.end(), 0.0) / static_cast<double>(beat.size());
  const double hr = 60.0 * pulses.fs / static_cast<double>(end - begin);

  return systolic >= ranges.systolic_min && systolic <= ranges.systolic_max &&
         map >= ranges.map_min && map <= ranges.map_max &&
         systolic - diastolic >= ranges.pulse_pressure_min && hr >= ranges.hr_min &&
         hr <= ranges.hr_max;
}

std::vector<WindowObservation> windowize(const RawAnnotations& ecg_ann,
                                         const RawAnnotations& abp_ann,
                                         const ObservationProviders& providers,
                                         std::int64_t window_samples, std::size_t n_windows) {
  if (window_samples < 1) throw std::invalid_argument("windowize: window_samples must be >= 1");
  if (ecg_ann.fs != abp_ann.fs)
    throw std::invalid_argument("windowize: ECG and ABP annotations use different sampling rates");
  const double fs = ecg_ann.fs;

  std::vector<WindowObservation> obs(n_windows);
  const auto mark = [&](const RawAnnotations& ann, bool WindowObservation::*flag) {
    for (const auto s : ann.sample_indices) {
      if (s < 0) continue;
      const auto k = static_cast<std::size_t>(s / window_samples);
      if (k < n_windows) obs[k].*flag = true;
    }
  };
  mark(ecg_ann, &WindowObservation::ecg_ann);
  mark(abp_ann, &WindowObservation::abp_ann);

  for (std::size_t k = 0; k < n_windows; ++k) {
    const double t_end = static_cast<double>((static_cast<std::int64_t>(k) + 1) * window_samples) / fs;
    if (providers.ecg_hr) obs[k].ecg_hr = providers.ecg_hr(t_end);
    if (providers.abp_hr) obs[k].abp_hr = providers.abp_hr(t_end);
    if (providers.ecg_sqi) obs[k].ecg_sqi = providers.ecg_sqi(t_end);
    if (providers.abp_sqi) obs[k].abp_sqi = providers.abp_sqi(t_end);
  }
  return obs;
}

Detections detect(std::span<const double> ecg, std::span<const double> abp, double fs,
                  const FeatureConfig& cfg, const std::optional<RawAnnotations>& external_ecg,
                  const std::optional<RawAnnotations>& external_abp) {
  require_rate(fs);
  Detections d;
  d.ecg = external_ecg ? *external_ecg : detect_qrs(ecg, fs);
  d.ecg_secondary = detect_qrs(ecg, fs, cfg.secondary_threshold_scale);
  d.abp = external_abp ? *external_abp : detect_abp_pulses(abp, fs);
  return d;
}

std::vector<WindowObservation> build_observations(std::span<const double> abp, double fs,
                                                  const Detections& det, std::size_t n_samples,
                                                  const FeatureConfig& cfg) {
  cfg.validate();
  const std::int64_t ws = window_samples_for(fs, cfg.nominal_window_s);
  const auto n_windows =
      static_cast<std::size_t>((static_cast<std::int64_t>(n_samples) + ws - 1) / ws);
  if (det.ecg.fs != fs || det.abp.fs != fs || det.ecg_secondary.fs != fs)
    throw std::invalid_argument("build_observations: annotation sampling rate differs from record");

  ObservationProviders p;
  p.ecg_hr = [&](double t) { return local_heart_rate(det.ecg, t, cfg.hr_window_s); };
  p.abp_hr = [&](double t) { return local_heart_rate(det.abp, t, cfg.hr_window_s); };
  p.ecg_sqi = [&](double t) {
    return ecg_sqi(det.ecg, det.ecg_secondary, t, cfg.sqi_window_s, cfg.sqi_match_tol_s,
                   cfg.sqi_stale_s);
  };
  p.abp_sqi = [&](double t) { return abp_sqi(abp, det.abp, t, cfg.abp_ranges); };
  return windowize(det.ecg, det.abp, p, ws, n_windows);
}

}  // namespace dbnbeat
