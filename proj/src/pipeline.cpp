#include "dbnbeat/pipeline.hpp"

#include <stdexcept>

namespace dbnbeat {

PipelineResult annotate(std::span<const double> ecg, std::span<const double> abp, double fs,
                        const RunConfig& cfg, const std::optional<RawAnnotations>& external_ecg,
                        const std::optional<RawAnnotations>& external_abp) {
  if (ecg.size() != abp.size()) throw std::invalid_argument("annotate: channel lengths differ");
  if (ecg.empty()) throw std::invalid_argument("annotate: empty record");
  for (const auto* ext : {&external_ecg, &external_abp})
    if (*ext && (*ext)->fs != fs)
      throw std::invalid_argument("annotate: external annotations use a different sampling rate");

  const std::int64_t ws = window_samples_for(fs, cfg.features.nominal_window_s);
  FilterConfig filter_cfg = cfg.filter;
  filter_cfg.model.window_s = static_cast<double>(ws) / fs;

  PipelineResult out;
  out.detections = detect(ecg, abp, fs, cfg.features, external_ecg, external_abp);
  out.observations = build_observations(abp, fs, out.detections, ecg.size(), cfg.features);
  out.filter = run_filter(out.observations, filter_cfg, ws, fs);
  return out;
}

PipelineResult annotate(const Record& rec, const RunConfig& cfg,
                        const std::optional<RawAnnotations>& external_ecg,
                        const std::optional<RawAnnotations>& external_abp) {
  return annotate(rec.channel("ECG"), rec.channel("ABP"), rec.fs, cfg, external_ecg, external_abp);
}

}  // namespace dbnbeat
