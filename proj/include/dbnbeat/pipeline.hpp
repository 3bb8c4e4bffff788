#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dbnbeat/features.hpp"
#include "dbnbeat/filter.hpp"
#include "dbnbeat/io.hpp"

namespace dbnbeat {

struct PipelineResult {
  Detections detections;
  std::vector<WindowObservation> observations;
  FilterResult filter;
};

/// Detectors -> window observations -> particle filter for one record.
/// The model's window duration is set from the integral window length.
PipelineResult annotate(std::span<const double> ecg, std::span<const double> abp, double fs,
                        const RunConfig& cfg,
                        const std::optional<RawAnnotations>& external_ecg = std::nullopt,
                        const std::optional<RawAnnotations>& external_abp = std::nullopt);

PipelineResult annotate(const Record& rec, const RunConfig& cfg,
                        const std::optional<RawAnnotations>& external_ecg = std::nullopt,
                        const std::optional<RawAnnotations>& external_abp = std::nullopt);

}  // namespace dbnbeat
