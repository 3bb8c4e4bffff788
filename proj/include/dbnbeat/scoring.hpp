#pragma once

#include <cstddef>
#include <span>

#include "dbnbeat/annotations.hpp"

namespace dbnbeat {

struct MatchCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

struct ScoreReport {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double sensitivity = 1.0;
  double positive_predictivity = 1.0;
};

struct AggregateScore {
  double mean_sensitivity = 0.0;
  double mean_positive_predictivity = 0.0;
};

inline constexpr double kDefaultMatchTolerance = 0.15;  // seconds

/// One-to-one beat matching, chronologically greedy: each reference beat
/// pairs with at most one test beat no further than tol_s away.
/// Throws std::invalid_argument on unsorted input, mismatched rates or tol_s <= 0.
MatchCounts match_beats(const RawAnnotations& reference, const RawAnnotations& test,
                        double tol_s = kDefaultMatchTolerance);

/// Sensitivity and positive predictivity from raw counts; an empty denominator
/// yields 1.
ScoreReport make_report(const MatchCounts& counts);

ScoreReport score(const RawAnnotations& reference, const RawAnnotations& test,
                  double tol_s = kDefaultMatchTolerance);

/// Unweighted mean over records. Throws on an empty list.
AggregateScore aggregate(std::span<const ScoreReport> reports);

}  // namespace dbnbeat
