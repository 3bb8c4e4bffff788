#include "dbnbeat/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dbnbeat {

bool strictly_increasing(const std::vector<std::int64_t>& v) {
  return std::adjacent_find(v.begin(), v.end(), [](auto a, auto b) { return a >= b; }) ==
         v.end();
}

MatchCounts match_beats(const RawAnnotations& reference, const RawAnnotations& test,
                        double tol_s) {
  if (!(tol_s > 0.0)) throw std::invalid_argument("match_beats: tolerance must be positive");
  if (!strictly_increasing(reference.sample_indices))
    throw std::invalid_argument("match_beats: reference annotations are not strictly increasing");
  if (!strictly_increasing(test.sample_indices))
    throw std::invalid_argument("match_beats: test annotations are not strictly increasing");
  if (!reference.empty() && !test.empty() && reference.fs != test.fs)
    throw std::invalid_argument("match_beats: sampling rates differ");

  const double tol = tol_s * reference.fs;
  const auto& ref = reference.sample_indices;
  const auto& tst = test.sample_indices;

  MatchCounts c;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < ref.size() && j < tst.size()) {
    const double delta = static_cast<double>(tst[j] - ref[i]);
    if (std::abs(delta) <= tol) {
      ++c.tp;
      ++i;
      ++j;
    } else if (delta < 0) {
      ++c.fp;  // test beat too early for this and every later reference
      ++j;
    } else {
      ++c.fn;
      ++i;
    }
  }
  c.fn += ref.size() - i;
  c.fp += tst.size() - j;
  return c;
}

ScoreReport make_report(const MatchCounts& counts) {
  ScoreReport r{counts.tp, counts.fp, counts.fn, 1.0, 1.0};
  if (counts.tp + counts.fn > 0)
    r.sensitivity = static_cast<double>(counts.tp) / static_cast<double>(counts.tp + counts.fn);
  if (counts.tp + counts.fp > 0)
    r.positive_predictivity =
        static_cast<double>(counts.tp) / static_cast<double>(counts.tp + counts.fp);
  return r;
}

ScoreReport score(const RawAnnotations& reference, const RawAnnotations& test, double tol_s) {
  return make_report(match_beats(reference, test, tol_s));
}

AggregateScore aggregate(std::span<const ScoreReport> reports) {
  if (reports.empty()) throw std::invalid_argument("aggregate: no reports");
  AggregateScore a;
  for (const auto& r : reports) {
    a.mean_sensitivity += r.sensitivity;
    a.mean_positive_predictivity += r.positive_predictivity;
  }
  const auto n = static_cast<double>(reports.size());
  a.mean_sensitivity /= n;
  a.mean_positive_predictivity /= n;
  return a;
}

}  // namespace dbnbeat
