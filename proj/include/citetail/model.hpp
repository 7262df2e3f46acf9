#pragma once

// Core domain types shared by every module.
//
//   P          total papers of a country
//   P_top x%   a country's papers inside the global top x% by citations
//   r, R       local (within-country) and global rank, 1 = most cited
//   e_p        0.1 raised to the fitted double-rank exponent

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "citetail/error.hpp"

namespace citetail {

struct PaperRecord {
  std::string id;
  std::string country;
  // Signed so that malformed input (e.g. -2) survives parsing and is
  // reported by validate_corpus instead of wrapping around.
  std::int64_t citations = 0;
  std::optional<int> year;

  friend bool operator==(const PaperRecord&, const PaperRecord&) = default;
};

struct CorpusManifest {
  std::string label;
  std::string publication_window;
  std::string citation_window;
  std::uint64_t record_count = 0;

  friend bool operator==(const CorpusManifest&, const CorpusManifest&) = default;
};

struct RankedPaper {
  PaperRecord record;
  std::uint64_t global_rank = 0;
  std::optional<std::uint64_t> local_rank;

  friend bool operator==(const RankedPaper&, const RankedPaper&) = default;
};

struct DoubleRankPoint {
  std::uint64_t local_rank = 0;   // r
  std::uint64_t global_rank = 0;  // R

  friend bool operator==(const DoubleRankPoint&, const DoubleRankPoint&) = default;
};

struct DoubleRankSeries {
  std::string country;
  std::vector<DoubleRankPoint> points;  // ordered by local rank

  friend bool operator==(const DoubleRankSeries&, const DoubleRankSeries&) = default;
};

inline constexpr double kDefaultTailFraction = 0.0025;

struct TailFit {
  double beta = 0.0;
  double intercept = 0.0;  // log10 r at log10 R = 0
  double e_p = 1.0;
  double r_squared = 0.0;
  double stderr_beta = 0.0;
  std::pair<std::uint64_t, std::uint64_t> window{15, 40};
  std::uint64_t n_points = 0;
  double tail_fraction = kDefaultTailFraction;
};

// Percentile keys sort descending (10 before 1 before 0.25), matching the
// column order of every serialized report.
using PercentileMap = std::map<double, std::uint64_t, std::greater<>>;
using PercentileRatioMap = std::map<double, double, std::greater<>>;
using TopNMap = std::map<std::uint64_t, std::uint64_t, std::greater<>>;
using TopNRatioMap = std::map<std::uint64_t, double, std::greater<>>;

struct IndicatorReport {
  std::string country;
  std::uint64_t P = 0;
  PercentileMap ptop_counts;
  PercentileRatioMap ptop_ratios;
  std::optional<double> eq1_estimate;
  std::optional<double> consistency_ratio;
  TopNMap topn_counts;
  TopNRatioMap topn_per_mille;
};

struct Violation {
  ErrorCode code;
  std::size_t index;  // position of the offending record
  std::string detail;
};

struct ValidationResult {
  std::optional<CorpusManifest> manifest;
  std::vector<Violation> violations;

  [[nodiscard]] bool ok() const { return manifest.has_value(); }
};

/// Checks id uniqueness, non-empty ids and countries, single-country
/// attribution and non-negative citations. Every violation is reported, not
/// just the first.
inline ValidationResult validate_corpus(std::span<const PaperRecord> records,
                                        CorpusManifest manifest = {}) {
  ValidationResult result;
  std::unordered_set<std::string_view> seen;
  seen.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.id.empty()) {
      result.violations.push_back({ErrorCode::EmptyId, i, "empty id"});
    } else if (!seen.insert(rec.id).second) {
      result.violations.push_back({ErrorCode::DuplicateId, i, "duplicate id '" + rec.id + "'"});
    }
    if (rec.country.empty()) {
      result.violations.push_back({ErrorCode::EmptyCountry, i, "empty country"});
    } else if (rec.country.find(';') != std::string::npos) {
      result.violations.push_back(
          {ErrorCode::MultiCountry, i, "multi-country label '" + rec.country + "'"});
    }
    if (rec.citations < 0) {
      result.violations.push_back(
          {ErrorCode::NegativeCitations, i, "citations = " + std::to_string(rec.citations)});
    }
  }
  if (result.violations.empty()) {
    manifest.record_count = records.size();
    result.manifest = std::move(manifest);
  }
  return result;
}

/// Throws on the first broken invariant of a double-rank series.
inline void check_series_invariants(const DoubleRankSeries& series, bool strict = true) {
  for (std::size_t i = 0; i < series.points.size(); ++i) {
    const auto& p = series.points[i];
    if (p.local_rank == 0 || p.global_rank < p.local_rank)
      throw Error(ErrorCode::OutOfRange, "double-rank point violates R >= r >= 1");
    if (i > 0) {
      const auto& q = series.points[i - 1];
      bool increasing = strict ? (p.local_rank > q.local_rank && p.global_rank > q.global_rank)
                               : (p.local_rank >= q.local_rank && p.global_rank >= q.global_rank);
      if (!increasing) throw Error(ErrorCode::OutOfRange, "double-rank series not increasing");
    }
  }
}

}  // namespace citetail
