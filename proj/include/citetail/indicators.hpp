#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "citetail/error.hpp"
#include "citetail/format.hpp"
#include "citetail/model.hpp"
#include "citetail/ranking.hpp"

namespace citetail {

/// P_top x% / P.
inline double ptop_ratio(std::uint64_t count, std::uint64_t total) {
  if (total == 0) throw Error(ErrorCode::ZeroTotal, "total paper count is zero");
  if (count > total) throw Error(ErrorCode::OutOfRange, "top count exceeds total");
  return static_cast<double>(count) / static_cast<double>(total);
}

/// The P_top 10%/P implied by P_top 1%/P under P_top1%/P = (P_top10%/P)^2.
inline double eq1_estimate(double ptop1_ratio) {
  if (!(ptop1_ratio >= 0.0 && ptop1_ratio <= 1.0))
    throw Error(ErrorCode::OutOfRange, "P_top1%/P must lie in [0, 1]");
  return std::sqrt(ptop1_ratio);
}

/// Directly measured P_top10%/P over the square-law estimate; 1 when a corpus
/// follows the percentile power law.
inline double consistency_ratio(double ratio_short, double ratio_long_est) {
  if (!(ratio_long_est > 0.0))
    throw Error(ErrorCode::DivisionByZero, "estimated ratio must be positive");
  return ratio_short / ratio_long_est;
}

struct RatioSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double sd_population = 0.0;
  double sd_sample = 0.0;

  [[nodiscard]] double sd() const { return sd_population; }
};

inline RatioSummary ratio_summary(const std::map<std::string, double>& ratios,
                                  const std::set<std::string>& excluded = {}) {
  // Welford's update
  RatioSummary s;
  double m2 = 0.0;
  for (const auto& [country, value] : ratios) {
    if (excluded.count(country)) continue;
    ++s.n;
    double delta = value - s.mean;
    s.mean += delta / static_cast<double>(s.n);
    m2 += delta * (value - s.mean);
  }
  if (s.n < 2) throw Error(ErrorCode::TooFewValues, "need at least two ratios");
  s.sd_population = std::sqrt(m2 / static_cast<double>(s.n));
  s.sd_sample = std::sqrt(m2 / static_cast<double>(s.n - 1));
  return s;
}

/// Papers of `country` with global rank <= n.
inline std::uint64_t topn_count(const RankedCorpus& ranked, std::string_view country, std::uint64_t n) {
  if (n == 0 || n > ranked.universe_size())
    throw Error(ErrorCode::NOutOfRange, "N must lie in [1, corpus size]");
  auto pos = ranked.positions(country);
  auto it = std::partition_point(pos.begin(), pos.end(),
                                 [&](std::size_t i) { return ranked[i].global_rank <= n; });
  return static_cast<std::uint64_t>(it - pos.begin());
}

inline double topn_per_mille(std::uint64_t count, std::uint64_t total) {
  if (total == 0) throw Error(ErrorCode::ZeroTotal, "total paper count is zero");
  return static_cast<double>(count) / static_cast<double>(total) * 1000.0;
}

inline IndicatorReport build_report(const RankedCorpus& ranked, std::string_view country,
                                    std::span<const double> percentiles,
                                    std::span<const std::uint64_t> topns,
                                    BoundaryPolicy boundary = BoundaryPolicy::RankStrict) {
  IndicatorReport report;
  report.country = std::string(country);
  report.P = ranked.positions(country).size();
  for (double x : percentiles) {
    auto cut = percentile_cut(ranked, x, boundary);
    auto count = ranked.count_in_prefix(country, cut.member_count);
    report.ptop_counts[x] = count;
    report.ptop_ratios[x] = ptop_ratio(count, report.P);
  }
  if (auto it = report.ptop_ratios.find(1.0); it != report.ptop_ratios.end()) {
    report.eq1_estimate = eq1_estimate(it->second);
    if (auto ten = report.ptop_ratios.find(10.0);
        ten != report.ptop_ratios.end() && *report.eq1_estimate > 0.0)
      report.consistency_ratio = consistency_ratio(ten->second, *report.eq1_estimate);
  }
  for (auto n : topns) {
    auto count = topn_count(ranked, country, n);
    report.topn_counts[n] = count;
    report.topn_per_mille[n] = topn_per_mille(count, report.P);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Serialization. Column order: country, P, percentiles descending (count,
// ratio), eq1_estimate and consistency_ratio when P_top1% is present, then
// top-N descending (count, per mille).

struct ReportColumn {
  std::string name;
  enum class Kind { Text, Count, Ratio, PerMille, Eq1, Consistency } kind;
};

inline std::vector<ReportColumn> report_columns(const IndicatorReport& layout) {
  using K = ReportColumn::Kind;
  std::vector<ReportColumn> cols{{"country", K::Text}, {"P", K::Count}};
  for (const auto& [x, _] : layout.ptop_counts) {
    auto label = number_label(x);
    cols.push_back({"P_top" + label, K::Count});
    cols.push_back({"P_top" + label + "_ratio", K::Ratio});
  }
  if (layout.ptop_counts.count(1.0)) {
    cols.push_back({"eq1_estimate", K::Eq1});
    if (layout.ptop_counts.count(10.0)) cols.push_back({"consistency_ratio", K::Consistency});
  }
  for (const auto& [n, _] : layout.topn_counts) {
    auto label = std::to_string(n);
    cols.push_back({"top" + label, K::Count});
    cols.push_back({"top" + label + "_per_mille", K::PerMille});
  }
  return cols;
}

/// Formatted cells of one report, aligned with report_columns(). Missing
/// optional values render as an empty cell.
inline std::vector<std::string> report_cells(const IndicatorReport& r, const Precision& prec = {}) {
  std::vector<std::string> cells{r.country, std::to_string(r.P)};
  for (const auto& [x, count] : r.ptop_counts) {
    cells.push_back(std::to_string(count));
    cells.push_back(format_fixed(r.ptop_ratios.at(x), prec.ratio));
  }
  if (r.ptop_counts.count(1.0)) {
    cells.push_back(r.eq1_estimate ? format_fixed(*r.eq1_estimate, prec.eq1) : "");
    if (r.ptop_counts.count(10.0))
      cells.push_back(r.consistency_ratio ? format_fixed(*r.consistency_ratio, prec.consistency) : "");
  }
  for (const auto& [n, count] : r.topn_counts) {
    cells.push_back(std::to_string(count));
    cells.push_back(format_fixed(r.topn_per_mille.at(n), prec.per_mille));
  }
  return cells;
}

inline void write_reports_csv(std::ostream& out, std::span<const IndicatorReport> reports,
                              const Precision& prec = {}) {
  if (reports.empty()) return;
  auto cols = report_columns(reports.front());
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i].name;
  out << '\n';
  for (const auto& r : reports) {
    auto cells = report_cells(r, prec);
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  }
}

/// JSON array of objects whose keys and order match the CSV header. Numbers
/// carry the same rounding as the CSV cells.
inline nlohmann::ordered_json reports_to_json(std::span<const IndicatorReport> reports,
                                              const Precision& prec = {}) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    auto cols = report_columns(r);
    auto cells = report_cells(r, prec);
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const auto& cell = cells[i];
      switch (cols[i].kind) {
        case ReportColumn::Kind::Text: obj[cols[i].name] = cell; break;
        case ReportColumn::Kind::Count: obj[cols[i].name] = static_cast<std::uint64_t>(*parse_int(cell)); break;
        default:
          if (cell.empty()) obj[cols[i].name] = nullptr;
          else obj[cols[i].name] = *parse_double(cell);
      }
    }
    arr.push_back(std::move(obj));
  }
  return arr;
}

}  // namespace citetail
