#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "citetail/error.hpp"
#include "citetail/format.hpp"
#include "citetail/model.hpp"
#include "citetail/ranking.hpp"

namespace citetail {

struct FitWindow {
  std::uint64_t lo = 15;
  std::uint64_t hi = 40;

  void validate() const {
    if (lo < 1 || lo >= hi || hi - lo < 3)
      throw Error(ErrorCode::InvalidWindow, "fit window needs 1 <= lo and hi - lo >= 3");
  }

  friend bool operator==(const FitWindow&, const FitWindow&) = default;
};

/// Parses "15:40".
inline FitWindow parse_window(std::string_view s) {
  auto colon = s.find(':');
  auto lo = colon == std::string_view::npos ? std::nullopt : parse_int(s.substr(0, colon));
  auto hi = colon == std::string_view::npos ? std::nullopt : parse_int(s.substr(colon + 1));
  if (!lo || !hi || *lo < 1 || *hi < 1)
    throw Error(ErrorCode::InvalidWindow, "window must look like lo:hi");
  FitWindow w{static_cast<std::uint64_t>(*lo), static_cast<std::uint64_t>(*hi)};
  w.validate();
  return w;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double stderr_slope = 0.0;
  std::size_t n = 0;
};

/// Ordinary least squares y = intercept + slope * x.
inline LinearFit ordinary_least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw Error(ErrorCode::InsufficientPoints, "need at least two paired points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw Error(ErrorCode::NonFiniteInput, "non-finite regression input");
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::DegenerateAbscissa, "all abscissae are equal");

  LinearFit fit;
  fit.n = x.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double e = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += e * e;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  fit.stderr_slope = x.size() > 2 ? std::sqrt(ss_res / (n - 2.0) / sxx) : 0.0;
  return fit;
}

inline double ep_from_exponent(double beta) {
  if (!std::isfinite(beta)) throw Error(ErrorCode::NonFiniteInput, "exponent must be finite");
  return std::pow(0.1, beta);
}

/// log10(local rank) regressed on log10(global rank); the slope is the
/// double-rank exponent. Accepts real-valued ranks so exact power-law
/// relations can be fitted without integer rounding.
inline TailFit fit_log_log(std::span<const double> global_ranks, std::span<const double> local_ranks,
                           FitWindow window, double tail_fraction = kDefaultTailFraction) {
  std::vector<double> x, y;
  x.reserve(global_ranks.size());
  y.reserve(local_ranks.size());
  for (std::size_t i = 0; i < global_ranks.size() && i < local_ranks.size(); ++i) {
    x.push_back(std::log10(global_ranks[i]));
    y.push_back(std::log10(local_ranks[i]));
  }
  auto ols = ordinary_least_squares(x, y);
  TailFit fit;
  fit.beta = ols.slope;
  fit.intercept = ols.intercept;
  fit.e_p = ep_from_exponent(ols.slope);
  fit.r_squared = ols.r_squared;
  fit.stderr_beta = ols.stderr_slope;
  fit.window = {window.lo, window.hi};
  fit.n_points = ols.n;
  fit.tail_fraction = tail_fraction;
  return fit;
}

/// Fits the points with lo <= r <= hi. Every local rank of the window must be
/// present; a shorter series is an error, never a truncated fit.
inline TailFit fit_double_rank(const DoubleRankSeries& series, FitWindow window = {},
                               double tail_fraction = kDefaultTailFraction) {
  window.validate();
  std::vector<double> global, local;
  std::uint64_t expect = window.lo;
  for (const auto& p : series.points) {
    if (p.local_rank < window.lo || p.local_rank > window.hi) continue;
    if (p.local_rank == expect) ++expect;
    global.push_back(static_cast<double>(p.global_rank));
    local.push_back(static_cast<double>(p.local_rank));
  }
  if (expect != window.hi + 1)
    throw Error(ErrorCode::InsufficientPoints,
                series.country + " lacks local rank " + std::to_string(expect) + " in the fit window");
  return fit_log_log(global, local, window, tail_fraction);
}

enum class TailStatus { Fitted, InsufficientTail };

struct TailFitRow {
  std::string country;
  std::uint64_t P = 0;
  std::uint64_t tail_count = 0;
  std::optional<std::uint64_t> rank_first;
  std::optional<std::uint64_t> rank_lo;
  std::optional<std::uint64_t> rank_hi;
  std::optional<TailFit> fit;
  TailStatus status = TailStatus::InsufficientTail;
  DoubleRankSeries tail_series;  // the country's (r, R) pairs inside the tail
};

struct TailFitReport {
  double tail_fraction = kDefaultTailFraction;
  FitWindow window;
  std::uint64_t tail_size = 0;
  std::vector<TailFitRow> rows;  // fitted rows by e_p descending, then flagged rows by country
};

inline TailFitRow tail_fit_row(const RankedCorpus& tail, std::string_view country, std::uint64_t P,
                               double fraction, FitWindow window) {
  TailFitRow row;
  row.country = std::string(country);
  row.P = P;
  if (tail.has_country(country)) row.tail_series = local_ranks(tail, country);
  row.tail_series.country = row.country;
  const auto& pts = row.tail_series.points;
  row.tail_count = pts.size();
  auto at = [&](std::uint64_t r) -> std::optional<std::uint64_t> {
    if (r > pts.size()) return std::nullopt;
    try {
      return global_rank_at_local(row.tail_series, r);
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  row.rank_first = at(1);
  row.rank_lo = at(window.lo);
  row.rank_hi = at(window.hi);
  if (row.tail_count >= window.hi) {
    try {
      row.fit = fit_double_rank(row.tail_series, window, fraction);
      row.status = TailStatus::Fitted;
    } catch (const Error& e) {
      // competition ranks can leave gaps in the local ranks of the window
      if (e.code() != ErrorCode::InsufficientPoints) throw;
    }
  }
  return row;
}

/// One row per country (all countries when `countries` is empty). Countries
/// with fewer than window.hi tail papers are flagged, not fitted.
inline TailFitReport tail_fit_report(const RankedCorpus& ranked, std::span<const std::string> countries,
                                     double fraction = kDefaultTailFraction, FitWindow window = {}) {
  window.validate();
  TailFitReport report;
  report.tail_fraction = fraction;
  report.window = window;
  auto tail = extreme_tail(ranked, fraction);
  report.tail_size = tail.size();
  auto names = countries.empty() ? ranked.countries()
                                 : std::vector<std::string>(countries.begin(), countries.end());
  for (const auto& c : names)
    report.rows.push_back(tail_fit_row(tail, c, ranked.positions(c).size(), fraction, window));
  std::stable_sort(report.rows.begin(), report.rows.end(), [](const TailFitRow& a, const TailFitRow& b) {
    if (a.fit.has_value() != b.fit.has_value()) return a.fit.has_value();
    if (a.fit && a.fit->e_p != b.fit->e_p) return a.fit->e_p > b.fit->e_p;
    return a.country < b.country;
  });
  return report;
}

// ---------------------------------------------------------------------------
// Rendering

inline std::string optional_cell(const std::optional<std::uint64_t>& v) {
  return v ? std::to_string(*v) : "-";
}

/// Tabular text: country, P, global ranks at local 1 / lo / hi, e_p.
/// Fields are separated by two spaces.
inline std::string render_row(const TailFitRow& row, const Precision& prec = {}) {
  std::string s = row.country + "  " + std::to_string(row.P) + "  " + optional_cell(row.rank_first) +
                  "  " + optional_cell(row.rank_lo) + "  " + optional_cell(row.rank_hi) + "  ";
  s += row.fit ? format_fixed(row.fit->e_p, prec.e_p) : "InsufficientTail";
  return s;
}

inline void write_tailfit_text(std::ostream& out, const TailFitReport& report, const Precision& prec = {}) {
  out << "# tail_fraction=" << shortest(report.tail_fraction) << " tail_size=" << report.tail_size
      << " window=" << report.window.lo << ":" << report.window.hi << '\n';
  out << "country  P  rank_1  rank_" << report.window.lo << "  rank_" << report.window.hi << "  e_p\n";
  for (const auto& row : report.rows) out << render_row(row, prec) << '\n';
}

inline std::vector<std::string> tailfit_columns(const FitWindow& w) {
  return {"country", "P", "tail_count", "rank_1", "rank_" + std::to_string(w.lo),
          "rank_" + std::to_string(w.hi), "beta", "e_p", "r_squared", "stderr_beta", "n_points", "status"};
}

inline std::vector<std::string> tailfit_cells(const TailFitRow& row, const Precision& prec = {}) {
  auto opt = [](const std::optional<std::uint64_t>& v) { return v ? std::to_string(*v) : std::string(); };
  std::vector<std::string> cells{row.country, std::to_string(row.P), std::to_string(row.tail_count),
                                 opt(row.rank_first), opt(row.rank_lo), opt(row.rank_hi)};
  if (row.fit) {
    cells.push_back(format_fixed(row.fit->beta, prec.fit));
    cells.push_back(format_fixed(row.fit->e_p, prec.e_p));
    cells.push_back(format_fixed(row.fit->r_squared, prec.fit));
    cells.push_back(format_fixed(row.fit->stderr_beta, prec.fit));
    cells.push_back(std::to_string(row.fit->n_points));
    cells.push_back("fitted");
  } else {
    cells.insert(cells.end(), {"", "", "", "", "", "InsufficientTail"});
  }
  return cells;
}

inline void write_tailfit_csv(std::ostream& out, const TailFitReport& report, const Precision& prec = {}) {
  auto cols = tailfit_columns(report.window);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& row : report.rows) {
    auto cells = tailfit_cells(row, prec);
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  }
}

inline nlohmann::ordered_json tailfit_to_json(const TailFitReport& report, const Precision& prec = {}) {
  nlohmann::ordered_json j;
  j["tail_fraction"] = report.tail_fraction;
  j["window"] = {report.window.lo, report.window.hi};
  j["tail_size"] = report.tail_size;
  auto rows = nlohmann::ordered_json::array();
  auto cols = tailfit_columns(report.window);
  for (const auto& row : report.rows) {
    auto cells = tailfit_cells(row, prec);
    nlohmann::ordered_json obj;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const auto& c = cells[i];
      if (i == 0 || i == cols.size() - 1) obj[cols[i]] = c;
      else if (c.empty()) obj[cols[i]] = nullptr;
      else if (auto n = parse_int(c)) obj[cols[i]] = *n;
      else obj[cols[i]] = *parse_double(c);
    }
    rows.push_back(std::move(obj));
  }
  j["rows"] = std::move(rows);
  return j;
}

/// File-name-safe form of a country label.
inline std::string sanitize_label(std::string_view label) {
  std::string out;
  for (unsigned char c : label) out.push_back(std::isalnum(c) || c == '-' || c == '_' ? static_cast<char>(c) : '_');
  return out.empty() ? std::string("_") : out;
}

inline constexpr std::size_t kPlotPoints = 50;

/// Writes <dir>/<country>.dat ("R r" per line, first min(50, tail) points)
/// and <dir>/<country>.fit.json for every row. Returns the data files.
inline std::vector<std::filesystem::path> write_plot_data(const std::filesystem::path& dir,
                                                          const TailFitReport& report) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const auto& row : report.rows) {
    auto stem = sanitize_label(row.country);
    auto dat = dir / (stem + ".dat");
    std::ofstream out(dat, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + dat.string());
    const auto& pts = row.tail_series.points;
    for (std::size_t i = 0; i < std::min(kPlotPoints, pts.size()); ++i)
      out << pts[i].global_rank << ' ' << pts[i].local_rank << '\n';
    written.push_back(dat);

    nlohmann::ordered_json side;
    side["country"] = row.country;
    side["window"] = {report.window.lo, report.window.hi};
    side["tail_fraction"] = report.tail_fraction;
    if (row.fit) {
      side["beta"] = row.fit->beta;
      side["intercept"] = row.fit->intercept;
      side["e_p"] = row.fit->e_p;
      side["r_squared"] = row.fit->r_squared;
    } else {
      side["status"] = "InsufficientTail";
    }
    std::ofstream sj(dir / (stem + ".fit.json"), std::ios::binary);
    sj << side.dump(2) << '\n';
  }
  return written;
}

}  // namespace citetail
