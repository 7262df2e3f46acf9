#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "citetail/indicators.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace citetail;

namespace {

double single_year_ratio(const fixtures::RatioRow& r) { return ptop_ratio(r.ptop10_2012, r.papers_2012); }
double decade_sqrt_ratio(const fixtures::RatioRow& r) { return eq1_estimate(ptop_ratio(r.ptop1_decade, r.papers_decade)); }

// Printed cells that no rounding of the published counts yields.
const std::set<std::pair<std::string, int>> kMisprinted{{"Germany", 0}, {"India", 1}};

}  // namespace

TEST(PublishedRatios, CellsReproduceAtPrintedPrecision) {
  int checked = 0;
  for (const auto& row : fixtures::kCountryRatios) {
    const std::string c = row.country;
    const std::string got[3] = {format_fixed(single_year_ratio(row), 3), format_fixed(decade_sqrt_ratio(row), 3),
                                format_fixed(consistency_ratio(single_year_ratio(row), decade_sqrt_ratio(row)), 2)};
    const std::string want[3] = {row.ratio_2012, row.sqrt_ratio_decade, row.consistency};
    for (int k = 0; k < 3; ++k) {
      if (kMisprinted.count({c, k})) continue;
      EXPECT_EQ(got[k], want[k]) << c << " column " << k;
      ++checked;
    }
  }
  EXPECT_EQ(checked, 43);
}

TEST(PublishedRatios, MisprintedCellsDifferFromArithmetic) {
  // 1934 / 20247 = 0.09552; sqrt(532 / 246151) = 0.04649
  EXPECT_EQ(format_fixed(1934.0 / 20247.0, 3), "0.096");
  EXPECT_EQ(format_fixed(std::sqrt(532.0 / 246151.0), 3), "0.046");
}

TEST(PublishedRatios, SummaryOverThirteenCountries) {
  std::map<std::string, double> ratios;
  for (const auto& row : fixtures::kCountryRatios)
    ratios[row.country] = consistency_ratio(single_year_ratio(row), decade_sqrt_ratio(row));
  std::set<std::string> excluded(fixtures::kSummaryExcluded.begin(), fixtures::kSummaryExcluded.end());
  auto s = ratio_summary(ratios, excluded);
  EXPECT_EQ(s.n, 13u);

  // two-pass oracle
  double sum = 0.0;
  for (const auto& [c, v] : ratios)
    if (!excluded.count(c)) sum += v;
  double mean = sum / 13.0, ss = 0.0;
  for (const auto& [c, v] : ratios)
    if (!excluded.count(c)) ss += (v - mean) * (v - mean);
  EXPECT_NEAR(s.mean, mean, 1e-12);
  EXPECT_NEAR(s.sd_population, std::sqrt(ss / 13.0), 1e-12);
  EXPECT_NEAR(s.sd_sample, std::sqrt(ss / 12.0), 1e-12);
  EXPECT_EQ(format_fixed(s.sd(), 2), fixtures::kSummarySd);
  // The printed mean (1.10) is not what the published counts give.
  EXPECT_EQ(format_fixed(s.mean, 2), "1.11");
}

TEST(RatioSummary, NeedsTwoValues) {
  EXPECT_THROW(ratio_summary({{"A", 1.0}}), Error);
  EXPECT_THROW(ratio_summary({{"A", 1.0}, {"B", 2.0}}, {"B"}), Error);
}

TEST(PublishedPerMille, AllCellsReproduceFromTopCounts) {
  std::map<std::string, fixtures::TopCountRow> counts;
  for (const auto& r : fixtures::kTopCounts) counts.emplace(r.country, r);
  for (const auto& row : fixtures::kTopPerMille) {
    const auto& t2 = counts.at(row.country);
    ASSERT_EQ(t2.papers, row.papers) << row.country;
    for (int k = 0; k < 4; ++k)
      EXPECT_EQ(format_fixed(topn_per_mille(t2.top[k], row.papers), 3), row.per_mille[k])
          << row.country << " top " << fixtures::kTopN[k];
  }
}

TEST(Scalars, ErrorsAndEdges) {
  EXPECT_THROW(ptop_ratio(1, 0), Error);
  EXPECT_THROW(ptop_ratio(3, 2), Error);
  EXPECT_THROW(eq1_estimate(1.5), Error);
  EXPECT_THROW(consistency_ratio(0.1, 0.0), Error);
  EXPECT_THROW(topn_per_mille(1, 0), Error);
  EXPECT_DOUBLE_EQ(eq1_estimate(0.01), 0.1);
  EXPECT_DOUBLE_EQ(topn_per_mille(93, 282393) * 282393, 93000.0);
}

TEST(Eq1, PowerLawConstructionGivesUnitConsistency) {
  for (double e : {0.05, 0.1, 0.163, 0.2, 0.3}) {
    double p1 = e * e;
    EXPECT_NEAR(consistency_ratio(e, eq1_estimate(p1)), 1.0, 1e-12);
  }
}

TEST(BuildReport, MatchesOracleCounts) {
  std::mt19937_64 rng(11);
  const double pct[] = {10.0, 1.0};
  for (int trial = 0; trial < 10; ++trial) {
    auto c = oracle::random_corpus(rng, 200 + rng() % 1500, 4);
    auto ranked = assign_global_ranks(c, TiePolicy::CompetitionMin);
    auto ranks = oracle::rank_all(c, TiePolicy::CompetitionMin);
    const std::uint64_t topns[] = {100, 50, 10};
    for (const auto& country : ranked.countries()) {
      auto r = build_report(ranked, country, pct, topns);
      EXPECT_EQ(r.ptop_counts.at(10.0), oracle::ptop_count(c, country, 10, 1));
      EXPECT_EQ(r.ptop_counts.at(1.0), oracle::ptop_count(c, country, 1, 1));
      for (auto n : topns) EXPECT_EQ(r.topn_counts.at(n), oracle::topn_count(c, ranks, country, n));
      EXPECT_LE(r.ptop_counts.at(1.0), r.ptop_counts.at(10.0));
      EXPECT_GE(r.topn_counts.at(100), r.topn_counts.at(50));
    }
  }
}

TEST(BuildReport, TopNOutOfRange) {
  std::vector<PaperRecord> c{{"a", "JP", 3, {}}, {"b", "US", 1, {}}};
  auto ranked = assign_global_ranks(c);
  EXPECT_THROW(topn_count(ranked, "JP", 0), Error);
  EXPECT_THROW(topn_count(ranked, "JP", 3), Error);
  EXPECT_EQ(topn_count(ranked, "JP", 2), 1u);
}

TEST(BuildReport, RatiosInvariantUnderReplication) {
  std::mt19937_64 rng(13);
  auto base = oracle::random_corpus(rng, 1000, 3);
  // distinct citation counts keep membership exact under replication
  for (std::size_t i = 0; i < base.size(); ++i) base[i].citations = static_cast<std::int64_t>(rng() % 1000000);
  std::vector<PaperRecord> big;
  for (int k = 0; k < 5; ++k)
    for (auto p : base) {
      p.id += "#" + std::to_string(k);
      big.push_back(p);
    }
  const double pct[] = {10.0, 1.0};
  auto a = assign_global_ranks(base), b = assign_global_ranks(big);
  for (const auto& country : a.countries()) {
    auto ra = build_report(a, country, pct, {}), rb = build_report(b, country, pct, {});
    EXPECT_DOUBLE_EQ(ra.ptop_ratios.at(10.0), rb.ptop_ratios.at(10.0));
    EXPECT_DOUBLE_EQ(ra.ptop_ratios.at(1.0), rb.ptop_ratios.at(1.0));
  }
}

TEST(Serialization, ColumnOrderAndPrecision) {
  std::vector<PaperRecord> c;
  for (int i = 0; i < 1000; ++i) c.push_back({"p" + std::to_string(i), i % 3 ? "US" : "JP", 1000 - i, {}});
  auto ranked = assign_global_ranks(c);
  const double pct[] = {1.0, 10.0};
  const std::uint64_t topn[] = {50, 500};
  std::vector<IndicatorReport> reports{build_report(ranked, "JP", pct, topn), build_report(ranked, "US", pct, topn)};
  std::ostringstream csv;
  write_reports_csv(csv, reports);
  auto header = csv.str().substr(0, csv.str().find('\n'));
  EXPECT_EQ(header,
            "country,P,P_top10,P_top10_ratio,P_top1,P_top1_ratio,eq1_estimate,consistency_ratio,top500,"
            "top500_per_mille,top50,top50_per_mille");
  // JP holds papers 0,3,6,...: 34 of the top 100, 4 of the top 10
  EXPECT_NE(csv.str().find("JP,334,34,0.102,4,0.012,0.109,0.93,167,500.000,17,50.898"), std::string::npos)
      << csv.str();
}

TEST(Serialization, JsonAndCsvCarryTheSameFields) {
  std::mt19937_64 rng(17);
  auto c = oracle::random_corpus(rng, 3000, 4);
  auto ranked = assign_global_ranks(c);
  const double pct[] = {10.0, 1.0};
  const std::uint64_t topn[] = {500, 100};
  std::vector<IndicatorReport> reports;
  for (const auto& country : ranked.countries()) reports.push_back(build_report(ranked, country, pct, topn));
  auto json = reports_to_json(reports);
  std::ostringstream csv;
  write_reports_csv(csv, reports);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  auto cols = report_columns(reports[0]);
  for (std::size_t r = 0; std::getline(in, line); ++r) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (line.back() == ',') cells.push_back("");
    ASSERT_EQ(cells.size(), cols.size());
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const auto& v = json[r][cols[k].name];
      if (cols[k].kind == ReportColumn::Kind::Text) EXPECT_EQ(v.get<std::string>(), cells[k]);
      else if (cells[k].empty()) EXPECT_TRUE(v.is_null());
      else EXPECT_DOUBLE_EQ(v.get<double>(), *parse_double(cells[k]));
    }
  }
}

TEST(FormatFixed, HalfUpOnShortestRepresentation) {
  EXPECT_EQ(format_fixed(0.0125, 3), "0.013");
  EXPECT_EQ(format_fixed(0.0005, 3), "0.001");
  EXPECT_EQ(format_fixed(0.0004999, 3), "0.000");
  EXPECT_EQ(format_fixed(1.005, 2), "1.01");
  EXPECT_EQ(format_fixed(9.9996, 3), "10.000");
  EXPECT_EQ(format_fixed(-0.0001, 3), "0.000");
  EXPECT_EQ(format_fixed(-1.25, 1), "-1.3");
  EXPECT_EQ(format_fixed(1234567.0, 0), "1234567");
  EXPECT_EQ(format_fixed(1e-9, 3), "0.000");
}
