// Acceptance suite: one PASS/FAIL line per criterion. Exit status is non-zero
// when any criterion fails.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../fixtures.hpp"
#include "../oracles.hpp"
#include "citetail/citetail.hpp"

using namespace citetail;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, const std::function<Outcome()>& body) {
  auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  char timing[32];
  std::snprintf(timing, sizeof timing, "%.1fs", secs);
  std::cout << (o.pass ? "PASS" : "FAIL") << "  " << id << "  " << name << "  [" << timing << "]  " << o.detail
            << std::endl;
}

// --- 1, 2, 3 ---------------------------------------------------------------

Outcome published_ratios() {
  int ok = 0, total = 0;
  std::string misses;
  for (const auto& row : fixtures::kCountryRatios) {
    double single = ptop_ratio(row.ptop10_2012, row.papers_2012);
    double decade = eq1_estimate(ptop_ratio(row.ptop1_decade, row.papers_decade));
    const std::pair<std::string, std::string> cells[] = {
        {format_fixed(single, 3), row.ratio_2012},
        {format_fixed(decade, 3), row.sqrt_ratio_decade},
        {format_fixed(consistency_ratio(single, decade), 2), row.consistency}};
    const char* names[] = {"single-year ratio", "decade sqrt ratio", "consistency"};
    for (int k = 0; k < 3; ++k) {
      ++total;
      if (cells[k].first == cells[k].second) ++ok;
      else misses += std::string(" ") + row.country + " " + names[k] + " computed " + cells[k].first + " printed " +
                     cells[k].second + ";";
    }
  }
  return {ok == total, std::to_string(ok) + "/" + std::to_string(total) + " cells match." + misses};
}

Outcome summary_claim() {
  std::map<std::string, double> ratios;
  for (const auto& row : fixtures::kCountryRatios)
    ratios[row.country] = consistency_ratio(ptop_ratio(row.ptop10_2012, row.papers_2012),
                                            eq1_estimate(ptop_ratio(row.ptop1_decade, row.papers_decade)));
  std::set<std::string> excluded(fixtures::kSummaryExcluded.begin(), fixtures::kSummaryExcluded.end());
  auto s = ratio_summary(ratios, excluded);
  auto mean = format_fixed(s.mean, 2), sd = format_fixed(s.sd(), 2);
  bool pass = s.n == 13 && mean == fixtures::kSummaryMean && sd == fixtures::kSummarySd;
  return {pass, "n=" + std::to_string(s.n) + " mean " + shortest(s.mean) + " -> " + mean + " (printed " +
                    fixtures::kSummaryMean + "), sd " + shortest(s.sd()) + " -> " + sd + " (printed " +
                    fixtures::kSummarySd + ")"};
}

Outcome published_per_mille() {
  std::map<std::string, fixtures::TopCountRow> counts;
  for (const auto& r : fixtures::kTopCounts) counts.emplace(r.country, r);
  int ok = 0, total = 0;
  std::string misses;
  for (const auto& row : fixtures::kTopPerMille) {
    const auto& c = counts.at(row.country);
    for (int k = 0; k < 4; ++k) {
      ++total;
      auto got = format_fixed(topn_per_mille(c.top[k], row.papers), 3);
      if (got == row.per_mille[k]) ++ok;
      else misses += std::string(" ") + row.country + " top" + std::to_string(fixtures::kTopN[k]) + " " + got + ";";
    }
  }
  return {ok == total, std::to_string(ok) + "/" + std::to_string(total) + " cells match." + misses};
}

// --- 4 ---------------------------------------------------------------------

Outcome exact_recovery() {
  const FitWindow w;
  const double N = fixtures::kWorldPapers;
  double worst_beta = 0, worst_ep = 0, worst_r2 = 0, worst_split = 0;
  for (double beta : {0.25, 0.5, 0.699, 1.0}) {
    std::vector<double> eps;
    for (double P : {500.0, 5000.0}) {
      std::vector<double> R, r;
      for (auto k = w.lo; k <= w.hi; ++k) {
        r.push_back(static_cast<double>(k));
        R.push_back(N * std::pow(static_cast<double>(k) / P, 1.0 / beta));
      }
      auto fit = fit_log_log(R, r, w);
      worst_beta = std::max(worst_beta, std::abs(fit.beta - beta));
      worst_ep = std::max(worst_ep, std::abs(fit.e_p - std::pow(0.1, beta)));
      worst_r2 = std::max(worst_r2, 1.0 - fit.r_squared);
      eps.push_back(fit.e_p);
    }
    worst_split = std::max(worst_split, std::abs(eps[0] - eps[1]));
  }
  bool pass = worst_beta <= 1e-6 && worst_ep <= 1e-6 && worst_r2 < 1e-9 && worst_split <= 1e-12;
  std::ostringstream d;
  d << "max|dbeta|=" << worst_beta << " max|de_p|=" << worst_ep << " max(1-r2)=" << worst_r2
    << " max|e_p(500)-e_p(5000)|=" << worst_split;
  return {pass, d.str()};
}

// --- 5, 6, 7 -----------------------------------------------------------------

Outcome ep_matches_ratio() {
  double worst = 0;
  std::ostringstream d;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    ExperimentConfig cfg;
    cfg.seed = seed;
    cfg.countries = {{"powerlaw", {power_law_elite(50000, kJapanLikeExponent)}}};
    cfg.world_filler = {background_filler(1950000)};
    auto ranked = assign_global_ranks(generate_corpus(cfg));
    auto tail = extreme_tail(ranked, cfg.tail_fraction);
    auto m = measure_country(ranked, tail, "powerlaw", cfg);
    if (!m.tail.fit) return {false, "seed " + std::to_string(seed) + ": no tail fit"};
    worst = std::max(worst, std::abs(m.tail.fit->e_p - m.ratio(10.0)));
  }
  d << "max |e_p - P_top10%/P| over 10 seeds = " << format_fixed(worst, 4) << " (limit 0.02)";
  return {worst <= 0.02, d.str()};
}

Outcome dilution() {
  double worst_ratio = 0, worst_ep = 0;
  const double factors[] = {0.0, 1.0, 3.0, 9.0};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto report = run_dilution_experiment(default_dilution_config(seed), factors);
    const auto& base = report.rows.at(0);
    if (!base.metrics.tail.fit) return {false, "baseline without tail fit"};
    for (std::size_t i = 1; i < report.rows.size(); ++i) {
      const auto& row = report.rows[i];
      if (!row.metrics.tail.fit) return {false, "diluted row without tail fit"};
      worst_ratio = std::max(worst_ratio, std::abs(row.metrics.ratio(10.0) - *row.expected_top_ratio));
      worst_ep = std::max(worst_ep, std::abs(row.metrics.tail.fit->e_p - base.metrics.tail.fit->e_p));
    }
  }
  std::ostringstream d;
  d << "max |ratio(d) - ratio(0)/(1+d)| = " << format_fixed(worst_ratio, 4) << " (limit 0.01), max |e_p(d) - e_p(0)| = "
    << format_fixed(worst_ep, 4) << " (limit 0.02), d in {1,3,9}, 10 seeds";
  return {worst_ratio <= 0.01 && worst_ep <= 0.02, d.str()};
}

Outcome scenario_signature() {
  int holds = 0;
  double worst_gap = 0;
  std::string broken;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto report = japan_scenario(default_scenario_config(seed));
    if (report.signature.holds()) ++holds;
    else broken += " seed " + std::to_string(seed) + ";";
    const auto& a = report.at(report.roles.advanced);
    const auto& j = report.at(report.roles.japan_like);
    if (a.tail.fit && j.tail.fit) worst_gap = std::max(worst_gap, std::abs(a.tail.fit->e_p - j.tail.fit->e_p));
  }
  return {holds == 10, std::to_string(holds) + "/10 seeds; max |e_p(japan-like) - e_p(advanced)| = " +
                           format_fixed(worst_gap, 4) + broken};
}

// --- 8 -----------------------------------------------------------------------

struct Cli {
  fs::path dir;

  int run(const std::string& args) const {
    std::string cmd = "cd '" + dir.string() + "' && " + CITETAIL_CLI + " " + args + " >>cli.log 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::string bytes(const std::string& name) const { return read_file(dir / name); }
};

std::string manifest_core(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  j.erase("timestamp");
  j.erase("command_line");
  return j.dump();
}

Outcome determinism() {
  const auto root = fs::temp_directory_path() / ("citetail_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  std::vector<std::string> differing;
  int compared = 0;

  // Two independent runs of the same pipeline, the second with more threads.
  auto pipeline = [&](const fs::path& dir, unsigned threads) {
    fs::create_directories(dir);
    Cli cli{dir};
    auto t = std::to_string(threads);
    int rc = 0;
    rc |= cli.run("generate --preset scenario --seed 11 --threads " + t + " --output corpus.csv");
    rc |= cli.run("rank --input corpus.csv --cache-out corpus.cache");
    rc |= cli.run("indicators --cache corpus.cache --output ind.csv");
    rc |= cli.run("indicators --cache corpus.cache --out json --output ind.json");
    rc |= cli.run("tailfit --cache corpus.cache --out csv --output tail.csv --plotdata-dir plots");
    rc |= cli.run("simulate --preset scenario --seed 11 --threads " + t + " --out sim");
    rc |= cli.run("simulate --preset dilution --seed 11 --dilutions 0,1,3 --threads " + t + " --out sim");
    return rc;
  };
  if (pipeline(root / "a", 1) != 0 || pipeline(root / "b", 4) != 0)
    return {false, "a command failed; see " + root.string()};

  for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
    if (!entry.is_regular_file()) continue;
    auto rel = fs::relative(entry.path(), root / "a");
    if (rel == "cli.log") continue;
    auto other = root / "b" / rel;
    ++compared;
    if (!fs::exists(other)) {
      differing.push_back(rel.string() + " (missing)");
      continue;
    }
    auto x = read_file(entry.path()), y = read_file(other);
    bool same = rel.string().ends_with(".manifest.json") ? manifest_core(x) == manifest_core(y) : x == y;
    if (!same) differing.push_back(rel.string());
  }
  // an identical rerun in place reproduces every byte except manifest timestamps
  Cli again{root / "a"};
  auto before = again.bytes("corpus.cache");
  again.run("rank --input corpus.csv --cache-out corpus.cache");
  if (again.bytes("corpus.cache") != before) differing.push_back("corpus.cache (rerun)");

  std::string detail = std::to_string(compared) + " files compared across threads 1 vs 4";
  for (const auto& d : differing) detail += "; differs: " + d;
  if (differing.empty()) fs::remove_all(root);
  return {differing.empty() && compared >= 15, detail};
}

// --- 9 -----------------------------------------------------------------------

Outcome oracle_equivalence() {
  std::mt19937_64 rng(20240601);
  const TiePolicy policies[] = {TiePolicy::OrdinalById, TiePolicy::CompetitionMin, TiePolicy::CompetitionMax};
  int corpora = 0;
  std::uint64_t checks = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 5000;
    auto corpus = oracle::random_corpus(rng, n, 1 + static_cast<int>(rng() % 8));
    const auto policy = policies[trial % 3];
    auto ranked = assign_global_ranks(corpus, policy);
    auto want = oracle::rank_all(corpus, policy);
    auto ordinal = policy == TiePolicy::OrdinalById ? want : oracle::rank_all(corpus, TiePolicy::OrdinalById);
    for (const auto& p : ranked.papers()) {
      if (p.global_rank != want.global.at(p.record.id) || p.local_rank != want.local.at(p.record.id))
        return {false, "rank mismatch in corpus " + std::to_string(trial)};
      ++checks;
    }
    std::vector<std::uint64_t> topns;
    for (std::uint64_t t : {1, 10, 100, 1000})
      if (t <= n) topns.push_back(t);
    for (const auto& country : ranked.countries()) {
      auto series = local_ranks(ranked, country);
      auto expect = oracle::series(corpus, want, country);
      if (series.points.size() != expect.size()) return {false, "series length mismatch"};
      for (std::size_t i = 0; i < expect.size(); ++i)
        if (series.points[i].local_rank != expect[i].first || series.points[i].global_rank != expect[i].second)
          return {false, "series mismatch in corpus " + std::to_string(trial)};
      // percentile counts from ordinal ranks with integer cutoffs
      for (auto [num, den] : {std::pair<std::uint64_t, std::uint64_t>{10, 1}, {1, 1}, {1, 4}}) {
        const double x = static_cast<double>(num) / static_cast<double>(den);
        std::uint64_t cutoff = std::max<std::uint64_t>(1, num * n / (100 * den));
        std::uint64_t count = 0;
        for (const auto& p : corpus)
          if (p.country == country && ordinal.global.at(p.id) <= cutoff) ++count;
        if (ranked.count_in_prefix(country, percentile_cut(ranked, x).member_count) != count)
          return {false, "percentile count mismatch in corpus " + std::to_string(trial)};
        ++checks;
      }
      for (auto top : topns) {
        if (topn_count(ranked, country, top) != oracle::topn_count(corpus, want, country, top))
          return {false, "top-N mismatch in corpus " + std::to_string(trial)};
        ++checks;
      }
    }
    ++corpora;
  }
  return {true, std::to_string(corpora) + " corpora, " + std::to_string(checks) + " exact comparisons"};
}

}  // namespace

int main() {
  std::cout << "citetail acceptance (" << kRngAlgorithm << ")" << std::endl;
  criterion(1, "published country ratios reproduce at printed precision", published_ratios);
  criterion(2, "mean and SD of the 13 consistency ratios", summary_claim);
  criterion(3, "per-mille top-N cells reproduce from published counts", published_per_mille);
  criterion(4, "tail fit recovers exact power laws", exact_recovery);
  criterion(5, "tail e_p tracks P_top10%/P for a sampled power-law country", ep_matches_ratio);
  criterion(6, "dilution scales P_top10%/P by 1/(1+d) and leaves tail e_p", dilution);
  criterion(7, "japan-like scenario signature on 10 seeds", scenario_signature);
  criterion(8, "byte-identical reruns across thread counts", determinism);
  criterion(9, "ranking, series, percentile and top-N counts match brute-force oracles", oracle_equivalence);
  std::cout << (failures ? std::to_string(failures) + " criterion(s) failed" : std::string("all criteria passed"))
            << std::endl;
  return failures ? 1 : 0;
}
