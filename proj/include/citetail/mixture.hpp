#pragma once

// Seeded synthetic corpora for the two-population hypothesis.
//
// Citations live on a reference lognormal "world" distribution. A power-law
// elite population places its papers at global quantiles q with
// P(q <= x) = x^beta, which makes P_top x%/P = (x/100)^beta and the
// double-rank relation r = P (R/N)^beta. A background filler completes the
// reference distribution so that the global quantiles stay exact. Lognormal
// elites and suppressed populations are drawn directly in citation space;
// hard-capped suppressed papers never exceed their ceiling.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "citetail/error.hpp"
#include "citetail/format.hpp"
#include "citetail/indicators.hpp"
#include "citetail/model.hpp"
#include "citetail/ranking.hpp"
#include "citetail/rng.hpp"
#include "citetail/tailfit.hpp"

namespace citetail {

enum class PopulationKind { Elite, Suppressed };
enum class EliteShape { PowerLaw, Lognormal, Background };

struct Lognormal {
  double location = 0.0;
  double scale = 1.0;

  friend bool operator==(const Lognormal&, const Lognormal&) = default;
};

struct PopulationSpec {
  PopulationKind kind = PopulationKind::Elite;
  std::uint64_t size = 0;
  EliteShape shape = EliteShape::PowerLaw;  // Elite only
  double exponent = 1.0;                    // Elite PowerLaw: percentile exponent beta
  Lognormal lognormal;                      // Elite Lognormal and Suppressed
  std::uint64_t ceiling = 0;                // Suppressed hard cap
  bool soft = false;                        // Suppressed without a cap

  friend bool operator==(const PopulationSpec&, const PopulationSpec&) = default;

  void validate() const {
    auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidDistributionParams, what); };
    bool uses_lognormal = kind == PopulationKind::Suppressed || shape == EliteShape::Lognormal;
    if (uses_lognormal && (!std::isfinite(lognormal.location) || !(lognormal.scale > 0.0) ||
                           !std::isfinite(lognormal.scale)))
      bad("lognormal scale must be positive and parameters finite");
    if (kind == PopulationKind::Elite && shape == EliteShape::PowerLaw &&
        !(exponent > 0.0 && std::isfinite(exponent)))
      bad("power-law exponent must be positive");
    if (kind == PopulationKind::Suppressed && !soft && ceiling == 0) bad("suppressed ceiling must be positive");
  }
};

struct SyntheticCountrySpec {
  std::string name;
  std::vector<PopulationSpec> populations;

  [[nodiscard]] std::uint64_t total_size() const {
    std::uint64_t n = 0;
    for (const auto& p : populations) n += p.size;
    return n;
  }

  friend bool operator==(const SyntheticCountrySpec&, const SyntheticCountrySpec&) = default;
};

struct DilutionSpec {
  std::string country;
  PopulationSpec suppressed;  // size is set per dilution factor

  friend bool operator==(const DilutionSpec&, const DilutionSpec&) = default;
};

struct ScenarioRoles {
  std::string advanced;
  std::string japan_like;
  std::string developing;
  double ep_tolerance = 0.02;

  friend bool operator==(const ScenarioRoles&, const ScenarioRoles&) = default;
};

inline constexpr int kConfigSchemaVersion = 1;

struct ExperimentConfig {
  std::vector<SyntheticCountrySpec> countries;
  std::vector<PopulationSpec> world_filler;
  std::string world_label = "world";
  Lognormal reference{3.0, 1.1};
  std::uint64_t seed = 0;
  Sampling sampling = Sampling::Stratified;
  double tail_fraction = kDefaultTailFraction;
  FitWindow window;
  std::vector<double> percentiles{10.0, 1.0};
  std::vector<std::uint64_t> topns{5000, 2000, 1000, 500};
  std::optional<DilutionSpec> dilution;
  std::optional<ScenarioRoles> scenario;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;

  [[nodiscard]] const SyntheticCountrySpec* find_country(std::string_view name) const {
    for (const auto& c : countries)
      if (c.name == name) return &c;
    return nullptr;
  }

  void validate() const {
    auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
    if (!(reference.scale > 0.0) || !std::isfinite(reference.location) || !std::isfinite(reference.scale))
      throw Error(ErrorCode::InvalidDistributionParams, "reference lognormal needs finite location and scale > 0");
    std::set<std::string> names;
    for (const auto& c : countries) {
      if (c.name.empty() || c.name.find(';') != std::string::npos) bad("invalid country name '" + c.name + "'");
      if (c.name == world_label) bad("country name collides with world label");
      if (!names.insert(c.name).second) bad("duplicate country '" + c.name + "'");
      if (c.populations.empty()) bad("country '" + c.name + "' has no populations");
      for (const auto& p : c.populations) {
        p.validate();
        if (p.kind == PopulationKind::Elite && p.shape == EliteShape::Background)
          bad("background shape is only valid in world_filler");
      }
    }
    int backgrounds = 0;
    for (const auto& p : world_filler) {
      p.validate();
      if (p.kind == PopulationKind::Elite && p.shape == EliteShape::Background) ++backgrounds;
    }
    if (backgrounds > 1) bad("at most one background filler population");
    if (world_label.empty()) bad("empty world label");
    if (!(tail_fraction > 0.0 && tail_fraction < 1.0)) bad("tail_fraction must lie in (0, 1)");
    window.validate();
    for (double x : percentiles)
      if (!(x > 0.0 && x <= 100.0)) bad("percentile out of (0, 100]");
    for (auto n : topns)
      if (n == 0) bad("top-N must be positive");
    if (dilution) {
      const auto* c = find_country(dilution->country);
      if (!c) bad("dilution country '" + dilution->country + "' not defined");
      for (const auto& p : c->populations)
        if (p.kind != PopulationKind::Elite) bad("dilution base country must be pure elite");
      auto s = dilution->suppressed;
      s.kind = PopulationKind::Suppressed;
      s.validate();
    }
    if (scenario) {
      for (const auto* role : {&scenario->advanced, &scenario->japan_like, &scenario->developing})
        if (!find_country(*role)) bad("scenario role '" + *role + "' not defined");
      if (std::find(percentiles.begin(), percentiles.end(), 10.0) == percentiles.end())
        bad("scenario needs the 10 percentile");
    }
  }
};

// ---------------------------------------------------------------------------
// Reference coupling: maps global quantiles to citations and solves for the
// background filler's quantiles.

class ReferenceCoupling {
 public:
  ReferenceCoupling(Lognormal reference, std::vector<std::pair<double, double>> power_laws,
                    double background_size)
      : ref_(reference), laws_(std::move(power_laws)), background_(background_size) {
    total_ = background_;
    for (const auto& [n, beta] : laws_) total_ += n;
    if (background_ > 0.0) build_table();
  }

  /// Continuous citation value at upper-tail quantile q of the reference.
  [[nodiscard]] double citation_at(double q) const {
    return std::exp(ref_.location + ref_.scale * normal_upper_quantile(q));
  }

  /// Quantile of a power-law population member drawn with uniform u.
  [[nodiscard]] static double power_law_quantile(double u, double beta) { return std::pow(u, 1.0 / beta); }

  /// Quantile q of the background paper whose cumulative share is v in (0,1):
  /// solves max(0, H(q)) = v * B with H(q) = M q - sum n_i q^beta_i.
  [[nodiscard]] double background_quantile(double v) const {
    const double target = v * background_;
    auto it = std::lower_bound(table_h_.begin(), table_h_.end(), target);
    if (it == table_h_.end()) return 1.0;
    auto j = static_cast<std::size_t>(it - table_h_.begin());
    double hi = table_q_[j];
    double lo = j ? table_q_[j - 1] : 0.0;
    double q = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200 && hi - lo > 1e-15 * hi; ++iter) {
      double h = H(q) - target;
      if (h < 0.0) lo = q;
      else hi = q;
      double d = dH(q);
      double next = d > 0.0 ? q - h / d : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (next == q) break;
      q = next;
    }
    return q;
  }

  [[nodiscard]] double H(double q) const {
    double h = total_ * q;
    for (const auto& [n, beta] : laws_) h -= n * std::pow(q, beta);
    return h;
  }

 private:
  [[nodiscard]] double dH(double q) const {
    double d = total_;
    for (const auto& [n, beta] : laws_) d -= n * beta * std::pow(q, beta - 1.0);
    return d;
  }

  // max(0, H) is non-decreasing on [0, 1]; tabulated on a log grid for
  // bracketing.
  void build_table() {
    constexpr int kNodes = 4096;
    constexpr double kDecades = 20.0;
    table_q_.resize(kNodes + 1);
    table_h_.resize(kNodes + 1);
    double running = 0.0;
    for (int j = 0; j <= kNodes; ++j) {
      double q = j == kNodes ? 1.0 : std::pow(10.0, -kDecades + kDecades * j / kNodes);
      running = std::max(running, std::max(0.0, H(q)));
      table_q_[j] = q;
      table_h_[j] = running;
    }
    table_h_.back() = background_;
  }

  Lognormal ref_;
  std::vector<std::pair<double, double>> laws_;
  double background_ = 0.0;
  double total_ = 0.0;
  std::vector<double> table_q_, table_h_;
};

inline constexpr double kMaxCitations = 1e15;

/// Continuous (pre-floor) citation value for a member drawn with uniform u.
inline double continuous_citation(const PopulationSpec& pop, const ReferenceCoupling& coupling, double u) {
  if (pop.kind == PopulationKind::Elite) {
    switch (pop.shape) {
      case EliteShape::PowerLaw:
        return coupling.citation_at(ReferenceCoupling::power_law_quantile(u, pop.exponent));
      case EliteShape::Background: return coupling.citation_at(coupling.background_quantile(u));
      case EliteShape::Lognormal:
        return std::exp(pop.lognormal.location + pop.lognormal.scale * normal_quantile(u));
    }
  }
  const auto& ln = pop.lognormal;
  if (pop.soft) return std::exp(ln.location + ln.scale * normal_quantile(u));
  // inverse CDF restricted to values that floor to <= ceiling
  double cap = normal_cdf((std::log(static_cast<double>(pop.ceiling) + 1.0) - ln.location) / ln.scale);
  double v = std::exp(ln.location + ln.scale * normal_quantile(u * cap));
  return std::min(v, static_cast<double>(pop.ceiling));
}

inline std::int64_t floor_citation(double c) {
  if (!(c >= 0.0)) return 0;
  return static_cast<std::int64_t>(std::floor(std::min(c, kMaxCitations)));
}

namespace detail {

struct PopulationJob {
  std::string country;
  std::string id_prefix;
  std::string stream_key;
  const PopulationSpec* spec;
};

inline char kind_letter(const PopulationSpec& p) {
  if (p.kind == PopulationKind::Suppressed) return 'S';
  return p.shape == EliteShape::Background ? 'B' : 'E';
}

inline std::vector<PopulationJob> population_jobs(const ExperimentConfig& config) {
  std::vector<PopulationJob> jobs;
  auto add = [&](const std::string& country, std::size_t index, const PopulationSpec& p) {
    auto idx = std::to_string(index);
    jobs.push_back({country, country + "/" + kind_letter(p) + idx + "/", country + "/" + idx, &p});
  };
  for (const auto& c : config.countries)
    for (std::size_t i = 0; i < c.populations.size(); ++i) add(c.name, i, c.populations[i]);
  for (std::size_t i = 0; i < config.world_filler.size(); ++i)
    add(config.world_label, i, config.world_filler[i]);
  return jobs;
}

inline ReferenceCoupling make_coupling(const ExperimentConfig& config) {
  std::vector<std::pair<double, double>> laws;
  double background = 0.0;
  auto visit = [&](const PopulationSpec& p) {
    if (p.kind != PopulationKind::Elite) return;
    if (p.shape == EliteShape::PowerLaw) laws.emplace_back(static_cast<double>(p.size), p.exponent);
    if (p.shape == EliteShape::Background) background += static_cast<double>(p.size);
  };
  for (const auto& c : config.countries)
    for (const auto& p : c.populations) visit(p);
  for (const auto& p : config.world_filler) visit(p);
  return ReferenceCoupling(config.reference, std::move(laws), background);
}

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn fn) {
  threads = std::max(1u, threads);
  if (threads == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    std::size_t begin = t * chunk, end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([=, &fn] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

inline std::string padded_index(std::uint64_t i) {
  std::string s = std::to_string(i);
  return s.size() < 9 ? std::string(9 - s.size(), '0') + s : s;
}

}  // namespace detail

/// One record per configured paper, countries first (in config order) then
/// the world filler. Each population draws from its own substream, so the
/// result is a pure function of the config and independent of `threads`.
inline std::vector<PaperRecord> generate_corpus(const ExperimentConfig& config, unsigned threads = 1) {
  config.validate();
  const auto coupling = detail::make_coupling(config);
  const auto jobs = detail::population_jobs(config);

  std::uint64_t total = 0;
  std::vector<std::uint64_t> offsets;
  for (const auto& job : jobs) {
    offsets.push_back(total);
    total += job.spec->size;
  }
  std::vector<PaperRecord> records(total);
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const auto& job = jobs[j];
    const auto& spec = *job.spec;
    auto u = draw_uniforms(substream_seed(config.seed, job.stream_key), spec.size, config.sampling);
    auto* out = records.data() + offsets[j];
    detail::parallel_for(spec.size, threads, [&](std::size_t i) {
      out[i].id = job.id_prefix + detail::padded_index(i);
      out[i].country = job.country;
      out[i].citations = floor_citation(continuous_citation(spec, coupling, u[i]));
    });
  }
  return records;
}

// ---------------------------------------------------------------------------
// Experiments

struct CountryMetrics {
  IndicatorReport indicators;
  TailFitRow tail;

  /// e_p used for ordering; countries without a fit rank below all others.
  [[nodiscard]] double ordering_ep() const { return tail.fit ? tail.fit->e_p : 0.0; }
  [[nodiscard]] double ratio(double x) const { return indicators.ptop_ratios.at(x); }
};

inline CountryMetrics measure_country(const RankedCorpus& ranked, const RankedCorpus& tail,
                                      std::string_view country, const ExperimentConfig& config) {
  std::vector<std::uint64_t> topns;
  for (auto n : config.topns)
    if (n <= ranked.size()) topns.push_back(n);
  CountryMetrics m;
  m.indicators = build_report(ranked, country, config.percentiles, topns);
  m.tail = tail_fit_row(tail, country, m.indicators.P, config.tail_fraction, config.window);
  return m;
}

struct DilutionRow {
  double factor = 0.0;
  std::uint64_t elite_size = 0;
  std::uint64_t suppressed_size = 0;
  std::uint64_t corpus_size = 0;
  std::int64_t top_threshold = 0;         // citations of the paper at the largest percentile's cutoff
  std::uint64_t suppressed_in_top = 0;    // suppressed papers inside that top set
  std::uint64_t elite_in_top = 0;
  CountryMetrics metrics;
  std::optional<double> expected_top_ratio;  // baseline ratio / (1 + d) at the largest percentile
};

struct DilutionReport {
  std::string rng{kRngAlgorithm};
  std::uint64_t seed = 0;
  std::string country;
  double top_percentile = 10.0;
  std::vector<DilutionRow> rows;
};

/// `config` with its dilution country extended by a suppressed population of
/// floor(d x elite size) papers; the dilution block itself is dropped.
inline ExperimentConfig diluted_config(const ExperimentConfig& config, double d) {
  if (!config.dilution) throw Error(ErrorCode::InvalidConfig, "config has no dilution block");
  if (!(d >= 0.0) || !std::isfinite(d)) throw Error(ErrorCode::InvalidConfig, "dilution factors must be >= 0");
  ExperimentConfig cfg = config;
  cfg.dilution.reset();
  const auto* base = config.find_country(config.dilution->country);
  if (!base) throw Error(ErrorCode::InvalidConfig, "dilution country not defined");
  auto size = floor_snapped(d * static_cast<double>(base->total_size()));
  if (size > 0) {
    auto pop = config.dilution->suppressed;
    pop.kind = PopulationKind::Suppressed;
    pop.size = size;
    for (auto& c : cfg.countries)
      if (c.name == config.dilution->country) c.populations.push_back(pop);
  }
  return cfg;
}

/// The config's dilution country (pure elite) receives an extra suppressed
/// population of size d x elite size for each factor d; every other part of
/// the corpus, including the elite draws, is unchanged across factors.
inline DilutionReport run_dilution_experiment(const ExperimentConfig& config, std::span<const double> factors,
                                              unsigned threads = 1) {
  config.validate();
  if (!config.dilution) throw Error(ErrorCode::InvalidConfig, "config has no dilution block");
  if (config.percentiles.empty()) throw Error(ErrorCode::InvalidConfig, "no percentiles configured");
  const auto& dil = *config.dilution;
  DilutionReport report;
  report.seed = config.seed;
  report.country = dil.country;
  report.top_percentile = *std::max_element(config.percentiles.begin(), config.percentiles.end());
  const auto elite_size = config.find_country(dil.country)->total_size();

  std::optional<double> baseline;
  for (double d : factors) {
    ExperimentConfig cfg = diluted_config(config, d);
    const auto suppressed_size = cfg.find_country(dil.country)->total_size() - elite_size;
    auto corpus = generate_corpus(cfg, threads);
    auto ranked = assign_global_ranks(corpus);
    auto tail = extreme_tail(ranked, cfg.tail_fraction);

    DilutionRow row;
    row.factor = d;
    row.elite_size = elite_size;
    row.suppressed_size = suppressed_size;
    row.corpus_size = ranked.size();
    row.metrics = measure_country(ranked, tail, dil.country, cfg);
    auto cut = percentile_cut(ranked, report.top_percentile);
    row.top_threshold = ranked[cut.member_count - 1].record.citations;
    for (auto pos : ranked.positions(dil.country)) {
      if (pos >= cut.member_count) break;
      if (ranked[pos].record.id.compare(dil.country.size(), 2, "/S") == 0) ++row.suppressed_in_top;
      else ++row.elite_in_top;
    }
    const double r = row.metrics.ratio(report.top_percentile);
    if (d == 0.0 && !baseline) baseline = r;
    if (baseline) row.expected_top_ratio = *baseline / (1.0 + d);
    report.rows.push_back(std::move(row));
  }
  return report;
}

struct ScenarioSignature {
  bool japan_below_advanced_by_ratio = false;
  bool japan_matches_advanced_by_ep = false;
  bool japan_above_developing_by_ratio = false;
  bool japan_above_developing_by_ep = false;

  [[nodiscard]] bool holds() const {
    return japan_below_advanced_by_ratio && japan_matches_advanced_by_ep && japan_above_developing_by_ratio &&
           japan_above_developing_by_ep;
  }
};

struct ScenarioReport {
  std::string rng{kRngAlgorithm};
  std::uint64_t seed = 0;
  ScenarioRoles roles;
  std::vector<CountryMetrics> countries;  // config order
  std::vector<std::string> order_by_ratio;  // P_top10%/P descending
  std::vector<std::string> order_by_ep;     // tail e_p descending
  ScenarioSignature signature;

  [[nodiscard]] const CountryMetrics& at(std::string_view name) const {
    for (const auto& c : countries)
      if (c.indicators.country == name) return c;
    throw Error(ErrorCode::UnknownCountry, std::string(name));
  }
};

/// Generates the configured corpus and checks the signature: the japan-like
/// country ranks below the advanced one by P_top10%/P but matches it by tail
/// e_p, and ranks above the developing one on both.
inline ScenarioReport japan_scenario(const ExperimentConfig& config, unsigned threads = 1) {
  config.validate();
  if (!config.scenario) throw Error(ErrorCode::InvalidConfig, "config has no scenario block");
  ScenarioReport report;
  report.seed = config.seed;
  report.roles = *config.scenario;
  auto corpus = generate_corpus(config, threads);
  auto ranked = assign_global_ranks(corpus);
  auto tail = extreme_tail(ranked, config.tail_fraction);
  for (const auto& c : config.countries) report.countries.push_back(measure_country(ranked, tail, c.name, config));

  auto ordered = [&](auto key) {
    std::vector<const CountryMetrics*> v;
    for (const auto& c : report.countries) v.push_back(&c);
    std::stable_sort(v.begin(), v.end(), [&](const auto* a, const auto* b) { return key(*a) > key(*b); });
    std::vector<std::string> names;
    for (const auto* c : v) names.push_back(c->indicators.country);
    return names;
  };
  report.order_by_ratio = ordered([](const CountryMetrics& m) { return m.ratio(10.0); });
  report.order_by_ep = ordered([](const CountryMetrics& m) { return m.ordering_ep(); });

  const auto& adv = report.at(report.roles.advanced);
  const auto& jap = report.at(report.roles.japan_like);
  const auto& dev = report.at(report.roles.developing);
  auto& sig = report.signature;
  sig.japan_below_advanced_by_ratio = jap.ratio(10.0) < adv.ratio(10.0);
  sig.japan_matches_advanced_by_ep =
      adv.tail.fit && jap.tail.fit && std::abs(jap.tail.fit->e_p - adv.tail.fit->e_p) <= report.roles.ep_tolerance;
  sig.japan_above_developing_by_ratio = jap.ratio(10.0) > dev.ratio(10.0);
  sig.japan_above_developing_by_ep = jap.tail.fit && jap.ordering_ep() > dev.ordering_ep();
  return report;
}

// ---------------------------------------------------------------------------
// Config (de)serialization. Unknown keys are rejected.

namespace detail {

using json = nlohmann::json;

inline void check_keys(const json& j, std::initializer_list<std::string_view> allowed, std::string_view where) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, std::string(where) + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw Error(ErrorCode::InvalidConfig, "unknown key '" + key + "' in " + std::string(where));
  }
}

template <class T>
T get(const json& j, std::string_view key, std::string_view where) {
  auto it = j.find(std::string(key));
  if (it == j.end()) throw Error(ErrorCode::InvalidConfig, "missing '" + std::string(key) + "' in " + std::string(where));
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::InvalidConfig, "bad type for '" + std::string(key) + "' in " + std::string(where));
  }
}

template <class T>
T get_or(const json& j, std::string_view key, T fallback, std::string_view where) {
  return j.contains(std::string(key)) ? get<T>(j, key, where) : fallback;
}

inline Lognormal lognormal_from_json(const json& j, std::string_view where) {
  return Lognormal{get<double>(j, "location", where), get<double>(j, "scale", where)};
}

inline PopulationSpec population_from_json(const json& j, bool size_required = true) {
  constexpr std::string_view where = "population";
  check_keys(j, {"kind", "size", "shape", "exponent", "location", "scale", "ceiling", "soft"}, where);
  PopulationSpec p;
  auto kind = get_or<std::string>(j, "kind", "elite", where);
  if (kind == "elite") p.kind = PopulationKind::Elite;
  else if (kind == "suppressed") p.kind = PopulationKind::Suppressed;
  else throw Error(ErrorCode::InvalidConfig, "population kind must be elite or suppressed");
  p.size = size_required ? get<std::uint64_t>(j, "size", where) : get_or<std::uint64_t>(j, "size", 0, where);
  if (p.kind == PopulationKind::Elite) {
    auto shape = get_or<std::string>(j, "shape", "power_law", where);
    if (shape == "power_law") {
      p.shape = EliteShape::PowerLaw;
      p.exponent = get<double>(j, "exponent", where);
    } else if (shape == "lognormal") {
      p.shape = EliteShape::Lognormal;
      p.lognormal = lognormal_from_json(j, where);
    } else if (shape == "background") {
      p.shape = EliteShape::Background;
    } else {
      throw Error(ErrorCode::InvalidConfig, "elite shape must be power_law, lognormal or background");
    }
  } else {
    p.soft = get_or<bool>(j, "soft", false, where);
    p.lognormal = lognormal_from_json(j, where);
    if (!p.soft) p.ceiling = get<std::uint64_t>(j, "ceiling", where);
  }
  return p;
}

inline nlohmann::ordered_json population_to_json(const PopulationSpec& p, bool with_size = true) {
  nlohmann::ordered_json j;
  j["kind"] = p.kind == PopulationKind::Elite ? "elite" : "suppressed";
  if (with_size) j["size"] = p.size;
  if (p.kind == PopulationKind::Elite) {
    switch (p.shape) {
      case EliteShape::PowerLaw:
        j["shape"] = "power_law";
        j["exponent"] = p.exponent;
        break;
      case EliteShape::Lognormal:
        j["shape"] = "lognormal";
        j["location"] = p.lognormal.location;
        j["scale"] = p.lognormal.scale;
        break;
      case EliteShape::Background: j["shape"] = "background"; break;
    }
  } else {
    if (p.soft) j["soft"] = true;
    else j["ceiling"] = p.ceiling;
    j["location"] = p.lognormal.location;
    j["scale"] = p.lognormal.scale;
  }
  return j;
}

}  // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  using detail::get;
  using detail::get_or;
  constexpr std::string_view where = "config";
  detail::check_keys(j,
                     {"schema_version", "seed", "sampling", "reference", "world_label", "world_filler", "countries",
                      "tail_fraction", "window", "percentiles", "topn", "dilution", "scenario"},
                     where);
  if (get<int>(j, "schema_version", where) != kConfigSchemaVersion)
    throw Error(ErrorCode::InvalidConfig, "unsupported schema_version");
  ExperimentConfig c;
  c.seed = get_or<std::uint64_t>(j, "seed", 0, where);
  auto sampling = get_or<std::string>(j, "sampling", "stratified", where);
  if (sampling == "stratified") c.sampling = Sampling::Stratified;
  else if (sampling == "iid") c.sampling = Sampling::Independent;
  else throw Error(ErrorCode::InvalidConfig, "sampling must be stratified or iid");
  if (j.contains("reference")) {
    detail::check_keys(j["reference"], {"location", "scale"}, "reference");
    c.reference = detail::lognormal_from_json(j["reference"], "reference");
  }
  c.world_label = get_or<std::string>(j, "world_label", c.world_label, where);
  if (j.contains("world_filler")) {
    if (!j["world_filler"].is_array()) throw Error(ErrorCode::InvalidConfig, "world_filler must be an array");
    for (const auto& p : j["world_filler"]) c.world_filler.push_back(detail::population_from_json(p));
  }
  if (!j.contains("countries") || !j["countries"].is_array())
    throw Error(ErrorCode::InvalidConfig, "countries must be an array");
  for (const auto& cj : j["countries"]) {
    detail::check_keys(cj, {"name", "populations"}, "country");
    SyntheticCountrySpec spec;
    spec.name = get<std::string>(cj, "name", "country");
    if (!cj.contains("populations") || !cj["populations"].is_array())
      throw Error(ErrorCode::InvalidConfig, "populations must be an array");
    for (const auto& p : cj["populations"]) spec.populations.push_back(detail::population_from_json(p));
    c.countries.push_back(std::move(spec));
  }
  c.tail_fraction = get_or<double>(j, "tail_fraction", c.tail_fraction, where);
  if (j.contains("window")) {
    try {
      c.window = parse_window(get<std::string>(j, "window", where));
    } catch (const Error& e) {
      throw Error(ErrorCode::InvalidConfig, e.what());
    }
  }
  if (j.contains("percentiles")) c.percentiles = get<std::vector<double>>(j, "percentiles", where);
  if (j.contains("topn")) c.topns = get<std::vector<std::uint64_t>>(j, "topn", where);
  if (j.contains("dilution")) {
    const auto& d = j["dilution"];
    detail::check_keys(d, {"country", "suppressed"}, "dilution");
    DilutionSpec spec;
    spec.country = get<std::string>(d, "country", "dilution");
    if (!d.contains("suppressed")) throw Error(ErrorCode::InvalidConfig, "dilution needs a suppressed population");
    auto sj = d["suppressed"];
    if (sj.is_object() && !sj.contains("kind")) sj["kind"] = "suppressed";
    spec.suppressed = detail::population_from_json(sj, false);
    c.dilution = spec;
  }
  if (j.contains("scenario")) {
    const auto& s = j["scenario"];
    detail::check_keys(s, {"advanced", "japan_like", "developing", "ep_tolerance"}, "scenario");
    ScenarioRoles roles;
    roles.advanced = get<std::string>(s, "advanced", "scenario");
    roles.japan_like = get<std::string>(s, "japan_like", "scenario");
    roles.developing = get<std::string>(s, "developing", "scenario");
    roles.ep_tolerance = get_or<double>(s, "ep_tolerance", roles.ep_tolerance, "scenario");
    c.scenario = roles;
  }
  try {
    c.validate();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidConfig) throw;
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  return c;
}

inline nlohmann::ordered_json config_to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["seed"] = c.seed;
  j["sampling"] = c.sampling == Sampling::Stratified ? "stratified" : "iid";
  j["reference"] = {{"location", c.reference.location}, {"scale", c.reference.scale}};
  j["world_label"] = c.world_label;
  j["world_filler"] = nlohmann::ordered_json::array();
  for (const auto& p : c.world_filler) j["world_filler"].push_back(detail::population_to_json(p));
  j["countries"] = nlohmann::ordered_json::array();
  for (const auto& country : c.countries) {
    nlohmann::ordered_json cj;
    cj["name"] = country.name;
    cj["populations"] = nlohmann::ordered_json::array();
    for (const auto& p : country.populations) cj["populations"].push_back(detail::population_to_json(p));
    j["countries"].push_back(std::move(cj));
  }
  j["tail_fraction"] = c.tail_fraction;
  j["window"] = std::to_string(c.window.lo) + ":" + std::to_string(c.window.hi);
  j["percentiles"] = c.percentiles;
  j["topn"] = c.topns;
  if (c.dilution)
    j["dilution"] = {{"country", c.dilution->country},
                     {"suppressed", detail::population_to_json(c.dilution->suppressed, false)}};
  if (c.scenario)
    j["scenario"] = {{"advanced", c.scenario->advanced},
                     {"japan_like", c.scenario->japan_like},
                     {"developing", c.scenario->developing},
                     {"ep_tolerance", c.scenario->ep_tolerance}};
  return j;
}

// ---------------------------------------------------------------------------
// Default experiments

inline PopulationSpec power_law_elite(std::uint64_t size, double exponent) {
  PopulationSpec p;
  p.size = size;
  p.exponent = exponent;
  return p;
}

inline PopulationSpec background_filler(std::uint64_t size) {
  PopulationSpec p;
  p.size = size;
  p.shape = EliteShape::Background;
  return p;
}

inline PopulationSpec capped_suppressed(std::uint64_t size, std::uint64_t ceiling, Lognormal shape) {
  PopulationSpec p;
  p.kind = PopulationKind::Suppressed;
  p.size = size;
  p.ceiling = ceiling;
  p.lognormal = shape;
  return p;
}

inline PopulationSpec soft_suppressed(std::uint64_t size, Lognormal shape) {
  PopulationSpec p;
  p.kind = PopulationKind::Suppressed;
  p.size = size;
  p.soft = true;
  p.lognormal = shape;
  return p;
}

/// Exponent giving e_p = 0.2.
inline constexpr double kJapanLikeExponent = 0.699;

/// Three countries: "advanced" (pure elite), "japan-like" (an elite twin of
/// advanced plus three times as many capped suppressed papers) and
/// "developing" (no elite population, an uncapped low lognormal).
inline ExperimentConfig default_scenario_config(std::uint64_t seed = 1) {
  ExperimentConfig c;
  c.seed = seed;
  c.countries = {
      {"advanced", {power_law_elite(20000, kJapanLikeExponent)}},
      {"japan-like", {power_law_elite(20000, kJapanLikeExponent), capped_suppressed(60000, 40, {1.5, 1.0})}},
      {"developing", {soft_suppressed(100000, {2.0, 1.3})}},
  };
  c.world_filler = {background_filler(1000000)};
  c.scenario = ScenarioRoles{"advanced", "japan-like", "developing", 0.02};
  return c;
}

/// One pure-elite country of 20,000 papers, about 5% of the corpus, with a
/// suppressed template capped well below the global top-10% threshold.
inline ExperimentConfig default_dilution_config(std::uint64_t seed = 1) {
  ExperimentConfig c;
  c.seed = seed;
  c.countries = {{"elite", {power_law_elite(20000, kJapanLikeExponent)}}};
  c.world_filler = {background_filler(380000)};
  c.dilution = DilutionSpec{"elite", capped_suppressed(0, 40, {1.5, 1.0})};
  return c;
}

// ---------------------------------------------------------------------------
// Report serialization

namespace detail {

inline nlohmann::ordered_json metrics_to_json(const CountryMetrics& m, const Precision& prec) {
  nlohmann::ordered_json j = reports_to_json(std::span(&m.indicators, 1), prec)[0];
  j["tail_count"] = m.tail.tail_count;
  j["tail_status"] = m.tail.fit ? "fitted" : "InsufficientTail";
  if (m.tail.fit) {
    j["beta"] = *parse_double(format_fixed(m.tail.fit->beta, prec.fit));
    j["e_p"] = *parse_double(format_fixed(m.tail.fit->e_p, prec.e_p));
    j["r_squared"] = *parse_double(format_fixed(m.tail.fit->r_squared, prec.fit));
  } else {
    j["beta"] = nullptr;
    j["e_p"] = nullptr;
    j["r_squared"] = nullptr;
  }
  return j;
}

}  // namespace detail

inline nlohmann::ordered_json dilution_to_json(const DilutionReport& r, const Precision& prec = {}) {
  nlohmann::ordered_json j;
  j["rng"] = r.rng;
  j["seed"] = r.seed;
  j["country"] = r.country;
  j["top_percentile"] = r.top_percentile;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    nlohmann::ordered_json o;
    o["dilution"] = row.factor;
    o["elite_size"] = row.elite_size;
    o["suppressed_size"] = row.suppressed_size;
    o["corpus_size"] = row.corpus_size;
    o["top_threshold"] = row.top_threshold;
    o["suppressed_in_top"] = row.suppressed_in_top;
    o["elite_in_top"] = row.elite_in_top;
    o["expected_top_ratio"] =
        row.expected_top_ratio ? nlohmann::ordered_json(*parse_double(format_fixed(*row.expected_top_ratio, prec.ratio)))
                               : nlohmann::ordered_json(nullptr);
    o["metrics"] = detail::metrics_to_json(row.metrics, prec);
    j["rows"].push_back(std::move(o));
  }
  return j;
}

inline void write_dilution_csv(std::ostream& out, const DilutionReport& r, const Precision& prec = {}) {
  if (r.rows.empty()) return;
  auto cols = report_columns(r.rows.front().metrics.indicators);
  out << "dilution,suppressed_size,corpus_size,top_threshold,suppressed_in_top,expected_top_ratio";
  for (const auto& c : cols) out << ',' << c.name;
  out << ",tail_count,e_p\n";
  for (const auto& row : r.rows) {
    out << shortest(row.factor) << ',' << row.suppressed_size << ',' << row.corpus_size << ','
        << row.top_threshold << ',' << row.suppressed_in_top << ','
        << (row.expected_top_ratio ? format_fixed(*row.expected_top_ratio, prec.ratio) : "");
    for (const auto& cell : report_cells(row.metrics.indicators, prec)) out << ',' << cell;
    out << ',' << row.metrics.tail.tail_count << ','
        << (row.metrics.tail.fit ? format_fixed(row.metrics.tail.fit->e_p, prec.e_p) : "InsufficientTail") << '\n';
  }
}

inline nlohmann::ordered_json scenario_to_json(const ScenarioReport& r, const Precision& prec = {}) {
  nlohmann::ordered_json j;
  j["rng"] = r.rng;
  j["seed"] = r.seed;
  j["roles"] = {{"advanced", r.roles.advanced},
                {"japan_like", r.roles.japan_like},
                {"developing", r.roles.developing},
                {"ep_tolerance", r.roles.ep_tolerance}};
  j["countries"] = nlohmann::ordered_json::array();
  for (const auto& c : r.countries) j["countries"].push_back(detail::metrics_to_json(c, prec));
  j["order_by_ratio"] = r.order_by_ratio;
  j["order_by_ep"] = r.order_by_ep;
  j["signature"] = {{"japan_below_advanced_by_ratio", r.signature.japan_below_advanced_by_ratio},
                    {"japan_matches_advanced_by_ep", r.signature.japan_matches_advanced_by_ep},
                    {"japan_above_developing_by_ratio", r.signature.japan_above_developing_by_ratio},
                    {"japan_above_developing_by_ep", r.signature.japan_above_developing_by_ep},
                    {"holds", r.signature.holds()}};
  return j;
}

inline void write_scenario_csv(std::ostream& out, const ScenarioReport& r, const Precision& prec = {}) {
  if (r.countries.empty()) return;
  auto cols = report_columns(r.countries.front().indicators);
  out << "role";
  for (const auto& c : cols) out << ',' << c.name;
  out << ",tail_count,rank_1,rank_lo,e_p\n";
  for (const auto& c : r.countries) {
    const auto& name = c.indicators.country;
    std::string role = name == r.roles.advanced     ? "advanced"
                       : name == r.roles.japan_like ? "japan_like"
                       : name == r.roles.developing ? "developing"
                                                    : "";
    out << role;
    for (const auto& cell : report_cells(c.indicators, prec)) out << ',' << cell;
    out << ',' << c.tail.tail_count << ',' << (c.tail.rank_first ? std::to_string(*c.tail.rank_first) : "") << ','
        << (c.tail.rank_lo ? std::to_string(*c.tail.rank_lo) : "") << ','
        << (c.tail.fit ? format_fixed(c.tail.fit->e_p, prec.e_p) : "InsufficientTail") << '\n';
  }
}

}  // namespace citetail
