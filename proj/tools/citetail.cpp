// citetail: rank corpora, compute percentile and tail indicators, run
// synthetic two-population experiments.
//
// Exit codes: 0 success (flagged rows included), 1 I/O failure,
// 2 validation / parse / config failure, 3 query error.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "citetail/citetail.hpp"

namespace fs = std::filesystem;
using namespace citetail;

namespace {

constexpr const char* kToolVersion = "citetail 0.1.0";

struct RunContext {
  std::string command_line;
  std::map<std::string, std::string> input_checksums;
  std::optional<std::uint64_t> seed;
};

std::string utc_timestamp() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const fs::path& output, const RunContext& ctx) {
  nlohmann::ordered_json j;
  j["command_line"] = ctx.command_line;
  j["inputs"] = nlohmann::ordered_json::object();
  for (const auto& [path, sum] : ctx.input_checksums) j["inputs"][path] = sum;
  j["output"] = output.filename().string();
  j["output_sha256"] = sha256_hex(read_file(output));
  j["seed"] = ctx.seed ? nlohmann::ordered_json(*ctx.seed) : nlohmann::ordered_json(nullptr);
  j["rng"] = ctx.seed ? nlohmann::ordered_json(std::string(kRngAlgorithm)) : nlohmann::ordered_json(nullptr);
  j["tool_version"] = kToolVersion;
  j["timestamp"] = utc_timestamp();
  auto side = output;
  side += ".manifest.json";
  write_file_atomic(side, j.dump(2) + "\n");
}

/// Writes `text` to `path` with a manifest sidecar, or to stdout when empty.
void emit(const std::string& path, const std::string& text, const RunContext& ctx) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  write_file_atomic(path, text);
  write_manifest(path, ctx);
}

RankedCorpus load_cache(const std::string& path, RunContext& ctx) {
  auto bytes = read_file(path);
  ctx.input_checksums[path] = sha256_hex(bytes);
  return decode_ranked_cache(bytes);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

template <class T>
std::vector<T> parse_numbers(const std::string& s, const char* what) {
  std::vector<T> out;
  for (const auto& item : split_list(s)) {
    if constexpr (std::is_floating_point_v<T>) {
      auto v = parse_double(item);
      if (!v) throw Error(ErrorCode::InvalidConfig, std::string("bad ") + what + " '" + item + "'");
      out.push_back(*v);
    } else {
      auto v = parse_int(item);
      if (!v || *v < 0) throw Error(ErrorCode::InvalidConfig, std::string("bad ") + what + " '" + item + "'");
      out.push_back(static_cast<T>(*v));
    }
  }
  return out;
}

Precision precision_from(int digits) { return digits < 0 ? Precision{} : Precision::uniform(digits); }

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoError: return 1;
    case ErrorCode::UnknownCountry:
    case ErrorCode::NOutOfRange:
    case ErrorCode::PercentileOutOfRange:
    case ErrorCode::LocalRankAbsent: return 3;
    default: return 2;
  }
}

// ---------------------------------------------------------------------------

struct RankOptions {
  std::string input;
  std::string format = "csv";
  std::string tie_policy = "ordinal";
  std::string cache_out;
};

int cmd_rank(const RankOptions& o, RunContext& ctx) {
  auto loaded = read_corpus(o.input, parse_format(o.format));
  ctx.input_checksums[o.input] = loaded.bundle.checksum;
  auto ranked = assign_global_ranks(loaded.records, parse_tie_policy(o.tie_policy));
  if (!o.cache_out.empty()) {
    auto sum = write_ranked_cache(ranked, o.cache_out);
    write_manifest(o.cache_out, ctx);
    std::cout << "cache " << o.cache_out << " sha256 " << sum << '\n';
  }
  std::cout << "N " << ranked.size() << '\n';
  std::cout << "citations " << ranked[ranked.size() - 1].record.citations << ".." << ranked[0].record.citations
            << '\n';
  std::cout << "countries " << ranked.countries().size() << '\n';
  std::cout << "tie_policy " << to_string(ranked.policy()) << '\n';
  return 0;
}

struct IndicatorOptions {
  std::string cache;
  std::string countries;
  std::string percentiles = "10,1";
  std::string topn = "5000,2000,1000,500";
  std::string out = "csv";
  std::string output;
  std::string boundary = "strict";
  int precision = -1;
};

int cmd_indicators(const IndicatorOptions& o, RunContext& ctx) {
  auto ranked = load_cache(o.cache, ctx);
  auto names = o.countries.empty() ? ranked.countries() : split_list(o.countries);
  std::vector<std::string> unknown;
  for (const auto& c : names)
    if (!ranked.has_country(c)) unknown.push_back(c);
  if (!unknown.empty()) {
    for (const auto& c : unknown) std::cerr << "UnknownCountry: " << c << '\n';
    return 3;
  }
  if (o.boundary != "strict" && o.boundary != "ties")
    throw Error(ErrorCode::InvalidConfig, "boundary must be strict or ties");
  auto boundary = o.boundary == "ties" ? BoundaryPolicy::IncludeTies : BoundaryPolicy::RankStrict;
  auto percentiles = parse_numbers<double>(o.percentiles, "percentile");
  auto topns = parse_numbers<std::uint64_t>(o.topn, "top-N");
  std::vector<IndicatorReport> reports;
  for (const auto& c : names) reports.push_back(build_report(ranked, c, percentiles, topns, boundary));

  auto prec = precision_from(o.precision);
  std::ostringstream text;
  if (o.out == "csv") write_reports_csv(text, reports, prec);
  else if (o.out == "json") text << reports_to_json(reports, prec).dump(2) << '\n';
  else throw Error(ErrorCode::InvalidConfig, "--out must be csv or json");
  emit(o.output, text.str(), ctx);
  return 0;
}

struct TailOptions {
  std::string cache;
  std::string countries;
  double fraction = kDefaultTailFraction;
  std::string window = "15:40";
  std::string plotdata_dir;
  std::string out = "text";
  std::string output;
  int precision = -1;
};

int cmd_tailfit(const TailOptions& o, RunContext& ctx) {
  auto ranked = load_cache(o.cache, ctx);
  auto names = split_list(o.countries);
  for (const auto& c : names)
    if (!ranked.has_country(c)) {
      std::cerr << "UnknownCountry: " << c << '\n';
      return 3;
    }
  auto report = tail_fit_report(ranked, names, o.fraction, parse_window(o.window));
  auto prec = precision_from(o.precision);
  std::ostringstream text;
  if (o.out == "text") write_tailfit_text(text, report, prec);
  else if (o.out == "csv") write_tailfit_csv(text, report, prec);
  else if (o.out == "json") text << tailfit_to_json(report, prec).dump(2) << '\n';
  else throw Error(ErrorCode::InvalidConfig, "--out must be text, csv or json");
  emit(o.output, text.str(), ctx);
  if (!o.plotdata_dir.empty()) {
    for (const auto& dat : write_plot_data(o.plotdata_dir, report)) write_manifest(dat, ctx);
  }
  for (const auto& row : report.rows)
    if (!row.fit) std::cerr << "InsufficientTail: " << row.country << " (" << row.tail_count << " tail papers)\n";
  return 0;
}

struct SimulateOptions {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string dilutions = "0,1,3,9";
  std::string out_dir;
  unsigned threads = 1;
  int precision = -1;
};

ExperimentConfig load_config(const std::string& path, const std::string& preset, RunContext& ctx) {
  if (!path.empty()) {
    auto bytes = read_file(path);
    ctx.input_checksums[path] = sha256_hex(bytes);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(bytes);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::InvalidConfig, std::string("config is not valid JSON: ") + e.what());
    }
    return config_from_json(j);
  }
  if (preset == "scenario") return default_scenario_config();
  if (preset == "dilution") return default_dilution_config();
  throw Error(ErrorCode::InvalidConfig, "give --config or --preset scenario|dilution");
}

int cmd_simulate(const SimulateOptions& o, RunContext& ctx) {
  auto config = load_config(o.config, o.preset, ctx);
  if (o.seed) config.seed = *o.seed;
  config.validate();
  ctx.seed = config.seed;
  if (!config.dilution && !config.scenario)
    throw Error(ErrorCode::InvalidConfig, "config defines neither a dilution nor a scenario block");
  const fs::path dir = o.out_dir.empty() ? fs::path(".") : fs::path(o.out_dir);
  fs::create_directories(dir);
  auto prec = precision_from(o.precision);

  auto put = [&](const std::string& name, const std::string& text) {
    auto path = (dir / name).string();
    write_file_atomic(path, text);
    write_manifest(path, ctx);
  };
  put("config.resolved.json", config_to_json(config).dump(2) + "\n");

  if (config.dilution) {
    auto factors = parse_numbers<double>(o.dilutions, "dilution factor");
    auto report = run_dilution_experiment(config, factors, o.threads);
    put("dilution.json", dilution_to_json(report, prec).dump(2) + "\n");
    std::ostringstream csv;
    write_dilution_csv(csv, report, prec);
    put("dilution.csv", csv.str());
    for (const auto& row : report.rows) {
      std::cout << "d=" << shortest(row.factor) << "  P_top" << number_label(report.top_percentile)
                << "%/P=" << format_fixed(row.metrics.ratio(report.top_percentile), prec.ratio) << "  e_p="
                << (row.metrics.tail.fit ? format_fixed(row.metrics.tail.fit->e_p, prec.e_p) : "InsufficientTail")
                << '\n';
    }
  }
  if (config.scenario) {
    auto report = japan_scenario(config, o.threads);
    put("scenario.json", scenario_to_json(report, prec).dump(2) + "\n");
    std::ostringstream csv;
    write_scenario_csv(csv, report, prec);
    put("scenario.csv", csv.str());
    for (const auto& c : report.countries)
      std::cout << c.indicators.country << "  P_top10%/P=" << format_fixed(c.ratio(10.0), prec.ratio) << "  e_p="
                << (c.tail.fit ? format_fixed(c.tail.fit->e_p, prec.e_p) : "InsufficientTail") << '\n';
    std::cout << "signature " << (report.signature.holds() ? "holds" : "does not hold") << '\n';
  }
  return 0;
}

struct GenerateOptions {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string output;
  std::string format = "csv";
  unsigned threads = 1;
};

int cmd_generate(const GenerateOptions& o, RunContext& ctx) {
  auto config = load_config(o.config, o.preset, ctx);
  if (o.seed) config.seed = *o.seed;
  ctx.seed = config.seed;
  auto records = generate_corpus(config, o.threads);
  write_corpus(o.output, records, parse_format(o.format));
  write_manifest(o.output, ctx);
  std::cout << "records " << records.size() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Percentile and extreme-tail citation indicators"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  RunContext ctx;
  for (int i = 0; i < argc; ++i) ctx.command_line += (i ? " " : "") + std::string(argv[i]);

  RankOptions rank;
  auto* r = app.add_subcommand("rank", "Validate a corpus and write a ranked cache");
  r->add_option("--input", rank.input, "Corpus file")->required();
  r->add_option("--format", rank.format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
  r->add_option("--tie-policy", rank.tie_policy, "ordinal, min or max")
      ->check(CLI::IsMember({"ordinal", "min", "max"}));
  r->add_option("--cache-out", rank.cache_out, "Ranked cache to write");

  IndicatorOptions ind;
  auto* i = app.add_subcommand("indicators", "Percentile ratios and top-N counts per country");
  i->add_option("--cache", ind.cache, "Ranked cache")->required();
  i->add_option("--countries", ind.countries, "Comma-separated countries (default: all)");
  i->add_option("--percentiles", ind.percentiles, "Comma-separated x of P_top x%");
  i->add_option("--topn", ind.topn, "Comma-separated global top-N sizes");
  i->add_option("--out", ind.out, "csv or json");
  i->add_option("--output", ind.output, "Output file (default: stdout)");
  i->add_option("--boundary", ind.boundary, "strict or ties");
  i->add_option("--precision", ind.precision, "Decimals for every rounded column");

  TailOptions tf;
  auto* t = app.add_subcommand("tailfit", "Double-rank power-law fit of the extreme tail");
  t->add_option("--cache", tf.cache, "Ranked cache")->required();
  t->add_option("--countries", tf.countries, "Comma-separated countries (default: all)");
  t->add_option("--fraction", tf.fraction, "Extreme-tail fraction of the corpus");
  t->add_option("--window", tf.window, "Local-rank fit window lo:hi");
  t->add_option("--plotdata-dir", tf.plotdata_dir, "Directory for per-country plot data");
  t->add_option("--out", tf.out, "text, csv or json");
  t->add_option("--output", tf.output, "Output file (default: stdout)");
  t->add_option("--precision", tf.precision, "Decimals for every rounded column");

  SimulateOptions sim;
  auto* s = app.add_subcommand("simulate", "Run dilution and scenario experiments");
  s->add_option("--config", sim.config, "Experiment config (JSON)");
  s->add_option("--preset", sim.preset, "scenario or dilution")->check(CLI::IsMember({"scenario", "dilution"}));
  s->add_option("--seed", sim.seed, "Override the config seed");
  s->add_option("--dilutions", sim.dilutions, "Comma-separated dilution factors");
  s->add_option("--out", sim.out_dir, "Output directory");
  s->add_option("--threads", sim.threads, "Worker threads")->check(CLI::Range(1u, 256u));
  s->add_option("--precision", sim.precision, "Decimals for every rounded column");

  GenerateOptions gen;
  auto* g = app.add_subcommand("generate", "Write a synthetic corpus");
  g->add_option("--config", gen.config, "Experiment config (JSON)");
  g->add_option("--preset", gen.preset, "scenario or dilution")->check(CLI::IsMember({"scenario", "dilution"}));
  g->add_option("--seed", gen.seed, "Override the config seed");
  g->add_option("--output", gen.output, "Corpus file")->required();
  g->add_option("--format", gen.format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
  g->add_option("--threads", gen.threads, "Worker threads")->check(CLI::Range(1u, 256u));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*r) return cmd_rank(rank, ctx);
    if (*i) return cmd_indicators(ind, ctx);
    if (*t) return cmd_tailfit(tf, ctx);
    if (*s) return cmd_simulate(sim, ctx);
    if (*g) return cmd_generate(gen, ctx);
  } catch (const ValidationFailure& e) {
    for (const auto& item : e.items())
      std::cerr << "line " << item.line << ": " << to_string(item.violation.code) << ": " << item.violation.detail
                << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "IoError: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
