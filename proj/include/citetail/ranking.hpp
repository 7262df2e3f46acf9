#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "citetail/error.hpp"
#include "citetail/model.hpp"

namespace citetail {

enum class TiePolicy : std::uint8_t {
  OrdinalById = 0,     // citations desc, then id asc; ranks 1..N
  CompetitionMin = 1,  // a tie group shares its smallest rank
  CompetitionMax = 2,  // a tie group shares its largest rank
};

enum class BoundaryPolicy : std::uint8_t {
  RankStrict = 0,   // exactly the first cutoff_rank papers
  IncludeTies = 1,  // every paper tied with the paper at cutoff_rank
};

constexpr std::string_view to_string(TiePolicy p) {
  switch (p) {
    case TiePolicy::OrdinalById: return "ordinal";
    case TiePolicy::CompetitionMin: return "min";
    case TiePolicy::CompetitionMax: return "max";
  }
  return "?";
}

inline TiePolicy parse_tie_policy(std::string_view s) {
  if (s == "ordinal" || s == "OrdinalById") return TiePolicy::OrdinalById;
  if (s == "min" || s == "CompetitionMin") return TiePolicy::CompetitionMin;
  if (s == "max" || s == "CompetitionMax") return TiePolicy::CompetitionMax;
  throw Error(ErrorCode::InvalidConfig, "unknown tie policy '" + std::string(s) + "'");
}

/// Storage order shared by every tie policy: citations descending, id
/// ascending. Ids are unique, so this is a strict total order.
inline bool precedes(const PaperRecord& a, const PaperRecord& b) {
  if (a.citations != b.citations) return a.citations > b.citations;
  return a.id < b.id;
}

/// floor(v) where v is a product of decimal inputs; values within a relative
/// 1e-9 of the next integer snap up so that e.g. 0.29 * 100 gives 29, not 28.
inline std::uint64_t floor_snapped(double v) {
  double f = std::floor(v);
  if (v - f > 1.0 - 1e-9 * std::max(1.0, v)) f += 1.0;
  return static_cast<std::uint64_t>(f);
}

/// max(1, floor(x / 100 * N)).
inline std::uint64_t cutoff_rank(double x, std::uint64_t n) {
  if (!(x > 0.0 && x <= 100.0))
    throw Error(ErrorCode::PercentileOutOfRange, "percentile must lie in (0, 100]");
  return std::max<std::uint64_t>(1, floor_snapped(x * static_cast<double>(n) / 100.0));
}

class RankedCorpus {
 public:
  RankedCorpus() = default;

  /// `papers` must already be in storage order with ranks assigned; the
  /// invariants are checked. `universe_size` is N of the corpus the ranks
  /// refer to (larger than papers.size() for a tail sub-corpus).
  RankedCorpus(std::vector<RankedPaper> papers, TiePolicy policy, std::uint64_t universe_size)
      : papers_(std::move(papers)), policy_(policy), universe_(universe_size) {
    check_invariants();
    build_index();
  }

  [[nodiscard]] std::size_t size() const { return papers_.size(); }
  [[nodiscard]] bool empty() const { return papers_.empty(); }
  [[nodiscard]] std::uint64_t universe_size() const { return universe_; }
  [[nodiscard]] TiePolicy policy() const { return policy_; }
  [[nodiscard]] std::span<const RankedPaper> papers() const { return papers_; }
  [[nodiscard]] const RankedPaper& operator[](std::size_t i) const { return papers_[i]; }

  [[nodiscard]] bool has_country(std::string_view country) const {
    return index_.find(country) != index_.end();
  }

  /// Sorted country labels.
  [[nodiscard]] std::vector<std::string> countries() const {
    std::vector<std::string> out;
    out.reserve(index_.size());
    for (const auto& [c, _] : index_) out.push_back(c);
    return out;
  }

  /// Storage positions of a country's papers, ascending (best first).
  [[nodiscard]] std::span<const std::size_t> positions(std::string_view country) const {
    auto it = index_.find(country);
    if (it == index_.end())
      throw Error(ErrorCode::UnknownCountry, "country '" + std::string(country) + "' not in corpus");
    return it->second;
  }

  /// Number of a country's papers among the first `prefix` storage positions.
  [[nodiscard]] std::uint64_t count_in_prefix(std::string_view country, std::size_t prefix) const {
    auto pos = positions(country);
    return static_cast<std::uint64_t>(std::lower_bound(pos.begin(), pos.end(), prefix) - pos.begin());
  }

  friend bool operator==(const RankedCorpus& a, const RankedCorpus& b) {
    return a.policy_ == b.policy_ && a.universe_ == b.universe_ && a.papers_ == b.papers_;
  }

 private:
  void check_invariants() const {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::ValidationError, what); };
    if (papers_.size() > universe_) fail("more papers than universe size");
    for (std::size_t i = 0; i < papers_.size(); ++i) {
      const auto& p = papers_[i];
      if (p.global_rank == 0 || p.global_rank > universe_) fail("global rank out of range");
      if (p.local_rank && (*p.local_rank == 0 || *p.local_rank > p.global_rank))
        fail("local rank exceeds global rank");
      if (p.record.citations < 0) fail("negative citations");
      if (i == 0) continue;
      const auto& q = papers_[i - 1];
      if (!precedes(q.record, p.record)) fail("papers not in (citations desc, id asc) order");
      bool tied = q.record.citations == p.record.citations;
      switch (policy_) {
        case TiePolicy::OrdinalById:
          if (p.global_rank != i + 1) fail("ordinal ranks must be 1..N");
          break;
        case TiePolicy::CompetitionMin:
        case TiePolicy::CompetitionMax:
          if (tied ? p.global_rank != q.global_rank : p.global_rank <= q.global_rank)
            fail("competition ranks inconsistent with ties");
          break;
      }
    }
    if (policy_ == TiePolicy::OrdinalById && !papers_.empty() && papers_[0].global_rank != 1)
      fail("ordinal ranks must start at 1");
  }

  void build_index() {
    for (std::size_t i = 0; i < papers_.size(); ++i) {
      auto it = index_.find(std::string_view(papers_[i].record.country));
      if (it == index_.end()) it = index_.emplace(papers_[i].record.country, std::vector<std::size_t>{}).first;
      it->second.push_back(i);
    }
  }

  std::vector<RankedPaper> papers_;
  TiePolicy policy_ = TiePolicy::OrdinalById;
  std::uint64_t universe_ = 0;
  std::map<std::string, std::vector<std::size_t>, std::less<>> index_;
};

namespace detail {

// Applies `policy` to a run of papers already in storage order; rank_of(i)
// receives the rank for position i. Used for both the global list and each
// country's local list.
template <class CitationsAt, class Assign>
void assign_ranks(std::size_t n, TiePolicy policy, CitationsAt citations_at, Assign assign) {
  std::size_t start = 0;
  while (start < n) {
    std::size_t end = start + 1;
    while (end < n && citations_at(end) == citations_at(start)) ++end;
    for (std::size_t i = start; i < end; ++i) {
      switch (policy) {
        case TiePolicy::OrdinalById: assign(i, i + 1); break;
        case TiePolicy::CompetitionMin: assign(i, start + 1); break;
        case TiePolicy::CompetitionMax: assign(i, end); break;
      }
    }
    start = end;
  }
}

}  // namespace detail

/// Ranks a validated corpus. The result is independent of input order.
inline RankedCorpus assign_global_ranks(std::span<const PaperRecord> corpus,
                                        TiePolicy policy = TiePolicy::OrdinalById) {
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "cannot rank an empty corpus");
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return precedes(corpus[a], corpus[b]); });

  std::vector<RankedPaper> papers;
  papers.reserve(corpus.size());
  for (auto i : order) papers.push_back(RankedPaper{corpus[i], 0, std::nullopt});

  detail::assign_ranks(
      papers.size(), policy, [&](std::size_t i) { return papers[i].record.citations; },
      [&](std::size_t i, std::uint64_t r) { papers[i].global_rank = r; });

  std::map<std::string_view, std::vector<std::size_t>> by_country;
  for (std::size_t i = 0; i < papers.size(); ++i) by_country[papers[i].record.country].push_back(i);
  for (const auto& [_, pos] : by_country) {
    detail::assign_ranks(
        pos.size(), policy, [&](std::size_t k) { return papers[pos[k]].record.citations; },
        [&](std::size_t k, std::uint64_t r) { papers[pos[k]].local_rank = r; });
  }
  auto n = static_cast<std::uint64_t>(papers.size());
  return RankedCorpus(std::move(papers), policy, n);
}

/// (r, R) pairs of one country, ordered by local rank.
inline DoubleRankSeries local_ranks(const RankedCorpus& ranked, std::string_view country) {
  DoubleRankSeries series{std::string(country), {}};
  auto pos = ranked.positions(country);
  series.points.reserve(pos.size());
  for (std::size_t k = 0; k < pos.size(); ++k) {
    const auto& p = ranked[pos[k]];
    series.points.push_back({p.local_rank.value_or(k + 1), p.global_rank});
  }
  return series;
}

struct PercentileCut {
  double x = 10.0;
  std::uint64_t cutoff_rank = 1;
  BoundaryPolicy boundary_policy = BoundaryPolicy::RankStrict;
  std::uint64_t member_count = 0;  // members are storage positions [0, member_count)
};

inline PercentileCut percentile_cut(const RankedCorpus& ranked, double x,
                                    BoundaryPolicy boundary = BoundaryPolicy::RankStrict) {
  if (ranked.empty()) throw Error(ErrorCode::EmptyCorpus, "empty ranked corpus");
  PercentileCut cut{x, cutoff_rank(x, ranked.size()), boundary, 0};
  cut.member_count = cut.cutoff_rank;
  if (boundary == BoundaryPolicy::IncludeTies) {
    const auto threshold = ranked[cut.cutoff_rank - 1].record.citations;
    while (cut.member_count < ranked.size() && ranked[cut.member_count].record.citations >= threshold)
      ++cut.member_count;
  }
  return cut;
}

inline std::span<const RankedPaper> members(const RankedCorpus& ranked, const PercentileCut& cut) {
  return ranked.papers().first(cut.member_count);
}

/// Number of the global top papers that make up the extreme tail.
inline std::uint64_t tail_size(double fraction, std::uint64_t n) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw Error(ErrorCode::PercentileOutOfRange, "tail fraction must lie in (0, 1)");
  return std::max<std::uint64_t>(1, floor_snapped(fraction * static_cast<double>(n)));
}

/// Papers with global_rank <= floor(fraction * N), original ranks preserved.
inline RankedCorpus extreme_tail(const RankedCorpus& ranked, double fraction = kDefaultTailFraction) {
  if (ranked.empty()) throw Error(ErrorCode::EmptyCorpus, "empty ranked corpus");
  const auto limit = tail_size(fraction, ranked.universe_size());
  auto papers = ranked.papers();
  auto end = std::partition_point(papers.begin(), papers.end(),
                                  [&](const RankedPaper& p) { return p.global_rank <= limit; });
  return RankedCorpus(std::vector<RankedPaper>(papers.begin(), end), ranked.policy(),
                      ranked.universe_size());
}

inline std::uint64_t global_rank_at_local(const DoubleRankSeries& series, std::uint64_t r) {
  auto it = std::lower_bound(series.points.begin(), series.points.end(), r,
                             [](const DoubleRankPoint& p, std::uint64_t v) { return p.local_rank < v; });
  if (it == series.points.end() || it->local_rank != r)
    throw Error(ErrorCode::LocalRankAbsent,
                series.country + " has no paper at local rank " + std::to_string(r));
  return it->global_rank;
}

}  // namespace citetail
