#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>
#include <unistd.h>

#include "citetail/error.hpp"
#include "citetail/format.hpp"
#include "citetail/model.hpp"
#include "citetail/ranking.hpp"

namespace citetail {

enum class CorpusFormat { CSV, JSONL };

inline std::string_view to_string(CorpusFormat f) { return f == CorpusFormat::CSV ? "csv" : "jsonl"; }

inline CorpusFormat parse_format(std::string_view s) {
  if (s == "csv") return CorpusFormat::CSV;
  if (s == "jsonl") return CorpusFormat::JSONL;
  throw Error(ErrorCode::InvalidConfig, "format must be csv or jsonl");
}

struct DatasetBundle {
  CorpusManifest manifest;
  std::string source_path;
  CorpusFormat format = CorpusFormat::CSV;
  std::string checksum;  // SHA-256 of the raw file bytes
};

struct LoadedCorpus {
  std::vector<PaperRecord> records;
  DatasetBundle bundle;
};

/// Validation violations with the 1-based source line of each record.
class ValidationFailure : public Error {
 public:
  struct Item {
    Violation violation;
    std::size_t line;
  };

  explicit ValidationFailure(std::vector<Item> items)
      : Error(ErrorCode::ValidationError, summarize(items)), items_(std::move(items)) {}

  [[nodiscard]] const std::vector<Item>& items() const { return items_; }

 private:
  static std::string summarize(const std::vector<Item>& items) {
    return std::to_string(items.size()) + " validation error(s)";
  }
  std::vector<Item> items_;
};

inline std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::IoError, "SHA-256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xF]);
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoError, "read failed: " + path.string());
  return std::move(ss).str();
}

/// Writes through a temporary sibling and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot rename into " + path.string());
  }
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

[[noreturn]] inline void parse_error(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
}

// Splits on '\n', dropping a trailing '\r' from each line.
inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    auto end = nl == std::string_view::npos ? text.size() : nl;
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto c = line.find(',', start);
    out.push_back(line.substr(start, c == std::string_view::npos ? std::string_view::npos : c - start));
    if (c == std::string_view::npos) break;
    start = c + 1;
  }
  return out;
}

inline void parse_csv(std::string_view text, std::vector<PaperRecord>& records, std::vector<std::size_t>& lines) {
  auto rows = split_lines(text);
  if (rows.empty()) parse_error(1, "missing header");
  auto header = split_fields(rows[0]);
  bool with_year = false;
  if (header.size() == 4 && header[3] == "year") with_year = true;
  else if (header.size() != 3) parse_error(1, "header must be id,country,citations[,year]");
  if (header[0] != "id" || header[1] != "country" || header[2] != "citations")
    parse_error(1, "header must be id,country,citations[,year]");
  const std::size_t width = with_year ? 4 : 3;

  for (std::size_t i = 1; i < rows.size(); ++i) {
    const std::size_t line = i + 1;
    if (rows[i].empty()) {
      if (i + 1 == rows.size()) break;
      parse_error(line, "empty line");
    }
    auto f = split_fields(rows[i]);
    if (f.size() != width)
      parse_error(line, "expected " + std::to_string(width) + " fields, got " + std::to_string(f.size()));
    PaperRecord rec;
    rec.id = std::string(f[0]);
    rec.country = std::string(f[1]);
    auto c = parse_int(f[2]);
    if (!c) parse_error(line, "citations '" + std::string(f[2]) + "' is not an integer");
    rec.citations = *c;
    if (with_year && !f[3].empty()) {
      auto y = parse_int(f[3]);
      if (!y || *y < -100000 || *y > 100000) parse_error(line, "year '" + std::string(f[3]) + "' is not an integer");
      rec.year = static_cast<int>(*y);
    }
    records.push_back(std::move(rec));
    lines.push_back(line);
  }
}

inline void parse_jsonl(std::string_view text, std::vector<PaperRecord>& records,
                        std::vector<std::size_t>& lines) {
  auto rows = split_lines(text);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t line = i + 1;
    if (rows[i].find_first_not_of(" \t") == std::string_view::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(rows[i]);
    } catch (const nlohmann::json::parse_error& e) {
      parse_error(line, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) parse_error(line, "expected a JSON object");
    PaperRecord rec;
    auto text_field = [&](const char* key) {
      auto it = j.find(key);
      if (it == j.end() || !it->is_string()) parse_error(line, std::string("'") + key + "' must be a string");
      return it->get<std::string>();
    };
    rec.id = text_field("id");
    rec.country = text_field("country");
    auto it = j.find("citations");
    if (it == j.end()) parse_error(line, "missing 'citations'");
    if (it->is_number_integer()) {
      rec.citations = it->get<std::int64_t>();
    } else if (it->is_string()) {
      auto c = parse_int(it->get<std::string>());
      if (!c) parse_error(line, "citations is not an integer");
      rec.citations = *c;
    } else {
      parse_error(line, "citations must be an integer");
    }
    if (auto y = j.find("year"); y != j.end() && !y->is_null()) {
      if (!y->is_number_integer()) parse_error(line, "year must be an integer");
      rec.year = y->get<int>();
    }
    records.push_back(std::move(rec));
    lines.push_back(line);
  }
}

}  // namespace detail

/// Parses corpus bytes. `source_lines`, if given, receives each record's line.
inline std::vector<PaperRecord> parse_corpus(std::string_view text, CorpusFormat format,
                                             std::vector<std::size_t>* source_lines = nullptr) {
  std::vector<PaperRecord> records;
  std::vector<std::size_t> lines;
  if (format == CorpusFormat::CSV) detail::parse_csv(text, records, lines);
  else detail::parse_jsonl(text, records, lines);
  if (source_lines) *source_lines = std::move(lines);
  return records;
}

/// Reads and validates a corpus file; records stay in file order.
inline LoadedCorpus read_corpus(const std::filesystem::path& path, CorpusFormat format,
                                CorpusManifest manifest = {}) {
  const auto bytes = read_file(path);
  std::vector<std::size_t> lines;
  LoadedCorpus out;
  out.records = parse_corpus(bytes, format, &lines);
  if (manifest.label.empty()) manifest.label = path.filename().string();
  auto result = validate_corpus(out.records, std::move(manifest));
  if (!result.ok()) {
    std::vector<ValidationFailure::Item> items;
    for (auto& v : result.violations) {
      auto line = lines[v.index];
      items.push_back({std::move(v), line});
    }
    throw ValidationFailure(std::move(items));
  }
  out.bundle = DatasetBundle{*result.manifest, path.string(), format, sha256_hex(bytes)};
  return out;
}

// ---------------------------------------------------------------------------
// Canonical writer

enum class RecordOrder { Canonical, AsGiven };

inline bool canonical_less(const PaperRecord& a, const PaperRecord& b) {
  if (a.country != b.country) return a.country < b.country;
  return a.id < b.id;
}

/// CSV with LF endings. Canonical order sorts by (country, id); the year
/// column appears only when some record has a year.
inline std::string corpus_to_csv(std::span<const PaperRecord> records, RecordOrder order = RecordOrder::Canonical) {
  std::vector<const PaperRecord*> view;
  view.reserve(records.size());
  for (const auto& r : records) view.push_back(&r);
  if (order == RecordOrder::Canonical)
    std::sort(view.begin(), view.end(), [](const auto* a, const auto* b) { return canonical_less(*a, *b); });
  const bool with_year = std::any_of(records.begin(), records.end(), [](const auto& r) { return r.year.has_value(); });

  std::string out = with_year ? "id,country,citations,year\n" : "id,country,citations\n";
  out.reserve(out.size() + records.size() * 32);
  for (const auto* r : view) {
    if (r->id.find(',') != std::string::npos || r->country.find(',') != std::string::npos)
      throw Error(ErrorCode::ValidationError, "commas are not allowed in ids or countries");
    out += r->id;
    out += ',';
    out += r->country;
    out += ',';
    out += std::to_string(r->citations);
    if (with_year) {
      out += ',';
      if (r->year) out += std::to_string(*r->year);
    }
    out += '\n';
  }
  return out;
}

inline std::string corpus_to_jsonl(std::span<const PaperRecord> records, RecordOrder order = RecordOrder::Canonical) {
  std::vector<const PaperRecord*> view;
  for (const auto& r : records) view.push_back(&r);
  if (order == RecordOrder::Canonical)
    std::sort(view.begin(), view.end(), [](const auto* a, const auto* b) { return canonical_less(*a, *b); });
  std::string out;
  for (const auto* r : view) {
    nlohmann::ordered_json j{{"id", r->id}, {"country", r->country}, {"citations", r->citations}};
    if (r->year) j["year"] = *r->year;
    out += j.dump();
    out += '\n';
  }
  return out;
}

inline void write_corpus(const std::filesystem::path& path, std::span<const PaperRecord> records,
                         CorpusFormat format = CorpusFormat::CSV, RecordOrder order = RecordOrder::Canonical) {
  write_file_atomic(path, format == CorpusFormat::CSV ? corpus_to_csv(records, order) : corpus_to_jsonl(records, order));
}

/// Content digest: SHA-256 of the canonical CSV, independent of source
/// format and record order.
inline std::string corpus_digest(std::span<const PaperRecord> records) {
  return sha256_hex(corpus_to_csv(records, RecordOrder::Canonical));
}

inline std::string corpus_digest(const RankedCorpus& ranked) {
  std::vector<PaperRecord> records;
  records.reserve(ranked.size());
  for (const auto& p : ranked.papers()) records.push_back(p.record);
  return corpus_digest(records);
}

// ---------------------------------------------------------------------------
// Ranked cache
//
// Little-endian layout:
//   magic "CTRANKC\0" | u32 version | u8 tie policy | u64 universe | u64 count
//   | 32-byte corpus digest | 32-byte integrity SHA-256 | payload
// The integrity hash covers every other header byte and the payload.
// Payload, per paper in storage order:
//   u32 len, id | u32 len, country | i64 citations | u8 has_year, i32 year
//   | u64 global rank | u8 has_local, u64 local rank

inline constexpr std::array<char, 8> kCacheMagic{'C', 'T', 'R', 'A', 'N', 'K', 'C', '\0'};
inline constexpr std::uint32_t kCacheVersion = 1;
inline constexpr std::size_t kCacheHeaderSize = 8 + 4 + 1 + 8 + 8 + 32 + 32;

struct CacheHeader {
  std::uint32_t version = kCacheVersion;
  TiePolicy policy = TiePolicy::OrdinalById;
  std::uint64_t universe = 0;
  std::uint64_t count = 0;
  std::string digest;          // hex
  std::string integrity;  // hex
};

namespace detail {

class ByteWriter {
 public:
  template <class T>
  void put(T v) {
    auto u = static_cast<std::make_unsigned_t<T>>(v);
    for (std::size_t i = 0; i < sizeof(T); ++i) buf_.push_back(static_cast<char>((u >> (8 * i)) & 0xFF));
  }
  void put_string(std::string_view s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    buf_.append(s);
  }
  void put_raw(std::string_view s) { buf_.append(s); }
  std::string& bytes() { return buf_; }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  template <class T>
  T get() {
    need(sizeof(T));
    std::make_unsigned_t<T> u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      u |= static_cast<std::make_unsigned_t<T>>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }
  std::string_view get_raw(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::string get_string() { return std::string(get_raw(get<std::uint32_t>())); }
  [[nodiscard]] bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error(ErrorCode::CorruptCache, "cache truncated");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

inline std::string hex_to_bytes(std::string_view hex) {
  std::string out;
  for (std::size_t i = 0; i + 1 < hex.size(); i += 2) out.push_back(static_cast<char>(std::stoi(std::string(hex.substr(i, 2)), nullptr, 16)));
  return out;
}

inline std::string bytes_to_hex(std::string_view bytes) {
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned char c : bytes) {
    out.push_back(hex[c >> 4]);
    out.push_back(hex[c & 0xF]);
  }
  return out;
}

}  // namespace detail

inline std::string encode_ranked_cache(const RankedCorpus& ranked) {
  detail::ByteWriter payload;
  for (const auto& p : ranked.papers()) {
    payload.put_string(p.record.id);
    payload.put_string(p.record.country);
    payload.put<std::int64_t>(p.record.citations);
    payload.put<std::uint8_t>(p.record.year ? 1 : 0);
    payload.put<std::int32_t>(p.record.year.value_or(0));
    payload.put<std::uint64_t>(p.global_rank);
    payload.put<std::uint8_t>(p.local_rank ? 1 : 0);
    payload.put<std::uint64_t>(p.local_rank.value_or(0));
  }
  detail::ByteWriter out;
  out.put_raw(std::string_view(kCacheMagic.data(), kCacheMagic.size()));
  out.put<std::uint32_t>(kCacheVersion);
  out.put<std::uint8_t>(static_cast<std::uint8_t>(ranked.policy()));
  out.put<std::uint64_t>(ranked.universe_size());
  out.put<std::uint64_t>(ranked.size());
  out.put_raw(detail::hex_to_bytes(corpus_digest(ranked)));
  out.put_raw(detail::hex_to_bytes(sha256_hex(out.bytes() + payload.bytes())));
  out.put_raw(payload.bytes());
  return std::move(out.bytes());
}

inline CacheHeader decode_cache_header(std::string_view bytes) {
  detail::ByteReader in(bytes);
  if (in.get_raw(kCacheMagic.size()) != std::string_view(kCacheMagic.data(), kCacheMagic.size()))
    throw Error(ErrorCode::CorruptCache, "not a ranked cache file");
  CacheHeader h;
  h.version = in.get<std::uint32_t>();
  if (h.version != kCacheVersion)
    throw Error(ErrorCode::CorruptCache, "unsupported cache version " + std::to_string(h.version));
  auto policy = in.get<std::uint8_t>();
  if (policy > 2) throw Error(ErrorCode::CorruptCache, "unknown tie policy in cache");
  h.policy = static_cast<TiePolicy>(policy);
  h.universe = in.get<std::uint64_t>();
  h.count = in.get<std::uint64_t>();
  h.digest = detail::bytes_to_hex(in.get_raw(32));
  h.integrity = detail::bytes_to_hex(in.get_raw(32));
  return h;
}

/// Decodes a cache image; any damage surfaces as CorruptCache, never as a
/// partial corpus. A digest mismatch against `expected_digest` is StaleCache.
inline RankedCorpus decode_ranked_cache(std::string_view bytes,
                                        const std::optional<std::string>& expected_digest = std::nullopt) {
  auto h = decode_cache_header(bytes);
  auto payload = bytes.substr(kCacheHeaderSize);
  std::string covered(bytes.substr(0, kCacheHeaderSize - 32));
  covered.append(payload);
  if (sha256_hex(covered) != h.integrity) throw Error(ErrorCode::CorruptCache, "cache checksum mismatch");
  if (expected_digest && *expected_digest != h.digest)
    throw Error(ErrorCode::StaleCache, "cache was built from a different corpus");

  detail::ByteReader in(payload);
  std::vector<RankedPaper> papers;
  if (h.count > payload.size()) throw Error(ErrorCode::CorruptCache, "implausible record count");
  papers.reserve(h.count);
  for (std::uint64_t i = 0; i < h.count; ++i) {
    RankedPaper p;
    p.record.id = in.get_string();
    p.record.country = in.get_string();
    p.record.citations = in.get<std::int64_t>();
    bool has_year = in.get<std::uint8_t>() != 0;
    auto year = in.get<std::int32_t>();
    if (has_year) p.record.year = year;
    p.global_rank = in.get<std::uint64_t>();
    bool has_local = in.get<std::uint8_t>() != 0;
    auto local = in.get<std::uint64_t>();
    if (has_local) p.local_rank = local;
    papers.push_back(std::move(p));
  }
  if (!in.done()) throw Error(ErrorCode::CorruptCache, "trailing bytes in cache");
  try {
    return RankedCorpus(std::move(papers), h.policy, h.universe);
  } catch (const Error& e) {
    throw Error(ErrorCode::CorruptCache, std::string("cache violates ranking invariants: ") + e.what());
  }
}

/// Writes atomically; returns the SHA-256 of the cache file.
inline std::string write_ranked_cache(const RankedCorpus& ranked, const std::filesystem::path& path) {
  auto bytes = encode_ranked_cache(ranked);
  write_file_atomic(path, bytes);
  return sha256_hex(bytes);
}

inline RankedCorpus read_ranked_cache(const std::filesystem::path& path,
                                      const std::optional<std::string>& expected_digest = std::nullopt) {
  return decode_ranked_cache(read_file(path), expected_digest);
}

}  // namespace citetail
