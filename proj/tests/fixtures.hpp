#pragma once

// Published country tables, entered verbatim. Printed values are kept as
// strings so comparisons happen at printed precision.

#include <array>
#include <cstdint>
#include <string>

namespace fixtures {

struct RatioRow {
  const char* country;
  std::uint64_t papers_2012;
  std::uint64_t ptop10_2012;
  const char* ratio_2012;
  std::uint64_t papers_decade;
  std::uint64_t ptop1_decade;
  const char* sqrt_ratio_decade;
  const char* consistency;
};

inline constexpr std::array<RatioRow, 15> kCountryRatios{{
    {"Singapore", 2868, 467, "0.163", 27224, 486, "0.134", "1.22"},
    {"USA", 82347, 12573, "0.153", 797338, 16247, "0.143", "1.07"},
    {"Switzerland", 3382, 495, "0.146", 32248, 523, "0.127", "1.15"},
    {"Netherlands", 4227, 531, "0.126", 40693, 480, "0.109", "1.16"},
    {"UK", 14510, 1754, "0.121", 145018, 1774, "0.111", "1.09"},
    {"Australia", 7137, 804, "0.113", 71244, 622, "0.093", "1.21"},
    {"Canada", 10947, 1051, "0.096", 105993, 893, "0.092", "1.05"},
    {"Germany", 20247, 1934, "0.095", 193855, 1569, "0.090", "1.06"},
    {"China", 90589, 7157, "0.079", 1024889, 5438, "0.073", "1.08"},
    {"France", 14371, 1120, "0.078", 140436, 792, "0.075", "1.04"},
    {"Italy", 11475, 840, "0.073", 115995, 450, "0.062", "1.18"},
    {"Japan", 28002, 1662, "0.059", 282393, 1407, "0.071", "0.84"},
    {"South Korea", 19918, 1115, "0.056", 198935, 793, "0.063", "0.89"},
    {"India", 22738, 1212, "0.053", 246151, 532, "0.047", "1.15"},
    {"Taiwan", 11165, 569, "0.051", 106991, 297, "0.053", "0.97"},
}};

inline constexpr const char* kSummaryMean = "1.10";
inline constexpr const char* kSummarySd = "0.07";
inline constexpr std::array<const char*, 2> kSummaryExcluded{"Japan", "South Korea"};

struct TopCountRow {
  const char* country;
  std::uint64_t papers;
  std::array<std::uint64_t, 4> top;  // top 5000, 2000, 1000, 500
};

inline constexpr std::array<std::uint64_t, 4> kTopN{5000, 2000, 1000, 500};

inline constexpr std::array<TopCountRow, 15> kTopCounts{{
    {"USA", 797338, {1276, 560, 274, 130}},
    {"Germany", 193855, {241, 52, 32, 19}},
    {"UK", 145018, {156, 61, 36, 18}},
    {"China", 1024889, {388, 95, 34, 15}},
    {"Australia", 71244, {53, 25, 16, 10}},
    {"Japan", 282393, {93, 28, 17, 9}},
    {"Switzerland", 32248, {42, 22, 12, 7}},
    {"France", 140436, {54, 27, 12, 6}},
    {"South Korea", 198933, {51, 14, 7, 5}},
    {"Netherlands", 40693, {33, 15, 8, 4}},
    {"Italy", 115995, {22, 8, 3, 3}},
    {"Canada", 105993, {63, 22, 9, 3}},
    {"Singapore", 27224, {31, 16, 5, 2}},
    {"India", 246151, {16, 4, 2, 0}},
    {"Taiwan", 106991, {12, 1, 1, 0}},
}};

struct PerMilleRow {
  const char* country;
  std::uint64_t papers;
  std::array<const char*, 4> per_mille;
};

inline constexpr std::array<PerMilleRow, 15> kTopPerMille{{
    {"Switzerland", 32248, {"1.302", "0.682", "0.372", "0.217"}},
    {"USA", 797338, {"1.600", "0.702", "0.344", "0.163"}},
    {"Australia", 71244, {"0.744", "0.351", "0.225", "0.140"}},
    {"UK", 145018, {"1.076", "0.421", "0.248", "0.124"}},
    {"Netherlands", 40693, {"0.811", "0.369", "0.197", "0.098"}},
    {"Germany", 193855, {"1.243", "0.268", "0.165", "0.098"}},
    {"Singapore", 27224, {"1.139", "0.588", "0.184", "0.073"}},
    {"France", 140436, {"0.385", "0.192", "0.085", "0.043"}},
    {"Japan", 282393, {"0.329", "0.099", "0.060", "0.032"}},
    {"Canada", 105993, {"0.594", "0.208", "0.085", "0.028"}},
    {"Italy", 115995, {"0.190", "0.069", "0.026", "0.026"}},
    {"South Korea", 198933, {"0.256", "0.070", "0.035", "0.025"}},
    {"China", 1024889, {"0.379", "0.093", "0.033", "0.015"}},
    {"India", 246151, {"0.065", "0.016", "0.008", "0.000"}},
    {"Taiwan", 106991, {"0.112", "0.009", "0.009", "0.000"}},
}};

struct TailRankRow {
  const char* country;
  std::uint64_t papers;
  std::uint64_t rank1, rank15, rank40;
  const char* e_p;
};

inline constexpr std::array<TailRankRow, 15> kTailRanks{{
    {"Switzerland", 32248, 53, 1015, 4289, "0.238"},
    {"Japan", 282393, 16, 759, 3092, "0.200"},
    {"Netherlands", 40693, 122, 1932, 6551, "0.198"},
    {"France", 140436, 33, 1320, 3946, "0.151"},
    {"Germany", 193855, 3, 198, 1224, "0.147"},
    {"Australia", 71244, 17, 1183, 3720, "0.145"},
    {"UK", 145018, 5, 342, 1192, "0.140"},
    {"USA", 797338, 6, 48, 123, "0.133"},
    {"Singapore", 27224, 484, 2096, 5406, "0.101"},
    {"China", 1024889, 40, 473, 1233, "0.062"},
    {"Canada", 105993, 180, 1500, 3434, "0.061"},
    {"Italy", 115995, 99, 3681, 7806, "0.045"},
    {"South Korea", 198933, 85, 2040, 4503, "0.033"},
    {"India", 246151, 858, 4487, 8795, "0.011"},
    {"Taiwan", 106991, 712, 6918, 10766, "0.007"},
}};

inline constexpr std::uint64_t kWorldPapers = 5922804;

}  // namespace fixtures
