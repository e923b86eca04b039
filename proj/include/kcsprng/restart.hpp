#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "kcsprng/bits.hpp"
#include "kcsprng/curvestore.hpp"
#include "kcsprng/error.hpp"
#include "kcsprng/generator.hpp"

namespace kcsprng {

enum class RestartVerdict {
  distinct,            // every prefix differs and the mean distance is near 1/2
  frozen_determinism,  // rotation disabled: identical prefixes are the expected outcome
  rotation_exhausted,  // a status reset recycled a pair; identical prefixes are a warning
  fail,
};

inline std::string_view to_string(RestartVerdict v) {
  switch (v) {
    case RestartVerdict::distinct: return "distinct";
    case RestartVerdict::frozen_determinism: return "rotation-disabled determinism";
    case RestartVerdict::rotation_exhausted: return "rotation exhausted (warning)";
    case RestartVerdict::fail: return "FAIL";
  }
  return "?";
}

struct RestartBoot {
  std::size_t curve1 = 0, curve2 = 0;
  bool statuses_reset = false;
  BitStream prefix;
};

struct RestartReport {
  std::size_t prefix_bits = 0;
  std::vector<RestartBoot> boots;
  std::vector<std::vector<std::size_t>> distances;  // pairwise Hamming distances
  double mean_distance_fraction = 0.0;
  bool all_distinct = false;
  RestartVerdict verdict = RestartVerdict::fail;

  bool failed() const noexcept { return verdict == RestartVerdict::fail; }
};

/// Accepted band for the mean pairwise Hamming distance, as a fraction of
/// the prefix length.
inline constexpr double kRestartDistanceLow = 0.3;
inline constexpr double kRestartDistanceHigh = 0.7;

/// Boots the generator `runs` times from the first segment of `seedfile`,
/// taking a fresh curve pair from `table` each time, and compares the first
/// `prefix_bits` outputs of every boot.
inline RestartReport restart_test(const std::filesystem::path& seedfile, CurveTable& table, std::size_t runs,
                                  std::size_t prefix_bits, SelectMode mode = SelectMode::rotate) {
  if (runs < 2) throw UsageError("restart: need at least 2 runs");
  if (prefix_bits < 1) throw UsageError("restart: prefix must be at least 1 bit");
  if (table.size() < 2)
    throw TableError("restart: insufficient curves: table holds " + std::to_string(table.size()) + ", need 2");

  RestartReport rep;
  rep.prefix_bits = prefix_bits;
  for (std::size_t i = 0; i < runs; ++i) {
    auto src = std::make_shared<SeedFileSource>(seedfile);
    KcsPrng g = KcsPrng::boot(src, table, mode);
    const auto& sel = *g.selection();
    rep.boots.push_back({sel.first.index, sel.second.index, sel.statuses_reset, g.generate(prefix_bits)});
  }

  rep.distances.assign(runs, std::vector<std::size_t>(runs, 0));
  rep.all_distinct = true;
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < runs; ++i)
    for (std::size_t j = i + 1; j < runs; ++j) {
      const std::size_t d = hamming_distance(rep.boots[i].prefix, rep.boots[j].prefix);
      rep.distances[i][j] = rep.distances[j][i] = d;
      if (d == 0) rep.all_distinct = false;
      sum += static_cast<double>(d);
      ++pairs;
    }
  rep.mean_distance_fraction = sum / static_cast<double>(pairs) / static_cast<double>(prefix_bits);

  bool any_reset = false;
  for (const auto& b : rep.boots) any_reset = any_reset || b.statuses_reset;

  if (rep.all_distinct) {
    const bool in_band =
        rep.mean_distance_fraction >= kRestartDistanceLow && rep.mean_distance_fraction <= kRestartDistanceHigh;
    rep.verdict = in_band ? RestartVerdict::distinct : RestartVerdict::fail;
  } else if (mode == SelectMode::frozen) {
    rep.verdict = RestartVerdict::frozen_determinism;
  } else if (any_reset) {
    rep.verdict = RestartVerdict::rotation_exhausted;
  } else {
    rep.verdict = RestartVerdict::fail;
  }
  return rep;
}

}  // namespace kcsprng
