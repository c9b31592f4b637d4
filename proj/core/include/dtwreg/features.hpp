#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dtwreg/core.hpp"

namespace dtwreg {

/// Two-stage summary of one channel: mean and population std before and
/// after `split_index`.
struct FourMetrics {
  double mean1 = 0.0;
  double std1 = 0.0;
  double mean2 = 0.0;
  double std2 = 0.0;
  std::size_t split_index = 0;
};

/// How the stage boundary is chosen: detected per channel, or one fixed tick.
struct SplitPolicy {
  std::optional<std::size_t> fixed_tick;

  static SplitPolicy automatic() { return {}; }
  static SplitPolicy fixed(std::size_t tick) { return {tick}; }
  bool is_auto() const noexcept { return !fixed_tick.has_value(); }

  /// "auto" or the tick number.
  std::string to_string() const;
  /// Accepts "auto" or a non-negative integer. Throws ValidationError.
  static SplitPolicy parse(const std::string& text);

  bool operator==(const SplitPolicy&) const = default;
};

/// Candidate splits t satisfy 0.2 n < t < 0.8 n.
std::pair<std::size_t, std::size_t> split_search_range(std::size_t n);

/// Split maximizing |mean(s[0, t)) - mean(s[t, n))| over the search range;
/// the smallest t wins ties. Requires at least 4 samples.
std::size_t detect_stage_split(std::span<const double> samples);
inline std::size_t detect_stage_split(const ChannelSeries& s) { return detect_stage_split(s.samples); }

FourMetrics four_metrics(std::span<const double> samples, std::size_t split_index);
inline FourMetrics four_metrics(const ChannelSeries& s, std::size_t split_index) {
  return four_metrics(s.samples, split_index);
}

/// Concatenated (mean1, std1, mean2, std2) blocks, one per channel, in the
/// order given.
std::vector<double> featurize_wafer(const WaferRecord& w, std::span<const Wavelength> channels,
                                    const SplitPolicy& policy);

/// Column names matching featurize_wafer: "<wl>_mean1", "<wl>_std1", ...
std::vector<std::string> feature_names(std::span<const Wavelength> channels);

/// Writes `wafer_id,etch_rate,<features...>` rows for every wafer.
void write_feature_csv(const Dataset& ds, std::span<const Wavelength> channels, const SplitPolicy& policy,
                       std::ostream& out);

}  // namespace dtwreg
