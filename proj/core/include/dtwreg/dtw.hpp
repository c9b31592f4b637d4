#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "dtwreg/core.hpp"

namespace dtwreg {

/// Sakoe-Chiba warping window in ticks; 0 forbids warping.
struct DtwParams {
  std::size_t window = 1;
};

struct DtwOutcome {
  double distance = 0.0;
  /// (i, j) index pairs from (0, 0) to (len(a)-1, len(b)-1).
  std::vector<std::pair<std::size_t, std::size_t>> path;
  /// Squared difference at each path step.
  std::vector<double> step_costs;
};

/// Band half-width actually used: max(window, |n - m|), so a path always exists.
std::size_t effective_window(std::size_t n, std::size_t m, const DtwParams& params);

/// Banded DTW distance: square root of the minimal accumulated squared
/// difference over monotone paths with |i - j| <= effective_window.
/// Uses two rolling rows. Throws ValidationError on empty input.
double dtw_distance(std::span<const double> a, std::span<const double> b, const DtwParams& params);

/// As dtw_distance, plus the optimal path. Ties on backtracking prefer the
/// diagonal, then the step advancing i, then the step advancing j.
DtwOutcome dtw_align(std::span<const double> a, std::span<const double> b, const DtwParams& params);

/// Sum of per-channel dtw_distance over `channels`.
double multichannel_distance(const WaferRecord& x, const WaferRecord& y, std::span<const Wavelength> channels,
                             const DtwParams& params);

/// Number of DP cells evaluated by the calling thread since the last reset.
std::uint64_t dtw_cell_count() noexcept;
void reset_dtw_cell_count() noexcept;

}  // namespace dtwreg
