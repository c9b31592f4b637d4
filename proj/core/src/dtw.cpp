#include "dtwreg/dtw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dtwreg/error.hpp"

namespace dtwreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

thread_local std::uint64_t cells_touched = 0;

void check_inputs(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ValidationError("dtw: input series must be non-empty");
}

// Column range [lo, hi] of row i inside the band.
struct BandRow {
  std::size_t lo;
  std::size_t hi;
};

BandRow band_row(std::size_t i, std::size_t m, std::size_t w) {
  const std::size_t lo = i > w ? i - w : 0;
  const std::size_t hi = std::min(m - 1, i + w);
  return {lo, hi};
}

// Banded cost matrix: row i stores columns [i - w, i + w] at offsets 0..2w.
class BandMatrix {
public:
  BandMatrix(std::size_t n, std::size_t w) : w_(w), width_(2 * w + 1), cells_(n * width_, kInf) {}

  double get(std::size_t i, std::size_t j) const {
    if (j + w_ < i || j > i + w_) return kInf;
    return cells_[i * width_ + (j + w_ - i)];
  }
  void set(std::size_t i, std::size_t j, double v) { cells_[i * width_ + (j + w_ - i)] = v; }

private:
  std::size_t w_;
  std::size_t width_;
  std::vector<double> cells_;
};

}  // namespace

std::size_t effective_window(std::size_t n, std::size_t m, const DtwParams& params) {
  const std::size_t diff = n > m ? n - m : m - n;
  return std::max(params.window, diff);
}

double dtw_distance(std::span<const double> a, std::span<const double> b, const DtwParams& params) {
  check_inputs(a, b);
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  const std::size_t w = effective_window(n, m, params);

  // prev/curr hold accumulated cost for columns of rows i-1 and i.
  std::vector<double> prev(m, kInf);
  std::vector<double> curr(m, kInf);
  std::uint64_t touched = 0;

  for (std::size_t i = 0; i < n; ++i) {
    const auto [lo, hi] = band_row(i, m, w);
    // Columns of the previous row outside this row's band are never read as
    // "left" neighbours; only the cell just before lo must be unreachable.
    if (lo > 0) curr[lo - 1] = kInf;
    for (std::size_t j = lo; j <= hi; ++j) {
      const double d = a[i] - b[j];
      double best;
      if (i == 0 && j == 0) {
        best = 0.0;
      } else {
        best = kInf;
        if (i > 0) {
          best = prev[j];
          if (j > 0) best = std::min(best, prev[j - 1]);
        }
        if (j > 0) best = std::min(best, curr[j - 1]);
      }
      curr[j] = best + d * d;
    }
    touched += hi - lo + 1;
    // Cells of this row beyond hi must read as unreachable from row i+1.
    if (hi + 1 < m) curr[hi + 1] = kInf;
    std::swap(prev, curr);
  }
  cells_touched += touched;
  return std::sqrt(prev[m - 1]);
}

DtwOutcome dtw_align(std::span<const double> a, std::span<const double> b, const DtwParams& params) {
  check_inputs(a, b);
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  const std::size_t w = effective_window(n, m, params);

  BandMatrix acc(n, w);
  std::uint64_t touched = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto [lo, hi] = band_row(i, m, w);
    for (std::size_t j = lo; j <= hi; ++j) {
      const double d = a[i] - b[j];
      double best;
      if (i == 0 && j == 0) {
        best = 0.0;
      } else {
        best = kInf;
        if (i > 0) best = acc.get(i - 1, j);
        if (i > 0 && j > 0) best = std::min(best, acc.get(i - 1, j - 1));
        if (j > 0) best = std::min(best, acc.get(i, j - 1));
      }
      acc.set(i, j, best + d * d);
    }
    touched += hi - lo + 1;
  }
  cells_touched += touched;

  DtwOutcome out;
  out.distance = std::sqrt(acc.get(n - 1, m - 1));

  std::size_t i = n - 1;
  std::size_t j = m - 1;
  out.path.emplace_back(i, j);
  while (i > 0 || j > 0) {
    if (i == 0) {
      --j;
    } else if (j == 0) {
      --i;
    } else {
      const double diag = acc.get(i - 1, j - 1);
      const double up = acc.get(i - 1, j);    // reached by advancing i
      const double left = acc.get(i, j - 1);  // reached by advancing j
      if (diag <= up && diag <= left) {
        --i;
        --j;
      } else if (up <= left) {
        --i;
      } else {
        --j;
      }
    }
    out.path.emplace_back(i, j);
  }
  std::reverse(out.path.begin(), out.path.end());

  out.step_costs.reserve(out.path.size());
  for (auto [pi, pj] : out.path) {
    const double d = a[pi] - b[pj];
    out.step_costs.push_back(d * d);
  }
  return out;
}

double multichannel_distance(const WaferRecord& x, const WaferRecord& y, std::span<const Wavelength> channels,
                             const DtwParams& params) {
  double total = 0.0;
  for (Wavelength wl : channels) {
    total += dtw_distance(x.channel(wl).samples, y.channel(wl).samples, params);
  }
  return total;
}

std::uint64_t dtw_cell_count() noexcept { return cells_touched; }
void reset_dtw_cell_count() noexcept { cells_touched = 0; }

}  // namespace dtwreg
