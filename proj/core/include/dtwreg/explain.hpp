#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dtwreg/core.hpp"
#include "dtwreg/dtw.hpp"

namespace dtwreg {

struct RankedNeighbor {
  std::string wafer_id;
  double distance = 0.0;
  double etch_rate = 0.0;
};

/// Every other wafer ranked by single-channel DTW distance to the query.
struct NeighborReport {
  std::string query_id;
  double query_etch_rate = 0.0;
  Wavelength channel = 0.0;
  std::size_t window = 0;
  /// Ascending by distance, ties by wafer id.
  std::vector<RankedNeighbor> ranked;

  const RankedNeighbor& nearest() const { return ranked.front(); }
  const RankedNeighbor& furthest() const { return ranked.back(); }
};

/// Needs at least one other wafer. Throws ValidationError for unknown ids or channels.
NeighborReport neighbor_report(const Dataset& ds, const std::string& query_id, Wavelength channel,
                               const DtwParams& params);

void write_neighbor_report_json(const NeighborReport& report, std::ostream& out);

/// Alignment of the query against another wafer on one channel.
DtwOutcome align_wafers(const Dataset& ds, const std::string& query_id, const std::string& other_id,
                        Wavelength channel, const DtwParams& params);

/// `# distance=...,window=...` comment, then `step,i,j,query_value,other_value,step_cost`.
void write_alignment_csv(const Dataset& ds, const std::string& query_id, const std::string& other_id,
                         Wavelength channel, const DtwParams& params, std::ostream& out);

/// File variant of write_alignment_csv.
void export_alignment(const Dataset& ds, const std::string& query_id, const std::string& other_id,
                      Wavelength channel, const DtwParams& params, const std::filesystem::path& path);

struct RegionContribution {
  /// Query ticks [begin, end).
  std::size_t begin = 0;
  std::size_t end = 0;
  double cost = 0.0;
};

/// Splits the query's ticks into `n_regions` contiguous near-equal ranges and
/// sums the alignment step costs by the query index of each step.
std::vector<RegionContribution> region_contributions(const DtwOutcome& alignment, std::size_t query_length,
                                                     std::size_t n_regions);

std::vector<RegionContribution> region_contributions(const Dataset& ds, const std::string& query_id,
                                                     const std::string& other_id, Wavelength channel,
                                                     const DtwParams& params, std::size_t n_regions);

}  // namespace dtwreg
