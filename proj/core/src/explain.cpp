#include "dtwreg/explain.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "dtwreg/error.hpp"

namespace dtwreg {

NeighborReport neighbor_report(const Dataset& ds, const std::string& query_id, Wavelength channel,
                               const DtwParams& params) {
  const auto& query = ds.wafer(query_id);
  const auto& q = query.channel(channel).samples;
  if (ds.size() < 2) throw ValidationError("neighbor report needs at least two wafers");

  NeighborReport report;
  report.query_id = query_id;
  report.query_etch_rate = query.etch_rate;
  report.channel = channel;
  report.window = params.window;
  report.ranked.reserve(ds.size() - 1);
  for (const auto& w : ds.wafers()) {
    if (w.wafer_id == query_id) continue;
    report.ranked.push_back({w.wafer_id, dtw_distance(q, w.channel(channel).samples, params), w.etch_rate});
  }
  std::ranges::stable_sort(report.ranked, [](const RankedNeighbor& a, const RankedNeighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.wafer_id < b.wafer_id);
  });
  return report;
}

void write_neighbor_report_json(const NeighborReport& report, std::ostream& out) {
  using nlohmann::ordered_json;
  auto entry = [](const RankedNeighbor& n) {
    return ordered_json{{"wafer_id", n.wafer_id}, {"distance", n.distance}, {"etch_rate", n.etch_rate}};
  };
  ordered_json ranked = ordered_json::array();
  for (const auto& n : report.ranked) ranked.push_back(entry(n));
  ordered_json doc = {
      {"query_id", report.query_id},
      {"query_etch_rate", report.query_etch_rate},
      {"channel", report.channel},
      {"window", report.window},
      {"nearest", entry(report.nearest())},
      {"furthest", entry(report.furthest())},
      {"ranked", std::move(ranked)},
  };
  out << doc.dump(2) << '\n';
}

DtwOutcome align_wafers(const Dataset& ds, const std::string& query_id, const std::string& other_id,
                        Wavelength channel, const DtwParams& params) {
  const auto& q = ds.wafer(query_id).channel(channel).samples;
  const auto& o = ds.wafer(other_id).channel(channel).samples;
  return dtw_align(q, o, params);
}

void write_alignment_csv(const Dataset& ds, const std::string& query_id, const std::string& other_id,
                         Wavelength channel, const DtwParams& params, std::ostream& out) {
  const auto& q = ds.wafer(query_id).channel(channel).samples;
  const auto& o = ds.wafer(other_id).channel(channel).samples;
  const auto alignment = dtw_align(q, o, params);
  out << "# query=" << query_id << ",other=" << other_id << ",channel=" << format_real(channel)
      << ",distance=" << format_real(alignment.distance) << ",window=" << params.window << '\n';
  out << "step,i,j,query_value,other_value,step_cost\n";
  for (std::size_t s = 0; s < alignment.path.size(); ++s) {
    const auto [i, j] = alignment.path[s];
    out << s << ',' << i << ',' << j << ',' << format_real(q[i]) << ',' << format_real(o[j]) << ','
        << format_real(alignment.step_costs[s]) << '\n';
  }
}

void export_alignment(const Dataset& ds, const std::string& query_id, const std::string& other_id,
                      Wavelength channel, const DtwParams& params, const std::filesystem::path& path) {
  // Validate ids before touching the file system.
  ds.wafer(query_id).channel(channel);
  ds.wafer(other_id).channel(channel);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_alignment_csv(ds, query_id, other_id, channel, params, out);
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<RegionContribution> region_contributions(const DtwOutcome& alignment, std::size_t query_length,
                                                     std::size_t n_regions) {
  if (n_regions < 1 || n_regions > query_length) {
    throw ValidationError("n_regions must be between 1 and the series length (" + std::to_string(query_length) +
                          "), got " + std::to_string(n_regions));
  }
  std::vector<RegionContribution> regions(n_regions);
  std::vector<std::size_t> region_of(query_length);
  for (std::size_t r = 0; r < n_regions; ++r) {
    regions[r].begin = r * query_length / n_regions;
    regions[r].end = (r + 1) * query_length / n_regions;
    for (std::size_t t = regions[r].begin; t < regions[r].end; ++t) region_of[t] = r;
  }
  for (std::size_t s = 0; s < alignment.path.size(); ++s) {
    regions[region_of.at(alignment.path[s].first)].cost += alignment.step_costs[s];
  }
  return regions;
}

std::vector<RegionContribution> region_contributions(const Dataset& ds, const std::string& query_id,
                                                     const std::string& other_id, Wavelength channel,
                                                     const DtwParams& params, std::size_t n_regions) {
  const auto alignment = align_wafers(ds, query_id, other_id, channel, params);
  return region_contributions(alignment, ds.wafer(query_id).channel(channel).size(), n_regions);
}

}  // namespace dtwreg
