#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dtwreg/core.hpp"

namespace fixture {

using Channels = std::vector<std::pair<double, std::vector<double>>>;

inline dtwreg::WaferRecord wafer(std::string id, double etch, const Channels& channels) {
  dtwreg::WaferRecord w;
  w.wafer_id = std::move(id);
  w.etch_rate = etch;
  for (const auto& [wl, samples] : channels) w.channels[wl] = dtwreg::ChannelSeries{wl, samples};
  return w;
}

inline dtwreg::Dataset dataset(std::vector<dtwreg::WaferRecord> wafers) {
  std::vector<double> order;
  for (const auto& [wl, _] : wafers.front().channels) order.push_back(wl);
  return dtwreg::Dataset(std::move(wafers), std::move(order));
}

inline std::string id(std::size_t i) {
  std::string s = std::to_string(i);
  return "W" + std::string(4 - std::min<std::size_t>(4, s.size()), '0') + s;
}

}  // namespace fixture
