#include "dtwreg/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <system_error>

#include "dtwreg/error.hpp"

namespace dtwreg {

const char* library_version() noexcept { return DTWREG_VERSION; }

std::string format_real(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::logic_error("to_chars failed");
  return std::string(buf, end);
}

const ChannelSeries& WaferRecord::channel(Wavelength wl) const {
  auto it = channels.find(wl);
  if (it == channels.end()) {
    throw ValidationError("wafer '" + wafer_id + "' has no channel at wavelength " +
                          format_real(wl) + " nm");
  }
  return it->second;
}

std::size_t WaferRecord::ticks() const {
  return channels.empty() ? 0 : channels.begin()->second.size();
}

namespace {

void validate_wafer(const WaferRecord& w) {
  const std::string who = "wafer '" + w.wafer_id + "'";
  if (w.wafer_id.empty()) throw ValidationError("wafer_id must be non-empty");
  if (!std::isfinite(w.etch_rate) || w.etch_rate <= 0.0) {
    throw ValidationError(who + ": etch_rate must be positive and finite");
  }
  if (w.channels.empty()) throw ValidationError(who + " has no channels");
  const std::size_t ticks = w.channels.begin()->second.size();
  for (const auto& [wl, series] : w.channels) {
    const std::string where = who + " wavelength " + format_real(wl);
    if (!std::isfinite(wl) || wl <= 0.0) throw ValidationError(where + ": wavelength must be positive");
    if (series.wavelength_nm != wl) throw ValidationError(where + ": series wavelength does not match its key");
    if (series.samples.empty()) throw ValidationError(where + ": series is empty");
    if (!(series.sample_rate_hz > 0.0) || !std::isfinite(series.sample_rate_hz)) {
      throw ValidationError(where + ": sample rate must be positive");
    }
    if (series.size() != ticks) {
      throw ValidationError(where + ": has " + std::to_string(series.size()) +
                            " ticks but other channels of the wafer have " + std::to_string(ticks));
    }
    for (std::size_t t = 0; t < series.samples.size(); ++t) {
      if (!std::isfinite(series.samples[t])) {
        throw ValidationError(where + " tick " + std::to_string(t) + ": non-finite intensity");
      }
    }
  }
}

}  // namespace

Dataset::Dataset(std::vector<WaferRecord> wafers, std::vector<Wavelength> channel_order)
    : wafers_(std::move(wafers)), channel_order_(std::move(channel_order)) {
  if (wafers_.empty()) throw ValidationError("dataset must contain at least one wafer");
  std::ranges::sort(wafers_, {}, &WaferRecord::wafer_id);
  for (std::size_t i = 1; i < wafers_.size(); ++i) {
    if (wafers_[i].wafer_id == wafers_[i - 1].wafer_id) {
      throw ValidationError("duplicate wafer_id '" + wafers_[i].wafer_id + "'");
    }
  }
  for (const auto& w : wafers_) validate_wafer(w);

  const auto& reference = wafers_.front();
  std::set<Wavelength> order_set(channel_order_.begin(), channel_order_.end());
  if (order_set.size() != channel_order_.size()) throw ValidationError("channel_order has duplicates");
  for (Wavelength wl : channel_order_) {
    if (!reference.has_channel(wl)) {
      throw ValidationError("channel_order names wavelength " + format_real(wl) +
                            " missing from wafer '" + reference.wafer_id + "'");
    }
  }
  if (order_set.size() != reference.channels.size()) {
    throw ValidationError("channel_order must list every channel of the dataset");
  }
  for (const auto& w : wafers_) {
    for (const auto& [wl, _] : reference.channels) {
      if (!w.has_channel(wl)) {
        throw ValidationError("wafer '" + w.wafer_id + "' lacks wavelength " + format_real(wl) +
                              " present in wafer '" + reference.wafer_id + "'");
      }
    }
    for (const auto& [wl, _] : w.channels) {
      if (!reference.has_channel(wl)) {
        throw ValidationError("wafer '" + reference.wafer_id + "' lacks wavelength " + format_real(wl) +
                              " present in wafer '" + w.wafer_id + "'");
      }
    }
  }
}

std::size_t Dataset::index_of(const std::string& wafer_id) const {
  auto it = std::ranges::lower_bound(wafers_, wafer_id, {}, &WaferRecord::wafer_id);
  if (it == wafers_.end() || it->wafer_id != wafer_id) {
    throw ValidationError("unknown wafer '" + wafer_id + "'");
  }
  return static_cast<std::size_t>(it - wafers_.begin());
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<WaferRecord> picked;
  picked.reserve(indices.size());
  for (std::size_t i : indices) picked.push_back(wafers_.at(i));
  return Dataset(std::move(picked), channel_order_);
}

Dataset Dataset::with_channel_order(std::vector<Wavelength> order) const {
  Dataset copy = *this;
  std::set<Wavelength> current(channel_order_.begin(), channel_order_.end());
  std::set<Wavelength> next(order.begin(), order.end());
  if (next.size() != order.size() || next != current) {
    throw ValidationError("channel order must be a permutation of the dataset's channels");
  }
  copy.channel_order_ = std::move(order);
  return copy;
}

std::vector<double> Dataset::etch_rates() const {
  std::vector<double> out;
  out.reserve(wafers_.size());
  for (const auto& w : wafers_) out.push_back(w.etch_rate);
  return out;
}

}  // namespace dtwreg
