#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace dtwreg {

/// Wavelength key in nanometers. Compared exactly; values round-trip through
/// every on-disk format bit for bit.
using Wavelength = double;

inline constexpr double kDefaultSampleRateHz = 1.3;

/// One wavelength's intensity-vs-time trace for one wafer.
struct ChannelSeries {
  Wavelength wavelength_nm = 0.0;
  std::vector<double> samples;
  double sample_rate_hz = kDefaultSampleRateHz;

  std::size_t size() const noexcept { return samples.size(); }
  bool operator==(const ChannelSeries&) const = default;
};

struct WaferRecord {
  std::string wafer_id;
  std::map<Wavelength, ChannelSeries> channels;
  double etch_rate = 0.0;

  /// Throws ValidationError naming the wafer and wavelength when absent.
  const ChannelSeries& channel(Wavelength wl) const;
  bool has_channel(Wavelength wl) const { return channels.contains(wl); }
  /// Common tick count of all channels (0 for a wafer without channels).
  std::size_t ticks() const;

  bool operator==(const WaferRecord&) const = default;
};

/// Immutable collection of wafers sharing one wavelength set.
///
/// Wafers are kept sorted by id; `channel_order` is the evaluation order of
/// channels and defaults to the order in which they were first seen.
class Dataset {
public:
  Dataset() = default;

  /// Sorts wafers by id and validates every invariant. Throws ValidationError.
  Dataset(std::vector<WaferRecord> wafers, std::vector<Wavelength> channel_order);

  const std::vector<WaferRecord>& wafers() const noexcept { return wafers_; }
  const std::vector<Wavelength>& channel_order() const noexcept { return channel_order_; }
  std::size_t size() const noexcept { return wafers_.size(); }
  bool empty() const noexcept { return wafers_.empty(); }
  const WaferRecord& operator[](std::size_t i) const { return wafers_[i]; }

  /// Index of the wafer with the given id, or throws ValidationError.
  std::size_t index_of(const std::string& wafer_id) const;
  const WaferRecord& wafer(const std::string& wafer_id) const { return wafers_[index_of(wafer_id)]; }

  /// Wafers at `indices` (kept in id order), same channel order.
  Dataset subset(std::span<const std::size_t> indices) const;

  /// Same wafers, different channel evaluation order (must name known channels).
  Dataset with_channel_order(std::vector<Wavelength> order) const;

  std::vector<double> etch_rates() const;

  bool operator==(const Dataset&) const = default;

private:
  std::vector<WaferRecord> wafers_;
  std::vector<Wavelength> channel_order_;
};

enum class DataFormat { LongCsv, Json };

/// Picks the format from the extension: `.json` is JSON, anything else long CSV.
DataFormat format_from_path(const std::filesystem::path& path);

Dataset load_dataset(const std::filesystem::path& path, DataFormat format);
Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const Dataset& ds, const std::filesystem::path& path, DataFormat format);
void save_dataset(const Dataset& ds, const std::filesystem::path& path);

/// Stream variants, used by the file functions and by tests.
Dataset parse_long_csv(std::istream& in);
Dataset parse_json(std::istream& in);
void write_long_csv(const Dataset& ds, std::ostream& out);
void write_json(const Dataset& ds, std::ostream& out);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_real(double v);

/// Library version, e.g. "1.0.0".
const char* library_version() noexcept;

}  // namespace dtwreg
