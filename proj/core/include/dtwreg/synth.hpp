#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dtwreg/core.hpp"

namespace dtwreg {

inline constexpr const char* kGeneratorVersion = "dtwreg-synth/1";

/// Parameters of the OES-like generator.
///
/// Every wafer shares a two-plateau profile per channel (stage 1, stage 2),
/// shifted in time by a per-wafer integer offset. Signal channels end stage 2
/// with a drop-off whose depth follows a latent wafer state that also drives
/// the etch rate. Distractor channels carry a weak, independently noisy copy
/// of the etch rate in their stage-2 level.
struct SynthConfig {
  std::size_t n_wafers = 200;
  std::size_t n_channels = 11;
  std::size_t ticks = 57;
  std::size_t stage_split_tick = 20;
  std::size_t jitter_max = 3;
  /// Defaults to 0.02 * plateau_gap when unset.
  std::optional<double> noise_std;
  /// Scales the latent coupling between drop-off depth and etch rate.
  double tail_effect = 1.0;
  std::uint64_t seed = 20190901;
  /// Channel indices that carry the drop-off signal.
  std::vector<std::size_t> signal_channels{0};

  /// Length of the drop-off ramp and of the low plateau that follows it, in
  /// ticks. The low plateau must outlast the jitter so shifts never cut the ramp.
  std::size_t drop_ticks = 4;
  std::size_t floor_ticks = 5;

  /// Stage-2 minus stage-1 intensity level.
  double plateau_gap = 1.0;
  /// Mean etch rate and its latent-driven spread (opaque rate units).
  double rate_base = 100.0;
  double rate_spread = 8.0;
  /// Etch-rate measurement noise, independent of everything else.
  double rate_noise = 1.5;
  /// Mean drop-off depth and its latent-driven spread, in units of plateau_gap.
  double drop_base = 0.5;
  double drop_spread = 0.45;
  /// Distractor stage-2 level: coupling to the standardized etch rate and
  /// independent per-wafer noise, in units of plateau_gap.
  double distractor_coupling = 0.04;
  double distractor_noise = 0.02;

  double effective_noise_std() const { return noise_std.value_or(0.02 * plateau_gap); }

  /// Throws ValidationError on an invalid combination.
  void validate() const;
};

/// Tick layout shared by all wafers before jitter.
struct SynthLayout {
  std::size_t split = 0;       // first stage-2 tick
  std::size_t tail_start = 0;  // first drop-off tick
  std::size_t tail_end = 0;    // first tick of the low plateau after the drop
};

SynthLayout synth_layout(const SynthConfig& cfg);

/// Wavelength assigned to channel index c.
Wavelength synth_wavelength(std::size_t c);

Dataset generate(const SynthConfig& cfg);

/// Sidecar path for a dataset file: `d.csv` -> `d.meta.json`.
std::filesystem::path meta_path_for(const std::filesystem::path& dataset_path);

void write_synth_meta(const SynthConfig& cfg, std::ostream& out);
/// Saves the dataset (format from extension) and its `.meta.json` sidecar.
void save_synthetic(const Dataset& ds, const SynthConfig& cfg, const std::filesystem::path& path);

}  // namespace dtwreg
