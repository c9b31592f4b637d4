#include "dtwreg/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "dtwreg/error.hpp"
#include "rng.hpp"

namespace dtwreg {

namespace {

// Familiar plasma emission lines, then an evenly spaced continuation.
constexpr std::array<double, 11> kLines = {703.75, 777.19, 656.28, 750.39, 811.53, 844.64,
                                           486.13, 519.82, 685.60, 725.66, 610.36};

std::string wafer_id(std::size_t i, std::size_t n) {
  const int width = std::max<int>(4, static_cast<int>(std::to_string(n).size()));
  char buf[32];
  std::snprintf(buf, sizeof(buf), "W%0*zu", width, i);
  return buf;
}

// Bounds the drop-off depth (1.13 x gap at the defaults). Deeper than about
// 1.2 x gap and a wafer shifted early gets its stage split placed at the
// drop-off instead of the plateau step.
constexpr double kLatentBound = 1.8;

}  // namespace

Wavelength synth_wavelength(std::size_t c) {
  return c < kLines.size() ? kLines[c] : 300.0 + 2.5 * static_cast<double>(c);
}

SynthLayout synth_layout(const SynthConfig& cfg) {
  SynthLayout l;
  l.split = cfg.stage_split_tick;
  l.tail_end = cfg.ticks > cfg.floor_ticks ? cfg.ticks - cfg.floor_ticks : 0;
  l.tail_start = l.tail_end > cfg.drop_ticks ? l.tail_end - cfg.drop_ticks : 0;
  return l;
}

void SynthConfig::validate() const {
  if (n_wafers < 1) throw ValidationError("synth: n_wafers must be positive");
  if (n_channels < 1) throw ValidationError("synth: n_channels must be positive");
  if (ticks < 8) throw ValidationError("synth: ticks must be at least 8");
  if (stage_split_tick < 4 || stage_split_tick + 4 > ticks) {
    throw ValidationError("synth: stage_split_tick must lie in [4, ticks - 4]");
  }
  if (jitter_max >= stage_split_tick) throw ValidationError("synth: jitter_max must be below stage_split_tick");
  const double noise = effective_noise_std();
  if (!std::isfinite(noise) || noise < 0.0) throw ValidationError("synth: noise_std must be non-negative");
  for (double v : {tail_effect, plateau_gap, rate_base, rate_spread, rate_noise, drop_base, drop_spread,
                   distractor_coupling, distractor_noise}) {
    if (!std::isfinite(v)) throw ValidationError("synth: parameters must be finite");
  }
  if (!(rate_base > 0.0)) throw ValidationError("synth: rate_base must be positive");
  if (drop_spread < 0.0) throw ValidationError("synth: drop_spread must be non-negative");
  if (rate_noise < 0.0 || distractor_noise < 0.0) throw ValidationError("synth: noise levels must be non-negative");
  for (std::size_t c : signal_channels) {
    if (c >= n_channels) throw ValidationError("synth: signal channel " + std::to_string(c) + " out of range");
  }
  if (drop_ticks < 1) throw ValidationError("synth: drop_ticks must be positive");
  if (floor_ticks <= jitter_max) throw ValidationError("synth: floor_ticks must exceed jitter_max");
  const auto layout = synth_layout(*this);
  if (layout.tail_start < stage_split_tick + jitter_max + 2) {
    throw ValidationError("synth: too few ticks after stage_split_tick for the drop-off segment");
  }
}

Dataset generate(const SynthConfig& cfg) {
  cfg.validate();
  const auto layout = synth_layout(cfg);
  const double noise = cfg.effective_noise_std();
  const double gap = cfg.plateau_gap;
  const std::size_t ramp = layout.tail_end - layout.tail_start;

  detail::Rng rng(cfg.seed);

  // Per-channel base levels, shared by every wafer.
  std::vector<double> level1(cfg.n_channels);
  std::vector<bool> is_signal(cfg.n_channels, false);
  for (std::size_t c : cfg.signal_channels) is_signal[c] = true;
  for (std::size_t c = 0; c < cfg.n_channels; ++c) level1[c] = gap * (0.5 + 1.5 * rng.uniform());

  std::vector<WaferRecord> wafers;
  wafers.reserve(cfg.n_wafers);
  std::vector<double> profile(cfg.ticks);

  for (std::size_t w = 0; w < cfg.n_wafers; ++w) {
    double latent = rng.normal();
    while (std::abs(latent) > kLatentBound) latent = rng.normal();
    const long long shift =
        rng.between(-static_cast<long long>(cfg.jitter_max), static_cast<long long>(cfg.jitter_max));
    const double rate_eps = rng.normal();

    WaferRecord rec;
    rec.wafer_id = wafer_id(w, cfg.n_wafers);
    // The etch rate is affine in the latent state; the drop-off slope is
    // log-linear in it, which a two-stage mean/std summary fits poorly.
    const double tail_scale = std::exp(cfg.tail_effect * cfg.drop_spread * latent);
    rec.etch_rate = cfg.rate_base + cfg.tail_effect * cfg.rate_spread * latent + cfg.rate_noise * rate_eps;
    if (rec.etch_rate <= 0.0) {
      throw ValidationError("synth: parameters produced a non-positive etch rate for " + rec.wafer_id);
    }
    const double rate_z = cfg.rate_spread > 0.0 ? (rec.etch_rate - cfg.rate_base) / cfg.rate_spread : 0.0;

    for (std::size_t c = 0; c < cfg.n_channels; ++c) {
      const double l1 = level1[c];
      double l2 = l1 + gap;
      double drop = cfg.drop_base * gap;
      if (is_signal[c]) {
        drop *= tail_scale;
      } else {
        l2 += gap * (cfg.distractor_coupling * rate_z + cfg.distractor_noise * rng.normal());
      }

      for (std::size_t t = 0; t < cfg.ticks; ++t) {
        if (t < layout.split) {
          profile[t] = l1;
        } else if (t < layout.tail_start) {
          profile[t] = l2;
        } else if (t < layout.tail_end) {
          profile[t] = l2 - drop * static_cast<double>(t - layout.tail_start + 1) / static_cast<double>(ramp);
        } else {
          profile[t] = l2 - drop;
        }
      }

      ChannelSeries s;
      s.wavelength_nm = synth_wavelength(c);
      s.samples.resize(cfg.ticks);
      const auto last = static_cast<long long>(cfg.ticks) - 1;
      for (std::size_t t = 0; t < cfg.ticks; ++t) {
        const long long src = std::clamp(static_cast<long long>(t) - shift, 0LL, last);
        const double eps = noise > 0.0 ? noise * rng.normal() : 0.0;
        s.samples[t] = profile[static_cast<std::size_t>(src)] + eps;
      }
      rec.channels.emplace(s.wavelength_nm, std::move(s));
    }
    wafers.push_back(std::move(rec));
  }

  std::vector<Wavelength> order;
  for (std::size_t c = 0; c < cfg.n_channels; ++c) order.push_back(synth_wavelength(c));
  return Dataset(std::move(wafers), std::move(order));
}

std::filesystem::path meta_path_for(const std::filesystem::path& dataset_path) {
  auto p = dataset_path;
  p.replace_extension(".meta.json");
  return p;
}

void write_synth_meta(const SynthConfig& cfg, std::ostream& out) {
  using nlohmann::ordered_json;
  const auto layout = synth_layout(cfg);
  ordered_json doc = {
      {"generator", kGeneratorVersion},
      {"prng", detail::Rng::kName},
      {"config",
       {
           {"n_wafers", cfg.n_wafers},
           {"n_channels", cfg.n_channels},
           {"ticks", cfg.ticks},
           {"stage_split_tick", cfg.stage_split_tick},
           {"jitter_max", cfg.jitter_max},
           {"noise_std", cfg.effective_noise_std()},
           {"tail_effect", cfg.tail_effect},
           {"seed", cfg.seed},
           {"signal_channels", cfg.signal_channels},
           {"drop_ticks", cfg.drop_ticks},
           {"floor_ticks", cfg.floor_ticks},
           {"plateau_gap", cfg.plateau_gap},
           {"rate_base", cfg.rate_base},
           {"rate_spread", cfg.rate_spread},
           {"rate_noise", cfg.rate_noise},
           {"drop_base", cfg.drop_base},
           {"drop_spread", cfg.drop_spread},
           {"distractor_coupling", cfg.distractor_coupling},
           {"distractor_noise", cfg.distractor_noise},
       }},
      {"layout", {{"split", layout.split}, {"tail_start", layout.tail_start}, {"tail_end", layout.tail_end}}},
  };
  out << doc.dump(2) << '\n';
}

void save_synthetic(const Dataset& ds, const SynthConfig& cfg, const std::filesystem::path& path) {
  save_dataset(ds, path);
  const auto meta = meta_path_for(path);
  std::ofstream out(meta, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + meta.string() + "' for writing");
  write_synth_meta(cfg, out);
  out.flush();
  if (!out) throw IoError("failed writing '" + meta.string() + "'");
}

}  // namespace dtwreg
