#include "dtwreg/features.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

#include "dtwreg/error.hpp"

namespace dtwreg {

namespace {

struct MeanStd {
  double mean;
  double std;
};

MeanStd mean_std(std::span<const double> xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size()))};
}

}  // namespace

std::string SplitPolicy::to_string() const { return fixed_tick ? std::to_string(*fixed_tick) : "auto"; }

SplitPolicy SplitPolicy::parse(const std::string& text) {
  if (text == "auto") return automatic();
  std::size_t tick = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), tick);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ValidationError("split policy must be 'auto' or a tick index, got '" + text + "'");
  }
  return fixed(tick);
}

std::pair<std::size_t, std::size_t> split_search_range(std::size_t n) {
  // Smallest t with 5t > n, largest t with 5t < 4n.
  const std::size_t lo = n / 5 + 1;
  const std::size_t hi = (4 * n - 1) / 5;
  return {lo, hi};
}

std::size_t detect_stage_split(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 4) throw ValidationError("stage split needs at least 4 ticks, got " + std::to_string(n));
  const auto [lo, hi] = split_search_range(n);

  double total = 0.0;
  for (double x : samples) total += x;
  double head = 0.0;
  for (std::size_t t = 0; t < lo; ++t) head += samples[t];

  std::size_t best_t = lo;
  double best_gap = -1.0;
  for (std::size_t t = lo; t <= hi; ++t) {
    const double m1 = head / static_cast<double>(t);
    const double m2 = (total - head) / static_cast<double>(n - t);
    const double gap = std::abs(m1 - m2);
    if (gap > best_gap) {
      best_gap = gap;
      best_t = t;
    }
    head += samples[t];
  }
  return best_t;
}

FourMetrics four_metrics(std::span<const double> samples, std::size_t split_index) {
  const std::size_t n = samples.size();
  if (split_index < 1 || split_index + 1 > n) {
    throw ValidationError("split index " + std::to_string(split_index) + " out of range for a series of " +
                          std::to_string(n) + " ticks");
  }
  const auto s1 = mean_std(samples.first(split_index));
  const auto s2 = mean_std(samples.subspan(split_index));
  return {s1.mean, s1.std, s2.mean, s2.std, split_index};
}

std::vector<double> featurize_wafer(const WaferRecord& w, std::span<const Wavelength> channels,
                                    const SplitPolicy& policy) {
  std::vector<double> out;
  out.reserve(4 * channels.size());
  for (Wavelength wl : channels) {
    const auto& s = w.channel(wl);
    const std::size_t split = policy.fixed_tick ? *policy.fixed_tick : detect_stage_split(s);
    const auto m = four_metrics(s, split);
    out.insert(out.end(), {m.mean1, m.std1, m.mean2, m.std2});
  }
  return out;
}

std::vector<std::string> feature_names(std::span<const Wavelength> channels) {
  std::vector<std::string> names;
  names.reserve(4 * channels.size());
  for (Wavelength wl : channels) {
    const std::string prefix = format_real(wl);
    for (const char* suffix : {"_mean1", "_std1", "_mean2", "_std2"}) names.push_back(prefix + suffix);
  }
  return names;
}

void write_feature_csv(const Dataset& ds, std::span<const Wavelength> channels, const SplitPolicy& policy,
                       std::ostream& out) {
  if (ds.empty()) throw ValidationError("dataset must contain at least one wafer");
  out << "wafer_id,etch_rate";
  for (const auto& name : feature_names(channels)) out << ',' << name;
  out << '\n';
  for (const auto& w : ds.wafers()) {
    out << w.wafer_id << ',' << format_real(w.etch_rate);
    for (double v : featurize_wafer(w, channels, policy)) out << ',' << format_real(v);
    out << '\n';
  }
}

}  // namespace dtwreg
