#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dtwreg/core.hpp"
#include "dtwreg/models.hpp"

namespace dtwreg {

inline constexpr std::uint64_t kDefaultSeed = 20190901;
inline constexpr std::size_t kDefaultFolds = 10;

/// 100 * mean(|y - yhat| / |y|). Throws on empty input, length mismatch, or
/// a zero true value.
double mape(std::span<const double> y_true, std::span<const double> y_pred);

struct FoldPlan {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<std::size_t>> folds;

  /// Throws ValidationError unless folds partition {0..n-1} into non-empty sets.
  void validate() const;
  /// FNV-1a over n and the fold contents.
  std::uint64_t hash() const;
  std::size_t min_train_size() const;
};

/// Seeded shuffle dealt round-robin into `fold_count` folds, so sizes differ
/// by at most one. Each fold's indices are sorted.
FoldPlan kfold_plan(std::size_t n, std::size_t fold_count, std::uint64_t seed);

enum class ModelKind { R4M, Knn4M, KnnDtw };

inline constexpr ModelKind kAllModels[] = {ModelKind::R4M, ModelKind::Knn4M, ModelKind::KnnDtw};

/// Display name used in reports: "R-4M", "kNN-4M", "kNN-DTW".
std::string model_name(ModelKind m);
/// Accepts "r4m", "knn4m", "knndtw" or the display names, case-insensitively.
ModelKind parse_model(const std::string& text);

struct CellResult {
  ModelKind model = ModelKind::KnnDtw;
  /// Channel count for comparisons, parameter value for sweeps.
  long long x = 0;
  std::vector<double> fold_mapes;
  double mape_mean = 0.0;
  /// Sample standard deviation across folds (0 for a single fold).
  double mape_std = 0.0;
  std::uint64_t plan_hash = 0;
};

struct ChannelScore {
  Wavelength wavelength_nm = 0.0;
  double mape = 0.0;
};

struct BenchReport {
  /// "comparison", "sweep-k" or "sweep-window".
  std::string kind;
  ModelConfig config;
  std::uint64_t seed = 0;
  std::size_t fold_count = 0;
  std::uint64_t plan_hash = 0;
  /// Channel list the cells were evaluated on (prefixes of it for comparisons).
  std::vector<Wavelength> channels;
  /// Single-channel k-NN-DTW ranking, present when the channel order was derived.
  std::vector<ChannelScore> channel_ranking;
  std::vector<CellResult> cells;
  std::vector<std::string> notes;

  /// Cell for (model, x) or nullptr.
  const CellResult* find(ModelKind model, long long x) const;
  /// Cell of `model` with the lowest mape_mean (first on ties), or nullptr.
  const CellResult* argmin(ModelKind model) const;
};

struct EvalOptions {
  /// Worker threads for fold evaluation; results never depend on it.
  std::size_t jobs = 1;
  /// Overrides the seeded plan (must cover the dataset).
  std::optional<FoldPlan> plan;
  std::vector<ModelKind> models{std::begin(kAllModels), std::end(kAllModels)};
};

/// Per-fold MAPEs of one model on one channel list.
std::vector<double> cross_validate(const Dataset& ds, ModelKind model, const ModelConfig& cfg, const FoldPlan& plan,
                                   std::size_t jobs = 1);

/// Channels ordered by single-channel k-NN-DTW MAPE ascending; ties keep
/// dataset channel order.
std::vector<ChannelScore> rank_channels(const Dataset& ds, const ModelConfig& cfg, const FoldPlan& plan,
                                        std::size_t jobs = 1);

/// Every selected model on the first 1..max_channels channels, one shared
/// fold plan. With cfg.channels empty the channel order is derived by
/// rank_channels and recorded in the report.
BenchReport run_comparison(const Dataset& ds, const ModelConfig& cfg, std::size_t max_channels,
                           std::size_t fold_count, std::uint64_t seed, const EvalOptions& opts = {});

enum class SweepParameter { K, Window };

std::string to_string(SweepParameter p);
SweepParameter parse_sweep_parameter(const std::string& text);

/// k sweeps run k-NN-4M, window sweeps run k-NN-DTW, both on the first
/// configured (or best-ranked) channel only.
BenchReport sweep_parameter(const Dataset& ds, const ModelConfig& cfg, SweepParameter parameter,
                            std::span<const std::size_t> values, std::size_t fold_count, std::uint64_t seed,
                            const EvalOptions& opts = {});

void write_report_json(const BenchReport& report, std::ostream& out);
/// `model,channel_count_or_param,fold,mape`
void write_report_folds_csv(const BenchReport& report, std::ostream& out);
/// `model,x,mape_mean,mape_std`
void write_report_summary_csv(const BenchReport& report, std::ostream& out);

/// Writes `<prefix>.json`, `<prefix>.folds.csv` and `<prefix>.summary.csv`.
void save_report(const BenchReport& report, const std::filesystem::path& prefix);

}  // namespace dtwreg
