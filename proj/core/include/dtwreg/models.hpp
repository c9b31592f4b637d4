#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dtwreg/core.hpp"
#include "dtwreg/dtw.hpp"
#include "dtwreg/features.hpp"

namespace dtwreg {

enum class Weighting { Uniform, InverseDistance };

std::string to_string(Weighting w);
/// "uniform" or "inverse-distance". Throws ValidationError.
Weighting parse_weighting(const std::string& text);

inline constexpr double kInverseDistanceEpsilon = 1e-9;
inline constexpr double kRidgeLambda = 1e-8;

struct ModelConfig {
  std::size_t k = 5;
  std::size_t window = 1;
  /// Channels the models see, in order. Empty means "let the caller decide"
  /// (the evaluation harness ranks channels in that case).
  std::vector<Wavelength> channels;
  SplitPolicy split_policy = SplitPolicy::automatic();
  Weighting weighting = Weighting::Uniform;

  DtwParams dtw() const { return DtwParams{window}; }
};

/// Dense row-major matrix of features, one row per wafer.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  std::span<double> row(std::size_t i) { return {values.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }
  double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

FeatureMatrix featurize(const Dataset& ds, std::span<const Wavelength> channels, const SplitPolicy& policy);

/// Column means and population stds. Zero-variance columns keep std 1 and
/// are inactive: their standardized value is always 0.
struct Standardizer {
  std::vector<double> means;
  std::vector<double> stds;
  std::vector<bool> active;

  static Standardizer fit(const FeatureMatrix& x);
  std::vector<double> apply(std::span<const double> row) const;
};

struct FittedOls {
  std::vector<double> coefficients;
  double intercept = 0.0;
  std::vector<double> feature_means;
  std::vector<double> feature_stds;
  bool ridge_used = false;
};

/// Least squares on standardized columns via the normal equations; adds
/// kRidgeLambda to the diagonal when the Gram matrix is singular.
FittedOls ols_fit(const FeatureMatrix& features, std::span<const double> targets);
double ols_predict(const FittedOls& model, std::span<const double> features);

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;
  bool operator==(const Neighbor&) const = default;
};

/// The k smallest distances, ordered by (distance, index). Candidates are
/// indices into a wafer-id-sorted Dataset, so index order is id order.
std::vector<Neighbor> select_neighbors(std::span<const double> distances, std::size_t k);

/// Uniform or 1/(d + eps) weighted mean of the neighbors' targets.
double neighbor_average(std::span<const Neighbor> neighbors, std::span<const double> targets, Weighting weighting);

/// R-4M: OLS on four-metric features.
class R4mModel {
public:
  static R4mModel fit(const Dataset& train, const ModelConfig& cfg);
  double predict(const WaferRecord& query) const;
  const FittedOls& ols() const noexcept { return ols_; }

private:
  ModelConfig cfg_;
  FittedOls ols_;
};

/// k-NN-4M: nearest neighbors in standardized four-metric space.
class Knn4mModel {
public:
  static Knn4mModel fit(const Dataset& train, const ModelConfig& cfg);
  double predict(const WaferRecord& query) const;
  std::vector<Neighbor> neighbors(const WaferRecord& query) const;

private:
  ModelConfig cfg_;
  Standardizer scaler_;
  FeatureMatrix train_z_;
  std::vector<double> targets_;
};

/// k-NN-DTW: nearest neighbors by summed per-channel DTW distance.
class KnnDtwModel {
public:
  static KnnDtwModel fit(const Dataset& train, const ModelConfig& cfg);
  double predict(const WaferRecord& query) const;
  std::vector<Neighbor> neighbors(const WaferRecord& query) const;

private:
  ModelConfig cfg_;
  Dataset train_;
  std::vector<double> targets_;
};

double knn_predict_4m(const Dataset& train, const WaferRecord& query, const ModelConfig& cfg);
double knn_predict_dtw(const Dataset& train, const WaferRecord& query, const ModelConfig& cfg);

}  // namespace dtwreg
