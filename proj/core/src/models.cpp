#include "dtwreg/models.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "dtwreg/error.hpp"

namespace dtwreg {

namespace {

void check_k(std::size_t k, std::size_t train_size) {
  if (k < 1) throw ValidationError("k must be at least 1");
  if (k > train_size) {
    throw ValidationError("k = " + std::to_string(k) + " exceeds training-set size " + std::to_string(train_size));
  }
}

const std::vector<Wavelength>& channels_or_throw(const ModelConfig& cfg) {
  if (cfg.channels.empty()) throw ValidationError("model config names no channels");
  return cfg.channels;
}

bool degenerate_std(double std, double mean) {
  return !(std > 1e-12 * std::max(std::abs(mean), std::numeric_limits<double>::min()));
}

}  // namespace

std::string to_string(Weighting w) { return w == Weighting::Uniform ? "uniform" : "inverse-distance"; }

Weighting parse_weighting(const std::string& text) {
  if (text == "uniform") return Weighting::Uniform;
  if (text == "inverse-distance") return Weighting::InverseDistance;
  throw ValidationError("weighting must be 'uniform' or 'inverse-distance', got '" + text + "'");
}

FeatureMatrix featurize(const Dataset& ds, std::span<const Wavelength> channels, const SplitPolicy& policy) {
  FeatureMatrix x(ds.size(), 4 * channels.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto row = featurize_wafer(ds[i], channels, policy);
    std::ranges::copy(row, x.row(i).begin());
  }
  return x;
}

Standardizer Standardizer::fit(const FeatureMatrix& x) {
  Standardizer s;
  s.means.assign(x.cols, 0.0);
  s.stds.assign(x.cols, 1.0);
  s.active.assign(x.cols, true);
  const double n = static_cast<double>(x.rows);
  for (std::size_t j = 0; j < x.cols; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) sum += x(i, j);
    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) ss += (x(i, j) - mean) * (x(i, j) - mean);
    const double std = std::sqrt(ss / n);
    s.means[j] = mean;
    if (degenerate_std(std, mean)) {
      s.active[j] = false;
    } else {
      s.stds[j] = std;
    }
  }
  return s;
}

std::vector<double> Standardizer::apply(std::span<const double> row) const {
  if (row.size() != means.size()) {
    throw ValidationError("feature vector has " + std::to_string(row.size()) + " entries, expected " +
                          std::to_string(means.size()));
  }
  std::vector<double> z(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) {
    z[j] = active[j] ? (row[j] - means[j]) / stds[j] : 0.0;
  }
  return z;
}

FittedOls ols_fit(const FeatureMatrix& features, std::span<const double> targets) {
  const std::size_t n = features.rows;
  const std::size_t d = features.cols;
  if (n < 2) throw ValidationError("ols_fit needs at least 2 rows, got " + std::to_string(n));
  if (d < 1) throw ValidationError("ols_fit needs at least 1 feature");
  if (targets.size() != n) throw ValidationError("ols_fit: target length does not match row count");
  for (double v : features.values) {
    if (!std::isfinite(v)) throw ValidationError("ols_fit: non-finite feature value");
  }
  for (double v : targets) {
    if (!std::isfinite(v)) throw ValidationError("ols_fit: non-finite target value");
  }

  const auto scaler = Standardizer::fit(features);
  Eigen::MatrixXd z(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto zi = scaler.apply(features.row(i));
    for (std::size_t j = 0; j < d; ++j) z(i, j) = zi[j];
  }

  double y_mean = 0.0;
  for (double y : targets) y_mean += y;
  y_mean /= static_cast<double>(n);
  Eigen::VectorXd yc(n);
  for (std::size_t i = 0; i < n; ++i) yc(i) = targets[i] - y_mean;

  Eigen::MatrixXd gram = z.transpose() * z;
  const Eigen::VectorXd rhs = z.transpose() * yc;

  FittedOls out;
  Eigen::VectorXd beta;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() == Eigen::Success && llt.rcond() > 1e-12) {
    beta = llt.solve(rhs);
  } else {
    gram.diagonal().array() += kRidgeLambda;
    beta = gram.ldlt().solve(rhs);
    out.ridge_used = true;
  }

  out.coefficients.assign(beta.data(), beta.data() + d);
  out.intercept = y_mean;
  out.feature_means = scaler.means;
  out.feature_stds = scaler.stds;
  return out;
}

double ols_predict(const FittedOls& model, std::span<const double> features) {
  if (features.size() != model.coefficients.size()) {
    throw ValidationError("ols_predict: expected " + std::to_string(model.coefficients.size()) +
                          " features, got " + std::to_string(features.size()));
  }
  double y = model.intercept;
  for (std::size_t j = 0; j < features.size(); ++j) {
    y += model.coefficients[j] * ((features[j] - model.feature_means[j]) / model.feature_stds[j]);
  }
  return y;
}

std::vector<Neighbor> select_neighbors(std::span<const double> distances, std::size_t k) {
  check_k(k, distances.size());
  std::vector<Neighbor> all(distances.size());
  for (std::size_t i = 0; i < distances.size(); ++i) all[i] = {i, distances[i]};
  auto less = [](const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), less);
  all.resize(k);
  return all;
}

double neighbor_average(std::span<const Neighbor> neighbors, std::span<const double> targets, Weighting weighting) {
  if (neighbors.empty()) throw ValidationError("neighbor_average: no neighbors");
  double num = 0.0;
  double den = 0.0;
  for (const auto& nb : neighbors) {
    const double w = weighting == Weighting::Uniform ? 1.0 : 1.0 / (nb.distance + kInverseDistanceEpsilon);
    num += w * targets[nb.index];
    den += w;
  }
  return num / den;
}

R4mModel R4mModel::fit(const Dataset& train, const ModelConfig& cfg) {
  R4mModel m;
  m.cfg_ = cfg;
  const auto x = featurize(train, channels_or_throw(cfg), cfg.split_policy);
  m.ols_ = ols_fit(x, train.etch_rates());
  return m;
}

double R4mModel::predict(const WaferRecord& query) const {
  return ols_predict(ols_, featurize_wafer(query, cfg_.channels, cfg_.split_policy));
}

Knn4mModel Knn4mModel::fit(const Dataset& train, const ModelConfig& cfg) {
  check_k(cfg.k, train.size());
  Knn4mModel m;
  m.cfg_ = cfg;
  const auto x = featurize(train, channels_or_throw(cfg), cfg.split_policy);
  m.scaler_ = Standardizer::fit(x);
  m.train_z_ = FeatureMatrix(x.rows, x.cols);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const auto z = m.scaler_.apply(x.row(i));
    std::ranges::copy(z, m.train_z_.row(i).begin());
  }
  m.targets_ = train.etch_rates();
  return m;
}

std::vector<Neighbor> Knn4mModel::neighbors(const WaferRecord& query) const {
  const auto q = scaler_.apply(featurize_wafer(query, cfg_.channels, cfg_.split_policy));
  std::vector<double> dist(train_z_.rows);
  for (std::size_t i = 0; i < train_z_.rows; ++i) {
    const auto r = train_z_.row(i);
    double ss = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) ss += (r[j] - q[j]) * (r[j] - q[j]);
    dist[i] = std::sqrt(ss);
  }
  return select_neighbors(dist, cfg_.k);
}

double Knn4mModel::predict(const WaferRecord& query) const {
  return neighbor_average(neighbors(query), targets_, cfg_.weighting);
}

KnnDtwModel KnnDtwModel::fit(const Dataset& train, const ModelConfig& cfg) {
  check_k(cfg.k, train.size());
  channels_or_throw(cfg);
  for (Wavelength wl : cfg.channels) {
    for (const auto& w : train.wafers()) w.channel(wl);
  }
  KnnDtwModel m;
  m.cfg_ = cfg;
  m.train_ = train;
  m.targets_ = train.etch_rates();
  return m;
}

std::vector<Neighbor> KnnDtwModel::neighbors(const WaferRecord& query) const {
  const auto params = cfg_.dtw();
  std::vector<double> dist(train_.size());
  for (std::size_t i = 0; i < train_.size(); ++i) {
    dist[i] = multichannel_distance(query, train_[i], cfg_.channels, params);
  }
  return select_neighbors(dist, cfg_.k);
}

double KnnDtwModel::predict(const WaferRecord& query) const {
  return neighbor_average(neighbors(query), targets_, cfg_.weighting);
}

double knn_predict_4m(const Dataset& train, const WaferRecord& query, const ModelConfig& cfg) {
  return Knn4mModel::fit(train, cfg).predict(query);
}

double knn_predict_dtw(const Dataset& train, const WaferRecord& query, const ModelConfig& cfg) {
  return KnnDtwModel::fit(train, cfg).predict(query);
}

}  // namespace dtwreg
