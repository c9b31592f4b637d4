#include "dtwreg/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <functional>
#include <numeric>
#include <thread>

#include "dtwreg/error.hpp"
#include "rng.hpp"

namespace dtwreg {

namespace {

// Runs fn(0..count-1) on up to `jobs` threads. The first failure by index
// is rethrown after all workers finish.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(count);
  auto guarded = [&](std::size_t i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(count, 1));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) guarded(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    workers.reserve(jobs);
    for (std::size_t t = 0; t < jobs; ++t) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) guarded(i);
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

[[noreturn]] void rethrow_with_context(const std::string& context) {
  try {
    throw;
  } catch (const ValidationError& e) {
    throw ValidationError(context + ": " + e.what());
  } catch (const IoError& e) {
    throw IoError(context + ": " + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(context + ": " + e.what());
  }
}

double sample_std(std::span<const double> xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

CellResult summarize(ModelKind model, long long x, std::vector<double> fold_mapes, std::uint64_t plan_hash) {
  CellResult c;
  c.model = model;
  c.x = x;
  double sum = 0.0;
  for (double v : fold_mapes) sum += v;
  c.mape_mean = sum / static_cast<double>(fold_mapes.size());
  c.mape_std = sample_std(fold_mapes, c.mape_mean);
  c.fold_mapes = std::move(fold_mapes);
  c.plan_hash = plan_hash;
  return c;
}

std::string lower(std::string s) {
  std::ranges::transform(s, s.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return s;
}

FoldPlan resolve_plan(const Dataset& ds, std::size_t fold_count, std::uint64_t seed, const EvalOptions& opts) {
  FoldPlan plan = opts.plan ? *opts.plan : kfold_plan(ds.size(), fold_count, seed);
  plan.validate();
  if (plan.n != ds.size()) {
    throw ValidationError("fold plan covers " + std::to_string(plan.n) + " wafers but the dataset has " +
                          std::to_string(ds.size()));
  }
  return plan;
}

void check_k_fits(const ModelConfig& cfg, const FoldPlan& plan) {
  if (cfg.k < 1) throw ValidationError("k must be at least 1");
  if (cfg.k > plan.min_train_size()) {
    throw ValidationError("k = " + std::to_string(cfg.k) + " exceeds the smallest training fold (" +
                          std::to_string(plan.min_train_size()) + " wafers)");
  }
}

std::vector<std::string> standard_notes() {
  return {
      "4M features standardized with training-fold statistics; zero-variance features ignored",
      "all models in this report share one fold plan (see plan_hash)",
      "k-NN-DTW sums per-channel DTW distances; local cost is squared difference, distance is its square root",
      "mape_std is the sample standard deviation across folds",
  };
}

}  // namespace

double mape(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw ValidationError("mape: length mismatch (" + std::to_string(y_true.size()) + " vs " +
                          std::to_string(y_pred.size()) + ")");
  }
  if (y_true.empty()) throw ValidationError("mape: empty prediction set");
  double sum = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] == 0.0) throw ValidationError("mape: true value at index " + std::to_string(i) + " is zero");
    sum += std::abs(y_true[i] - y_pred[i]) / std::abs(y_true[i]);
  }
  return 100.0 * sum / static_cast<double>(y_true.size());
}

void FoldPlan::validate() const {
  if (folds.empty()) throw ValidationError("fold plan has no folds");
  std::vector<char> seen(n, 0);
  std::size_t total = 0;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    if (folds[f].empty()) throw ValidationError("fold " + std::to_string(f) + " is empty");
    for (std::size_t i : folds[f]) {
      if (i >= n) throw ValidationError("fold " + std::to_string(f) + " names index " + std::to_string(i) + " >= n");
      if (seen[i]) throw ValidationError("index " + std::to_string(i) + " appears in more than one fold");
      seen[i] = 1;
      ++total;
    }
  }
  if (total != n) throw ValidationError("fold plan does not cover every index");
}

std::uint64_t FoldPlan::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto feed = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xff;
      h *= 0x100000001b3ull;
    }
  };
  feed(n);
  feed(folds.size());
  for (const auto& fold : folds) {
    feed(fold.size());
    for (std::size_t i : fold) feed(i);
  }
  return h;
}

std::size_t FoldPlan::min_train_size() const {
  std::size_t largest = 0;
  for (const auto& f : folds) largest = std::max(largest, f.size());
  return n - largest;
}

FoldPlan kfold_plan(std::size_t n, std::size_t fold_count, std::uint64_t seed) {
  if (n == 0) throw ValidationError("kfold_plan: n must be positive");
  if (fold_count == 0) throw ValidationError("kfold_plan: fold_count must be positive");
  if (fold_count > n) {
    throw ValidationError("kfold_plan: fold_count " + std::to_string(fold_count) + " exceeds n = " +
                          std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  detail::Rng rng(detail::mix_seed(seed, 1));
  for (std::size_t i = n - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i + 1));
    std::swap(order[i], order[j]);
  }
  FoldPlan plan;
  plan.n = n;
  plan.seed = seed;
  plan.folds.resize(fold_count);
  for (std::size_t p = 0; p < n; ++p) plan.folds[p % fold_count].push_back(order[p]);
  for (auto& f : plan.folds) std::ranges::sort(f);
  return plan;
}

std::string model_name(ModelKind m) {
  switch (m) {
    case ModelKind::R4M:
      return "R-4M";
    case ModelKind::Knn4M:
      return "kNN-4M";
    case ModelKind::KnnDtw:
      return "kNN-DTW";
  }
  return "?";
}

ModelKind parse_model(const std::string& text) {
  const std::string t = lower(text);
  if (t == "r4m" || t == "r-4m") return ModelKind::R4M;
  if (t == "knn4m" || t == "knn-4m") return ModelKind::Knn4M;
  if (t == "knndtw" || t == "knn-dtw") return ModelKind::KnnDtw;
  throw ValidationError("unknown model '" + text + "' (expected r4m, knn4m or knndtw)");
}

std::string to_string(SweepParameter p) { return p == SweepParameter::K ? "k" : "window"; }

SweepParameter parse_sweep_parameter(const std::string& text) {
  if (text == "k") return SweepParameter::K;
  if (text == "window") return SweepParameter::Window;
  throw ValidationError("sweep parameter must be 'k' or 'window', got '" + text + "'");
}

const CellResult* BenchReport::find(ModelKind model, long long x) const {
  for (const auto& c : cells) {
    if (c.model == model && c.x == x) return &c;
  }
  return nullptr;
}

const CellResult* BenchReport::argmin(ModelKind model) const {
  const CellResult* best = nullptr;
  for (const auto& c : cells) {
    if (c.model == model && (!best || c.mape_mean < best->mape_mean)) best = &c;
  }
  return best;
}

std::vector<double> cross_validate(const Dataset& ds, ModelKind model, const ModelConfig& cfg, const FoldPlan& plan,
                                   std::size_t jobs) {
  plan.validate();
  if (plan.n != ds.size()) throw ValidationError("fold plan size does not match dataset");
  std::vector<double> fold_mapes(plan.folds.size(), 0.0);

  parallel_for(plan.folds.size(), jobs, [&](std::size_t f) {
    try {
      const auto& test = plan.folds[f];
      std::vector<char> in_test(ds.size(), 0);
      for (std::size_t i : test) in_test[i] = 1;
      std::vector<std::size_t> train;
      train.reserve(ds.size() - test.size());
      for (std::size_t i = 0; i < ds.size(); ++i) {
        if (!in_test[i]) train.push_back(i);
      }
      for (std::size_t i : train) {
        if (in_test[i]) throw std::logic_error("wafer index " + std::to_string(i) + " in both train and test");
      }
      const Dataset train_ds = ds.subset(train);

      std::vector<double> y_true;
      std::vector<double> y_pred;
      y_true.reserve(test.size());
      y_pred.reserve(test.size());
      auto run = [&](const auto& fitted) {
        for (std::size_t i : test) {
          y_true.push_back(ds[i].etch_rate);
          y_pred.push_back(fitted.predict(ds[i]));
        }
      };
      switch (model) {
        case ModelKind::R4M:
          run(R4mModel::fit(train_ds, cfg));
          break;
        case ModelKind::Knn4M:
          run(Knn4mModel::fit(train_ds, cfg));
          break;
        case ModelKind::KnnDtw:
          run(KnnDtwModel::fit(train_ds, cfg));
          break;
      }
      fold_mapes[f] = mape(y_true, y_pred);
    } catch (...) {
      rethrow_with_context("fold " + std::to_string(f) + ", model " + model_name(model) + ", " +
                           std::to_string(cfg.channels.size()) + " channel(s)");
    }
  });
  return fold_mapes;
}

std::vector<ChannelScore> rank_channels(const Dataset& ds, const ModelConfig& cfg, const FoldPlan& plan,
                                        std::size_t jobs) {
  std::vector<ChannelScore> scores;
  for (Wavelength wl : ds.channel_order()) {
    ModelConfig single = cfg;
    single.channels = {wl};
    const auto folds = cross_validate(ds, ModelKind::KnnDtw, single, plan, jobs);
    scores.push_back({wl, summarize(ModelKind::KnnDtw, 1, folds, 0).mape_mean});
  }
  std::ranges::stable_sort(scores, {}, &ChannelScore::mape);
  return scores;
}

BenchReport run_comparison(const Dataset& ds, const ModelConfig& cfg, std::size_t max_channels,
                           std::size_t fold_count, std::uint64_t seed, const EvalOptions& opts) {
  if (opts.models.empty()) throw ValidationError("no models selected");
  const FoldPlan plan = resolve_plan(ds, fold_count, seed, opts);
  check_k_fits(cfg, plan);

  BenchReport report;
  report.kind = "comparison";
  report.config = cfg;
  report.seed = seed;
  report.fold_count = plan.folds.size();
  report.plan_hash = plan.hash();
  report.notes = standard_notes();

  if (cfg.channels.empty()) {
    report.channel_ranking = rank_channels(ds, cfg, plan, opts.jobs);
    for (const auto& s : report.channel_ranking) report.channels.push_back(s.wavelength_nm);
    report.notes.push_back("channel order ranked by single-channel k-NN-DTW MAPE ascending");
  } else {
    report.channels = cfg.channels;
    report.notes.push_back("channel order as configured");
  }
  report.config.channels = report.channels;

  if (max_channels < 1 || max_channels > report.channels.size()) {
    throw ValidationError("max_channels must be between 1 and " + std::to_string(report.channels.size()) +
                          ", got " + std::to_string(max_channels));
  }

  for (std::size_t c = 1; c <= max_channels; ++c) {
    ModelConfig sub = cfg;
    sub.channels.assign(report.channels.begin(), report.channels.begin() + static_cast<std::ptrdiff_t>(c));
    for (ModelKind m : opts.models) {
      report.cells.push_back(
          summarize(m, static_cast<long long>(c), cross_validate(ds, m, sub, plan, opts.jobs), report.plan_hash));
    }
  }
  return report;
}

BenchReport sweep_parameter(const Dataset& ds, const ModelConfig& cfg, SweepParameter parameter,
                            std::span<const std::size_t> values, std::size_t fold_count, std::uint64_t seed,
                            const EvalOptions& opts) {
  if (values.empty()) throw ValidationError("sweep needs at least one value");
  const FoldPlan plan = resolve_plan(ds, fold_count, seed, opts);
  if (parameter == SweepParameter::K) {
    for (std::size_t k : values) {
      ModelConfig probe = cfg;
      probe.k = k;
      check_k_fits(probe, plan);
    }
  } else {
    check_k_fits(cfg, plan);
  }

  BenchReport report;
  report.kind = "sweep-" + to_string(parameter);
  report.config = cfg;
  report.seed = seed;
  report.fold_count = plan.folds.size();
  report.plan_hash = plan.hash();
  report.notes = standard_notes();

  if (cfg.channels.empty()) {
    report.channel_ranking = rank_channels(ds, cfg, plan, opts.jobs);
    report.channels = {report.channel_ranking.front().wavelength_nm};
    report.notes.push_back("single channel chosen as best single-channel k-NN-DTW MAPE");
  } else {
    report.channels = {cfg.channels.front()};
    report.notes.push_back("single channel: first configured channel");
  }
  report.config.channels = report.channels;

  const ModelKind model = parameter == SweepParameter::K ? ModelKind::Knn4M : ModelKind::KnnDtw;
  for (std::size_t v : values) {
    ModelConfig sub = report.config;
    if (parameter == SweepParameter::K) {
      sub.k = v;
    } else {
      sub.window = v;
    }
    report.cells.push_back(
        summarize(model, static_cast<long long>(v), cross_validate(ds, model, sub, plan, opts.jobs), report.plan_hash));
  }
  return report;
}

}  // namespace dtwreg
