#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>

#include "dtwreg/core.hpp"
#include "dtwreg/error.hpp"
#include "dtwreg/eval.hpp"
#include "dtwreg/explain.hpp"
#include "dtwreg/features.hpp"
#include "dtwreg/synth.hpp"

namespace dtwreg::cli {
namespace {

struct ConfigItem {
  std::string key;
  std::vector<std::string> inputs;
};

std::string config_scalar(const std::string& key, const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  throw ValidationError("config: unsupported value for '" + key + "'");
}

// Flat JSON config: {"wafers": 50, "seed": 7, "values": [0, 1, 2]}.
std::vector<ConfigItem> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  nlohmann::ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config '" + path + "': " + e.what());
  }
  if (!j.is_object()) throw ValidationError("config '" + path + "': top level must be an object");
  std::vector<ConfigItem> items;
  for (const auto& [key, value] : j.items()) {
    ConfigItem item{key, {}};
    if (value.is_array()) {
      for (const auto& v : value) item.inputs.push_back(config_scalar(key, v));
    } else {
      item.inputs.push_back(config_scalar(key, value));
    }
    items.push_back(std::move(item));
  }
  return items;
}

// Options already given on the command line keep their values.
void apply_config(CLI::App* sub, const std::string& path) {
  if (path.empty()) return;
  for (auto& item : read_config(path)) {
    if (item.key == "config") throw ValidationError("config: nested 'config' key");
    auto* opt = sub->get_option_no_throw("--" + item.key);
    if (opt == nullptr) throw ValidationError("config: unknown key '" + item.key + "' for " + sub->get_name());
    if (opt->count() > 0) continue;
    opt->add_result(item.inputs);
    opt->run_callback();
  }
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw ValidationError(std::string(flag) + " is required");
}

struct GenerateArgs {
  SynthConfig synth;
  std::optional<double> noise;
  std::string output;
};

struct StatsArgs {
  std::string input;
  std::string output;
  std::string split = "auto";
};

struct EvaluateArgs {
  std::string input;
  std::string output;
  std::vector<std::string> models;
  std::optional<std::size_t> channels_max;
  std::vector<double> channel_order;
  std::size_t k = 5;
  std::size_t window = 1;
  std::string weighting = "uniform";
  std::string split = "auto";
  std::size_t folds = kDefaultFolds;
  std::uint64_t seed = kDefaultSeed;
  std::string sweep;
  std::vector<std::size_t> values;
  std::size_t jobs = 1;
};

struct ExplainArgs {
  std::string input;
  std::string query;
  std::optional<double> channel;
  std::string against = "nearest";
  std::size_t window = 1;
  std::size_t regions = 5;
  std::string alignment_out;
  std::string report_out;
};

void add_config(CLI::App* sub, std::string& path) {
  sub->add_option("--config", path, "Flat JSON file of flag values (command-line flags win)");
}

void ensure_parent(const std::string& path) {
  auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

std::ofstream open_out(const std::string& path) {
  ensure_parent(path);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  return f;
}

int cmd_generate(GenerateArgs& a, std::ostream& out) {
  a.synth.noise_std = a.noise;
  a.synth.validate();
  auto ds = generate(a.synth);
  save_synthetic(ds, a.synth, a.output);
  out << "wrote " << a.output << " (" << ds.size() << " wafers, " << ds.channel_order().size()
      << " channels) and " << meta_path_for(a.output).string() << "\n";
  return kExitOk;
}

int cmd_stats(const StatsArgs& a, std::ostream& out) {
  auto ds = load_dataset(a.input);
  auto policy = SplitPolicy::parse(a.split);
  const auto& channels = ds.channel_order();
  if (a.output.empty() || a.output == "-") {
    write_feature_csv(ds, channels, policy, out);
  } else {
    auto f = open_out(a.output);
    write_feature_csv(ds, channels, policy, f);
    if (!f) throw IoError("write failed: " + a.output);
  }
  return kExitOk;
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  auto ds = load_dataset(a.input);

  ModelConfig cfg;
  cfg.k = a.k;
  cfg.window = a.window;
  cfg.channels = a.channel_order;
  cfg.split_policy = SplitPolicy::parse(a.split);
  cfg.weighting = parse_weighting(a.weighting);

  EvalOptions opts;
  if (a.jobs == 0) throw ValidationError("--jobs must be at least 1");
  opts.jobs = a.jobs;
  if (!a.models.empty()) {
    opts.models.clear();
    for (const auto& m : a.models) opts.models.push_back(parse_model(m));
  }

  BenchReport report;
  if (!a.sweep.empty()) {
    auto param = parse_sweep_parameter(a.sweep);
    std::vector<std::size_t> values = a.values;
    if (values.empty()) {
      values = param == SweepParameter::K ? std::vector<std::size_t>{1, 3, 5, 7, 9, 11}
                                          : std::vector<std::size_t>{0, 1, 2, 3, 4};
    }
    report = sweep_parameter(ds, cfg, param, values, a.folds, a.seed, opts);
  } else {
    if (!a.values.empty()) throw ValidationError("--values needs --sweep");
    std::size_t max_channels = a.channels_max.value_or(
        cfg.channels.empty() ? ds.channel_order().size() : cfg.channels.size());
    report = run_comparison(ds, cfg, max_channels, a.folds, a.seed, opts);
  }

  ensure_parent(a.output);
  save_report(report, a.output);
  write_report_summary_csv(report, out);
  return kExitOk;
}

int cmd_explain(const ExplainArgs& a, std::ostream& out) {
  auto ds = load_dataset(a.input);
  Wavelength channel = a.channel.value_or(ds.channel_order().front());
  DtwParams params{a.window};

  auto report = neighbor_report(ds, a.query, channel, params);
  std::string other;
  if (a.against == "nearest") {
    other = report.nearest().wafer_id;
  } else if (a.against == "furthest") {
    other = report.furthest().wafer_id;
  } else {
    other = a.against;
    if (other == a.query) throw ValidationError("--against must name a different wafer");
    ds.index_of(other);
  }

  if (!a.report_out.empty()) {
    auto f = open_out(a.report_out);
    write_neighbor_report_json(report, f);
  }
  auto alignment = align_wafers(ds, a.query, other, channel, params);
  if (!a.alignment_out.empty()) {
    ensure_parent(a.alignment_out);
    export_alignment(ds, a.query, other, channel, params, a.alignment_out);
  }

  const auto& q = ds.wafer(a.query);
  const auto& o = ds.wafer(other);
  out << "query " << q.wafer_id << " etch_rate=" << format_real(q.etch_rate) << "\n";
  out << "against " << o.wafer_id << " etch_rate=" << format_real(o.etch_rate) << "\n";
  out << "channel " << format_real(channel) << " nm, window " << a.window << "\n";
  out << "distance " << format_real(alignment.distance) << "\n";
  out << "region,begin,end,cost\n";
  auto regions = region_contributions(alignment, q.channel(channel).size(), a.regions);
  for (std::size_t r = 0; r < regions.size(); ++r) {
    out << r << ',' << regions[r].begin << ',' << regions[r].end << ',' << format_real(regions[r].cost) << "\n";
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Banded DTW k-NN regression toolkit for optical emission style traces", "dtwreg"};
  app.require_subcommand(1);
  const std::string version = std::string("dtwreg ") + library_version() + " (generator " + kGeneratorVersion + ")";
  app.set_version_flag("--version", version);

  std::string config_path;

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write a synthetic dataset and its .meta.json sidecar");
  add_config(g, config_path);
  g->add_option("--wafers", gen.synth.n_wafers, "Number of wafers")->capture_default_str();
  g->add_option("--channels", gen.synth.n_channels, "Number of channels")->capture_default_str();
  g->add_option("--ticks", gen.synth.ticks, "Samples per channel")->capture_default_str();
  g->add_option("--split-tick", gen.synth.stage_split_tick, "First stage-2 tick before jitter")
      ->capture_default_str();
  g->add_option("--jitter", gen.synth.jitter_max, "Maximum per-wafer time shift in ticks")->capture_default_str();
  g->add_option("--noise", gen.noise, "Sample noise std (default 0.02 x plateau gap)");
  g->add_option("--tail-effect", gen.synth.tail_effect, "Coupling of the drop-off depth to the etch rate")
      ->capture_default_str();
  g->add_option("--seed", gen.synth.seed, "Generator seed")->capture_default_str();
  g->add_option("-o,--output", gen.output, "Dataset path (.csv long format or .json)");

  StatsArgs st;
  auto* s = app.add_subcommand("stats", "Featurize a dataset into the four per-channel stage statistics");
  add_config(s, config_path);
  s->add_option("-i,--input", st.input, "Dataset path");
  s->add_option("-o,--output", st.output, "Feature CSV path (stdout when omitted)");
  s->add_option("--split", st.split, "Stage split: auto or a fixed tick")->capture_default_str();

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Cross-validated MAPE comparison or parameter sweep");
  add_config(e, config_path);
  e->add_option("-i,--input", ev.input, "Dataset path");
  e->add_option("-o,--output", ev.output, "Report prefix; writes .json, .folds.csv, .summary.csv");
  e->add_option("--models", ev.models, "Models to run: r4m, knn4m, knndtw")->delimiter(',');
  e->add_option("--channels-max", ev.channels_max, "Largest channel count in the comparison");
  e->add_option("--channel-order", ev.channel_order, "Explicit channel order (wavelengths, nm)")->delimiter(',');
  e->add_option("--k", ev.k, "Neighbors for the k-NN models")->capture_default_str();
  e->add_option("--window", ev.window, "Sakoe-Chiba warping window")->capture_default_str();
  e->add_option("--weighting", ev.weighting, "uniform or inverse-distance")->capture_default_str();
  e->add_option("--split", ev.split, "Stage split: auto or a fixed tick")->capture_default_str();
  e->add_option("--folds", ev.folds, "Cross-validation folds")->capture_default_str();
  e->add_option("--seed", ev.seed, "Fold assignment seed")->capture_default_str();
  e->add_option("--sweep", ev.sweep, "Sweep k or window instead of channel counts");
  e->add_option("--values", ev.values, "Sweep values")->delimiter(',');
  e->add_option("--jobs", ev.jobs, "Worker threads (results do not depend on it)")->capture_default_str();

  ExplainArgs ex;
  auto* x = app.add_subcommand("explain", "Rank neighbors of a wafer and export an alignment");
  add_config(x, config_path);
  x->add_option("-i,--input", ex.input, "Dataset path");
  x->add_option("--query", ex.query, "Query wafer id");
  x->add_option("--channel", ex.channel, "Wavelength in nm (default: first channel)");
  x->add_option("--against", ex.against, "nearest, furthest or a wafer id")->capture_default_str();
  x->add_option("--window", ex.window, "Sakoe-Chiba warping window")->capture_default_str();
  x->add_option("--regions", ex.regions, "Number of query regions for cost attribution")->capture_default_str();
  x->add_option("-o,--output", ex.alignment_out, "Alignment CSV path");
  x->add_option("--report", ex.report_out, "Neighbor ranking JSON path");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& pe) {
    int code = app.exit(pe, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    for (auto* sub : {g, s, e, x}) {
      if (sub->parsed()) apply_config(sub, config_path);
    }
    if (g->parsed()) {
      require(gen.output, "--output");
      return cmd_generate(gen, out);
    }
    if (s->parsed()) require(st.input, "--input");
    if (e->parsed()) {
      require(ev.input, "--input");
      require(ev.output, "--output");
    }
    if (x->parsed()) {
      require(ex.input, "--input");
      require(ex.query, "--query");
    }
    if (s->parsed()) return cmd_stats(st, out);
    if (e->parsed()) return cmd_evaluate(ev, out);
    if (x->parsed()) return cmd_explain(ex, out);
    return kExitUsage;
  } catch (const CLI::ParseError& pe) {
    err << "error: " << pe.what() << "\nRun with --help for more information.\n";
    return kExitUsage;
  } catch (const ValidationError& ve) {
    err << "error: " << ve.what() << "\nRun with --help for more information.\n";
    return kExitUsage;
  } catch (const std::exception& ex2) {
    err << "error: " << ex2.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace dtwreg::cli
