#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>

#include <json.hpp>

#include "dtwreg/error.hpp"
#include "dtwreg/eval.hpp"

namespace dtwreg {

namespace {

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  body(out);
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace

void write_report_json(const BenchReport& report, std::ostream& out) {
  using nlohmann::ordered_json;
  ordered_json cfg = {
      {"k", report.config.k},
      {"window", report.config.window},
      {"split_policy", report.config.split_policy.to_string()},
      {"weighting", to_string(report.config.weighting)},
      {"seed", report.seed},
      {"fold_count", report.fold_count},
      {"channels", report.channels},
  };
  ordered_json ranking = ordered_json::array();
  for (const auto& s : report.channel_ranking) {
    ranking.push_back({{"wavelength_nm", s.wavelength_nm}, {"mape", s.mape}});
  }
  ordered_json cells = ordered_json::array();
  for (const auto& c : report.cells) {
    cells.push_back({
        {"model", model_name(c.model)},
        {"x", c.x},
        {"mape_mean", c.mape_mean},
        {"mape_std", c.mape_std},
        {"fold_mapes", c.fold_mapes},
        {"plan_hash", hex64(c.plan_hash)},
    });
  }
  ordered_json doc = {
      {"kind", report.kind},
      {"x_label", report.kind == "comparison" ? "channel_count" : report.kind.substr(6)},
      {"config", std::move(cfg)},
      {"plan_hash", hex64(report.plan_hash)},
      {"channel_ranking", std::move(ranking)},
      {"cells", std::move(cells)},
  };
  if (report.kind != "comparison" && !report.cells.empty()) {
    const auto* best = report.argmin(report.cells.front().model);
    doc["argmin"] = {{"model", model_name(best->model)}, {"x", best->x}, {"mape_mean", best->mape_mean}};
  }
  doc["notes"] = report.notes;
  out << doc.dump(2) << '\n';
}

void write_report_folds_csv(const BenchReport& report, std::ostream& out) {
  out << "model,channel_count_or_param,fold,mape\n";
  for (const auto& c : report.cells) {
    for (std::size_t f = 0; f < c.fold_mapes.size(); ++f) {
      out << model_name(c.model) << ',' << c.x << ',' << f << ',' << format_real(c.fold_mapes[f]) << '\n';
    }
  }
}

void write_report_summary_csv(const BenchReport& report, std::ostream& out) {
  out << "model,x,mape_mean,mape_std\n";
  for (const auto& c : report.cells) {
    out << model_name(c.model) << ',' << c.x << ',' << format_real(c.mape_mean) << ',' << format_real(c.mape_std)
        << '\n';
  }
}

void save_report(const BenchReport& report, const std::filesystem::path& prefix) {
  const std::string base = prefix.string();
  write_file(base + ".json", [&](std::ostream& o) { write_report_json(report, o); });
  write_file(base + ".folds.csv", [&](std::ostream& o) { write_report_folds_csv(report, o); });
  write_file(base + ".summary.csv", [&](std::ostream& o) { write_report_summary_csv(report, o); });
}

}  // namespace dtwreg
