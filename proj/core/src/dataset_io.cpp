#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string_view>

#include <json.hpp>

#include "dtwreg/core.hpp"
#include "dtwreg/error.hpp"

namespace dtwreg {

namespace {

constexpr std::string_view kCsvHeader = "wafer_id,etch_rate,wavelength_nm,tick,intensity";

std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::optional<long long> parse_int(std::string_view s) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

void check_id_writable(const std::string& id) {
  if (id.find_first_of(",\"\r\n") != std::string::npos) {
    throw ValidationError("wafer_id '" + id + "' contains a character not allowed in long CSV");
  }
}

struct PendingWafer {
  double etch_rate = 0.0;
  std::size_t first_line = 0;
  std::map<Wavelength, std::map<long long, double>> ticks;
};

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

DataFormat format_from_path(const std::filesystem::path& path) {
  return path.extension() == ".json" ? DataFormat::Json : DataFormat::LongCsv;
}

Dataset parse_long_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::map<std::string, PendingWafer> pending;
  std::vector<Wavelength> first_seen;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kCsvHeader) {
        throw ParseError("expected header '" + std::string(kCsvHeader) + "'", line_no);
      }
      header_seen = true;
      continue;
    }

    std::string_view rest(line);
    std::string_view fields[5];
    std::size_t count = 0;
    while (true) {
      auto comma = rest.find(',');
      if (count == 5) throw ParseError("expected 5 fields", line_no);
      fields[count++] = rest.substr(0, comma);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (count != 5) throw ParseError("expected 5 fields, got " + std::to_string(count), line_no);

    const std::string id(fields[0]);
    if (id.empty()) throw ParseError("empty wafer_id", line_no);
    auto rate = parse_double(fields[1]);
    auto wl = parse_double(fields[2]);
    auto tick = parse_int(fields[3]);
    auto value = parse_double(fields[4]);
    if (!rate) throw ParseError("invalid etch_rate '" + std::string(fields[1]) + "'", line_no);
    if (!wl) throw ParseError("invalid wavelength_nm '" + std::string(fields[2]) + "'", line_no);
    if (!tick || *tick < 0) throw ParseError("invalid tick '" + std::string(fields[3]) + "'", line_no);
    if (!value) throw ParseError("invalid intensity '" + std::string(fields[4]) + "'", line_no);
    if (!std::isfinite(*value)) {
      throw ParseError("non-finite intensity for wafer '" + id + "' wavelength " + std::string(fields[2]) +
                           " tick " + std::to_string(*tick),
                       line_no);
    }
    if (!std::isfinite(*rate) || *rate <= 0.0) {
      throw ParseError("wafer '" + id + "': etch_rate must be positive and finite", line_no);
    }
    if (!std::isfinite(*wl) || *wl <= 0.0) throw ParseError("wavelength_nm must be positive", line_no);

    auto [it, inserted] = pending.try_emplace(id);
    PendingWafer& w = it->second;
    if (inserted) {
      w.etch_rate = *rate;
      w.first_line = line_no;
    } else if (w.etch_rate != *rate) {
      throw ParseError("wafer '" + id + "' has inconsistent etch_rate (first seen on line " +
                           std::to_string(w.first_line) + ")",
                       line_no);
    }
    if (std::find(first_seen.begin(), first_seen.end(), *wl) == first_seen.end()) first_seen.push_back(*wl);
    auto& series = w.ticks[*wl];
    if (!series.emplace(*tick, *value).second) {
      throw ParseError("duplicate tick " + std::to_string(*tick) + " for wafer '" + id + "' wavelength " +
                           std::string(fields[2]),
                       line_no);
    }
  }
  if (!header_seen) throw ParseError("empty file, missing header", 0);
  if (pending.empty()) throw ValidationError("dataset must contain at least one wafer");

  std::vector<WaferRecord> wafers;
  wafers.reserve(pending.size());
  for (auto& [id, p] : pending) {
    WaferRecord w;
    w.wafer_id = id;
    w.etch_rate = p.etch_rate;
    for (auto& [wl, ticks] : p.ticks) {
      ChannelSeries s;
      s.wavelength_nm = wl;
      s.samples.reserve(ticks.size());
      long long expected = 0;
      for (auto& [t, v] : ticks) {
        if (t != expected) {
          throw ValidationError("wafer '" + id + "' wavelength " + format_real(wl) + ": missing tick " +
                                std::to_string(expected));
        }
        s.samples.push_back(v);
        ++expected;
      }
      w.channels.emplace(wl, std::move(s));
    }
    wafers.push_back(std::move(w));
  }
  return Dataset(std::move(wafers), std::move(first_seen));
}

Dataset parse_json(std::istream& in) {
  using nlohmann::ordered_json;
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const ordered_json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), 0);
  }
  if (!doc.is_object() || !doc.contains("wafers") || !doc["wafers"].is_array()) {
    throw ParseError("expected top-level object with a \"wafers\" array", 0);
  }
  std::vector<WaferRecord> wafers;
  std::vector<Wavelength> first_seen;
  std::size_t index = 0;
  for (const auto& jw : doc["wafers"]) {
    const std::string where = "wafers[" + std::to_string(index++) + "]";
    if (!jw.is_object()) throw ParseError(where + " is not an object", 0);
    if (!jw.contains("wafer_id") || !jw["wafer_id"].is_string()) {
      throw ParseError(where + ": missing string wafer_id", 0);
    }
    if (!jw.contains("etch_rate") || !jw["etch_rate"].is_number()) {
      throw ParseError(where + ": missing numeric etch_rate", 0);
    }
    if (!jw.contains("channels") || !jw["channels"].is_object()) {
      throw ParseError(where + ": missing channels object", 0);
    }
    WaferRecord w;
    w.wafer_id = jw["wafer_id"].get<std::string>();
    w.etch_rate = jw["etch_rate"].get<double>();
    for (const auto& [key, values] : jw["channels"].items()) {
      auto wl = parse_double(key);
      if (!wl) throw ParseError(where + ": invalid wavelength key '" + key + "'", 0);
      if (!values.is_array()) throw ParseError(where + " channel " + key + ": expected an array", 0);
      ChannelSeries s;
      s.wavelength_nm = *wl;
      for (const auto& v : values) {
        if (!v.is_number()) throw ParseError(where + " channel " + key + ": non-numeric intensity", 0);
        s.samples.push_back(v.get<double>());
      }
      if (std::find(first_seen.begin(), first_seen.end(), *wl) == first_seen.end()) first_seen.push_back(*wl);
      if (!w.channels.emplace(*wl, std::move(s)).second) {
        throw ParseError(where + ": duplicate wavelength " + key, 0);
      }
    }
    wafers.push_back(std::move(w));
  }
  return Dataset(std::move(wafers), std::move(first_seen));
}

void write_long_csv(const Dataset& ds, std::ostream& out) {
  if (ds.empty()) throw ValidationError("dataset must contain at least one wafer");
  out << kCsvHeader << '\n';
  for (const auto& w : ds.wafers()) {
    check_id_writable(w.wafer_id);
    const std::string prefix = w.wafer_id + ',' + format_real(w.etch_rate) + ',';
    for (Wavelength wl : ds.channel_order()) {
      const std::string wl_text = format_real(wl);
      const auto& samples = w.channel(wl).samples;
      for (std::size_t t = 0; t < samples.size(); ++t) {
        out << prefix << wl_text << ',' << t << ',' << format_real(samples[t]) << '\n';
      }
    }
  }
}

void write_json(const Dataset& ds, std::ostream& out) {
  using nlohmann::ordered_json;
  if (ds.empty()) throw ValidationError("dataset must contain at least one wafer");
  ordered_json wafers = ordered_json::array();
  for (const auto& w : ds.wafers()) {
    ordered_json channels = ordered_json::object();
    for (Wavelength wl : ds.channel_order()) channels[format_real(wl)] = w.channel(wl).samples;
    wafers.push_back({{"wafer_id", w.wafer_id}, {"etch_rate", w.etch_rate}, {"channels", std::move(channels)}});
  }
  out << ordered_json{{"wafers", std::move(wafers)}}.dump(1) << '\n';
}

Dataset load_dataset(const std::filesystem::path& path, DataFormat format) {
  auto in = open_in(path);
  return format == DataFormat::Json ? parse_json(in) : parse_long_csv(in);
}

Dataset load_dataset(const std::filesystem::path& path) { return load_dataset(path, format_from_path(path)); }

void save_dataset(const Dataset& ds, const std::filesystem::path& path, DataFormat format) {
  if (ds.empty()) throw ValidationError("dataset must contain at least one wafer");
  auto out = open_out(path);
  if (format == DataFormat::Json) {
    write_json(ds, out);
  } else {
    write_long_csv(ds, out);
  }
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  save_dataset(ds, path, format_from_path(path));
}

}  // namespace dtwreg
