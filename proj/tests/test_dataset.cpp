#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "dtwreg/core.hpp"
#include "dtwreg/error.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace dtwreg;
using fixture::wafer;

namespace {

Dataset random_dataset(std::mt19937_64& rng, std::size_t n_wafers, std::size_t n_channels, bool ragged) {
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  std::uniform_int_distribution<std::size_t> len(4, 12);
  std::vector<WaferRecord> ws;
  std::vector<double> order;
  for (std::size_t c = 0; c < n_channels; ++c) order.push_back(400.0 + 37.123456789 * c);
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t i = 0; i < n_wafers; ++i) {
    const std::size_t n = ragged ? len(rng) : 8;
    fixture::Channels chans;
    for (double wl : order) {
      std::vector<double> s(n);
      for (auto& v : s) v = u(rng) / 7.0;
      chans.emplace_back(wl, s);
    }
    ws.push_back(wafer(fixture::id(i), 50.0 + std::abs(u(rng)) / 3.0, chans));
  }
  return Dataset(std::move(ws), order);
}

std::string csv_of(const Dataset& ds) {
  std::ostringstream out;
  write_long_csv(ds, out);
  return out.str();
}

Dataset from_csv(const std::string& text) {
  std::istringstream in(text);
  return parse_long_csv(in);
}

}  // namespace

TEST(Dataset, RejectsEmptyAndBadWafers) {
  EXPECT_THROW(Dataset({}, {}), ValidationError);
  auto ok = wafer("A", 10.0, {{500.0, {1, 2, 3}}});
  EXPECT_NO_THROW(Dataset({ok}, {500.0}));

  auto zero_rate = wafer("A", 0.0, {{500.0, {1, 2, 3}}});
  EXPECT_THROW(Dataset({zero_rate}, {500.0}), ValidationError);
  auto nan_rate = wafer("A", std::nan(""), {{500.0, {1, 2, 3}}});
  EXPECT_THROW(Dataset({nan_rate}, {500.0}), ValidationError);

  auto inf_sample = wafer("A", 1.0, {{500.0, {1, std::numeric_limits<double>::infinity(), 3}}});
  EXPECT_THROW(Dataset({inf_sample}, {500.0}), ValidationError);

  auto ragged = wafer("A", 1.0, {{500.0, {1, 2, 3}}, {600.0, {1, 2}}});
  EXPECT_THROW(Dataset({ragged}, {500.0, 600.0}), ValidationError);

  auto empty_series = wafer("A", 1.0, {{500.0, {}}});
  EXPECT_THROW(Dataset({empty_series}, {500.0}), ValidationError);
}

TEST(Dataset, SortsByIdRejectsDuplicatesAndChannelMismatch) {
  auto a = wafer("A", 1.0, {{500.0, {1, 2}}});
  auto b = wafer("B", 1.0, {{500.0, {1, 2}}});
  Dataset sorted({b, a}, {500.0});
  EXPECT_EQ(sorted[0].wafer_id, "A");
  EXPECT_EQ(sorted[1].wafer_id, "B");
  EXPECT_THROW(Dataset({a, a}, {500.0}), ValidationError);

  auto other = wafer("B", 1.0, {{510.0, {1, 2}}});
  EXPECT_THROW(Dataset({a, other}, {500.0}), ValidationError);

  EXPECT_THROW(Dataset({a, b}, {510.0}), ValidationError);
  EXPECT_THROW(Dataset({a, b}, {500.0, 500.0}), ValidationError);
  EXPECT_THROW(Dataset({a, b}, {}), ValidationError);
}

TEST(Dataset, AllowsDifferentLengthsAcrossWafers) {
  auto a = wafer("A", 1.0, {{500.0, {1, 2, 3, 4, 5}}});
  auto b = wafer("B", 2.0, {{500.0, {1, 2, 3}}});
  Dataset ds({a, b}, {500.0});
  EXPECT_EQ(ds[0].ticks(), 5u);
  EXPECT_EQ(ds[1].ticks(), 3u);
}

TEST(Dataset, LookupSubsetAndChannelOrder) {
  auto a = wafer("A", 1.0, {{500.0, {1, 2}}, {600.0, {3, 4}}});
  auto b = wafer("B", 2.0, {{500.0, {5, 6}}, {600.0, {7, 8}}});
  auto c = wafer("C", 3.0, {{500.0, {9, 10}}, {600.0, {11, 12}}});
  Dataset ds({a, b, c}, {600.0, 500.0});
  EXPECT_EQ(ds.index_of("B"), 1u);
  EXPECT_THROW(ds.index_of("Z"), ValidationError);
  EXPECT_EQ(ds.etch_rates(), (std::vector<double>{1.0, 2.0, 3.0}));

  std::vector<std::size_t> idx{2, 0};
  auto sub = ds.subset(idx);
  ASSERT_EQ(sub.size(), 2u);
  EXPECT_EQ(sub[0].wafer_id, "A");
  EXPECT_EQ(sub[1].wafer_id, "C");
  EXPECT_EQ(sub.channel_order(), ds.channel_order());

  auto reordered = ds.with_channel_order({500.0, 600.0});
  EXPECT_EQ(reordered.channel_order().front(), 500.0);
  EXPECT_THROW(ds.with_channel_order({500.0}), ValidationError);
}

TEST(Dataset, MissingChannelNamesWaferAndWavelength) {
  auto a = wafer("WAF-7", 1.0, {{500.0, {1, 2}}});
  try {
    (void)a.channel(612.5);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("WAF-7"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("612.5"), std::string::npos);
  }
}

TEST(DatasetIo, LongCsvRoundTripIsExact) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    auto ds = random_dataset(rng, 1 + rep % 6, 1 + rep % 4, rep % 2 == 1);
    EXPECT_EQ(from_csv(csv_of(ds)), ds);
  }
}

TEST(DatasetIo, JsonRoundTripIsExact) {
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 20; ++rep) {
    auto ds = random_dataset(rng, 1 + rep % 5, 1 + rep % 3, rep % 2 == 0);
    std::ostringstream out;
    write_json(ds, out);
    std::istringstream in(out.str());
    EXPECT_EQ(parse_json(in), ds);
  }
}

TEST(DatasetIo, AwkwardDoublesSurvive) {
  std::vector<double> vals{0.1, 1.0 / 3.0, -0.0, 5e-324, 1.7976931348623157e308, -2.2250738585072014e-308, 1e-300};
  auto a = wafer("A", 0.30000000000000004, {{656.28, vals}});
  Dataset ds({a}, {656.28});
  auto back = from_csv(csv_of(ds));
  for (std::size_t i = 0; i < vals.size(); ++i) {
    EXPECT_EQ(std::signbit(back[0].channel(656.28).samples[i]), std::signbit(vals[i]));
    EXPECT_EQ(back[0].channel(656.28).samples[i], vals[i]);
  }
  EXPECT_EQ(back[0].etch_rate, 0.30000000000000004);
}

TEST(DatasetIo, FileRoundTripBothFormats) {
  oracle::TempDir dir("ds");
  std::mt19937_64 rng(13);
  auto ds = random_dataset(rng, 4, 3, true);
  save_dataset(ds, dir.file("d.csv"));
  save_dataset(ds, dir.file("d.json"));
  EXPECT_EQ(format_from_path(dir.file("d.json")), DataFormat::Json);
  EXPECT_EQ(format_from_path(dir.file("d.csv")), DataFormat::LongCsv);
  EXPECT_EQ(load_dataset(dir.file("d.csv")), ds);
  EXPECT_EQ(load_dataset(dir.file("d.json")), ds);
  // Loading twice gives the same thing.
  EXPECT_EQ(load_dataset(dir.file("d.csv")), load_dataset(dir.file("d.csv")));
}

TEST(DatasetIo, SingleWaferFileHasHeaderPlusTickRows) {
  auto a = wafer("A", 3.5, {{500.0, {1, 2, 3}}, {600.0, {4, 5, 6}}});
  Dataset ds({a}, {500.0, 600.0});
  auto text = csv_of(ds);
  EXPECT_EQ(oracle::count_lines(text), 1u + 2u * 3u);
  EXPECT_EQ(text.substr(0, text.find('\n')), "wafer_id,etch_rate,wavelength_nm,tick,intensity");
}

TEST(DatasetIo, SavingEmptyDatasetFails) {
  oracle::TempDir dir("empty");
  Dataset empty;
  EXPECT_THROW(save_dataset(empty, dir.file("e.csv")), ValidationError);
  EXPECT_THROW(save_dataset(empty, dir.file("e.json")), ValidationError);
}

TEST(DatasetIo, RowsInAnyOrderAreSorted) {
  std::mt19937_64 rng(14);
  auto ds = random_dataset(rng, 5, 2, false);
  auto text = csv_of(ds);
  std::istringstream in(text);
  std::string header, line;
  std::getline(in, header);
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  std::shuffle(rows.begin(), rows.end(), rng);
  std::string shuffled = header + "\n";
  for (const auto& r : rows) shuffled += r + "\n";
  auto back = from_csv(shuffled);
  EXPECT_EQ(back.wafers(), ds.wafers());
}

TEST(DatasetIo, ToleratesBomCrlfAndBlankLines) {
  std::string text =
      "\xEF\xBB\xBFwafer_id,etch_rate,wavelength_nm,tick,intensity\r\n"
      "A,2,500,0,1.5\r\n"
      "\r\n"
      "A,2,500,1,2.5\r\n";
  auto ds = from_csv(text);
  EXPECT_EQ(ds[0].channel(500.0).samples, (std::vector<double>{1.5, 2.5}));
}

TEST(DatasetIo, ParseErrorsCarryLineNumbers) {
  const std::string h = "wafer_id,etch_rate,wavelength_nm,tick,intensity\n";
  auto expect_line = [&](const std::string& text, std::size_t line) {
    try {
      (void)from_csv(text);
      ADD_FAILURE() << "no error for:\n" << text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), line) << e.what();
    }
  };
  expect_line("id,rate\n", 1);
  expect_line(h + "A,2,500,0,1\nA,2,500,1,abc\n", 3);
  expect_line(h + "A,2,500,0,1\nA,2,500,0,2\n", 3);
  expect_line(h + "A,2,500,0,1\nA,3,500,1,2\n", 3);
  expect_line(h + "A,2,500,0\n", 2);
  expect_line(h + "A,-2,500,0,1\n", 2);
  expect_line(h + "A,2,500,-1,1\n", 2);
  expect_line(h + "A,2,500,0,nan\n", 2);
}

TEST(DatasetIo, MissingTicksAndHeaderOnlyAreValidationErrors) {
  const std::string h = "wafer_id,etch_rate,wavelength_nm,tick,intensity\n";
  EXPECT_THROW(from_csv(h + "A,2,500,0,1\nA,2,500,2,1\n"), ValidationError);
  EXPECT_THROW(from_csv(h), ValidationError);
  EXPECT_THROW(from_csv(""), ParseError);
}

TEST(DatasetIo, JsonRejectsMalformedDocuments) {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_json(in);
  };
  EXPECT_THROW(parse("{"), ParseError);
  EXPECT_THROW(parse("[]"), ParseError);
  EXPECT_THROW(parse(R"({"wafers":[{"wafer_id":"A","etch_rate":1,"channels":{"x":[1]}}]})"), ParseError);
  EXPECT_THROW(parse(R"({"wafers":[{"wafer_id":"A","etch_rate":1,"channels":{"500":["a"]}}]})"), ParseError);
  EXPECT_THROW(parse(R"({"wafers":[]})"), ValidationError);
  auto ds = parse(R"({"wafers":[{"wafer_id":"A","etch_rate":1.5,"channels":{"500":[1,2],"400":[3,4]}}]})");
  EXPECT_EQ(ds.channel_order(), (std::vector<double>{500.0, 400.0}));
}

TEST(DatasetIo, IdsThatBreakCsvAreRejectedOnWrite) {
  auto a = wafer("A,B", 1.0, {{500.0, {1, 2}}});
  Dataset ds({a}, {500.0});
  std::ostringstream out;
  EXPECT_THROW(write_long_csv(ds, out), ValidationError);
}

TEST(DatasetIo, MissingFileIsIoError) {
  EXPECT_THROW(load_dataset("/nonexistent/dir/x.csv"), IoError);
}
