#include <spinforce/io.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

using namespace spinforce;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "spinforce_io_test";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

} // namespace

TEST(TimeSeriesIo, RoundTripIsBitExact) {
  TimeSeries ts;
  ts.sample_rate = 2440.0;
  ts.seed = 77;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1e-9);
  for (int i = 0; i < 5000; ++i)
    ts.samples.push_back(n(rng));
  const auto p = scratch("round.csv");
  export_timeseries(ts, p, {{"note", "test"}});
  const auto back = import_timeseries(p);
  EXPECT_EQ(back.samples, ts.samples);
  EXPECT_EQ(back.sample_rate, ts.sample_rate);
  EXPECT_EQ(back.seed, 77u);
  std::ifstream side(sidecar_path(p));
  const auto meta = nlohmann::json::parse(side);
  EXPECT_EQ(meta["note"], "test");
  EXPECT_EQ(meta["samples"], 5000);
}

TEST(TimeSeriesIo, InfersRateWithoutSidecar) {
  const auto p = scratch("nosidecar.csv");
  fs::remove(sidecar_path(p));
  write_text(p, "t,z\n0,1\n0.5,2\n1.0,3\n1.5,4\n");
  const auto ts = import_timeseries(p);
  EXPECT_DOUBLE_EQ(ts.sample_rate, 2.0);
  EXPECT_EQ(ts.samples, (std::vector<double>{1, 2, 3, 4}));
}

TEST(TimeSeriesIo, NanRowIsReportedWithRowNumber) {
  const auto p = scratch("nan.csv");
  fs::remove(sidecar_path(p));
  write_text(p, "t,z\n0,1\n0.5,nan\n1.0,3\n");
  try {
    import_timeseries(p);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos) << e.what();
  }
}

TEST(TimeSeriesIo, GarbageCellIsParseError) {
  const auto p = scratch("garbage.csv");
  write_text(p, "t,z\n0,1\n0.5,abc\n");
  EXPECT_THROW(import_timeseries(p), ParseError);
}

TEST(TimeSeriesIo, HeaderOnlyIsTooShort) {
  const auto p = scratch("header.csv");
  fs::remove(sidecar_path(p));
  write_text(p, "t,z\n");
  EXPECT_THROW(import_timeseries(p), TooShort);
}

TEST(TimeSeriesIo, IrregularTimesAreRejected) {
  const auto p = scratch("irregular.csv");
  fs::remove(sidecar_path(p));
  write_text(p, "t,z\n0,1\n0.5,2\n1.2,3\n1.5,4\n");
  EXPECT_THROW(import_timeseries(p), NonuniformSampling);
}

TEST(TimeSeriesIo, MissingFile) {
  EXPECT_THROW(import_timeseries(scratch("does_not_exist.csv")), ParseError);
}

TEST(FieldMapIo, HeaderAndRows) {
  const auto m = small_magnet();
  GridSpec g{Vec3(0, 0, 1e-3), Vec3(0, 0, 2e-3), {1, 1, 2}};
  const auto p = scratch("field.csv");
  export_field_map(field_map(m, g), p);
  std::ifstream in(p);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "x,y,z,Bx,By,Bz,dBzdz");
  EXPECT_EQ(row.rfind("0,0,0.001,", 0), 0u) << row;
}
