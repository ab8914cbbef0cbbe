#include "doctest.h"

#include <filesystem>
#include <random>
#include <sstream>

#include "beamcodex/io.hpp"
#include "beamcodex/synth.hpp"

using namespace beamcodex;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("beamcodex_io_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("scan CSV round trip is exact") {
  const auto data = generate(preset("corridor-los"), 7, 3);
  std::stringstream ss;
  write_scans_csv(ss, data.scans);
  const auto back = read_scans_csv(ss);
  REQUIRE(back.size() == data.scans.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].location_id() == data.scans[i].location_id());
    CHECK(back[i].power_dbm() == data.scans[i].power_dbm());
    CHECK(back[i].distance_m() == data.scans[i].distance_m());
    CHECK(back[i].tag() == data.scans[i].tag());
  }
  std::stringstream again;
  write_scans_csv(again, back);
  CHECK(again.str() == ss.str());
}

TEST_CASE("finer grids are rebinned by linear mean") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> p(-80, 5);
  std::vector<double> fine(720);
  for (auto& v : fine) v = p(rng);
  std::stringstream ss;
  ss.precision(17);
  ss << "\xEF\xBB\xBFlocation_id,angle_deg,power_dbm\r\n";
  for (int k = 0; k < 720; ++k) ss << "a," << 0.5 * k << ',' << fine[static_cast<std::size_t>(k)] << "\r\n";
  const auto scans = read_scans_csv(ss);
  REQUIRE(scans.size() == 1);
  // Degree b collects the samples nearest to it: b - 0.5 (rounded up) and b.
  for (int b = 0; b < 360; ++b) {
    const int lo = (2 * b - 1 + 720) % 720, hi = 2 * b;
    const double want = 10 * std::log10(0.5 * (std::pow(10, fine[static_cast<std::size_t>(lo)] / 10) +
                                                std::pow(10, fine[static_cast<std::size_t>(hi)] / 10)));
    CHECK(scans[0].power_dbm(b) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("malformed scan files") {
  {
    std::stringstream ss("location_id,angle_deg\nx,1\n");
    CHECK_THROWS_AS(read_scans_csv(ss), InvalidInput);
  }
  {
    std::stringstream ss;
    ss << "location_id,angle_deg,power_dbm\n";
    for (int d = 0; d < 359; ++d) ss << "x," << d << ",-70\n";
    CHECK_THROWS_WITH_AS(read_scans_csv(ss), "location x covers 359 of 360 bins", InvalidInput);
  }
  {
    std::stringstream ss("location_id,angle_deg,power_dbm\nx,0,loud\n");
    CHECK_THROWS_AS(read_scans_csv(ss), InvalidInput);
  }
  {
    std::stringstream ss("location_id,angle_deg,power_dbm\n");
    CHECK_THROWS_AS(read_scans_csv(ss), InvalidInput);
  }
  CHECK_THROWS_AS(read_scans_csv(fs::path("/nonexistent/scans.csv")), InvalidInput);
}

TEST_CASE("optional columns in any order") {
  std::stringstream ss;
  ss << "tag,power_dbm,distance_m,angle_deg,location_id\n";
  for (int d = 0; d < 360; ++d) ss << "nlos," << -70 - d % 3 << ",12.5," << d << ",q\n";
  const auto s = read_scans_csv(ss);
  REQUIRE(s.size() == 1);
  CHECK(s[0].tag() == LinkClass::NLoS);
  CHECK(*s[0].distance_m() == 12.5);
  CHECK(s[0].power_dbm(2) == -72);
}

TEST_CASE("content hash") {
  CHECK(content_hash("") == "cbf29ce484222325");
  CHECK(content_hash("a") == "af63dc4c8601ec8c");
  CHECK(content_hash("abc") != content_hash("abd"));
}

TEST_CASE("output sets are all or nothing") {
  const auto dir = scratch("outputs");
  {
    OutputSet out;
    out.add(dir / "a.txt", "alpha");
    out.add(dir / "sub" / "b.txt", "beta");
    CHECK(!fs::exists(dir / "a.txt"));
  }
  CHECK(!fs::exists(dir / "a.txt"));
  CHECK(fs::is_empty(dir / "sub"));
  {
    OutputSet out;
    out.add(dir / "a.txt", "alpha");
    out.commit();
    CHECK(out.entries().size() == 1);
    CHECK(out.entries()[0].second == content_hash("alpha"));
  }
  CHECK(read_text_file(dir / "a.txt") == "alpha");
  fs::remove_all(dir);
}

}
