#include "doctest.h"

#include <random>

#include "beamcodex/features.hpp"
#include "helpers.hpp"

using namespace beamcodex;

namespace {

// Independent circular run finder: walk from a false bin, collect true stretches.
std::vector<std::pair<int, int>> oracle_runs(const std::array<bool, 360>& m) {
  int start = -1;
  for (int b = 0; b < 360; ++b) {
    if (!m[static_cast<std::size_t>(b)]) {
      start = b;
      break;
    }
  }
  if (start < 0) return {{0, 360}};
  std::vector<std::pair<int, int>> runs;
  int len = 0, first = 0;
  for (int k = 1; k <= 360; ++k) {
    const int b = (start + k) % 360;
    if (m[static_cast<std::size_t>(b)]) {
      if (len == 0) first = b;
      ++len;
    } else if (len > 0) {
      runs.emplace_back(first, len);
      len = 0;
    }
  }
  return runs;
}

}  // namespace

TEST_SUITE("features") {

TEST_CASE("constant scan tiles the circle") {
  const auto s = testutil::block_scan(-70, {});
  const auto c = extract_candidates(s, GainGapConfig{});
  REQUIRE(c.size() == 12);
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(c[i].y_deg == 60);
    CHECK(circ_distance(c[i].x_deg, 30.0 * static_cast<double>(i)) < 1e-9);
  }
}

TEST_CASE("single run") {
  const auto s = testutil::block_scan(-100, {{100, 20, -60}});
  const auto c = extract_candidates(s, GainGapConfig{}, 4);
  REQUIRE(c.size() == 1);
  CHECK(c[0].x_deg == doctest::Approx(109.5));
  CHECK(c[0].y_deg == 20);
  CHECK(c[0].source_index == 4);
  CHECK(c[0].source_location == "loc");
}

TEST_CASE("wrapped run") {
  const auto s = testutil::block_scan(-100, {{355, 10, -60}});
  const auto c = extract_candidates(s, GainGapConfig{});
  REQUIRE(c.size() == 1);
  CHECK(c[0].x_deg == doctest::Approx(359.5));
  CHECK(c[0].y_deg == 10);
}

TEST_CASE("short runs are dropped and wide runs tiled") {
  const auto s = testutil::block_scan(-100, {{10, 9, -60}, {100, 100, -60}});
  const auto c = extract_candidates(s, GainGapConfig{});
  // 100-wide run tiled by 60 at 30 steps: windows start at 100, 130 and a final one flush with the end.
  REQUIRE(!c.empty());
  for (const auto& cand : c) {
    CHECK(cand.y_deg == 60);
    for (int b : aperture_bins(cand.beam())) CHECK((b >= 100 && b < 200));
  }
  std::array<bool, 360> covered{};
  for (const auto& cand : c) {
    for (int b : aperture_bins(cand.beam())) covered[static_cast<std::size_t>(b)] = true;
  }
  for (int b = 100; b < 200; ++b) CHECK(covered[static_cast<std::size_t>(b)]);
}

TEST_CASE("no qualifying run gives no candidates") {
  const auto s = testutil::block_scan(-100, {{50, 3, -60}});
  CHECK(extract_candidates(s, GainGapConfig{}).empty());
}

TEST_CASE("circular runs agree with the oracle") {
  std::mt19937_64 rng(3);
  std::bernoulli_distribution on(0.6);
  for (int t = 0; t < 300; ++t) {
    std::array<bool, 360> m{};
    for (auto& v : m) v = on(rng);
    auto got = circular_runs(m);
    auto want = oracle_runs(m);
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    CHECK(got == want);
  }
}

TEST_CASE("candidate properties on random scans") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> noise(0, 1.5);
  std::uniform_int_distribution<int> pos(0, 359), len(5, 120), shift(0, 359);
  for (int t = 0; t < 60; ++t) {
    std::vector<testutil::Block> blocks;
    for (int k = 0; k < 3; ++k) blocks.push_back({pos(rng), len(rng), -60.0 - 3 * k});
    auto base = testutil::block_scan(-100, blocks);
    AngularPowerScan::Bins bins = base.power_dbm();
    for (auto& v : bins) v += noise(rng);
    const AngularPowerScan s("r", bins);
    GainGapConfig cfg;

    const auto mask = gain_gap_mask(s, cfg);
    const auto cands = extract_candidates(s, cfg);
    for (const auto& c : cands) {
      CHECK(c.y_deg >= cfg.w_min_deg);
      CHECK(c.y_deg <= cfg.w_max_deg);
      CHECK(c.x_deg >= 0);
      CHECK(c.x_deg < 360);
      for (int b : aperture_bins(c.beam())) CHECK(mask[static_cast<std::size_t>(b)]);
    }

    const int rot = shift(rng);
    auto rc = extract_candidates(s.rotated(rot), cfg);
    REQUIRE(rc.size() == cands.size());
    std::vector<std::pair<double, double>> a, b;
    for (const auto& c : cands) a.emplace_back(std::round(wrap_deg(c.x_deg + rot) * 2), c.y_deg);
    for (const auto& c : rc) b.emplace_back(std::round(wrap_deg(c.x_deg) * 2), c.y_deg);
    for (auto& v : a) v.first = std::fmod(v.first, 720.0);
    for (auto& v : b) v.first = std::fmod(v.first, 720.0);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);

    GainGapConfig wider = cfg;
    wider.gamma_db = cfg.gamma_db + 2;
    const auto wide_mask = gain_gap_mask(s, wider);
    for (int k = 0; k < 360; ++k) {
      if (mask[static_cast<std::size_t>(k)]) CHECK(wide_mask[static_cast<std::size_t>(k)]);
    }
  }
}

TEST_CASE("extract_all is independent of job count") {
  std::vector<AngularPowerScan> scans;
  for (int i = 0; i < 40; ++i) scans.push_back(testutil::block_scan(-100, {{(i * 37) % 360, 10 + i, -60}}));
  const auto one = extract_all(scans, GainGapConfig{}, 1);
  const auto many = extract_all(scans, GainGapConfig{}, 4);
  REQUIRE(one.size() == many.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].x_deg == many[i].x_deg);
    CHECK(one[i].y_deg == many[i].y_deg);
    CHECK(one[i].source_index == many[i].source_index);
  }
}

}
