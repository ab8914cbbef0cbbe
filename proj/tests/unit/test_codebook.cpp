#include "doctest.h"

#include <algorithm>
#include <random>
#include <set>

#include "beamcodex/codebook.hpp"
#include "beamcodex/features.hpp"
#include "helpers.hpp"

using namespace beamcodex;

namespace {

DPState weighted_state(const std::vector<double>& weights) {
  DPState s;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    MixtureComponent c;
    c.x_c_deg = 40.0 * static_cast<double>(k);
    c.y_c_deg = 20;
    c.weight = weights[k];
    c.count = 1;
    s.components.push_back(c);
    s.assignments.push_back(k);
  }
  return s;
}

std::multiset<double> kept_weights(const std::vector<MixtureComponent>& comps) {
  std::multiset<double> out;
  for (const auto& c : comps) out.insert(c.weight);
  return out;
}

std::set<int> covered(const std::vector<Beam>& beams) {
  std::set<int> out;
  for (const auto& b : beams) {
    for (int bin : aperture_bins(b)) out.insert(bin);
  }
  return out;
}

}  // namespace

TEST_SUITE("codebook") {

TEST_CASE("pruning drops the lightest clusters within budget") {
  CHECK(kept_weights(prune_clusters(weighted_state({0.5, 0.45, 0.05}), 0.95)) == std::multiset<double>{0.45, 0.5});
  CHECK(kept_weights(prune_clusters(weighted_state({0.5, 0.45, 0.04, 0.03}), 0.95)) ==
        std::multiset<double>{0.04, 0.45, 0.5});
  CHECK(prune_clusters(weighted_state({0.5, 0.45, 0.04, 0.01}), 1.0).size() == 4);

  // Greedy prefix-sum oracle on random weights.
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.001, 1);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> w(1 + t % 12);
    double total = 0;
    for (auto& v : w) total += (v = u(rng));
    for (auto& v : w) v /= total;
    const double o = 0.8 + 0.2 * u(rng);
    auto sorted = w;
    std::sort(sorted.begin(), sorted.end());
    std::size_t drop = 0;
    double acc = 0;
    while (drop < sorted.size() && acc + sorted[drop] <= 1 - o + 1e-12) acc += sorted[drop++];
    const auto kept = prune_clusters(weighted_state(w), o);
    CHECK(kept.size() == sorted.size() - drop);
    double mass = 0;
    for (const auto& c : kept) mass += c.weight;
    CHECK(mass >= o - 1e-12);
  }
}

TEST_CASE("redundancy removal") {
  SUBCASE("exact union of two narrower beams") {
    const std::vector<Beam> in = {Beam(10, 40), Beam(0, 20), Beam(20, 20)};
    const auto out = remove_redundant(in);
    REQUIRE(out.size() == 2);
    CHECK(out[0] == Beam(0, 20));
    CHECK(out[1] == Beam(20, 20));
  }
  SUBCASE("overlapping cover is not equality") {
    const std::vector<Beam> in = {Beam(10, 40), Beam(0, 24), Beam(22, 16)};
    CHECK(remove_redundant(in).size() == 3);
  }
  SUBCASE("partial cover") {
    const std::vector<Beam> in = {Beam(10, 40), Beam(0, 20)};
    CHECK(remove_redundant(in).size() == 2);
  }
  SUBCASE("duplicates collapse") {
    CHECK(remove_redundant({Beam(5, 20), Beam(5, 20)}).size() == 1);
  }
  SUBCASE("wrapped union") {
    CHECK(remove_redundant({Beam(0, 30), Beam(350, 10), Beam(5, 20)}).size() == 2);
  }
}

TEST_CASE("redundancy removal preserves coverage and best gain") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> deg(0, 359), wid(10, 60), count(1, 8);
  std::normal_distribution<double> p(-80, 10);
  for (int t = 0; t < 300; ++t) {
    std::vector<Beam> beams;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      const int start = deg(rng), a = wid(rng), b = wid(rng);
      beams.emplace_back(start + a / 2.0, a);
      if (i % 2 == 0) {
        beams.emplace_back(start + a + b / 2.0, b);
        beams.emplace_back(start + (a + b) / 2.0, a + b);
      }
    }
    std::shuffle(beams.begin(), beams.end(), rng);
    const auto kept = remove_redundant(beams);
    CHECK(covered(kept) == covered(beams));
    for (const auto& b : kept) CHECK(std::find(beams.begin(), beams.end(), b) != beams.end());

    AngularPowerScan::Bins bins;
    for (auto& v : bins) v = p(rng);
    const AngularPowerScan s("r", bins);
    double before = -INFINITY, after = -INFINITY;
    for (const auto& b : beams) before = std::max(before, beam_gain(s, b));
    for (const auto& b : kept) after = std::max(after, beam_gain(s, b));
    CHECK(after - before == 0.0);
  }
}

TEST_CASE("codebook from a state") {
  DPState s = weighted_state({0.6, 0.37, 0.03});
  s.components[0].x_c_deg = 359.7;
  s.components[0].y_c_deg = 7.2;
  s.components[1].x_c_deg = 120.4;
  s.components[1].y_c_deg = 80;
  GainGapConfig cfg;
  const auto cb = build_codebook(s, cfg);
  REQUIRE(cb.size() == 2);
  CHECK(cb.beams[0] == Beam(0, 10));
  CHECK(cb.beams[1] == Beam(120, 60));
  CHECK(cb.kept_mass >= cfg.o_th1);
  CHECK(cb.kept_mass == doctest::Approx(0.97));

  const nlohmann::json j = cb;
  CHECK(j.at("beams").size() == 2);
  const auto back = j.get<Codebook>();
  CHECK(back.beams == cb.beams);
  CHECK(back.kept_mass == cb.kept_mass);
  CHECK(nlohmann::json(back).dump() == j.dump());

  const std::string csv = codebook_to_csv(cb);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
  CHECK(csv.find("120") != std::string::npos);
  CHECK(nlohmann::json(build_codebook(s, cfg)).dump() == j.dump());
}

TEST_CASE("single planted lobe gives one beam over the lobe") {
  std::vector<AngularPowerScan> scans;
  for (int i = 0; i < 40; ++i) scans.push_back(testutil::block_scan(-100, {{200, 30, -60}}, "l" + std::to_string(i)));
  GainGapConfig cfg;
  const auto c = extract_all(scans, cfg);
  const auto prior = hyperparams_from_data(c);
  const auto [state, report] = fit(c, scans, prior, cfg, 1);
  const auto cb = build_codebook(state, cfg);
  REQUIRE(cb.size() == 1);
  const auto bins = aperture_bins(cb.beams[0]);
  CHECK(bins.size() == 30);
  CHECK(bins.front() == 200);
}

}
