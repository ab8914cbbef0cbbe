#include "doctest.h"

#include <random>

#include "beamcodex/eval.hpp"
#include "helpers.hpp"

using namespace beamcodex;

namespace {

Codebook make_codebook(std::vector<Beam> beams, double gamma = 5) {
  Codebook cb;
  cb.beams = std::move(beams);
  cb.gamma_db = gamma;
  return cb;
}

AngularPowerScan noisy_scan(std::mt19937_64& rng, const std::string& id = "r") {
  std::normal_distribution<double> p(-80, 6);
  AngularPowerScan::Bins bins;
  for (auto& v : bins) v = p(rng);
  return AngularPowerScan(id, bins);
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("codebook containing the exhaustive winner") {
  std::mt19937_64 rng(1);
  GainGapConfig cfg;
  for (int t = 0; t < 50; ++t) {
    const auto s = noisy_scan(rng);
    const Beam best(max_gain_direction(s, cfg), cfg.ref_beamwidth_deg);
    Rng r = make_rng(t);
    const auto res = train_codebook(s, make_codebook({Beam(17, 30), best, Beam(200, 45)}), cfg, 0, r);
    CHECK(res.gap_db <= 1e-9);
    CHECK(res.achieved_gain_dbm >= beam_gain(s, best));
    CHECK(res.probes_used == 3);
  }
}

TEST_CASE("all reference beams reproduce exhaustive search") {
  std::mt19937_64 rng(2);
  GainGapConfig cfg;
  std::vector<Beam> all;
  for (int d = 0; d < 360; ++d) all.emplace_back(d, cfg.ref_beamwidth_deg);
  const auto cb = make_codebook(all);
  for (int t = 0; t < 20; ++t) {
    const auto s = noisy_scan(rng);
    Rng r = make_rng(t);
    const auto a = train_codebook(s, cb, cfg, 0, r);
    const auto b = train_exhaustive(s, cfg);
    CHECK(a.achieved_gain_dbm == b.achieved_gain_dbm);
    CHECK(a.chosen_beam == b.chosen_beam);
    CHECK(a.probes_used == b.probes_used);
  }
}

TEST_CASE("reference-direction error on a flat-top lobe") {
  const auto s = testutil::block_scan(-200, {{100, 30, -60}});
  GainGapConfig cfg;
  const auto cb = make_codebook({Beam(115, 30)});
  Rng r = make_rng(3);
  for (int t = 0; t < 200; ++t) {
    const auto res = train_codebook(s, cb, cfg, 20, r);
    const double eps = res.dir_error_deg;
    CHECK(std::abs(eps) <= 20);
    // Overlap in whole bins between the shifted aperture and the lobe.
    int overlap = 0;
    for (int b : aperture_bins(res.chosen_beam)) overlap += (b >= 100 && b < 130);
    CHECK(res.gap_db == doctest::Approx(-10 * std::log10(overlap / 30.0)).epsilon(1e-9));
    if (overlap >= 20) CHECK(res.gap_db <= cfg.gamma_db);
  }
  Rng r2 = make_rng(3);
  CHECK_THROWS_AS(train_codebook(s, make_codebook({}), cfg, 0, r2), InvalidInput);
}

TEST_CASE("exhaustive search") {
  std::mt19937_64 rng(4);
  GainGapConfig cfg;
  for (int t = 0; t < 20; ++t) {
    const auto s = noisy_scan(rng);
    const auto res = train_exhaustive(s, cfg);
    CHECK(res.gap_db == 0.0);
    CHECK(res.probes_used == 360);
    CHECK(res.chosen_beam.direction_deg == max_gain_direction(s, cfg));
  }
  AngularPowerScan::Bins peaked;
  for (int b = 0; b < 360; ++b) peaked[static_cast<std::size_t>(b)] = -60 - 0.5 * circ_distance(b, 90);
  CHECK(circ_distance(train_exhaustive(AngularPowerScan("p", peaked), cfg).chosen_beam.direction_deg, 90) <= 1);
}

TEST_CASE("hierarchical search") {
  GainGapConfig cfg;
  SUBCASE("dominant wide lobe") {
    const auto s = testutil::block_scan(-200, {{100, 40, -60}});
    const auto res = train_hierarchical(s, cfg, 6);
    CHECK(res.probes_used == 12);
    CHECK(res.chosen_beam.width_deg == doctest::Approx(5.625));
    for (int b : aperture_bins(res.chosen_beam)) CHECK((b >= 100 && b < 140));
    CHECK(res.gap_db <= cfg.gamma_db);
  }
  SUBCASE("half-circle tie under probe noise") {
    // Narrow strong lobe and wide weak lobe with equal total power.
    const double weak = -60 - 10 * std::log10(9.0);
    const auto s = testutil::block_scan(-200, {{40, 10, -60}, {180, 90, weak}});
    int wrong = 0;
    double wrong_gap = 0;
    const int trials = 400;
    for (int t = 0; t < trials; ++t) {
      Rng r = make_rng(100, static_cast<std::uint64_t>(t));
      const auto res = train_hierarchical(s, cfg, 6, &r, 1.0);
      if (res.chosen_beam.direction_deg >= 180) {
        ++wrong;
        wrong_gap += res.gap_db;
      }
    }
    const double frac = static_cast<double>(wrong) / trials;
    CHECK(frac > 0.35);
    CHECK(frac < 0.65);
    CHECK(wrong_gap / wrong > cfg.gamma_db);
  }
  CHECK_THROWS_AS(train_hierarchical(testutil::block_scan(-70, {}), cfg, 0), InvalidInput);
}

TEST_CASE("adding a beam never increases a gap") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> deg(0, 359), wid(10, 60);
  GainGapConfig cfg;
  for (int t = 0; t < 100; ++t) {
    const auto s = noisy_scan(rng);
    std::vector<Beam> beams = {Beam(deg(rng), wid(rng)), Beam(deg(rng), wid(rng))};
    Rng r1 = make_rng(t);
    const auto before = train_codebook(s, make_codebook(beams), cfg, 0, r1);
    beams.emplace_back(deg(rng), wid(rng));
    Rng r2 = make_rng(t);
    const auto after = train_codebook(s, make_codebook(beams), cfg, 0, r2);
    CHECK(after.gap_db <= before.gap_db);
    CHECK(after.gap_db >= -1e-9);
  }
}

TEST_CASE("mirror equivariance") {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> deg(0, 359), half(5, 30);
  std::uniform_real_distribution<double> e(-20, 20);
  GainGapConfig cfg;
  for (int t = 0; t < 100; ++t) {
    const auto s = noisy_scan(rng);
    const double eps = e(rng);
    std::vector<Beam> fwd, back;
    for (int i = 0; i < 4; ++i) {
      // Odd widths on whole-degree centres keep both aperture edges off bin centres.
      const int d = deg(rng), w = 2 * half(rng) + 1;
      fwd.push_back(Beam(d, w).shifted(eps));
      back.push_back(Beam(-d, w).shifted(-eps));
    }
    Rng r1 = make_rng(t), r2 = make_rng(t);
    const auto a = train_codebook(s, make_codebook(fwd), cfg, 0, r1);
    const auto b = train_codebook(s.mirrored(), make_codebook(back), cfg, 0, r2);
    CHECK(circ_distance(a.chosen_beam.direction_deg, -b.chosen_beam.direction_deg) < 1e-9);
    CHECK(a.gap_db == doctest::Approx(b.gap_db).epsilon(1e-12));
  }
}

TEST_CASE("evaluate summaries") {
  std::mt19937_64 rng(7);
  std::vector<AngularPowerScan> scans;
  for (int i = 0; i < 60; ++i) scans.push_back(noisy_scan(rng, "s" + std::to_string(i)));
  GainGapConfig cfg;

  const auto ex = evaluate(scans, Strategy::exhaustive(), cfg);
  CHECK(ex.success_rate == 1.0);
  CHECK(ex.time_saving_vs_exhaustive == 0.0);
  CHECK(ex.n_locations == 60);

  std::vector<Beam> ten;
  for (int k = 0; k < 10; ++k) ten.emplace_back(36 * k, 36);
  const auto cb = make_codebook(ten);
  EvalOptions opts;
  opts.dir_error_deg = 20;
  opts.seed = 9;
  const auto sum = evaluate(scans, Strategy::with_codebook(cb), cfg, opts);
  CHECK(sum.time_saving_vs_exhaustive == doctest::Approx(1 - 10.0 / 360));
  CHECK(sum.dir_error_deg == 20);
  CHECK(sum.success_rate >= 0);
  CHECK(sum.success_rate <= sum.success_rate_plus_1db);
  double prev = 0;
  for (const auto& [gap, frac] : sum.cdf_points) {
    CHECK(frac >= prev);
    prev = frac;
  }
  CHECK(sum.cdf_points.back().second == 1.0);
  CHECK(sum.success_rate == doctest::Approx(fraction_within(sum.results, cfg.gamma_db)));

  opts.jobs = 4;
  const auto par = evaluate(scans, Strategy::with_codebook(cb), cfg, opts);
  CHECK(nlohmann::json(par).dump() == nlohmann::json(sum).dump());

  const auto h = evaluate(scans, Strategy::hierarchical(6), cfg);
  CHECK(h.mean_probes == 12);

  const std::string csv = cdf_to_csv(sum);
  CHECK(csv.rfind("gap_db,cdf\n", 0) == 0);
}

TEST_CASE("empirical cdf") {
  const auto c = empirical_cdf({3, 1, 2, 2});
  REQUIRE(c.size() == 3);
  CHECK(c[0] == std::pair<double, double>{1, 0.25});
  CHECK(c[1] == std::pair<double, double>{2, 0.75});
  CHECK(c[2] == std::pair<double, double>{3, 1.0});
}

}
