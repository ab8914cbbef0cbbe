#include "beamcodex/eval.hpp"

#include <algorithm>
#include <sstream>

#include "beamcodex/parallel.hpp"

namespace beamcodex {

namespace {

constexpr double kGapSlack = 1e-9;

double probe(const AngularPowerScan& scan, const Beam& beam, Rng* rng, double noise_db) {
  const double g = beam_gain(scan, beam);
  if (rng == nullptr || noise_db <= 0.0) return g;
  return g + normal(*rng, 0.0, noise_db);
}

}  // namespace

TrainingResult train_codebook(const AngularPowerScan& scan, const Codebook& codebook,
                              const GainGapConfig& cfg, double dir_error_deg, Rng& rng,
                              double probe_noise_db) {
  if (codebook.beams.empty()) throw InvalidInput("empty codebook");
  TrainingResult r;
  r.location_id = scan.location_id();
  r.max_gain_dbm = max_gain(scan, cfg);
  const double eps =
      dir_error_deg > 0.0 ? std::uniform_real_distribution<double>(-dir_error_deg, dir_error_deg)(rng) : 0.0;
  r.dir_error_deg = eps;
  double best_reading = -INFINITY;
  for (const auto& b : codebook.beams) {
    const Beam applied = b.shifted(eps);
    const double reading = probe(scan, applied, &rng, probe_noise_db);
    if (reading > best_reading) {
      best_reading = reading;
      r.chosen_beam = applied;
    }
  }
  r.achieved_gain_dbm = beam_gain(scan, r.chosen_beam);
  r.gap_db = r.max_gain_dbm - r.achieved_gain_dbm;
  r.probes_used = static_cast<int>(codebook.beams.size());
  return r;
}

TrainingResult train_exhaustive(const AngularPowerScan& scan, const GainGapConfig& cfg) {
  TrainingResult r;
  r.location_id = scan.location_id();
  const int dir = max_gain_direction(scan, cfg);
  r.chosen_beam = Beam(dir, cfg.ref_beamwidth_deg);
  r.max_gain_dbm = max_gain(scan, cfg);
  r.achieved_gain_dbm = beam_gain(scan, r.chosen_beam);
  r.gap_db = r.max_gain_dbm - r.achieved_gain_dbm;
  r.probes_used = kScanBins;
  return r;
}

TrainingResult train_hierarchical(const AngularPowerScan& scan, const GainGapConfig& cfg, int levels,
                                  Rng* rng, double probe_noise_db) {
  if (levels < 1) throw InvalidInput("hierarchical search needs at least one level");
  TrainingResult r;
  r.location_id = scan.location_id();
  Beam first(90.0, 180.0);
  Beam second(270.0, 180.0);
  Beam winner;
  for (int level = 1; level <= levels; ++level) {
    if (level > 1) {
      const double w = winner.width_deg / 2.0;
      first = Beam(winner.direction_deg - w / 2.0, w);
      second = Beam(winner.direction_deg + w / 2.0, w);
    }
    const double a = probe(scan, first, rng, probe_noise_db);
    const double b = probe(scan, second, rng, probe_noise_db);
    winner = b > a ? second : first;
  }
  r.chosen_beam = winner;
  r.max_gain_dbm = max_gain(scan, cfg);
  r.achieved_gain_dbm = beam_gain(scan, winner);
  r.gap_db = r.max_gain_dbm - r.achieved_gain_dbm;
  r.probes_used = 2 * levels;
  return r;
}

std::string Strategy::name() const {
  switch (kind) {
    case StrategyKind::Exhaustive:
      return "exhaustive";
    case StrategyKind::Hierarchical:
      return "hierarchical";
    case StrategyKind::Codebook:
      break;
  }
  return route ? "codebook-routed" : "codebook";
}

std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> gaps) {
  std::sort(gaps.begin(), gaps.end());
  std::vector<std::pair<double, double>> out;
  const double n = static_cast<double>(gaps.size());
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    if (i + 1 < gaps.size() && gaps[i + 1] == gaps[i]) continue;
    out.emplace_back(gaps[i], static_cast<double>(i + 1) / n);
  }
  return out;
}

double fraction_within(const std::vector<TrainingResult>& results, double threshold_db) {
  if (results.empty()) return 0.0;
  const auto hits = std::count_if(results.begin(), results.end(), [&](const TrainingResult& r) {
    return r.gap_db <= threshold_db + kGapSlack;
  });
  return static_cast<double>(hits) / static_cast<double>(results.size());
}

EvalSummary evaluate(const std::vector<AngularPowerScan>& scans, const Strategy& strategy,
                     const GainGapConfig& cfg, const EvalOptions& opts) {
  if (scans.empty()) throw InvalidInput("no scans to evaluate");
  if (strategy.kind == StrategyKind::Codebook && strategy.codebook == nullptr && !strategy.route) {
    throw InvalidInput("codebook strategy needs a codebook");
  }
  EvalSummary s;
  s.strategy = strategy.name();
  s.gamma_db = cfg.gamma_db;
  s.dir_error_deg = opts.dir_error_deg;
  s.probe_noise_db = opts.probe_noise_db;
  s.levels = strategy.kind == StrategyKind::Hierarchical ? strategy.levels : 0;
  s.n_locations = scans.size();
  s.results.resize(scans.size());

  parallel_for(scans.size(), opts.jobs, [&](std::size_t i) {
    Rng rng = make_rng(opts.seed, i);
    switch (strategy.kind) {
      case StrategyKind::Exhaustive:
        s.results[i] = train_exhaustive(scans[i], cfg);
        break;
      case StrategyKind::Hierarchical:
        s.results[i] = train_hierarchical(scans[i], cfg, strategy.levels, &rng, opts.probe_noise_db);
        break;
      case StrategyKind::Codebook: {
        const Codebook* cb = strategy.route ? strategy.route(i) : strategy.codebook;
        if (cb == nullptr) throw InvalidInput("no codebook routed for scan " + scans[i].location_id());
        s.results[i] = train_codebook(scans[i], *cb, cfg, opts.dir_error_deg, rng, opts.probe_noise_db);
        break;
      }
    }
  });

  std::vector<double> gaps;
  double probes = 0.0;
  for (const auto& r : s.results) {
    gaps.push_back(r.gap_db);
    probes += r.probes_used;
  }
  s.cdf_points = empirical_cdf(gaps);
  s.success_rate = fraction_within(s.results, cfg.gamma_db);
  s.success_rate_plus_1db = fraction_within(s.results, cfg.gamma_db + 1.0);
  s.mean_probes = probes / static_cast<double>(s.results.size());
  s.time_saving_vs_exhaustive = 1.0 - s.mean_probes / kScanBins;
  return s;
}

void to_json(nlohmann::json& j, const EvalSummary& s) {
  nlohmann::json cdf = nlohmann::json::array();
  for (const auto& [g, f] : s.cdf_points) cdf.push_back({g, f});
  nlohmann::json per = nlohmann::json::array();
  for (const auto& r : s.results) {
    per.push_back({{"location_id", r.location_id},
                   {"direction_deg", r.chosen_beam.direction_deg},
                   {"width_deg", r.chosen_beam.width_deg},
                   {"achieved_gain_dbm", r.achieved_gain_dbm},
                   {"max_gain_dbm", r.max_gain_dbm},
                   {"gap_db", r.gap_db},
                   {"probes_used", r.probes_used},
                   {"dir_error_deg", r.dir_error_deg}});
  }
  j = {{"strategy", s.strategy},
       {"gamma_db", s.gamma_db},
       {"dir_error_deg", s.dir_error_deg},
       {"probe_noise_db", s.probe_noise_db},
       {"levels", s.levels},
       {"n_locations", s.n_locations},
       {"success_rate", s.success_rate},
       {"success_rate_plus_1db", s.success_rate_plus_1db},
       {"mean_probes", s.mean_probes},
       {"time_saving_vs_exhaustive", s.time_saving_vs_exhaustive},
       {"cdf_points", cdf},
       {"results", per}};
}

std::string cdf_to_csv(const EvalSummary& s) {
  std::ostringstream out;
  out.precision(17);
  out << "gap_db,cdf\n";
  for (const auto& [g, f] : s.cdf_points) out << g << ',' << f << '\n';
  return out.str();
}

}  // namespace beamcodex
