#pragma once

// Beam-training simulation: codebook training under a reference-direction
// error, the exhaustive 1-degree sweep, and dyadic hierarchical search.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "beamcodex/codebook.hpp"
#include "beamcodex/random.hpp"

namespace beamcodex {

struct TrainingResult {
  std::string location_id;
  Beam chosen_beam;
  double achieved_gain_dbm = 0.0;
  double max_gain_dbm = 0.0;
  double gap_db = 0.0;
  int probes_used = 0;
  double dir_error_deg = 0.0;  // reference-frame offset actually applied
};

/// Trains `codebook` on `scan`: a single offset eps ~ U(-dir_error, dir_error)
/// shifts every probed beam; the achieved gain is that of the shifted winner
/// on the true scan. Optional i.i.d. dB noise perturbs each probe reading.
TrainingResult train_codebook(const AngularPowerScan& scan, const Codebook& codebook,
                              const GainGapConfig& cfg, double dir_error_deg, Rng& rng,
                              double probe_noise_db = 0.0);

/// 360 reference-width probes at 1-degree steps; gap is zero by construction.
TrainingResult train_exhaustive(const AngularPowerScan& scan, const GainGapConfig& cfg);

/// Dyadic descent from two 180-degree beams; each level halves the winner.
/// Ties keep the first (lower-direction) child.
TrainingResult train_hierarchical(const AngularPowerScan& scan, const GainGapConfig& cfg,
                                  int levels = 6, Rng* rng = nullptr, double probe_noise_db = 0.0);

enum class StrategyKind { Exhaustive, Hierarchical, Codebook };

struct Strategy {
  StrategyKind kind = StrategyKind::Exhaustive;
  int levels = 6;
  const Codebook* codebook = nullptr;
  /// Per-scan codebook choice (e.g. LoS/NLoS routing); overrides `codebook`.
  std::function<const Codebook*(std::size_t)> route;

  static Strategy exhaustive() { return {}; }
  static Strategy hierarchical(int levels) { return {StrategyKind::Hierarchical, levels, nullptr, {}}; }
  static Strategy with_codebook(const Codebook& cb) { return {StrategyKind::Codebook, 6, &cb, {}}; }
  std::string name() const;
};

struct EvalOptions {
  double dir_error_deg = 0.0;
  double probe_noise_db = 0.0;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

struct EvalSummary {
  std::string strategy;
  std::vector<std::pair<double, double>> cdf_points;  // (gap_db, fraction <= gap)
  double success_rate = 0.0;                          // fraction with gap <= gamma
  double success_rate_plus_1db = 0.0;                 // fraction with gap <= gamma + 1 dB
  double mean_probes = 0.0;
  double time_saving_vs_exhaustive = 0.0;             // 1 - mean_probes / 360
  double gamma_db = 0.0;
  double dir_error_deg = 0.0;
  double probe_noise_db = 0.0;
  int levels = 0;
  std::size_t n_locations = 0;
  std::vector<TrainingResult> results;
};

/// Empirical right-continuous CDF of the gaps: one point per distinct value.
std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> gaps);

/// Fraction of results with gap <= threshold (1e-9 slack).
double fraction_within(const std::vector<TrainingResult>& results, double threshold_db);

/// Runs `strategy` on every scan. Location i draws its randomness from
/// stream i of `opts.seed`, so results do not depend on `opts.jobs`.
EvalSummary evaluate(const std::vector<AngularPowerScan>& scans, const Strategy& strategy,
                     const GainGapConfig& cfg, const EvalOptions& opts = {});

void to_json(nlohmann::json& j, const EvalSummary& s);
/// `gap_db,cdf` two-column text.
std::string cdf_to_csv(const EvalSummary& s);

}  // namespace beamcodex
