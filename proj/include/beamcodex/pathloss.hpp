#pragma once

// LoS/NLoS side information: a DP mixture of straight lines in
// (log10 distance, path loss) fitted with least-squares cluster updates.
//
// Convention: path loss is measured relative to a 0 dBm transmitter, so an
// observation with isotropic received power P has path loss -P. Components
// describe path loss (positive intercepts, positive slopes).

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "beamcodex/scan.hpp"

namespace beamcodex {

enum class PathLossLabel { LoS, NLoS, Unlabeled };
std::string to_string(PathLossLabel l);
PathLossLabel pathloss_label_from_string(const std::string& s);

constexpr double kRmsFloorDb = 0.5;

struct PathLossComponent {
  double intercept_db = 0.0;          // path loss at 1 m
  double slope_db_per_decade = 20.0;
  double rms_db = 4.0;
  double weight = 1.0;
  PathLossLabel label = PathLossLabel::Unlabeled;

  double predict(double log10_distance) const { return intercept_db + slope_db_per_decade * log10_distance; }
};

using PathLossMixture = std::vector<PathLossComponent>;

struct PathLossObservation {
  double log10_distance = 0.0;
  double isotropic_power_dbm = 0.0;  // relative to a 0 dBm transmitter

  double path_loss_db() const { return -isotropic_power_dbm; }
};

/// Builds an observation from a scan with a known distance (>= 1 m).
PathLossObservation observation_from_scan(const AngularPowerScan& scan, double tx_power_dbm);

/// Free-space prior: slope 20 dB/decade, intercept 20*log10(4*pi*f/c), rms 4 dB.
PathLossComponent friis_prior(double freq_ghz);

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double rms = 0.0;  // sqrt(mean squared residual)
};

/// Ordinary least squares of y on x. Throws "degenerate fit" when all x agree.
LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

struct PathLossFitOptions {
  int n_iter = 50;
  double o_th1 = 0.95;             // mass kept when pruning small clusters
  double new_cluster_sd_db = 15.0; // extra spread of the new-cluster predictive
  std::size_t min_fit_members = 5; // below this the prior slope is kept
  double min_fit_span = 0.3;       // decades of distance needed to fit a slope
  double single_los_window_db = 10.0;
};

/// Fits the mixture. Requires >= 20 observations spanning >= 1 decade.
/// Components come back ordered by descending weight; the two heaviest are
/// labelled by path loss at the median distance (lower is LoS).
PathLossMixture fit_pathloss(const std::vector<PathLossObservation>& observations,
                             const PathLossComponent& prior, std::uint64_t seed,
                             const PathLossFitOptions& opts = {});

/// Normalised per-component posterior responsibilities.
std::vector<double> component_posteriors(const PathLossObservation& obs, const PathLossMixture& mixture);

/// Max-posterior label (posteriors pooled per label) and its probability.
std::pair<PathLossLabel, double> classify(const PathLossObservation& obs, const PathLossMixture& mixture);

void to_json(nlohmann::json& j, const PathLossComponent& c);
void from_json(const nlohmann::json& j, PathLossComponent& c);

}  // namespace beamcodex
