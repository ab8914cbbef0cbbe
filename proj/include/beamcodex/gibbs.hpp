#pragma once

// MacEachern-style sampler over the Dirichlet-process beam mixture, with the
// outer bisection on the concentration alpha that searches for the smallest
// mixture meeting the gain-gap target.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "json.hpp"

#include "beamcodex/prior.hpp"

namespace beamcodex {

struct DPState {
  std::vector<MixtureComponent> components;
  std::vector<std::size_t> assignments;  // candidate index -> component index
  double alpha = 1.0;
  int n_iter = 50;
  std::uint64_t rng_seed = 0;

  std::size_t size() const { return components.size(); }
  /// Throws std::logic_error if counts, assignments or alpha are inconsistent.
  void check_consistency() const;
};

struct SamplerOptions {
  int n_iter = 50;
  bool stochastic = false;  // draw assignments instead of taking the argmax
  int rescale_every = 10;   // 0 disables in-loop covariance rescaling
  bool rescale_after = true;
  bool early_exit = true;
};

struct BisectionStep {
  double alpha = 0.0;
  std::size_t k = 0;  // clusters retained after pruning
  bool constraint_met = false;
};

struct FitReport {
  double final_alpha = 0.0;
  std::size_t n_components = 0;
  std::vector<double> per_cluster_success;  // estimated O_th,2 per live cluster
  std::vector<BisectionStep> bisection_trace;
};

void to_json(nlohmann::json& j, const FitReport& r);
void to_json(nlohmann::json& j, const DPState& s);

/// Per-scan data the gain-success estimate needs: the scans and their
/// precomputed max_gain.
struct GainContext {
  const std::vector<AngularPowerScan>* scans = nullptr;
  std::vector<double> max_gain_dbm;
  GainGapConfig cfg;

  GainContext(const std::vector<AngularPowerScan>& s, const GainGapConfig& c, unsigned jobs = 1);
};

/// The fit could not meet the gain target; carries the best-effort result.
class InfeasibleGainTarget : public std::runtime_error {
 public:
  InfeasibleGainTarget(DPState state, FitReport report);
  DPState state;
  FitReport report;
};

/// Positive root of alpha * ln(n / alpha) = k on (0, n/e), to 1e-12 relative.
double init_alpha(int k_guess, int n);

/// The codebook element a component stands for: direction and width rounded
/// to whole degrees, width clamped to [w_min, w_max].
Beam codebook_beam(const MixtureComponent& comp, const GainGapConfig& cfg);

/// Unnormalised reassignment scores for candidate i with its own membership
/// removed: one entry per component (zero for emptied ones), then the
/// new-cluster score alpha/(N+alpha) * prior_predictive last.
std::vector<double> assignment_scores(const DPState& state, const std::vector<std::size_t>& counts,
                                      std::size_t i, const std::vector<BeamCandidate>& candidates,
                                      const PriorSpec& prior);

/// Prior mass on a new cluster at sweep start: alpha / (alpha + N).
double new_cluster_mass(double alpha, std::size_t n);

/// Component member counts implied by the assignment vector.
std::vector<std::size_t> member_counts(const DPState& state);

/// One pass over all candidates in a seeded random order.
DPState assign_sweep(DPState state, const std::vector<BeamCandidate>& candidates,
                     const PriorSpec& prior, Rng& rng, bool stochastic = false);

/// Circular mean / spread in direction, arithmetic in width, weights n_k/N.
DPState update_components(DPState state, const std::vector<BeamCandidate>& candidates);

/// Estimated O_th,2 per component: the fraction of members whose source scan
/// is served within gamma by the component's codebook beam.
std::vector<double> cluster_success(const DPState& state, const std::vector<BeamCandidate>& candidates,
                                    const GainContext& ctx);

/// Scales each covariance by estimated O_th,2 / O_th,2 (floored).
DPState rescale_covariances(DPState state, const std::vector<BeamCandidate>& candidates,
                            const GainContext& ctx);
DPState rescale_covariances(DPState state, const std::vector<BeamCandidate>& candidates,
                            const std::vector<AngularPowerScan>& scans, const GainGapConfig& cfg);

/// Starting partition: each candidate joins its nearest prior mode.
DPState initial_state(const std::vector<BeamCandidate>& candidates, const PriorSpec& prior,
                      double alpha, std::uint64_t seed);

/// Inner sampler loop at a fixed alpha. Rescaling runs only when `ctx` is set.
DPState run_chain(const std::vector<BeamCandidate>& candidates, const PriorSpec& prior,
                  double alpha, std::uint64_t seed, const SamplerOptions& opts,
                  const GainContext* ctx = nullptr);

/// Components retained once the lightest clusters carrying at most
/// 1 - o_th1 of the mass are dropped; indices into state.components.
std::vector<std::size_t> retained_clusters(const DPState& state, double o_th1);

/// Full fit: bisection on alpha around run_chain until every retained
/// cluster meets O_th,2 with the fewest clusters.
std::pair<DPState, FitReport> fit(const std::vector<BeamCandidate>& candidates,
                                  const std::vector<AngularPowerScan>& scans,
                                  const PriorSpec& prior, const GainGapConfig& cfg,
                                  std::uint64_t seed, const SamplerOptions& opts = {},
                                  unsigned jobs = 1);

}  // namespace beamcodex
