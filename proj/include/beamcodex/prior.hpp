#pragma once

// Probability kernels for the Dirichlet-process beam mixture: the wrapped
// bivariate Gaussian likelihood, the Gaussian-mixture / Wishart base measure
// and its closed-form Student-t predictive.

#include <array>
#include <cstddef>
#include <vector>

#include "json.hpp"

#include "beamcodex/features.hpp"
#include "beamcodex/random.hpp"

namespace beamcodex {

/// Per-coordinate standard-deviation floor, in degrees.
inline constexpr double kSigmaFloorDeg = 1.0;

/// One cluster: mean (direction, width), diagonal covariance, weight.
struct MixtureComponent {
  double x_c_deg = 0.0;
  double y_c_deg = 0.0;
  double sigma_x_deg = kSigmaFloorDeg;
  double sigma_y_deg = kSigmaFloorDeg;
  std::size_t count = 0;
  double weight = 0.0;

  Beam mean_beam() const;
};

/// Symmetric 2x2 matrix, row-major {a, b; b, d}.
struct Mat2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  double det() const { return xx * yy - xy * xy; }
  Mat2 inverse() const;
  Mat2 scaled(double s) const { return {xx * s, xy * s, yy * s}; }
};

struct PriorMode {
  double direction_deg = 0.0;
  double width_deg = 0.0;
};

struct PriorSpec {
  std::vector<PriorMode> means;       // m_0j
  std::vector<double> weights;        // pi_0j, normalised on use
  double varpi = 1.0;                 // mean/covariance coupling
  double cov0_x = 1.0;                // diagonal of COV_0
  double cov0_y = 1.0;
  int t_dof = 3;
  int wishart_dof = 2;
  double w_min_deg = 10.0;
  double w_max_deg = 60.0;

  std::size_t k0() const { return means.size(); }
  std::vector<double> normalized_weights() const;
  /// Squared-scale matrix of each predictive Student-t term:
  /// 2 (1 + varpi) / (3 varpi) * COV_0.
  Mat2 t_scale() const;
  void validate() const;
};

/// Product of a Gaussian in width and a wrapped Gaussian in direction.
double wrapped_pdf(double x_deg, double y_deg, const MixtureComponent& comp);

/// Number of wrap images kept on each side for a given direction spread.
int wrap_terms(double sigma_x_deg);

/// Wrapped Gaussian in direction alone (the direction factor of wrapped_pdf).
double wrapped_normal_pdf(double x_deg, double mean_deg, double sigma_deg);

/// Bivariate Student-t density with `dof` degrees of freedom, location
/// `loc` and squared-scale matrix `scale`.
double student_t2_pdf(double dx, double dy, const Mat2& scale, double dof);

/// Base-measure predictive density: a mixture of 3-dof bivariate Student-t
/// terms centred on the prior modes, direction evaluated on wrap images.
double prior_predictive(double x_deg, double y_deg, const PriorSpec& prior);

/// Wishart(scale, dof) draw via the Bartlett decomposition; mean = dof * scale.
Mat2 sample_wishart(const Mat2& scale, double dof, Rng& rng);

/// Bivariate normal draw.
std::array<double, 2> sample_normal2(const std::array<double, 2>& mean, const Mat2& cov, Rng& rng);

/// New cluster drawn from the base measure.
MixtureComponent sample_from_prior(const PriorSpec& prior, Rng& rng);

/// Hyperparameters read off a 2-D histogram of the candidates (10-degree
/// wrapped direction bins, 5-degree width bins).
PriorSpec hyperparams_from_data(const std::vector<BeamCandidate>& candidates,
                                double w_min_deg = 10.0, double w_max_deg = 60.0);

void to_json(nlohmann::json& j, const PriorSpec& p);
void from_json(const nlohmann::json& j, PriorSpec& p);
void to_json(nlohmann::json& j, const MixtureComponent& c);

}  // namespace beamcodex
