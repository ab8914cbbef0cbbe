#include "beamcodex/prior.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace beamcodex {

namespace {

constexpr double kDirBinDeg = 10.0;
constexpr double kWidthBinDeg = 5.0;
constexpr int kDirBins = 36;
constexpr int kWidthBins = 72;  // widths up to 360 degrees
constexpr double kPeakMassFraction = 0.05;
// Student-t tails decay polynomially, so a few images either side are kept.
constexpr int kPredictiveWrapImages = 2;

}  // namespace

Beam MixtureComponent::mean_beam() const { return Beam(x_c_deg, y_c_deg); }

Mat2 Mat2::inverse() const {
  const double d = det();
  if (!(d > 0.0)) throw InvalidInput("matrix is not positive definite");
  return {yy / d, -xy / d, xx / d};
}

std::vector<double> PriorSpec::normalized_weights() const {
  double total = 0.0;
  for (double w : weights) total += w;
  std::vector<double> out(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) out[i] = weights[i] / total;
  return out;
}

Mat2 PriorSpec::t_scale() const {
  const double c = 2.0 * (1.0 + varpi) / (3.0 * varpi);
  return {c * cov0_x, 0.0, c * cov0_y};
}

void PriorSpec::validate() const {
  if (means.empty()) throw InvalidInput("prior needs at least one mode");
  if (weights.size() != means.size()) throw InvalidInput("prior weights and modes differ in length");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0 && std::isfinite(w))) throw InvalidInput("prior weights must be nonnegative");
    total += w;
  }
  if (!(total > 0.0)) throw InvalidInput("prior weights sum to zero");
  if (!(varpi > 0.0)) throw InvalidInput("varpi must be positive");
  if (!(cov0_x > 0.0 && cov0_y > 0.0)) throw InvalidInput("COV_0 must be positive definite");
  if (t_dof <= 0 || wishart_dof < 2) throw InvalidInput("invalid degrees of freedom");
  if (!(w_min_deg > 0.0 && w_min_deg <= w_max_deg)) throw InvalidInput("invalid width range");
}

int wrap_terms(double sigma_x_deg) {
  // Smallest I with 360 (I - 1) > 6 sigma.
  return static_cast<int>(std::floor(6.0 * sigma_x_deg / 360.0)) + 2;
}

double wrapped_normal_pdf(double x_deg, double mean_deg, double sigma_deg) {
  if (!(sigma_deg > 0.0)) throw InvalidInput("degenerate covariance");
  const double d = circ_diff(mean_deg, x_deg);
  const int images = wrap_terms(sigma_deg);
  const double inv2s2 = 1.0 / (2.0 * sigma_deg * sigma_deg);
  double sum = 0.0;
  for (int i = -images; i <= images; ++i) {
    const double u = d + 360.0 * i;
    sum += std::exp(-u * u * inv2s2);
  }
  return sum / (std::sqrt(2.0 * std::numbers::pi) * sigma_deg);
}

double wrapped_pdf(double x_deg, double y_deg, const MixtureComponent& comp) {
  if (!(comp.sigma_x_deg > 0.0 && comp.sigma_y_deg > 0.0)) {
    throw InvalidInput("degenerate covariance");
  }
  const double dy = y_deg - comp.y_c_deg;
  const double py = std::exp(-dy * dy / (2.0 * comp.sigma_y_deg * comp.sigma_y_deg)) /
                    (std::sqrt(2.0 * std::numbers::pi) * comp.sigma_y_deg);
  return py * wrapped_normal_pdf(x_deg, comp.x_c_deg, comp.sigma_x_deg);
}

double student_t2_pdf(double dx, double dy, const Mat2& scale, double dof) {
  const Mat2 inv = scale.inverse();
  const double maha = dx * dx * inv.xx + 2.0 * dx * dy * inv.xy + dy * dy * inv.yy;
  const double log_norm = std::lgamma((dof + 2.0) / 2.0) - std::lgamma(dof / 2.0) -
                          std::log(dof * std::numbers::pi) - 0.5 * std::log(scale.det());
  return std::exp(log_norm - (dof + 2.0) / 2.0 * std::log1p(maha / dof));
}

double prior_predictive(double x_deg, double y_deg, const PriorSpec& prior) {
  const Mat2 scale = prior.t_scale();
  const auto w = prior.normalized_weights();
  double total = 0.0;
  for (std::size_t j = 0; j < prior.means.size(); ++j) {
    const double d = circ_diff(prior.means[j].direction_deg, x_deg);
    const double dy = y_deg - prior.means[j].width_deg;
    double term = 0.0;
    for (int i = -kPredictiveWrapImages; i <= kPredictiveWrapImages; ++i) {
      term += student_t2_pdf(d + 360.0 * i, dy, scale, prior.t_dof);
    }
    total += w[j] * term;
  }
  return total;
}

Mat2 sample_wishart(const Mat2& scale, double dof, Rng& rng) {
  if (!(dof > 1.0)) throw InvalidInput("Wishart degrees of freedom must exceed 1");
  const double l11 = std::sqrt(scale.xx);
  const double l21 = scale.xy / l11;
  const double l22 = std::sqrt(scale.yy - l21 * l21);
  const double c1 = std::sqrt(std::chi_squared_distribution<double>(dof)(rng));
  const double c2 = std::sqrt(std::chi_squared_distribution<double>(dof - 1.0)(rng));
  const double n = normal(rng);
  const double m11 = l11 * c1;
  const double m21 = l21 * c1 + l22 * n;
  const double m22 = l22 * c2;
  return {m11 * m11, m11 * m21, m21 * m21 + m22 * m22};
}

std::array<double, 2> sample_normal2(const std::array<double, 2>& mean, const Mat2& cov, Rng& rng) {
  const double l11 = std::sqrt(cov.xx);
  const double l21 = l11 > 0.0 ? cov.xy / l11 : 0.0;
  const double l22 = std::sqrt(std::max(0.0, cov.yy - l21 * l21));
  const double z1 = normal(rng);
  const double z2 = normal(rng);
  return {mean[0] + l11 * z1, mean[1] + l21 * z1 + l22 * z2};
}

MixtureComponent sample_from_prior(const PriorSpec& prior, Rng& rng) {
  const Mat2 cov = sample_wishart({prior.cov0_x, 0.0, prior.cov0_y}, prior.wishart_dof, rng);
  const std::size_t j = categorical(rng, prior.normalized_weights());
  const auto& mode = prior.means[j];
  const auto xy = sample_normal2({mode.direction_deg, mode.width_deg}, cov.scaled(1.0 / prior.varpi), rng);
  MixtureComponent c;
  c.x_c_deg = wrap_deg(xy[0]);
  c.y_c_deg = std::clamp(xy[1], prior.w_min_deg, prior.w_max_deg);
  c.sigma_x_deg = std::max(std::sqrt(cov.xx), kSigmaFloorDeg);
  c.sigma_y_deg = std::max(std::sqrt(cov.yy), kSigmaFloorDeg);
  return c;
}

PriorSpec hyperparams_from_data(const std::vector<BeamCandidate>& candidates, double w_min_deg,
                                double w_max_deg) {
  if (candidates.empty()) throw InvalidInput("no observations");
  std::vector<double> hist(static_cast<std::size_t>(kDirBins * kWidthBins), 0.0);
  auto at = [&](int dir, int width) -> double& {
    return hist[static_cast<std::size_t>(dir * kWidthBins + width)];
  };
  for (const auto& c : candidates) {
    const int dir = std::min(kDirBins - 1, static_cast<int>(wrap_deg(c.x_deg) / kDirBinDeg));
    const int width = std::clamp(static_cast<int>(c.y_deg / kWidthBinDeg), 0, kWidthBins - 1);
    at(dir, width) += 1.0;
  }

  const double total = static_cast<double>(candidates.size());
  PriorSpec prior;
  prior.w_min_deg = w_min_deg;
  prior.w_max_deg = w_max_deg;
  int best_dir = 0;
  int best_width = 0;
  for (int d = 0; d < kDirBins; ++d) {
    for (int w = 0; w < kWidthBins; ++w) {
      const double v = at(d, w);
      if (v > at(best_dir, best_width)) {
        best_dir = d;
        best_width = w;
      }
      if (v <= kPeakMassFraction * total) continue;
      // Local maximum over the 8-neighbourhood (direction wraps). Equal
      // neighbours earlier in scan order win, so a plateau yields one peak.
      const int self = d * kWidthBins + w;
      bool is_peak = true;
      for (int dd = -1; dd <= 1 && is_peak; ++dd) {
        for (int dw = -1; dw <= 1; ++dw) {
          if (dd == 0 && dw == 0) continue;
          const int nw = w + dw;
          if (nw < 0 || nw >= kWidthBins) continue;
          const int nd = (d + dd + kDirBins) % kDirBins;
          const double nv = at(nd, nw);
          const int other = nd * kWidthBins + nw;
          if (nv > v || (nv == v && other < self)) {
            is_peak = false;
            break;
          }
        }
      }
      if (is_peak) {
        prior.means.push_back({(d + 0.5) * kDirBinDeg, (w + 0.5) * kWidthBinDeg});
        prior.weights.push_back(v);
      }
    }
  }
  if (prior.means.empty()) {
    prior.means.push_back({(best_dir + 0.5) * kDirBinDeg, (best_width + 0.5) * kWidthBinDeg});
    prior.weights.push_back(at(best_dir, best_width));
  }
  const double mass = [&] {
    double s = 0.0;
    for (double w : prior.weights) s += w;
    return s;
  }();
  for (double& w : prior.weights) w /= mass;
  return prior;
}

void to_json(nlohmann::json& j, const PriorSpec& p) {
  nlohmann::json modes = nlohmann::json::array();
  for (std::size_t i = 0; i < p.means.size(); ++i) {
    modes.push_back({{"direction_deg", p.means[i].direction_deg},
                     {"width_deg", p.means[i].width_deg},
                     {"weight", p.weights[i]}});
  }
  j = {{"k0", p.k0()},         {"modes", modes},   {"varpi", p.varpi},
       {"cov0", {p.cov0_x, p.cov0_y}}, {"t_dof", p.t_dof}, {"wishart_dof", p.wishart_dof},
       {"w_min_deg", p.w_min_deg}, {"w_max_deg", p.w_max_deg}};
}

void from_json(const nlohmann::json& j, PriorSpec& p) {
  p = PriorSpec{};
  for (const auto& m : j.at("modes")) {
    p.means.push_back({m.at("direction_deg").get<double>(), m.at("width_deg").get<double>()});
    p.weights.push_back(m.at("weight").get<double>());
  }
  p.varpi = j.value("varpi", 1.0);
  if (j.contains("cov0")) {
    p.cov0_x = j.at("cov0").at(0).get<double>();
    p.cov0_y = j.at("cov0").at(1).get<double>();
  }
  p.t_dof = j.value("t_dof", 3);
  p.wishart_dof = j.value("wishart_dof", 2);
  p.w_min_deg = j.value("w_min_deg", 10.0);
  p.w_max_deg = j.value("w_max_deg", 60.0);
  p.validate();
}

void to_json(nlohmann::json& j, const MixtureComponent& c) {
  j = {{"x_c_deg", c.x_c_deg},         {"y_c_deg", c.y_c_deg}, {"sigma_x_deg", c.sigma_x_deg},
       {"sigma_y_deg", c.sigma_y_deg}, {"count", c.count},     {"weight", c.weight}};
}

}  // namespace beamcodex
