#include "beamcodex/pathloss.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "beamcodex/gibbs.hpp"
#include "beamcodex/random.hpp"

namespace beamcodex {

namespace {

constexpr double kSpeedOfLight = 299792458.0;

double normal_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct Cluster {
  PathLossComponent line;
  std::size_t count = 0;
};

PathLossComponent line_through(const PathLossObservation& o, const PathLossComponent& prior) {
  PathLossComponent c = prior;
  c.intercept_db = o.path_loss_db() - prior.slope_db_per_decade * o.log10_distance;
  c.weight = 0.0;
  return c;
}

PathLossComponent refit(const std::vector<PathLossObservation>& obs, const std::vector<std::size_t>& members,
                        const PathLossComponent& prior, const PathLossFitOptions& opts) {
  std::vector<double> x, y;
  for (std::size_t i : members) {
    x.push_back(obs[i].log10_distance);
    y.push_back(obs[i].path_loss_db());
  }
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  PathLossComponent c = prior;
  if (members.size() >= opts.min_fit_members && *hi - *lo >= opts.min_fit_span) {
    const LineFit f = least_squares(x, y);
    c.intercept_db = f.intercept;
    c.slope_db_per_decade = f.slope;
    c.rms_db = f.rms;
  } else {
    double sum = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) sum += y[k] - prior.slope_db_per_decade * x[k];
    c.intercept_db = sum / static_cast<double>(x.size());
    double ss = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double r = y[k] - c.predict(x[k]);
      ss += r * r;
    }
    c.rms_db = std::sqrt(ss / static_cast<double>(x.size()));
  }
  c.rms_db = std::max(c.rms_db, kRmsFloorDb);
  return c;
}

}  // namespace

std::string to_string(PathLossLabel l) {
  switch (l) {
    case PathLossLabel::LoS:
      return "LoS";
    case PathLossLabel::NLoS:
      return "NLoS";
    case PathLossLabel::Unlabeled:
      break;
  }
  return "Unlabeled";
}

PathLossLabel pathloss_label_from_string(const std::string& s) {
  if (s == "LoS") return PathLossLabel::LoS;
  if (s == "NLoS") return PathLossLabel::NLoS;
  if (s == "Unlabeled" || s.empty()) return PathLossLabel::Unlabeled;
  throw InvalidInput("unknown path-loss label: " + s);
}

PathLossObservation observation_from_scan(const AngularPowerScan& scan, double tx_power_dbm) {
  if (!scan.distance_m()) throw InvalidInput("scan " + scan.location_id() + " has no distance");
  const double d = *scan.distance_m();
  if (d < 1.0) throw InvalidInput("distance below 1 m at " + scan.location_id());
  return {std::log10(d), isotropic_power(scan) - tx_power_dbm};
}

PathLossComponent friis_prior(double freq_ghz) {
  if (!(freq_ghz > 0.0)) throw InvalidInput("frequency must be positive");
  PathLossComponent c;
  c.intercept_db = 20.0 * std::log10(4.0 * std::numbers::pi * freq_ghz * 1e9 / kSpeedOfLight);
  c.slope_db_per_decade = 20.0;
  c.rms_db = 4.0;
  c.weight = 1.0;
  c.label = PathLossLabel::LoS;
  return c;
}

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.empty()) throw InvalidInput("least squares needs matching non-empty inputs");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 1e-12 * n)) throw InvalidInput("degenerate fit");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.rms = std::sqrt(ss / n);
  return f;
}

PathLossMixture fit_pathloss(const std::vector<PathLossObservation>& observations,
                             const PathLossComponent& prior, std::uint64_t seed,
                             const PathLossFitOptions& opts) {
  const std::size_t n = observations.size();
  for (const auto& o : observations) {
    if (!std::isfinite(o.log10_distance) || !std::isfinite(o.isotropic_power_dbm) || o.log10_distance < 0.0) {
      throw InvalidInput("invalid path-loss observation");
    }
  }
  if (n == 0) throw InvalidInput("insufficient span");
  const auto [lo, hi] = std::minmax_element(observations.begin(), observations.end(),
                                            [](const auto& a, const auto& b) {
                                              return a.log10_distance < b.log10_distance;
                                            });
  if (hi->log10_distance - lo->log10_distance <= 0.0) throw InvalidInput("degenerate fit");
  if (n < 20 || hi->log10_distance - lo->log10_distance < 1.0) throw InvalidInput("insufficient span");

  const double alpha = init_alpha(2, static_cast<int>(n));
  const double new_sd = std::hypot(prior.rms_db, opts.new_cluster_sd_db);
  auto new_score = [&](const PathLossObservation& o) {
    return alpha * normal_pdf(o.path_loss_db(), prior.predict(o.log10_distance), new_sd);
  };

  // Sequential seating in data order gives the starting partition.
  std::vector<Cluster> clusters;
  std::vector<std::size_t> z(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& o = observations[i];
    std::size_t best = clusters.size();
    double best_score = new_score(o);
    for (std::size_t k = 0; k < clusters.size(); ++k) {
      const double s = static_cast<double>(clusters[k].count) *
                       normal_pdf(o.path_loss_db(), clusters[k].line.predict(o.log10_distance), clusters[k].line.rms_db);
      if (s > best_score) {
        best_score = s;
        best = k;
      }
    }
    if (best == clusters.size()) clusters.push_back({line_through(o, prior), 0});
    ++clusters[best].count;
    z[i] = best;
  }

  auto refresh = [&]() {
    std::vector<std::vector<std::size_t>> members(clusters.size());
    for (std::size_t i = 0; i < n; ++i) members[z[i]].push_back(i);
    std::vector<Cluster> next;
    std::vector<std::size_t> remap(clusters.size(), 0);
    for (std::size_t k = 0; k < clusters.size(); ++k) {
      if (members[k].empty()) continue;
      remap[k] = next.size();
      next.push_back({refit(observations, members[k], prior, opts), members[k].size()});
    }
    for (auto& zi : z) zi = remap[zi];
    clusters = std::move(next);
  };
  refresh();

  Rng rng = make_rng(seed);
  auto sweeps = [&]() {
    for (int sweep = 0; sweep < opts.n_iter; ++sweep) {
      const auto before = z;
      for (std::size_t i : permutation(rng, n)) {
        const auto& o = observations[i];
        --clusters[z[i]].count;
        std::size_t best = clusters.size();
        double best_score = new_score(o);
        for (std::size_t k = 0; k < clusters.size(); ++k) {
          if (clusters[k].count == 0) continue;
          const double s = static_cast<double>(clusters[k].count) *
                           normal_pdf(o.path_loss_db(), clusters[k].line.predict(o.log10_distance),
                                      clusters[k].line.rms_db);
          if (s > best_score) {
            best_score = s;
            best = k;
          }
        }
        if (best == clusters.size()) clusters.push_back({line_through(o, prior), 0});
        ++clusters[best].count;
        z[i] = best;
      }
      refresh();
      if (z == before) break;
    }
  };

  // Hard assignments can settle on one class cut into two tight parallel
  // lines. Merge the pair whose union scores best under BIC of the
  // classification likelihood, then sweep again.
  auto bic_term = [&](const PathLossComponent& c, std::size_t members) {
    const double m = static_cast<double>(members);
    return m * std::log(c.rms_db * c.rms_db) - 2.0 * m * std::log(m / static_cast<double>(n));
  };
  const double per_cluster_penalty = 4.0 * std::log(static_cast<double>(n));
  sweeps();
  for (int round = 0; round < 16 && clusters.size() > 1; ++round) {
    std::vector<std::vector<std::size_t>> members(clusters.size());
    for (std::size_t i = 0; i < n; ++i) members[z[i]].push_back(i);
    double best_gain = 0.0;
    std::size_t ba = 0, bb = 0;
    for (std::size_t a = 0; a < clusters.size(); ++a) {
      for (std::size_t b = a + 1; b < clusters.size(); ++b) {
        auto merged = members[a];
        merged.insert(merged.end(), members[b].begin(), members[b].end());
        const auto line = refit(observations, merged, prior, opts);
        const double split = bic_term(clusters[a].line, members[a].size()) +
                             bic_term(clusters[b].line, members[b].size()) + per_cluster_penalty;
        const double gain = split - bic_term(line, merged.size());
        if (gain > best_gain) {
          best_gain = gain;
          ba = a;
          bb = b;
        }
      }
    }
    if (best_gain <= 0.0) break;
    for (auto& zi : z) {
      if (zi == bb) zi = ba;
    }
    refresh();
    sweeps();
  }

  PathLossMixture mixture;
  for (const auto& c : clusters) {
    PathLossComponent comp = c.line;
    comp.weight = static_cast<double>(c.count) / static_cast<double>(n);
    comp.label = PathLossLabel::Unlabeled;
    mixture.push_back(comp);
  }
  std::stable_sort(mixture.begin(), mixture.end(),
                   [](const PathLossComponent& a, const PathLossComponent& b) { return a.weight > b.weight; });

  // Same pruning rule as the beam mixture: shed the lightest tail.
  const double budget = 1.0 - opts.o_th1 + 1e-12;
  double dropped = 0.0;
  while (mixture.size() > 1 && dropped + mixture.back().weight <= budget) {
    dropped += mixture.back().weight;
    mixture.pop_back();
  }
  const double kept = 1.0 - dropped;
  for (auto& c : mixture) c.weight /= kept;

  std::vector<double> xs;
  for (const auto& o : observations) xs.push_back(o.log10_distance);
  const double med = median(xs);
  if (mixture.size() == 1) {
    const bool near_free_space = std::abs(mixture[0].predict(med) - prior.predict(med)) <= opts.single_los_window_db;
    mixture[0].label = near_free_space ? PathLossLabel::LoS : PathLossLabel::NLoS;
  } else {
    std::size_t los = 0;
    for (std::size_t k = 1; k < mixture.size(); ++k) {
      if (mixture[k].predict(med) < mixture[los].predict(med)) los = k;
    }
    for (std::size_t k = 0; k < mixture.size(); ++k) {
      mixture[k].label = k == los ? PathLossLabel::LoS : PathLossLabel::NLoS;
    }
  }
  return mixture;
}

std::vector<double> component_posteriors(const PathLossObservation& obs, const PathLossMixture& mixture) {
  if (mixture.empty()) throw InvalidInput("empty path-loss mixture");
  // Log domain keeps far-away points from underflowing every component.
  std::vector<double> logp(mixture.size());
  for (std::size_t k = 0; k < mixture.size(); ++k) {
    const auto& c = mixture[k];
    const double z = (obs.path_loss_db() - c.predict(obs.log10_distance)) / c.rms_db;
    logp[k] = std::log(std::max(c.weight, 1e-300)) - std::log(c.rms_db) - 0.5 * z * z;
  }
  const double top = *std::max_element(logp.begin(), logp.end());
  double total = 0.0;
  for (auto& v : logp) {
    v = std::exp(v - top);
    total += v;
  }
  for (auto& v : logp) v /= total;
  return logp;
}

std::pair<PathLossLabel, double> classify(const PathLossObservation& obs, const PathLossMixture& mixture) {
  const auto post = component_posteriors(obs, mixture);
  double by_label[3] = {0.0, 0.0, 0.0};
  for (std::size_t k = 0; k < mixture.size(); ++k) by_label[static_cast<int>(mixture[k].label)] += post[k];
  int best = 0;
  for (int l = 1; l < 3; ++l) {
    if (by_label[l] > by_label[best]) best = l;
  }
  return {static_cast<PathLossLabel>(best), by_label[best]};
}

void to_json(nlohmann::json& j, const PathLossComponent& c) {
  j = {{"intercept", c.intercept_db},
       {"slope", c.slope_db_per_decade},
       {"rms", c.rms_db},
       {"weight", c.weight},
       {"label", to_string(c.label)}};
}

void from_json(const nlohmann::json& j, PathLossComponent& c) {
  c.intercept_db = j.at("intercept").get<double>();
  c.slope_db_per_decade = j.at("slope").get<double>();
  c.rms_db = j.at("rms").get<double>();
  c.weight = j.value("weight", 1.0);
  c.label = pathloss_label_from_string(j.value("label", std::string{}));
  if (!(c.rms_db > 0.0)) throw InvalidInput("path-loss rms must be positive");
}

}  // namespace beamcodex
