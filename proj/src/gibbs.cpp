#include "beamcodex/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "beamcodex/parallel.hpp"

namespace beamcodex {

namespace {

constexpr double kGainTolerance = 1e-9;
constexpr int kMaxBisectionSteps = 60;
constexpr double kBracketTolerance = 0.05;

// Expected CRP table count sum_{i<n} alpha / (alpha + i); used where the
// asymptotic alpha ln(n/alpha) has no root (k >= n/e).
double expected_clusters(double alpha, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += alpha / (alpha + i);
  return s;
}

template <typename F>
double bisect_increasing(F f, double lo, double hi) {
  for (int it = 0; it < 400 && (hi - lo) > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

void DPState::check_consistency() const {
  if (!(alpha > 0.0)) throw std::logic_error("alpha must be positive");
  std::vector<std::size_t> counts(components.size(), 0);
  for (std::size_t a : assignments) {
    if (a >= components.size()) throw std::logic_error("assignment points past the component list");
    ++counts[a];
  }
  for (std::size_t k = 0; k < components.size(); ++k) {
    if (counts[k] == 0) throw std::logic_error("empty component survived");
    if (counts[k] != components[k].count) throw std::logic_error("component count mismatch");
  }
}

GainContext::GainContext(const std::vector<AngularPowerScan>& s, const GainGapConfig& c, unsigned jobs)
    : scans(&s), max_gain_dbm(s.size()), cfg(c) {
  parallel_for(s.size(), jobs, [&](std::size_t i) { max_gain_dbm[i] = max_gain(s[i], cfg); });
}

InfeasibleGainTarget::InfeasibleGainTarget(DPState s, FitReport r)
    : std::runtime_error("infeasible gain target"), state(std::move(s)), report(std::move(r)) {}

double init_alpha(int k_guess, int n) {
  if (n <= 0 || k_guess <= 0 || k_guess >= n) throw InvalidInput("invalid cluster guess");
  const double k = k_guess;
  const double nn = n;
  if (k < nn / std::numbers::e) {
    return bisect_increasing([&](double a) { return a * std::log(nn / a) - k; }, 0.0,
                             nn / std::numbers::e);
  }
  double hi = 1.0;
  while (expected_clusters(hi, n) < k) hi *= 2.0;
  return bisect_increasing([&](double a) { return expected_clusters(a, n) - k; }, 0.0, hi);
}

Beam codebook_beam(const MixtureComponent& comp, const GainGapConfig& cfg) {
  const double width = std::clamp(std::round(comp.y_c_deg), cfg.w_min_deg, cfg.w_max_deg);
  return Beam(wrap_deg(std::round(comp.x_c_deg)), width);
}

double new_cluster_mass(double alpha, std::size_t n) {
  return alpha / (alpha + static_cast<double>(n));
}

std::vector<std::size_t> member_counts(const DPState& state) {
  std::vector<std::size_t> counts(state.components.size(), 0);
  for (std::size_t a : state.assignments) ++counts[a];
  return counts;
}

std::vector<double> assignment_scores(const DPState& state, const std::vector<std::size_t>& counts,
                                      std::size_t i, const std::vector<BeamCandidate>& candidates,
                                      const PriorSpec& prior) {
  const double n = static_cast<double>(candidates.size());
  const auto& c = candidates[i];
  std::vector<double> scores(state.components.size() + 1, 0.0);
  for (std::size_t k = 0; k < state.components.size(); ++k) {
    std::size_t nk = counts[k];
    if (state.assignments[i] == k) --nk;
    if (nk == 0) continue;
    scores[k] = static_cast<double>(nk) / (n + state.alpha) *
                wrapped_pdf(c.x_deg, c.y_deg, state.components[k]);
  }
  scores.back() = new_cluster_mass(state.alpha, candidates.size()) *
                  prior_predictive(c.x_deg, c.y_deg, prior);
  return scores;
}

namespace {

DPState collect_garbage(DPState state, const std::vector<std::size_t>& counts) {
  std::vector<std::size_t> remap(state.components.size(), 0);
  std::vector<MixtureComponent> live;
  for (std::size_t k = 0; k < state.components.size(); ++k) {
    if (counts[k] == 0) continue;
    remap[k] = live.size();
    MixtureComponent comp = state.components[k];
    comp.count = counts[k];
    live.push_back(comp);
  }
  for (auto& a : state.assignments) a = remap[a];
  state.components = std::move(live);
  const double n = static_cast<double>(state.assignments.size());
  for (auto& comp : state.components) comp.weight = static_cast<double>(comp.count) / n;
  return state;
}

}  // namespace

DPState assign_sweep(DPState state, const std::vector<BeamCandidate>& candidates,
                     const PriorSpec& prior, Rng& rng, bool stochastic) {
  auto counts = member_counts(state);
  const auto order = permutation(rng, candidates.size());
  for (std::size_t i : order) {
    const auto scores = assignment_scores(state, counts, i, candidates, prior);
    std::size_t pick = 0;
    if (stochastic) {
      pick = categorical(rng, scores);
    } else {
      for (std::size_t k = 1; k < scores.size(); ++k) {
        if (scores[k] > scores[pick]) pick = k;
      }
    }
    --counts[state.assignments[i]];
    if (pick == state.components.size()) {
      MixtureComponent fresh = sample_from_prior(prior, rng);
      state.components.push_back(fresh);
      counts.push_back(0);
    }
    state.assignments[i] = pick;
    ++counts[pick];
  }
  return collect_garbage(std::move(state), counts);
}

DPState update_components(DPState state, const std::vector<BeamCandidate>& candidates) {
  const std::size_t k_count = state.components.size();
  std::vector<std::vector<std::size_t>> members(k_count);
  for (std::size_t i = 0; i < state.assignments.size(); ++i) members[state.assignments[i]].push_back(i);

  const double n = static_cast<double>(candidates.size());
  for (std::size_t k = 0; k < k_count; ++k) {
    auto& comp = state.components[k];
    const auto& idx = members[k];
    comp.count = idx.size();
    comp.weight = static_cast<double>(idx.size()) / n;
    if (idx.empty()) continue;
    std::vector<double> xs;
    xs.reserve(idx.size());
    double y_sum = 0.0;
    for (std::size_t i : idx) {
      xs.push_back(candidates[i].x_deg);
      y_sum += candidates[i].y_deg;
    }
    try {
      comp.x_c_deg = circ_mean(xs);
    } catch (const InvalidInput&) {
      comp.x_c_deg = wrap_deg(xs.front());  // balanced antipodal members
    }
    comp.y_c_deg = y_sum / static_cast<double>(idx.size());
    double vx = 0.0;
    double vy = 0.0;
    for (std::size_t i : idx) {
      const double dx = circ_distance(candidates[i].x_deg, comp.x_c_deg);
      const double dy = candidates[i].y_deg - comp.y_c_deg;
      vx += dx * dx;
      vy += dy * dy;
    }
    vx /= static_cast<double>(idx.size());
    vy /= static_cast<double>(idx.size());
    comp.sigma_x_deg = std::sqrt(std::max(vx, kSigmaFloorDeg * kSigmaFloorDeg));
    comp.sigma_y_deg = std::sqrt(std::max(vy, kSigmaFloorDeg * kSigmaFloorDeg));
  }
  return state;
}

std::vector<double> cluster_success(const DPState& state, const std::vector<BeamCandidate>& candidates,
                                    const GainContext& ctx) {
  std::vector<double> hits(state.components.size(), 0.0);
  std::vector<double> totals(state.components.size(), 0.0);
  std::vector<Beam> beams;
  beams.reserve(state.components.size());
  for (const auto& comp : state.components) beams.push_back(codebook_beam(comp, ctx.cfg));
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const std::size_t k = state.assignments[i];
    const std::size_t s = candidates[i].source_index;
    const double gain = beam_gain((*ctx.scans)[s], beams[k]);
    totals[k] += 1.0;
    if (gain >= ctx.max_gain_dbm[s] - ctx.cfg.gamma_db - kGainTolerance) hits[k] += 1.0;
  }
  std::vector<double> out(state.components.size(), 0.0);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = totals[k] > 0.0 ? hits[k] / totals[k] : 0.0;
  return out;
}

DPState rescale_covariances(DPState state, const std::vector<BeamCandidate>& candidates,
                            const GainContext& ctx) {
  const auto success = cluster_success(state, candidates, ctx);
  const double floor2 = kSigmaFloorDeg * kSigmaFloorDeg;
  for (std::size_t k = 0; k < state.components.size(); ++k) {
    auto& comp = state.components[k];
    if (comp.count == 0) continue;
    const double factor = success[k] / ctx.cfg.o_th2;
    comp.sigma_x_deg = std::sqrt(std::max(comp.sigma_x_deg * comp.sigma_x_deg * factor, floor2));
    comp.sigma_y_deg = std::sqrt(std::max(comp.sigma_y_deg * comp.sigma_y_deg * factor, floor2));
  }
  return state;
}

DPState rescale_covariances(DPState state, const std::vector<BeamCandidate>& candidates,
                            const std::vector<AngularPowerScan>& scans, const GainGapConfig& cfg) {
  return rescale_covariances(std::move(state), candidates, GainContext(scans, cfg));
}

DPState initial_state(const std::vector<BeamCandidate>& candidates, const PriorSpec& prior,
                      double alpha, std::uint64_t seed) {
  if (candidates.empty()) throw InvalidInput("no observations");
  prior.validate();
  DPState state;
  state.alpha = alpha;
  state.rng_seed = seed;
  state.components.resize(prior.k0());
  state.assignments.resize(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    std::size_t best = 0;
    double best_d = INFINITY;
    for (std::size_t j = 0; j < prior.k0(); ++j) {
      // Distances in histogram-bin units (10 deg direction, 5 deg width).
      const double dx = circ_distance(candidates[i].x_deg, prior.means[j].direction_deg) / 10.0;
      const double dy = (candidates[i].y_deg - prior.means[j].width_deg) / 5.0;
      const double d = dx * dx + dy * dy;
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    state.assignments[i] = best;
  }
  state = update_components(std::move(state), candidates);
  return collect_garbage(std::move(state), member_counts(state));
}

DPState run_chain(const std::vector<BeamCandidate>& candidates, const PriorSpec& prior,
                  double alpha, std::uint64_t seed, const SamplerOptions& opts,
                  const GainContext* ctx) {
  Rng rng = make_rng(seed);
  DPState state = initial_state(candidates, prior, alpha, seed);
  state.n_iter = opts.n_iter;
  const bool rescaling = ctx != nullptr && opts.rescale_every > 0;
  bool rescaled_since_change = false;
  for (int it = 1; it <= opts.n_iter; ++it) {
    const auto previous = state.assignments;
    const std::size_t previous_k = state.components.size();
    state = assign_sweep(std::move(state), candidates, prior, rng, opts.stochastic);
    state = update_components(std::move(state), candidates);
    const bool changed = state.assignments != previous || state.components.size() != previous_k;
    if (changed) rescaled_since_change = false;
    if (rescaling && it % opts.rescale_every == 0) {
      state = rescale_covariances(std::move(state), candidates, *ctx);
      rescaled_since_change = true;
      continue;
    }
    if (!changed && opts.early_exit && !opts.stochastic) {
      // A settled partition is final only once it has also seen a rescale.
      if (!rescaling || rescaled_since_change) break;
      state = rescale_covariances(std::move(state), candidates, *ctx);
      rescaled_since_change = true;
    }
  }
  if (ctx != nullptr && opts.rescale_after) state = rescale_covariances(std::move(state), candidates, *ctx);
  return state;
}

std::vector<std::size_t> retained_clusters(const DPState& state, double o_th1) {
  std::vector<std::size_t> order(state.components.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return state.components[a].weight < state.components[b].weight;
  });
  const double budget = 1.0 - o_th1 + 1e-12;
  double dropped = 0.0;
  std::size_t first_kept = 0;
  while (first_kept < order.size() &&
         dropped + state.components[order[first_kept]].weight <= budget) {
    dropped += state.components[order[first_kept]].weight;
    ++first_kept;
  }
  std::vector<std::size_t> kept(order.begin() + static_cast<std::ptrdiff_t>(first_kept), order.end());
  std::sort(kept.begin(), kept.end());
  return kept;
}

namespace {

struct Evaluation {
  DPState state;
  std::size_t k = 0;
  bool met = false;
  std::vector<double> success;
  double worst = 0.0;
};

Evaluation evaluate_alpha(const std::vector<BeamCandidate>& candidates, const PriorSpec& prior,
                          const GainContext& ctx, double alpha, std::uint64_t seed,
                          const SamplerOptions& opts) {
  Evaluation ev;
  ev.state = run_chain(candidates, prior, alpha, seed, opts, &ctx);
  ev.success = cluster_success(ev.state, candidates, ctx);
  const auto kept = retained_clusters(ev.state, ctx.cfg.o_th1);
  ev.k = kept.size();
  ev.met = !kept.empty();
  ev.worst = 1.0;
  double mass = 0.0;
  for (std::size_t k : kept) {
    mass += ev.state.components[k].weight;
    ev.worst = std::min(ev.worst, ev.success[k]);
    if (ev.success[k] < ctx.cfg.o_th2) ev.met = false;
  }
  if (mass < ctx.cfg.o_th1 - 1e-12) ev.met = false;
  return ev;
}

}  // namespace

std::pair<DPState, FitReport> fit(const std::vector<BeamCandidate>& candidates,
                                  const std::vector<AngularPowerScan>& scans,
                                  const PriorSpec& prior, const GainGapConfig& cfg,
                                  std::uint64_t seed, const SamplerOptions& opts, unsigned jobs) {
  if (candidates.empty()) throw InvalidInput("no observations");
  cfg.validate();
  const GainContext ctx(scans, cfg, jobs);
  const int n = static_cast<int>(candidates.size());
  FitReport report;

  auto record = [&](double alpha, const Evaluation& ev) {
    report.bisection_trace.push_back({alpha, ev.k, ev.met});
  };
  auto finish = [&](Evaluation ev) {
    report.final_alpha = ev.state.alpha;
    report.n_components = ev.state.components.size();
    report.per_cluster_success = ev.success;
    return std::make_pair(std::move(ev.state), report);
  };

  if (n < 2) {
    Evaluation ev = evaluate_alpha(candidates, prior, ctx, 1.0, seed, opts);
    record(1.0, ev);
    if (!ev.met) throw InfeasibleGainTarget(ev.state, report);
    return finish(std::move(ev));
  }

  double lo = init_alpha(1, n) / 4.0;
  double hi = init_alpha(std::max(1, std::min(n / 2, 64)), n);

  Evaluation best = evaluate_alpha(candidates, prior, ctx, hi, seed, opts);
  record(hi, best);
  if (!best.met) {
    const double widened = hi * 4.0;
    Evaluation retry = evaluate_alpha(candidates, prior, ctx, widened, seed, opts);
    record(widened, retry);
    if (!retry.met) {
      Evaluation& effort = retry.worst >= best.worst ? retry : best;
      report.final_alpha = effort.state.alpha;
      report.n_components = effort.state.components.size();
      report.per_cluster_success = effort.success;
      throw InfeasibleGainTarget(effort.state, report);
    }
    hi = widened;
    best = std::move(retry);
  }

  Evaluation low = evaluate_alpha(candidates, prior, ctx, lo, seed, opts);
  record(lo, low);
  if (low.met) {
    if (low.k <= best.k) best = std::move(low);
    return finish(std::move(best));
  }

  std::optional<std::size_t> last_met_k;
  for (int step = 0; step < kMaxBisectionSteps; ++step) {
    if (hi - lo < kBracketTolerance * hi) break;
    const double mid = 0.5 * (lo + hi);
    Evaluation ev = evaluate_alpha(candidates, prior, ctx, mid, seed, opts);
    record(mid, ev);
    if (!ev.met) {
      lo = mid;
      continue;
    }
    hi = mid;
    const std::size_t k = ev.k;
    // Ties in K go to the smaller alpha, which is always the newer one here.
    if (k <= best.k) best = std::move(ev);
    if (last_met_k && *last_met_k == k) break;
    last_met_k = k;
  }
  return finish(std::move(best));
}

void to_json(nlohmann::json& j, const FitReport& r) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& s : r.bisection_trace) {
    trace.push_back({{"alpha", s.alpha}, {"k", s.k}, {"constraint_met", s.constraint_met}});
  }
  j = {{"final_alpha", r.final_alpha},
       {"n_components", r.n_components},
       {"per_cluster_success", r.per_cluster_success},
       {"bisection_trace", trace}};
}

void to_json(nlohmann::json& j, const DPState& s) {
  j = {{"alpha", s.alpha},
       {"n_iter", s.n_iter},
       {"rng_seed", s.rng_seed},
       {"components", s.components},
       {"assignments", s.assignments}};
}

}  // namespace beamcodex
