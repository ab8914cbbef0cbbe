#include "beamcodex/codebook.hpp"

#include <algorithm>
#include <array>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace beamcodex {

std::vector<MixtureComponent> prune_clusters(const DPState& state, double o_th1) {
  const auto kept = retained_clusters(state, o_th1);
  if (kept.empty()) throw std::logic_error("pruning removed every cluster");
  std::vector<MixtureComponent> out;
  out.reserve(kept.size());
  for (std::size_t k : kept) out.push_back(state.components[k]);
  return out;
}

bool is_partitioned_by(const Beam& target, const std::vector<Beam>& pool) {
  const auto arc = aperture_bins(target);
  const std::size_t m = arc.size();
  if (m == 0) return false;
  std::array<int, kScanBins> position{};
  position.fill(-1);
  for (std::size_t p = 0; p < m; ++p) position[static_cast<std::size_t>(arc[p])] = static_cast<int>(p);

  // Candidate tiles: strictly fewer bins than the target, fully inside it.
  std::vector<std::pair<int, int>> tiles;  // (first bin, length)
  for (const auto& b : pool) {
    const auto bins = aperture_bins(b);
    if (bins.empty() || bins.size() >= m) continue;
    const bool inside = std::all_of(bins.begin(), bins.end(),
                                    [&](int bin) { return position[static_cast<std::size_t>(bin)] >= 0; });
    if (inside) tiles.emplace_back(bins.front(), static_cast<int>(bins.size()));
  }
  if (tiles.empty()) return false;

  // Tiling an arc by disjoint sub-arcs is a walk from its first bin to its
  // end; the full circle has no first bin, so every tile start is tried.
  std::vector<int> starts;
  if (m == static_cast<std::size_t>(kScanBins)) {
    for (const auto& t : tiles) starts.push_back(t.first);
    std::sort(starts.begin(), starts.end());
    starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
  } else {
    starts.push_back(arc.front());
  }
  for (int start : starts) {
    const int origin = position[static_cast<std::size_t>(start)];
    auto rel = [&](int bin) {
      return (position[static_cast<std::size_t>(bin)] - origin + static_cast<int>(m)) % static_cast<int>(m);
    };
    std::vector<bool> reach(m + 1, false);
    reach[0] = true;
    for (std::size_t p = 0; p < m; ++p) {
      if (!reach[p]) continue;
      for (const auto& [first, len] : tiles) {
        if (static_cast<std::size_t>(rel(first)) != p) continue;
        const std::size_t end = p + static_cast<std::size_t>(len);
        if (end <= m) reach[end] = true;
      }
    }
    if (reach[m]) return true;
  }
  return false;
}

std::vector<Beam> remove_redundant(const std::vector<Beam>& beams) {
  std::vector<Beam> current = beams;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < current.size(); ++i) {
      const auto mask = aperture_mask(current[i]);
      bool redundant = false;
      for (std::size_t j = 0; j < i && !redundant; ++j) {
        redundant = aperture_mask(current[j]) == mask;
      }
      if (!redundant) {
        std::vector<Beam> others;
        others.reserve(current.size() - 1);
        for (std::size_t j = 0; j < current.size(); ++j) {
          if (j != i) others.push_back(current[j]);
        }
        redundant = is_partitioned_by(current[i], others);
      }
      if (redundant) {
        current.erase(current.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
  }
  return current;
}

Codebook build_codebook(const DPState& state, const GainGapConfig& cfg) {
  auto kept = prune_clusters(state, cfg.o_th1);
  std::stable_sort(kept.begin(), kept.end(), [](const MixtureComponent& a, const MixtureComponent& b) {
    return a.weight > b.weight;
  });
  Codebook cb;
  cb.gamma_db = cfg.gamma_db;
  cb.o_th = cfg.o_th;
  cb.o_th1 = cfg.o_th1;
  cb.o_th2 = cfg.o_th2;
  std::vector<Beam> beams;
  for (const auto& comp : kept) {
    cb.kept_mass += comp.weight;
    beams.push_back(codebook_beam(comp, cfg));
  }
  cb.beams = remove_redundant(beams);
  cb.meta.alpha = state.alpha;
  cb.meta.seed = state.rng_seed;
  cb.meta.n_candidates = state.assignments.size();
  cb.meta.n_components = state.components.size();
  return cb;
}

void to_json(nlohmann::json& j, const Codebook& cb) {
  nlohmann::json beams = nlohmann::json::array();
  for (const auto& b : cb.beams) beams.push_back({{"direction_deg", b.direction_deg}, {"width_deg", b.width_deg}});
  j = {{"gamma_db", cb.gamma_db},
       {"o_th", cb.o_th},
       {"o_th1", cb.o_th1},
       {"o_th2", cb.o_th2},
       {"beams", beams},
       {"kept_mass", cb.kept_mass},
       {"meta",
        {{"seed", cb.meta.seed},
         {"alpha", cb.meta.alpha},
         {"n_candidates", cb.meta.n_candidates},
         {"n_components", cb.meta.n_components},
         {"train_frac", cb.meta.train_frac},
         {"label", cb.meta.label}}}};
}

void from_json(const nlohmann::json& j, Codebook& cb) {
  cb = Codebook{};
  cb.gamma_db = j.at("gamma_db").get<double>();
  cb.o_th = j.value("o_th", 0.0);
  cb.o_th1 = j.value("o_th1", 0.0);
  cb.o_th2 = j.value("o_th2", 0.0);
  cb.kept_mass = j.value("kept_mass", 0.0);
  for (const auto& b : j.at("beams")) {
    cb.beams.emplace_back(b.at("direction_deg").get<double>(), b.at("width_deg").get<double>());
  }
  if (cb.beams.empty()) throw InvalidInput("codebook has no beams");
  if (j.contains("meta")) {
    const auto& m = j.at("meta");
    cb.meta.seed = m.value("seed", std::uint64_t{0});
    cb.meta.alpha = m.value("alpha", 0.0);
    cb.meta.n_candidates = m.value("n_candidates", std::size_t{0});
    cb.meta.n_components = m.value("n_components", std::size_t{0});
    cb.meta.train_frac = m.value("train_frac", 0.7);
    cb.meta.label = m.value("label", std::string{});
  }
}

std::string codebook_to_csv(const Codebook& cb) {
  std::ostringstream out;
  out << "direction_deg";
  for (const auto& b : cb.beams) out << ',' << b.direction_deg;
  out << "\nwidth_deg";
  for (const auto& b : cb.beams) out << ',' << b.width_deg;
  out << '\n';
  return out.str();
}

}  // namespace beamcodex
