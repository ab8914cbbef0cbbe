#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "beamcodex/gibbs.hpp"

namespace beamcodex {

struct CodebookMeta {
  std::uint64_t seed = 0;
  double alpha = 0.0;
  std::size_t n_candidates = 0;
  std::size_t n_components = 0;
  double train_frac = 0.7;
  std::string label;  // e.g. "all", "LoS", "NLoS"
};

/// Ordered training beams plus the configuration they were built for.
struct Codebook {
  std::vector<Beam> beams;
  double gamma_db = 0.0;
  double o_th = 0.0;
  double o_th1 = 0.0;
  double o_th2 = 0.0;
  double kept_mass = 0.0;
  CodebookMeta meta;

  std::size_t size() const { return beams.size(); }
};

/// Drops the lightest clusters while their total weight stays within
/// 1 - o_th1; survivors keep their original relative order.
std::vector<MixtureComponent> prune_clusters(const DPState& state, double o_th1);

/// True when `target`'s aperture is tiled exactly by pairwise-disjoint
/// apertures of strictly narrower beams from `pool`.
bool is_partitioned_by(const Beam& target, const std::vector<Beam>& pool);

/// Removes beams that are an exact disjoint union of narrower beams in the
/// list, and exact duplicates, iterating to a fixpoint. Survivor order is
/// preserved.
std::vector<Beam> remove_redundant(const std::vector<Beam>& beams);

/// prune -> round/clamp means -> remove redundancy; beams ordered by
/// descending cluster weight.
Codebook build_codebook(const DPState& state, const GainGapConfig& cfg);

void to_json(nlohmann::json& j, const Codebook& cb);
void from_json(const nlohmann::json& j, Codebook& cb);

/// Two-row CSV: directions, then widths.
std::string codebook_to_csv(const Codebook& cb);

}  // namespace beamcodex
