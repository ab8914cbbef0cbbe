#pragma once

// End-to-end commands: generate scenarios, build codebooks, evaluate training
// strategies. Each command writes its outputs plus a manifest.json that is
// enough to re-run it bit-exactly.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "beamcodex/codebook.hpp"
#include "beamcodex/eval.hpp"
#include "beamcodex/pathloss.hpp"
#include "beamcodex/synth.hpp"

namespace beamcodex {

std::string version();

struct GenerateConfig {
  std::string preset = "office-nlos";  // built-in name or environment JSON path
  std::size_t n_locations = 300;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = ".";
  unsigned jobs = 0;
};

struct BuildConfig {
  std::filesystem::path scans;
  std::filesystem::path out_dir = ".";
  GainGapConfig gain;
  std::uint64_t seed = 0;
  double train_frac = 0.7;
  bool los_split = false;
  double tx_power_dbm = 30.0;
  double freq_ghz = 28.0;
  int n_iter = 50;
  unsigned jobs = 0;
};

struct EvaluateConfig {
  std::filesystem::path scans;
  std::filesystem::path codebook;       // LoS codebook when `pathloss` is set
  std::filesystem::path codebook_nlos;  // used only with `pathloss`
  std::filesystem::path pathloss;
  std::filesystem::path out_dir = ".";
  std::string strategy = "codebook";    // codebook | exhaustive | hierarchical
  int levels = 6;
  double dir_error_deg = 0.0;
  double probe_noise_db = 0.0;
  std::optional<double> gamma_db;       // defaults to the codebook's gamma, else 5
  double ref_beamwidth_deg = 10.0;
  std::optional<double> train_frac;     // defaults to the codebook's split
  std::optional<std::uint64_t> split_seed;
  std::string split = "test";           // test | train | all
  double tx_power_dbm = 30.0;
  std::uint64_t seed = 0;
  unsigned jobs = 0;
};

struct RunManifest {
  std::string subcommand;
  nlohmann::json config;
  std::vector<std::pair<std::string, std::string>> outputs;  // (path, content hash)
  std::uint64_t seed = 0;
  std::string version;
  double wall_clock_s = 0.0;
};

void to_json(nlohmann::json& j, const RunManifest& m);
void from_json(const nlohmann::json& j, RunManifest& m);

void to_json(nlohmann::json& j, const GainGapConfig& c);
void from_json(const nlohmann::json& j, GainGapConfig& c);
void to_json(nlohmann::json& j, const GenerateConfig& c);
void from_json(const nlohmann::json& j, GenerateConfig& c);
void to_json(nlohmann::json& j, const BuildConfig& c);
void from_json(const nlohmann::json& j, BuildConfig& c);
void to_json(nlohmann::json& j, const EvaluateConfig& c);
void from_json(const nlohmann::json& j, EvaluateConfig& c);

/// Resolves a built-in preset name or an environment JSON file.
Environment load_environment(const std::string& preset_or_path);

/// Seeded shuffle; returns (train, test) index lists in ascending order.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n, double train_frac,
                                                                            std::uint64_t seed);

struct BuiltCodebook {
  Codebook codebook;
  FitReport report;
  PriorSpec prior;
  std::size_t n_candidates = 0;
};

/// extract -> hyperparameters -> fit -> codebook on the given scans.
/// Throws InfeasibleGainTarget when no candidates exist or the target is unmet.
BuiltCodebook build_from_scans(const std::vector<AngularPowerScan>& scans, const GainGapConfig& cfg,
                               std::uint64_t seed, int n_iter = 50, unsigned jobs = 1);

RunManifest cmd_generate(const GenerateConfig& cfg);
RunManifest cmd_build(const BuildConfig& cfg);
RunManifest cmd_evaluate(const EvaluateConfig& cfg);

/// Replays a manifest, optionally into a different output directory.
RunManifest rerun(const std::filesystem::path& manifest_path,
                  const std::optional<std::filesystem::path>& out_dir = std::nullopt);

}  // namespace beamcodex
