#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "beamcodex/gibbs.hpp"
#include "beamcodex/pipeline.hpp"

namespace bc = beamcodex;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInfeasible = 3;

const char* kFormats = R"(File formats
  scans CSV     header location_id,angle_deg,power_dbm[,distance_m][,tag]
                one row per location and degree; finer grids are rebinned to 1 deg
                by linear-power mean; every location must cover all 360 bins.
                tag is los, nlos or empty.
  codebook JSON {"gamma_db", "o_th", "o_th1", "o_th2", "kept_mass",
                 "beams": [{"direction_deg", "width_deg"}], "meta": {...}}
  codebook CSV  two rows, directions then widths (one column per beam)
  pathloss JSON [{"intercept", "slope", "rms", "weight", "label"}]  (path loss in dB vs log10 metres)
  eval JSON     success rates, mean probes, time saving, CDF points, per-location results
  cdf CSV       gap_db,cdf
  manifest.json subcommand, config snapshot, output hashes, seed, version, wall clock

Exit codes: 0 ok, 1 error, 2 usage, 3 infeasible gain target.
Environment: BEAMCODEX_SEED sets the default seed; --seed overrides it.)";

std::uint64_t default_seed() {
  const char* env = std::getenv("BEAMCODEX_SEED");
  if (env == nullptr || *env == '\0') return 0;
  try {
    return std::stoull(env);
  } catch (const std::exception&) {
    throw CLI::ValidationError("BEAMCODEX_SEED", std::string("not an unsigned integer: ") + env);
  }
}

void print_outputs(const bc::RunManifest& m) {
  for (const auto& [path, hash] : m.outputs) std::cout << hash << "  " << path << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn mmWave beam codebooks from angular power scans", "beamcodex"};
  app.footer(kFormats);
  app.set_version_flag("--version", bc::version());
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  unsigned jobs = 0;

  bc::GenerateConfig gen;
  auto* generate = app.add_subcommand("generate", "Write a synthetic scenario (scans, ground truth, manifest)");
  generate->add_option("--preset", gen.preset, "Built-in preset name or environment JSON file")
      ->capture_default_str();
  generate->add_option("-n,--locations", gen.n_locations, "Number of locations")->capture_default_str();
  generate->add_option("--out", gen.out_dir, "Output directory")->capture_default_str();

  bc::BuildConfig build;
  auto* build_cmd = app.add_subcommand("build", "Learn a codebook from the training split of a scan file");
  build_cmd->add_option("--scans", build.scans, "Scan CSV")->required();
  build_cmd->add_option("--out", build.out_dir, "Output directory")->capture_default_str();
  build_cmd->add_option("--gamma-db", build.gain.gamma_db, "Allowed gap to the maximum gain")
      ->capture_default_str();
  auto* o_th_opt = build_cmd->add_option("--o-th", build.gain.o_th, "Overall success target (default o_th1*o_th2 if lower)");
  build_cmd->add_option("--o-th1", build.gain.o_th1, "Covered cluster mass target")->capture_default_str();
  build_cmd->add_option("--o-th2", build.gain.o_th2, "Per-cluster gain success target")->capture_default_str();
  build_cmd->add_option("--w-min", build.gain.w_min_deg, "Narrowest candidate beam")->capture_default_str();
  build_cmd->add_option("--w-max", build.gain.w_max_deg, "Widest candidate beam")->capture_default_str();
  build_cmd->add_option("--ref-beamwidth", build.gain.ref_beamwidth_deg, "Reference beam for the maximum gain")
      ->capture_default_str();
  build_cmd->add_option("--train-frac", build.train_frac, "Fraction of locations used for training")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  build_cmd->add_flag("--los-split", build.los_split, "Build separate LoS and NLoS codebooks");
  build_cmd->add_option("--tx-power-dbm", build.tx_power_dbm, "Transmit power for path loss")
      ->capture_default_str();
  build_cmd->add_option("--freq-ghz", build.freq_ghz, "Carrier for the free-space prior")->capture_default_str();
  build_cmd->add_option("--iterations", build.n_iter, "Gibbs sweeps per chain")->capture_default_str();

  bc::EvaluateConfig eval;
  double eval_gamma = 0.0, eval_frac = 0.0;
  std::uint64_t split_seed = 0;
  auto* eval_cmd = app.add_subcommand("evaluate", "Simulate beam training on held-out scans");
  eval_cmd->add_option("--scans", eval.scans, "Scan CSV")->required();
  eval_cmd->add_option("--codebook", eval.codebook, "Codebook JSON (LoS codebook with --pathloss)");
  eval_cmd->add_option("--codebook-nlos", eval.codebook_nlos, "NLoS codebook JSON");
  eval_cmd->add_option("--pathloss", eval.pathloss, "Path-loss mixture JSON for LoS/NLoS routing");
  eval_cmd->add_option("--out", eval.out_dir, "Output directory")->capture_default_str();
  eval_cmd->add_option("--strategy", eval.strategy, "Training strategy")
      ->check(CLI::IsMember({"codebook", "exhaustive", "hierarchical"}))
      ->capture_default_str();
  eval_cmd->add_option("--levels", eval.levels, "Hierarchical search depth")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  eval_cmd->add_option("--dir-error", eval.dir_error_deg, "Max reference-direction error in degrees")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  eval_cmd->add_option("--probe-noise", eval.probe_noise_db, "Gaussian probe noise in dB")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  auto* gamma_opt = eval_cmd->add_option("--gamma-db", eval_gamma, "Success gap (default: codebook gamma, else 5)");
  eval_cmd->add_option("--ref-beamwidth", eval.ref_beamwidth_deg, "Reference beam for the maximum gain")
      ->capture_default_str();
  auto* frac_opt = eval_cmd->add_option("--train-frac", eval_frac, "Split fraction (default: from codebook)");
  auto* split_seed_opt = eval_cmd->add_option("--split-seed", split_seed, "Split seed (default: from codebook)");
  eval_cmd->add_option("--split", eval.split, "Which split to evaluate")
      ->check(CLI::IsMember({"test", "train", "all"}))
      ->capture_default_str();
  eval_cmd->add_option("--tx-power-dbm", eval.tx_power_dbm, "Transmit power for path loss")->capture_default_str();

  std::string manifest_path, rerun_out;
  auto* rerun_cmd = app.add_subcommand("rerun", "Replay a run from its manifest.json");
  rerun_cmd->add_option("manifest", manifest_path, "manifest.json of an earlier run")->required();
  rerun_cmd->add_option("--out", rerun_out, "Write into this directory instead");

  for (auto* sub : {generate, build_cmd, eval_cmd}) {
    sub->add_option("--seed", seed, "Seed for all randomness (env BEAMCODEX_SEED)");
    sub->add_option("--jobs", jobs, "Worker threads (0 = all cores)");
  }

  try {
    seed = default_seed();
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    bc::RunManifest m;
    if (*generate) {
      gen.seed = seed;
      gen.jobs = jobs;
      m = bc::cmd_generate(gen);
    } else if (*build_cmd) {
      build.seed = seed;
      build.jobs = jobs;
      if (!*o_th_opt) build.gain.o_th = std::min(build.gain.o_th, build.gain.o_th1 * build.gain.o_th2);
      m = bc::cmd_build(build);
    } else if (*eval_cmd) {
      eval.seed = seed;
      eval.jobs = jobs;
      if (*gamma_opt) eval.gamma_db = eval_gamma;
      if (*frac_opt) eval.train_frac = eval_frac;
      if (*split_seed_opt) eval.split_seed = split_seed;
      m = bc::cmd_evaluate(eval);
    } else {
      std::optional<std::filesystem::path> out;
      if (!rerun_out.empty()) out = rerun_out;
      m = bc::rerun(manifest_path, out);
    }
    print_outputs(m);
    return kExitOk;
  } catch (const bc::InfeasibleGainTarget& e) {
    std::cerr << "beamcodex: infeasible gain target: ";
    if (e.report.bisection_trace.empty()) {
      std::cerr << "no beam candidates in the training scans\n";
    } else {
      std::cerr << "no alpha met the success targets after " << e.report.bisection_trace.size()
                << " bisection steps (try a larger --gamma-db or lower --o-th2)\n";
    }
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "beamcodex: " << e.what() << '\n';
    return kExitError;
  }
}
