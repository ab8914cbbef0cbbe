#include "beamcodex/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

#include "beamcodex/features.hpp"
#include "beamcodex/io.hpp"
#include "beamcodex/random.hpp"

#ifndef BEAMCODEX_VERSION
#define BEAMCODEX_VERSION "0.0.0"
#endif

namespace beamcodex {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSplitStream = 0x5B117ULL;

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

std::string abs_or_empty(const fs::path& p) { return p.empty() ? std::string{} : fs::absolute(p).string(); }

std::vector<AngularPowerScan> subset(const std::vector<AngularPowerScan>& scans, const std::vector<std::size_t>& idx) {
  std::vector<AngularPowerScan> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(scans[i]);
  return out;
}

Codebook load_codebook(const fs::path& p) {
  return nlohmann::json::parse(read_text_file(p)).get<Codebook>();
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Adds the manifest itself and commits everything together.
RunManifest finish(OutputSet& outputs, const fs::path& out_dir, const std::string& subcommand,
                   nlohmann::json config, std::uint64_t seed, const Stopwatch& clock) {
  RunManifest m;
  m.subcommand = subcommand;
  m.config = std::move(config);
  m.seed = seed;
  m.version = version();
  for (const auto& [path, hash] : outputs.entries()) m.outputs.emplace_back(path.string(), hash);
  m.wall_clock_s = clock.seconds();
  outputs.add(out_dir / "manifest.json", dump(m));
  outputs.commit();
  return m;
}

}  // namespace

std::string version() { return BEAMCODEX_VERSION; }

void to_json(nlohmann::json& j, const RunManifest& m) {
  nlohmann::json outs = nlohmann::json::array();
  for (const auto& [p, h] : m.outputs) outs.push_back({{"path", p}, {"hash", h}});
  j = {{"subcommand", m.subcommand}, {"config", m.config}, {"outputs", outs},
       {"seed", m.seed},           {"version", m.version}, {"wall_clock_s", m.wall_clock_s}};
}

void from_json(const nlohmann::json& j, RunManifest& m) {
  m.subcommand = j.at("subcommand").get<std::string>();
  m.config = j.at("config");
  m.outputs.clear();
  for (const auto& o : j.value("outputs", nlohmann::json::array())) {
    m.outputs.emplace_back(o.at("path").get<std::string>(), o.at("hash").get<std::string>());
  }
  m.seed = j.value("seed", std::uint64_t{0});
  m.version = j.value("version", std::string{});
  m.wall_clock_s = j.value("wall_clock_s", 0.0);
}

void to_json(nlohmann::json& j, const GainGapConfig& c) {
  j = {{"gamma_db", c.gamma_db},   {"o_th", c.o_th},           {"o_th1", c.o_th1},
       {"o_th2", c.o_th2},         {"w_min_deg", c.w_min_deg}, {"w_max_deg", c.w_max_deg},
       {"ref_beamwidth_deg", c.ref_beamwidth_deg}};
}

void from_json(const nlohmann::json& j, GainGapConfig& c) {
  const GainGapConfig d;
  c.gamma_db = j.value("gamma_db", d.gamma_db);
  c.o_th = j.value("o_th", d.o_th);
  c.o_th1 = j.value("o_th1", d.o_th1);
  c.o_th2 = j.value("o_th2", d.o_th2);
  c.w_min_deg = j.value("w_min_deg", d.w_min_deg);
  c.w_max_deg = j.value("w_max_deg", d.w_max_deg);
  c.ref_beamwidth_deg = j.value("ref_beamwidth_deg", d.ref_beamwidth_deg);
}

void to_json(nlohmann::json& j, const GenerateConfig& c) {
  j = {{"preset", c.preset}, {"n_locations", c.n_locations}, {"seed", c.seed},
       {"out_dir", c.out_dir.string()}, {"jobs", c.jobs}};
}

void from_json(const nlohmann::json& j, GenerateConfig& c) {
  c.preset = j.at("preset").get<std::string>();
  c.n_locations = j.at("n_locations").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.out_dir = j.at("out_dir").get<std::string>();
  c.jobs = j.value("jobs", 0u);
}

void to_json(nlohmann::json& j, const BuildConfig& c) {
  j = {{"scans", c.scans.string()}, {"out_dir", c.out_dir.string()}, {"gain", c.gain},
       {"seed", c.seed},            {"train_frac", c.train_frac},    {"los_split", c.los_split},
       {"tx_power_dbm", c.tx_power_dbm}, {"freq_ghz", c.freq_ghz},  {"n_iter", c.n_iter},
       {"jobs", c.jobs}};
}

void from_json(const nlohmann::json& j, BuildConfig& c) {
  const BuildConfig d;
  c.scans = j.at("scans").get<std::string>();
  c.out_dir = j.at("out_dir").get<std::string>();
  c.gain = j.value("gain", nlohmann::json::object()).get<GainGapConfig>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.train_frac = j.value("train_frac", d.train_frac);
  c.los_split = j.value("los_split", d.los_split);
  c.tx_power_dbm = j.value("tx_power_dbm", d.tx_power_dbm);
  c.freq_ghz = j.value("freq_ghz", d.freq_ghz);
  c.n_iter = j.value("n_iter", d.n_iter);
  c.jobs = j.value("jobs", d.jobs);
}

void to_json(nlohmann::json& j, const EvaluateConfig& c) {
  j = {{"scans", c.scans.string()},
       {"codebook", c.codebook.string()},
       {"codebook_nlos", c.codebook_nlos.string()},
       {"pathloss", c.pathloss.string()},
       {"out_dir", c.out_dir.string()},
       {"strategy", c.strategy},
       {"levels", c.levels},
       {"dir_error_deg", c.dir_error_deg},
       {"probe_noise_db", c.probe_noise_db},
       {"gamma_db", c.gamma_db ? nlohmann::json(*c.gamma_db) : nlohmann::json()},
       {"ref_beamwidth_deg", c.ref_beamwidth_deg},
       {"train_frac", c.train_frac ? nlohmann::json(*c.train_frac) : nlohmann::json()},
       {"split_seed", c.split_seed ? nlohmann::json(*c.split_seed) : nlohmann::json()},
       {"split", c.split},
       {"tx_power_dbm", c.tx_power_dbm},
       {"seed", c.seed},
       {"jobs", c.jobs}};
}

void from_json(const nlohmann::json& j, EvaluateConfig& c) {
  const EvaluateConfig d;
  c.scans = j.at("scans").get<std::string>();
  c.codebook = j.value("codebook", std::string{});
  c.codebook_nlos = j.value("codebook_nlos", std::string{});
  c.pathloss = j.value("pathloss", std::string{});
  c.out_dir = j.at("out_dir").get<std::string>();
  c.strategy = j.value("strategy", d.strategy);
  c.levels = j.value("levels", d.levels);
  c.dir_error_deg = j.value("dir_error_deg", d.dir_error_deg);
  c.probe_noise_db = j.value("probe_noise_db", d.probe_noise_db);
  c.gamma_db.reset();
  if (j.contains("gamma_db") && !j["gamma_db"].is_null()) c.gamma_db = j["gamma_db"].get<double>();
  c.ref_beamwidth_deg = j.value("ref_beamwidth_deg", d.ref_beamwidth_deg);
  c.train_frac.reset();
  if (j.contains("train_frac") && !j["train_frac"].is_null()) c.train_frac = j["train_frac"].get<double>();
  c.split_seed.reset();
  if (j.contains("split_seed") && !j["split_seed"].is_null()) c.split_seed = j["split_seed"].get<std::uint64_t>();
  c.split = j.value("split", d.split);
  c.tx_power_dbm = j.value("tx_power_dbm", d.tx_power_dbm);
  c.seed = j.at("seed").get<std::uint64_t>();
  c.jobs = j.value("jobs", d.jobs);
}

Environment load_environment(const std::string& preset_or_path) {
  for (const auto& name : preset_names()) {
    if (name == preset_or_path) return preset(name);
  }
  if (fs::exists(preset_or_path)) {
    return nlohmann::json::parse(read_text_file(preset_or_path)).get<Environment>();
  }
  std::string known;
  for (const auto& name : preset_names()) known += (known.empty() ? "" : ", ") + name;
  throw InvalidInput("unknown preset '" + preset_or_path + "' (known: " + known + ")");
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n, double train_frac,
                                                                            std::uint64_t seed) {
  if (!(train_frac > 0.0 && train_frac <= 1.0)) throw InvalidInput("train_frac must be in (0, 1]");
  Rng rng = make_rng(seed, kSplitStream);
  auto perm = permutation(rng, n);
  auto n_train = static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, n == 0 ? 0 : 1, n);
  std::vector<std::size_t> train(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {train, test};
}

BuiltCodebook build_from_scans(const std::vector<AngularPowerScan>& scans, const GainGapConfig& cfg,
                               std::uint64_t seed, int n_iter, unsigned jobs) {
  cfg.validate();
  BuiltCodebook out;
  const auto candidates = extract_all(scans, cfg, jobs);
  out.n_candidates = candidates.size();
  if (candidates.empty()) throw InfeasibleGainTarget(DPState{}, FitReport{});
  out.prior = hyperparams_from_data(candidates, cfg.w_min_deg, cfg.w_max_deg);
  SamplerOptions opts;
  opts.n_iter = n_iter;
  auto [state, report] = fit(candidates, scans, out.prior, cfg, seed, opts, jobs);
  out.codebook = build_codebook(state, cfg);
  out.report = std::move(report);
  return out;
}

RunManifest cmd_generate(const GenerateConfig& cfg) {
  const Stopwatch clock;
  const Environment env = load_environment(cfg.preset);
  const auto data = generate(env, cfg.n_locations, cfg.seed, cfg.jobs);
  OutputSet outputs;
  std::ostringstream csv;
  write_scans_csv(csv, data.scans);
  outputs.add(cfg.out_dir / "scans.csv", csv.str());
  outputs.add(cfg.out_dir / "ground_truth.json", dump(data.truth));
  outputs.add(cfg.out_dir / "environment.json", dump(env));
  GenerateConfig snapshot = cfg;
  snapshot.out_dir = fs::absolute(cfg.out_dir);
  return finish(outputs, cfg.out_dir, "generate", snapshot, cfg.seed, clock);
}

RunManifest cmd_build(const BuildConfig& cfg) {
  const Stopwatch clock;
  cfg.gain.validate();
  const auto scans = read_scans_csv(cfg.scans);
  const auto [train_idx, test_idx] = split_indices(scans.size(), cfg.train_frac, cfg.seed);
  const auto train = subset(scans, train_idx);
  OutputSet outputs;

  auto emit = [&](const BuiltCodebook& built, const std::string& suffix, const std::string& label) {
    Codebook cb = built.codebook;
    cb.meta.train_frac = cfg.train_frac;
    cb.meta.label = label;
    outputs.add(cfg.out_dir / ("codebook" + suffix + ".json"), dump(cb));
    outputs.add(cfg.out_dir / ("codebook" + suffix + ".csv"), codebook_to_csv(cb));
    nlohmann::json report = built.report;
    report["prior"] = built.prior;
    report["n_candidates"] = built.n_candidates;
    report["n_train_scans"] = train.size();
    outputs.add(cfg.out_dir / ("fit_report" + suffix + ".json"), dump(report));
  };

  if (!cfg.los_split) {
    emit(build_from_scans(train, cfg.gain, cfg.seed, cfg.n_iter, cfg.jobs), "", "all");
  } else {
    std::vector<PathLossObservation> obs;
    for (const auto& s : train) obs.push_back(observation_from_scan(s, cfg.tx_power_dbm));
    const auto mixture = fit_pathloss(obs, friis_prior(cfg.freq_ghz), cfg.seed);
    std::vector<AngularPowerScan> los, nlos;
    for (std::size_t i = 0; i < train.size(); ++i) {
      (classify(obs[i], mixture).first == PathLossLabel::NLoS ? nlos : los).push_back(train[i]);
    }
    if (los.empty() || nlos.empty()) {
      throw InvalidInput("los split left one class empty (" + std::to_string(los.size()) + " LoS, " +
                         std::to_string(nlos.size()) + " NLoS)");
    }
    outputs.add(cfg.out_dir / "pathloss.json", dump(mixture));
    emit(build_from_scans(los, cfg.gain, cfg.seed, cfg.n_iter, cfg.jobs), "_los", "LoS");
    emit(build_from_scans(nlos, cfg.gain, cfg.seed, cfg.n_iter, cfg.jobs), "_nlos", "NLoS");
  }

  BuildConfig snapshot = cfg;
  snapshot.scans = abs_or_empty(cfg.scans);
  snapshot.out_dir = fs::absolute(cfg.out_dir);
  return finish(outputs, cfg.out_dir, "build", snapshot, cfg.seed, clock);
}

RunManifest cmd_evaluate(const EvaluateConfig& cfg) {
  const Stopwatch clock;
  const auto scans = read_scans_csv(cfg.scans);

  std::optional<Codebook> primary, secondary;
  PathLossMixture mixture;
  Strategy strategy;
  if (cfg.strategy == "exhaustive") {
    strategy = Strategy::exhaustive();
  } else if (cfg.strategy == "hierarchical") {
    strategy = Strategy::hierarchical(cfg.levels);
  } else if (cfg.strategy == "codebook") {
    if (cfg.codebook.empty()) throw InvalidInput("codebook strategy needs --codebook");
    primary = load_codebook(cfg.codebook);
    strategy.kind = StrategyKind::Codebook;
    if (!cfg.pathloss.empty()) {
      if (cfg.codebook_nlos.empty()) throw InvalidInput("--pathloss routing needs --codebook-nlos");
      secondary = load_codebook(cfg.codebook_nlos);
      mixture = nlohmann::json::parse(read_text_file(cfg.pathloss)).get<PathLossMixture>();
    }
  } else {
    throw InvalidInput("unknown strategy '" + cfg.strategy + "' (codebook, exhaustive, hierarchical)");
  }
  if (!cfg.codebook.empty() && !primary) primary = load_codebook(cfg.codebook);

  GainGapConfig gain;
  gain.gamma_db = cfg.gamma_db.value_or(primary ? primary->gamma_db : 5.0);
  gain.ref_beamwidth_deg = cfg.ref_beamwidth_deg;
  if (!(gain.gamma_db > 0.0)) throw InvalidInput("gamma must be positive");
  if (!(gain.ref_beamwidth_deg > 0.0)) throw InvalidInput("reference beamwidth must be positive");

  const double train_frac = cfg.train_frac.value_or(primary ? primary->meta.train_frac : 0.7);
  const std::uint64_t split_seed = cfg.split_seed.value_or(primary ? primary->meta.seed : cfg.seed);
  std::vector<AngularPowerScan> eval_scans;
  if (cfg.split == "all") {
    eval_scans = scans;
  } else if (cfg.split == "test" || cfg.split == "train") {
    const auto [train_idx, test_idx] = split_indices(scans.size(), train_frac, split_seed);
    eval_scans = subset(scans, cfg.split == "test" ? test_idx : train_idx);
  } else {
    throw InvalidInput("split must be test, train or all");
  }
  if (eval_scans.empty()) throw InvalidInput("evaluation split is empty");

  std::vector<const Codebook*> routes;
  if (primary) strategy.codebook = &*primary;
  if (strategy.kind == StrategyKind::Codebook && secondary) {
    for (const auto& s : eval_scans) {
      const auto label = classify(observation_from_scan(s, cfg.tx_power_dbm), mixture).first;
      routes.push_back(label == PathLossLabel::NLoS ? &*secondary : &*primary);
    }
    strategy.route = [&routes](std::size_t i) { return routes[i]; };
  }

  EvalOptions opts;
  opts.dir_error_deg = cfg.dir_error_deg;
  opts.probe_noise_db = cfg.probe_noise_db;
  opts.seed = cfg.seed;
  opts.jobs = cfg.jobs;
  const EvalSummary summary = evaluate(eval_scans, strategy, gain, opts);

  OutputSet outputs;
  outputs.add(cfg.out_dir / "eval_summary.json", dump(summary));
  outputs.add(cfg.out_dir / "cdf.csv", cdf_to_csv(summary));
  EvaluateConfig snapshot = cfg;
  snapshot.scans = abs_or_empty(cfg.scans);
  snapshot.codebook = abs_or_empty(cfg.codebook);
  snapshot.codebook_nlos = abs_or_empty(cfg.codebook_nlos);
  snapshot.pathloss = abs_or_empty(cfg.pathloss);
  snapshot.out_dir = fs::absolute(cfg.out_dir);
  return finish(outputs, cfg.out_dir, "evaluate", snapshot, cfg.seed, clock);
}

RunManifest rerun(const fs::path& manifest_path, const std::optional<fs::path>& out_dir) {
  const auto m = nlohmann::json::parse(read_text_file(manifest_path)).get<RunManifest>();
  if (m.subcommand == "generate") {
    auto c = m.config.get<GenerateConfig>();
    if (out_dir) c.out_dir = *out_dir;
    return cmd_generate(c);
  }
  if (m.subcommand == "build") {
    auto c = m.config.get<BuildConfig>();
    if (out_dir) c.out_dir = *out_dir;
    return cmd_build(c);
  }
  if (m.subcommand == "evaluate") {
    auto c = m.config.get<EvaluateConfig>();
    if (out_dir) c.out_dir = *out_dir;
    return cmd_evaluate(c);
  }
  throw InvalidInput("manifest has unknown subcommand '" + m.subcommand + "'");
}

}  // namespace beamcodex
