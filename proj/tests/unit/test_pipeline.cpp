#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "beamcodex/io.hpp"
#include "beamcodex/pipeline.hpp"

using namespace beamcodex;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("beamcodex_pipe_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

nlohmann::json load(const fs::path& p) { return nlohmann::json::parse(read_text_file(p)); }

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("split indices") {
  const auto [train, test] = split_indices(300, 0.7, 5);
  CHECK(train.size() == 210);
  CHECK(test.size() == 90);
  CHECK(std::is_sorted(train.begin(), train.end()));
  std::set<std::size_t> all(train.begin(), train.end());
  all.insert(test.begin(), test.end());
  CHECK(all.size() == 300);
  CHECK(split_indices(300, 0.7, 5).first == train);
  CHECK(split_indices(300, 0.7, 6).first != train);
  CHECK_THROWS_AS(split_indices(10, 0.0, 1), InvalidInput);
}

TEST_CASE("generate") {
  const auto dir = scratch("gen");
  GenerateConfig g;
  g.preset = "office-nlos";
  g.n_locations = 300;
  g.seed = 4;
  g.out_dir = dir / "a";
  const auto m = cmd_generate(g);
  const std::string csv = read_text_file(dir / "a" / "scans.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 300 * 360 + 1);
  CHECK(fs::exists(dir / "a" / "ground_truth.json"));
  CHECK(load(dir / "a" / "manifest.json").at("subcommand") == "generate");

  g.out_dir = dir / "b";
  const auto m2 = cmd_generate(g);
  CHECK(read_text_file(dir / "b" / "scans.csv") == csv);
  for (std::size_t i = 0; i < m.outputs.size(); ++i) CHECK(m.outputs[i].second == m2.outputs[i].second);

  g.preset = "atlantis";
  g.out_dir = dir / "c";
  CHECK_THROWS_AS(cmd_generate(g), InvalidInput);
  CHECK(!fs::exists(dir / "c" / "scans.csv"));
  fs::remove_all(dir);
}

TEST_CASE("build, evaluate and rerun") {
  const auto dir = scratch("build");
  GenerateConfig g;
  g.preset = "corridor-los";
  g.n_locations = 150;
  g.seed = 1;
  g.out_dir = dir;
  cmd_generate(g);

  BuildConfig b;
  b.scans = dir / "scans.csv";
  b.out_dir = dir / "cb";
  b.seed = 2;
  const auto bm = cmd_build(b);
  const auto cb = load(dir / "cb" / "codebook.json").get<Codebook>();
  CHECK(cb.size() >= 1);
  CHECK(cb.meta.seed == 2);
  CHECK(cb.meta.train_frac == 0.7);
  CHECK(load(dir / "cb" / "fit_report.json").at("n_train_scans") == 105);

  EvaluateConfig e;
  e.scans = dir / "scans.csv";
  e.codebook = dir / "cb" / "codebook.json";
  e.out_dir = dir / "ev";
  e.dir_error_deg = 20;
  e.seed = 3;
  cmd_evaluate(e);
  const auto summary = load(dir / "ev" / "eval_summary.json");
  CHECK(summary.at("dir_error_deg") == 20.0);
  CHECK(summary.at("n_locations") == 45);
  CHECK(summary.at("strategy") == "codebook");
  CHECK(summary.at("mean_probes") == static_cast<double>(cb.size()));

  e.strategy = "exhaustive";
  e.out_dir = dir / "ex";
  cmd_evaluate(e);
  CHECK(load(dir / "ex" / "eval_summary.json").at("success_rate") == 1.0);

  e.strategy = "hierarchical";
  e.out_dir = dir / "hi";
  cmd_evaluate(e);
  CHECK(load(dir / "hi" / "eval_summary.json").at("mean_probes") == 12.0);

  const auto replay = rerun(dir / "cb" / "manifest.json", dir / "cb2");
  REQUIRE(replay.outputs.size() == bm.outputs.size());
  for (std::size_t i = 0; i < bm.outputs.size(); ++i) {
    CHECK(fs::path(replay.outputs[i].first).filename() == fs::path(bm.outputs[i].first).filename());
    CHECK(replay.outputs[i].second == bm.outputs[i].second);
  }
  fs::remove_all(dir);
}

TEST_CASE("infeasible build leaves no outputs") {
  const auto dir = scratch("infeasible");
  GenerateConfig g;
  g.preset = "office-nlos";
  g.n_locations = 80;
  g.out_dir = dir;
  cmd_generate(g);
  BuildConfig b;
  b.scans = dir / "scans.csv";
  b.out_dir = dir / "cb";
  b.gain.gamma_db = 0.1;
  CHECK_THROWS_AS(cmd_build(b), InfeasibleGainTarget);
  CHECK((!fs::exists(dir / "cb") || fs::is_empty(dir / "cb")));
  fs::remove_all(dir);
}

TEST_CASE("LoS split builds two codebooks and routes by class") {
  const auto dir = scratch("split");
  GenerateConfig g;
  g.preset = "office-nlos";
  g.n_locations = 300;
  g.seed = 6;
  g.out_dir = dir;
  cmd_generate(g);
  BuildConfig b;
  b.scans = dir / "scans.csv";
  b.out_dir = dir / "cb";
  b.los_split = true;
  b.seed = 6;
  cmd_build(b);
  CHECK(load(dir / "cb" / "codebook_los.json").at("meta").at("label") == "LoS");
  CHECK(load(dir / "cb" / "codebook_nlos.json").at("meta").at("label") == "NLoS");
  CHECK(load(dir / "cb" / "pathloss.json").size() >= 2);

  EvaluateConfig e;
  e.scans = dir / "scans.csv";
  e.codebook = dir / "cb" / "codebook_los.json";
  e.codebook_nlos = dir / "cb" / "codebook_nlos.json";
  e.pathloss = dir / "cb" / "pathloss.json";
  e.out_dir = dir / "ev";
  cmd_evaluate(e);
  const auto routed = load(dir / "ev" / "eval_summary.json");
  CHECK(routed.at("success_rate").get<double>() >= 0.85);
  CHECK(routed.at("mean_probes").get<double>() < 40.0);
  fs::remove_all(dir);
}

}
