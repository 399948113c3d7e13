#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "lgcn/controller.hpp"
#include "lgcn/graph.hpp"
#include "lgcn/io.hpp"

#ifndef LGCN_CLI
#error "LGCN_CLI must point at the lgcn binary"
#endif

using namespace lgcn;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CliResult run_cli(const std::string& args) {
  const fs::path dir = fs::temp_directory_path();
  const fs::path out = dir / "lgcn_cli_out.txt";
  const fs::path err = dir / "lgcn_cli_err.txt";
  const std::string cmd = std::string(LGCN_CLI) + " " + args + " >" + out.string() +
                          " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

fs::path fresh_dir(const char* tag) {
  const fs::path p = fs::temp_directory_path() / (std::string("lgcn_cli_") + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Strip volatile timing fields before comparing run outputs.
json without_wall(json j) {
  for (auto it = j.begin(); it != j.end();) {
    if (it.key().rfind("wall_", 0) == 0)
      it = j.erase(it);
    else
      ++it;
  }
  return j;
}

const std::string& toy_data() {
  static const std::string dir = [] {
    const fs::path p = fresh_dir("data");
    const CliResult r = run_cli(
        "gen-sbm --sbm-blocks 40,40,40 --sbm-intra 0.15 --sbm-inter 0.01 "
        "--sbm-feature-dim 12 --sbm-noise 0.6 --sbm-seed 5 --out " + p.string());
    if (r.exit_code != 0) throw std::runtime_error("gen-sbm failed: " + r.err);
    return p.string();
  }();
  return dir;
}

}  // namespace

TEST_CASE("gen-sbm writes a loadable dataset") {
  const GraphDataset ds = load_dataset(toy_data());
  CHECK(ds.num_nodes == 120);
  CHECK(ds.class_count == 3);
}

TEST_CASE("train writes artifacts and a summary line") {
  const fs::path out = fresh_dir("train");
  const CliResult r = run_cli("train --trainer layerwise --dataset " + toy_data() +
                              " --epochs 10,10 --hidden 16 --batch 32 --lr 0.001"
                              " --seed 1 --out " + out.string());
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("layerwise") != std::string::npos);
  CHECK(r.out.find("fa_calls=2") != std::string::npos);
  CHECK(fs::exists(out / "metrics.json"));
  CHECK(fs::exists(out / "loss_curve.csv"));
  CHECK(fs::exists(out / "model.json"));

  const json metrics = read_json(out / "metrics.json");
  CHECK(metrics.at("ledger").at("fa_calls") == 2);
  CHECK(metrics.at("eval").contains("test"));

  // Emitted files round-trip through the artifact's own readers.
  const CsvTable curve = read_csv(out / "loss_curve.csv");
  CHECK(curve.header ==
        std::vector<std::string>{"epoch", "layer", "train_loss", "val_f1"});
  CHECK(curve.rows.size() == 20);
  const LayerwiseModel<float> model = load_model<float>(out / "model.json");
  CHECK(model.depth() == 2);
}

TEST_CASE("schedule length must match depth") {
  const fs::path out = fresh_dir("badsched");
  const CliResult r = run_cli("train --trainer layerwise --dataset " + toy_data() +
                              " --depth 2 --epochs 80 --out " + out.string());
  CHECK(r.exit_code == 2);
  const json err = json::parse(r.err);
  CHECK(err.at("error").at("type") == "validation");
}

TEST_CASE("identical commands produce byte-identical metrics modulo wall time") {
  const fs::path out1 = fresh_dir("det1");
  const fs::path out2 = fresh_dir("det2");
  const std::string args = "train --trainer layerwise --dataset " + toy_data() +
                           " --epochs 8,8 --hidden 8 --batch 32 --seed 9 --out ";
  CHECK(run_cli(args + out1.string()).exit_code == 0);
  CHECK(run_cli(args + out2.string()).exit_code == 0);
  CHECK(without_wall(read_json(out1 / "metrics.json")) ==
        without_wall(read_json(out2 / "metrics.json")));
  CHECK(slurp(out1 / "loss_curve.csv") == slurp(out2 / "loss_curve.csv"));
  CHECK(slurp(out1 / "model.json") == slurp(out2 / "model.json"));
}

TEST_CASE("config file values are used and flags override them") {
  const fs::path out = fresh_dir("config");
  const fs::path cfg_path = out / "run.json";
  json cfg;
  cfg["trainer"] = "layerwise";
  cfg["dataset"] = toy_data();
  cfg["epochs"] = {6, 6};
  cfg["hidden"] = {8, 8};
  cfg["batch"] = 16;
  cfg["seed"] = 3;
  cfg["out"] = out.string() + "/from_config";
  write_json(cfg, cfg_path);

  const CliResult r1 = run_cli("train --config " + cfg_path.string());
  CHECK(r1.exit_code == 0);
  json m = read_json(fs::path(cfg["out"].get<std::string>()) / "metrics.json");
  CHECK(m.at("schedule") == json({6, 6}));

  // Explicit flag beats the file.
  const CliResult r2 = run_cli("train --config " + cfg_path.string() +
                               " --epochs 4,4 --out " + out.string() + "/override");
  CHECK(r2.exit_code == 0);
  m = read_json(out / "override" / "metrics.json");
  CHECK(m.at("schedule") == json({4, 4}));
}

TEST_CASE("search emits history, policy, schedule, and separate timings") {
  const fs::path out = fresh_dir("search");
  const CliResult r = run_cli("search --dataset " + toy_data() +
                              " --hidden 8 --batch 32 --lr 0.01 --seed 2"
                              " --iterations 5 --granularity 5 --max-epochs-per-layer 20"
                              " --out " + out.string());
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(out / "policy.json"));
  CHECK(fs::exists(out / "reward_history.csv"));
  CHECK(fs::exists(out / "metrics.json"));

  const CsvTable history = read_csv(out / "reward_history.csv");
  CHECK(history.rows.size() == 5);

  const json summary = read_json(out / "search_summary.json");
  CHECK(summary.contains("wall_search_seconds"));
  CHECK(summary.contains("wall_train_seconds"));
  for (const auto& entry : summary.at("schedule"))
    CHECK(entry.get<std::size_t>() % 5 == 0);

  // The saved policy file loads back through the library.
  const ControllerPolicy policy = load_policy(out / "policy.json");
  CHECK(policy.cfg.decision_epochs == 5);

  // Transferability path: deploy the saved policy without searching.
  const fs::path out2 = fresh_dir("deploy");
  const CliResult r2 = run_cli("search --dataset " + toy_data() +
                               " --hidden 8 --batch 32 --lr 0.01 --seed 2"
                               " --granularity 5 --max-epochs-per-layer 20"
                               " --load-policy " + (out / "policy.json").string() +
                               " --out " + out2.string());
  CHECK(r2.exit_code == 0);
  CHECK_FALSE(fs::exists(out2 / "reward_history.csv"));
  const json summary2 = read_json(out2 / "search_summary.json");
  CHECK(summary2.contains("loaded_policy"));
}

TEST_CASE("bench compares trainers and reports exact FA ratios") {
  const fs::path out = fresh_dir("bench");
  // 72 train nodes, batch 18 -> 4 batches; joint trainers get (4+4)/2 epochs.
  const CliResult r = run_cli("bench --dataset " + toy_data() +
                              " --trainers layerwise,vanilla-minibatch"
                              " --epochs 4,4 --hidden 8 --batch 18 --seed 4 --out " +
                              out.string());
  CHECK(r.exit_code == 0);
  const CsvTable table = read_csv(out / "bench.csv");
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[0][0] == "layerwise");
  CHECK(table.rows[0][3] == "2");          // fa_calls = L
  CHECK(table.rows[1][0] == "vanilla-minibatch");
  CHECK(table.rows[1][3] == "32");         // L * batches * epochs = 2*4*4

  const json summary = read_json(out / "bench_summary.json");
  CHECK(summary.at("ratios_vs_base").at("vanilla-minibatch").at("fa_calls") ==
        doctest::Approx(16.0));

  const CliResult bad = run_cli("bench --dataset " + toy_data() +
                                " --trainers layerwise --out " + out.string());
  CHECK(bad.exit_code == 2);
}

TEST_CASE("probe selftest and capacity csv") {
  CHECK(run_cli("probe --wl-selftest").exit_code == 0);

  const fs::path out1 = fresh_dir("probe1");
  const fs::path out2 = fresh_dir("probe2");
  const std::string args = "probe --depths 1,2 --pairs 15 --seeds 1,2"
                           " --train-graphs 10 --epochs-per-layer 4 --out ";
  CHECK(run_cli(args + out1.string()).exit_code == 0);
  const CsvTable t = read_csv(out1 / "capacity.csv");
  CHECK(t.rows.size() == 4);  // depths x seeds
  CHECK(t.header == std::vector<std::string>{"depth", "seed", "num_pairs",
                                             "distinguished", "estimate",
                                             "std_error"});
  CHECK(run_cli(args + out2.string()).exit_code == 0);
  CHECK(slurp(out1 / "capacity.csv") == slurp(out2 / "capacity.csv"));
}

TEST_CASE("exactly one data source is required") {
  const CliResult none = run_cli("train --epochs 2,2 --out /tmp/lgcn_nodata");
  CHECK(none.exit_code == 2);
  const CliResult both = run_cli("train --dataset " + toy_data() +
                                 " --sbm-blocks 10,10 --epochs 2,2 --out /tmp/lgcn_both");
  CHECK(both.exit_code == 2);
}

TEST_CASE("runtime failures exit with code 1") {
  // A dataset directory that exists but is missing files.
  const fs::path dir = fresh_dir("broken");
  const CliResult r = run_cli("train --dataset " + dir.string() +
                              " --epochs 2,2 --out /tmp/lgcn_broken");
  CHECK(r.exit_code == 2);  // missing file is a validation error

  // An unknown trainer is config misuse.
  const CliResult u = run_cli("train --dataset " + toy_data() +
                              " --trainer sgd --epochs 2,2 --out /tmp/lgcn_unknown");
  CHECK(u.exit_code == 2);
}
