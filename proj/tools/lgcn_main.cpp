// lgcn: command-line front end for the layer-wise GCN training engine.
//
// Subcommands: train, search, bench, probe, gen-sbm. Every option can also be
// supplied through a JSON file (--config); explicit flags override the file.
// Exit codes: 0 success, 2 configuration/validation error, 1 runtime failure.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lgcn/capacity.hpp"
#include "lgcn/common.hpp"
#include "lgcn/controller.hpp"
#include "lgcn/graph.hpp"
#include "lgcn/io.hpp"
#include "lgcn/kernels/dispatch.hpp"
#include "lgcn/rng.hpp"
#include "lgcn/trainers.hpp"

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;
namespace fs = std::filesystem;
using namespace lgcn;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Peak resident set of this process in kilobytes; falls back to current RSS
// on kernels without VmHWM, 0 where unsupported.
long peak_rss_kb() {
#if defined(__linux__)
  std::ifstream in("/proc/self/status");
  std::string line;
  long current = 0;
  while (std::getline(in, line)) {
    long kb = 0;
    if (std::sscanf(line.c_str(), "VmHWM: %ld", &kb) == 1) return kb;
    if (std::sscanf(line.c_str(), "VmRSS: %ld", &kb) == 1) current = kb;
  }
  return current;
#endif
  return 0;
}

std::string format_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

// ------------------------------------------------------------ options ------

struct DataOpts {
  std::string dataset_dir;
  std::vector<std::int64_t> sbm_blocks;
  double sbm_intra = 0.1;
  double sbm_inter = 0.01;
  std::int64_t sbm_feature_dim = 32;
  double sbm_noise = 0.5;
  std::uint64_t sbm_seed = 1;
};

struct TrainOpts {
  std::string trainer = "layerwise";
  std::size_t depth = 2;
  std::vector<std::size_t> hidden = {16};
  std::vector<std::size_t> epochs = {80, 80};
  std::size_t batch = 256;
  double lr = 1e-3;
  std::string loss = "auto";
  std::string precision = "f32";
  std::uint64_t seed = 1;
  std::string out = "out";
};

struct SearchOpts {
  std::size_t iterations = 30;
  std::size_t granularity = 10;
  std::size_t max_epochs_per_layer = 100;
  std::size_t ctrl_hidden = 64;
  std::size_t embed_dim = 32;
  double ctrl_lr = 0.05;
  double stop_threshold = 0.5;
  double loss_weight = 1.0;
  double epoch_weight = -1.0;  // auto
  double baseline_decay = 0.9;
  bool no_baseline = false;
  std::string load_policy_path;
};

struct ProbeOpts {
  std::vector<std::size_t> depths = {1, 2, 3};
  std::size_t pairs = 200;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  bool wl_selftest = false;
  std::size_t min_nodes = 6;
  std::size_t max_nodes = 12;
  std::size_t train_graphs = 48;
  std::size_t epochs_per_layer = 40;
  std::string out = "out";
};

void add_data_options(CLI::App* cmd, DataOpts& d) {
  cmd->add_option("--dataset", d.dataset_dir, "Dataset directory");
  cmd->add_option("--sbm-blocks", d.sbm_blocks, "SBM block sizes")->delimiter(',');
  cmd->add_option("--sbm-intra", d.sbm_intra, "SBM intra-block edge probability");
  cmd->add_option("--sbm-inter", d.sbm_inter, "SBM inter-block edge probability");
  cmd->add_option("--sbm-feature-dim", d.sbm_feature_dim, "SBM feature width");
  cmd->add_option("--sbm-noise", d.sbm_noise, "SBM feature noise stddev");
  cmd->add_option("--sbm-seed", d.sbm_seed, "SBM generation seed");
}

GraphDataset resolve_dataset(const DataOpts& d) {
  const bool have_dir = !d.dataset_dir.empty();
  const bool have_sbm = !d.sbm_blocks.empty();
  if (have_dir == have_sbm)
    throw ValidationError("exactly one data source required: --dataset or --sbm-blocks");
  if (have_dir) return load_dataset(d.dataset_dir);
  SbmParams p;
  p.block_sizes = d.sbm_blocks;
  p.intra_prob = d.sbm_intra;
  p.inter_prob = d.sbm_inter;
  p.feature_dim = d.sbm_feature_dim;
  p.feature_noise = d.sbm_noise;
  p.seed = d.sbm_seed;
  return generate_sbm(p);
}

std::string dataset_label(const DataOpts& d) {
  if (!d.dataset_dir.empty()) return d.dataset_dir;
  std::string s = "sbm[";
  for (std::size_t i = 0; i < d.sbm_blocks.size(); ++i)
    s += (i ? "," : "") + std::to_string(d.sbm_blocks[i]);
  return s + "]";
}

LossKind resolve_loss(const std::string& name, const GraphDataset& ds) {
  if (name == "softmax") return LossKind::softmax;
  if (name == "bce") return LossKind::bce;
  if (name == "auto")
    return ds.label_kind == LabelKind::single ? LossKind::softmax : LossKind::bce;
  throw ValidationError("unknown loss kind: " + name);
}

std::vector<std::size_t> resolve_hidden(const TrainOpts& t) {
  std::vector<std::size_t> hidden = t.hidden;
  if (hidden.size() == 1 && t.depth > 1) hidden.assign(t.depth, hidden[0]);
  if (hidden.size() != t.depth)
    throw ValidationError("hidden width list length " + std::to_string(hidden.size()) +
                          " does not match depth " + std::to_string(t.depth));
  return hidden;
}

// JSON config merge: file values replace defaults before flag parsing, so
// explicit flags win.
template <typename T>
void from_config(const json& cfg, const char* key, T& value) {
  if (cfg.contains(key)) value = cfg.at(key).get<T>();
}

json load_config_arg(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") return read_json(argv[i + 1]);
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a.rfind("--config=", 0) == 0) return read_json(a.substr(9));
  }
  return json::object();
}

void apply_data_config(const json& cfg, DataOpts& d) {
  from_config(cfg, "dataset", d.dataset_dir);
  from_config(cfg, "sbm_blocks", d.sbm_blocks);
  from_config(cfg, "sbm_intra", d.sbm_intra);
  from_config(cfg, "sbm_inter", d.sbm_inter);
  from_config(cfg, "sbm_feature_dim", d.sbm_feature_dim);
  from_config(cfg, "sbm_noise", d.sbm_noise);
  from_config(cfg, "sbm_seed", d.sbm_seed);
}

void apply_train_config(const json& cfg, TrainOpts& t) {
  from_config(cfg, "trainer", t.trainer);
  from_config(cfg, "depth", t.depth);
  from_config(cfg, "hidden", t.hidden);
  from_config(cfg, "epochs", t.epochs);
  from_config(cfg, "batch", t.batch);
  from_config(cfg, "lr", t.lr);
  from_config(cfg, "loss", t.loss);
  from_config(cfg, "precision", t.precision);
  from_config(cfg, "seed", t.seed);
  from_config(cfg, "out", t.out);
}

// ------------------------------------------------------------- train -------

struct RunArtifacts {
  EvalReport test;
  CostLedger ledger;
  json metrics;
};

template <typename T>
RunArtifacts run_single_trainer(const std::string& trainer,
                                const GraphDataset& ds,
                                const NormalizedAdjacency& a_hat,
                                const TrainOpts& t, LossKind loss,
                                const std::vector<std::size_t>& hidden,
                                const fs::path& out_dir, bool write_files) {
  TrainOutput<T> result;
  if (trainer == "layerwise") {
    if (t.epochs.size() != t.depth)
      throw ValidationError("epoch schedule length " + std::to_string(t.epochs.size()) +
                            " does not match depth " + std::to_string(t.depth));
    std::vector<LayerTrainConfig> configs;
    for (const std::size_t e : t.epochs)
      configs.push_back({e, t.batch, t.lr, t.seed, loss});
    result = train_layerwise<T>(ds, a_hat, hidden, configs);
  } else if (trainer == "fullbatch" || trainer == "vanilla-minibatch") {
    if (t.epochs.size() != 1)
      throw ValidationError("trainer '" + trainer + "' takes a single epoch count");
    const LayerTrainConfig cfg{t.epochs[0], t.batch, t.lr, t.seed, loss};
    result = trainer == "fullbatch"
                 ? train_conventional_fullbatch<T>(ds, a_hat, hidden, t.epochs[0], cfg)
                 : train_vanilla_minibatch<T>(ds, a_hat, hidden, t.epochs[0], cfg);
  } else {
    throw ValidationError("unknown trainer: " + trainer);
  }

  json metrics;
  metrics["trainer"] = trainer;
  metrics["precision"] = t.precision;
  metrics["seed"] = t.seed;
  metrics["depth"] = t.depth;
  metrics["hidden"] = hidden;
  metrics["epochs"] = t.epochs;
  metrics["batch_size"] = t.batch;
  metrics["learning_rate"] = t.lr;
  metrics["schedule"] = result.schedule;
  metrics["ledger"] = ledger_to_json(result.ledger);
  metrics["kernel_isa"] = kern::isa_name(kern::active_isa());

  RunArtifacts artifacts;
  json evals;
  for (const Split split : {Split::train, Split::val, Split::test}) {
    const auto& mask = split == Split::train ? ds.train_mask
                       : split == Split::val ? ds.val_mask
                                             : ds.test_mask;
    if (mask.empty()) continue;
    const EvalReport report = evaluate(result.model, ds, a_hat, split, loss);
    evals[split_name(split)] = eval_to_json(report);
    if (split == Split::test) artifacts.test = report;
  }
  metrics["eval"] = std::move(evals);
  metrics["wall_train_seconds"] = result.ledger.wall_train_seconds;

  if (write_files) {
    fs::create_directories(out_dir);
    CsvTable curve;
    curve.header = {"epoch", "layer", "train_loss", "val_f1"};
    for (std::size_t l = 0; l < result.loss_curves.size(); ++l) {
      const std::size_t layer_id = result.loss_curves.size() == 1 ? 0 : l + 1;
      for (std::size_t e = 0; e < result.loss_curves[l].size(); ++e)
        curve.rows.push_back({std::to_string(e + 1), std::to_string(layer_id),
                              format_g(result.loss_curves[l][e]), ""});
    }
    write_csv(curve, out_dir / "loss_curve.csv");
    save_model(result.model, loss, out_dir / "model.json");
  }

  artifacts.ledger = result.ledger;
  artifacts.metrics = std::move(metrics);
  return artifacts;
}

int cmd_train(const DataOpts& d, const TrainOpts& t) {
  const auto start = Clock::now();
  const GraphDataset ds = resolve_dataset(d);
  const NormalizedAdjacency a_hat = normalize_adjacency(ds.adjacency, true);
  const LossKind loss = resolve_loss(t.loss, ds);
  const std::vector<std::size_t> hidden = resolve_hidden(t);

  const fs::path out_dir(t.out);
  RunArtifacts artifacts =
      t.precision == "f64"
          ? run_single_trainer<double>(t.trainer, ds, a_hat, t, loss, hidden, out_dir, true)
          : run_single_trainer<float>(t.trainer, ds, a_hat, t, loss, hidden, out_dir, true);

  artifacts.metrics["dataset"] = dataset_label(d);
  artifacts.metrics["wall_total_seconds"] = seconds_since(start);
  write_json(artifacts.metrics, out_dir / "metrics.json");

  std::printf("%s test_micro_f1=%.4f wall_train=%.3fs fa_calls=%llu\n",
              t.trainer.c_str(), artifacts.test.micro_f1,
              artifacts.ledger.wall_train_seconds,
              static_cast<unsigned long long>(artifacts.ledger.fa_calls));
  return 0;
}

// ------------------------------------------------------------- search ------

template <typename T>
int cmd_search_impl(const DataOpts& d, TrainOpts t, const SearchOpts& s) {
  const auto start = Clock::now();
  const GraphDataset ds = resolve_dataset(d);
  const NormalizedAdjacency a_hat = normalize_adjacency(ds.adjacency, true);
  const LossKind loss = resolve_loss(t.loss, ds);
  const std::vector<std::size_t> hidden = resolve_hidden(t);
  const fs::path out_dir(t.out);
  fs::create_directories(out_dir);

  TrainerConfig base;
  base.hidden_dims = hidden;
  base.batch_size = t.batch;
  base.learning_rate = t.lr;
  base.seed = t.seed;
  base.loss_kind = loss;

  ControllerConfig ccfg;
  ccfg.hidden_dim = s.ctrl_hidden;
  ccfg.embed_dim = s.embed_dim;
  ccfg.decision_epochs = s.granularity;
  ccfg.max_epochs_per_layer = s.max_epochs_per_layer;
  ccfg.learning_rate = s.ctrl_lr;
  ccfg.stop_threshold = s.stop_threshold;
  ccfg.seed = t.seed;

  RewardConfig rcfg;
  rcfg.loss_weight = s.loss_weight;
  rcfg.epoch_weight = s.epoch_weight;
  rcfg.baseline_decay = s.baseline_decay;
  rcfg.use_baseline = !s.no_baseline;

  double search_seconds = 0.0;
  std::vector<std::size_t> schedule;
  json summary;

  if (!s.load_policy_path.empty()) {
    const ControllerPolicy policy = load_policy(s.load_policy_path);
    const auto t0 = Clock::now();
    const RolloutResult<T> deployed =
        rollout<T>(policy, ds, a_hat, base, DecideMode::threshold,
                   seed_stream(t.seed, "deploy"));
    search_seconds = seconds_since(t0);
    schedule = deployed.trajectory.schedule;
    summary["loaded_policy"] = s.load_policy_path;
    summary["deployed_reward"] = deployed.trajectory.reward;
  } else {
    const auto t0 = Clock::now();
    const SearchResult<T> result =
        search<T>(ds, a_hat, base, ccfg, rcfg, s.iterations, t.seed);
    search_seconds = seconds_since(t0);
    schedule = result.deployed.trajectory.schedule;

    save_policy(result.policy, out_dir / "policy.json");
    CsvTable history;
    history.header = {"iteration", "reward", "baseline", "final_loss",
                      "total_epochs", "schedule"};
    for (const SearchIteration& it : result.history) {
      std::string sched;
      for (std::size_t i = 0; i < it.schedule.size(); ++i)
        sched += (i ? "+" : "") + std::to_string(it.schedule[i]);
      history.rows.push_back({std::to_string(it.iteration), format_g(it.reward),
                              format_g(it.baseline), format_g(it.final_loss),
                              std::to_string(it.total_epochs), sched});
    }
    write_csv(history, out_dir / "reward_history.csv");
    summary["iterations"] = s.iterations;
    summary["best_reward"] = result.best.reward;
    summary["deployed_reward"] = result.deployed.trajectory.reward;
  }

  // Final training run with the learned schedule; its time is the reported
  // train time (search time is kept separate).
  t.trainer = "layerwise";
  t.epochs = schedule;
  t.depth = schedule.size();
  RunArtifacts artifacts =
      run_single_trainer<T>("layerwise", ds, a_hat, t, loss, hidden, out_dir, true);

  artifacts.metrics["dataset"] = dataset_label(d);
  artifacts.metrics["wall_total_seconds"] = seconds_since(start);
  write_json(artifacts.metrics, out_dir / "metrics.json");

  summary["schedule"] = schedule;
  summary["granularity"] = s.granularity;
  summary["wall_search_seconds"] = search_seconds;
  summary["wall_train_seconds"] = artifacts.ledger.wall_train_seconds;
  write_json(summary, out_dir / "search_summary.json");

  std::string sched;
  for (std::size_t i = 0; i < schedule.size(); ++i)
    sched += (i ? "+" : "") + std::to_string(schedule[i]);
  std::printf("l2-gcn schedule=%s test_micro_f1=%.4f search=%.3fs train=%.3fs\n",
              sched.c_str(), artifacts.test.micro_f1, search_seconds,
              artifacts.ledger.wall_train_seconds);
  return 0;
}

int cmd_search(const DataOpts& d, const TrainOpts& t, const SearchOpts& s) {
  return t.precision == "f64" ? cmd_search_impl<double>(d, t, s)
                              : cmd_search_impl<float>(d, t, s);
}

// -------------------------------------------------------------- bench ------

int cmd_bench(const DataOpts& d, const TrainOpts& t,
              const std::vector<std::string>& trainers, bool parallel) {
  if (trainers.size() < 2)
    throw ValidationError("bench requires at least two trainer kinds");
  const GraphDataset ds = resolve_dataset(d);
  const NormalizedAdjacency a_hat = normalize_adjacency(ds.adjacency, true);
  const LossKind loss = resolve_loss(t.loss, ds);
  const std::vector<std::size_t> hidden = resolve_hidden(t);
  const fs::path out_dir(t.out);
  fs::create_directories(out_dir);

  const auto run_one = [&](const std::string& trainer) {
    TrainOpts local = t;
    if (trainer != "layerwise" && local.epochs.size() != 1) {
      // Joint trainers take one epoch count; mirror the layer-wise budget.
      std::size_t total = 0;
      for (const std::size_t e : local.epochs) total += e;
      local.epochs = {total / local.epochs.size()};
    }
    return local.precision == "f64"
               ? run_single_trainer<double>(trainer, ds, a_hat, local, loss, hidden,
                                            out_dir, false)
               : run_single_trainer<float>(trainer, ds, a_hat, local, loss, hidden,
                                           out_dir, false);
  };

  std::vector<RunArtifacts> results(trainers.size());
  if (parallel) {
    std::vector<std::future<RunArtifacts>> futures;
    for (const std::string& tr : trainers)
      futures.push_back(std::async(std::launch::async, run_one, tr));
    for (std::size_t i = 0; i < futures.size(); ++i) results[i] = futures[i].get();
  } else {
    for (std::size_t i = 0; i < trainers.size(); ++i) results[i] = run_one(trainers[i]);
  }

  CsvTable table;
  table.header = {"trainer", "micro_f1",  "macro_f1", "fa_calls",
                  "ft_calls", "flops",    "peak_activation_bytes",
                  "peak_graph_bytes", "wall_train_seconds", "rss_peak_kb"};
  for (std::size_t i = 0; i < trainers.size(); ++i) {
    const CostLedger& lg = results[i].ledger;
    table.rows.push_back({trainers[i], format_g(results[i].test.micro_f1),
                          format_g(results[i].test.macro_f1),
                          std::to_string(lg.fa_calls), std::to_string(lg.ft_calls),
                          std::to_string(lg.flops),
                          std::to_string(lg.peak_activation_bytes),
                          std::to_string(lg.peak_graph_bytes),
                          format_g(lg.wall_train_seconds),
                          std::to_string(peak_rss_kb())});
  }
  write_csv(table, out_dir / "bench.csv");

  // Ratios of each baseline against the first requested trainer.
  json summary;
  summary["dataset"] = dataset_label(d);
  summary["seed"] = t.seed;
  summary["base_trainer"] = trainers[0];
  json ratios = json::object();
  const CostLedger& base = results[0].ledger;
  for (std::size_t i = 1; i < trainers.size(); ++i) {
    const CostLedger& other = results[i].ledger;
    json r;
    r["fa_calls"] = base.fa_calls > 0
                        ? static_cast<double>(other.fa_calls) /
                              static_cast<double>(base.fa_calls)
                        : 0.0;
    r["flops"] = base.flops > 0 ? static_cast<double>(other.flops) /
                                      static_cast<double>(base.flops)
                                : 0.0;
    r["peak_activation_bytes"] =
        base.peak_activation_bytes > 0
            ? static_cast<double>(other.peak_activation_bytes) /
                  static_cast<double>(base.peak_activation_bytes)
            : 0.0;
    r["wall_train_seconds"] = base.wall_train_seconds > 0
                                  ? other.wall_train_seconds / base.wall_train_seconds
                                  : 0.0;
    ratios[trainers[i]] = std::move(r);
  }
  summary["ratios_vs_base"] = std::move(ratios);
  write_json(summary, out_dir / "bench_summary.json");

  for (std::size_t i = 0; i < trainers.size(); ++i)
    std::printf("%s micro_f1=%.4f fa_calls=%llu peak_act=%llu wall=%.3fs\n",
                trainers[i].c_str(), results[i].test.micro_f1,
                static_cast<unsigned long long>(results[i].ledger.fa_calls),
                static_cast<unsigned long long>(results[i].ledger.peak_activation_bytes),
                results[i].ledger.wall_train_seconds);
  return 0;
}

// -------------------------------------------------------------- probe ------

int wl_selftest() {
  const CsrMatrix p3 = make_path(3);
  const CsrMatrix k3 = make_complete(3);
  const CsrMatrix c6 = make_cycle(6);
  const CsrMatrix c3c3 = make_two_cycles(3, 3);

  bool ok = true;
  if (!wl_distinguish(p3, k3, 3)) {
    std::fprintf(stderr, "wl-selftest: P3 vs K3 not distinguished\n");
    ok = false;
  }
  if (wl_distinguish(c6, c3c3, 12)) {
    std::fprintf(stderr, "wl-selftest: C6 vs 2xC3 wrongly distinguished\n");
    ok = false;
  }
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100 && ok; ++i) {
    // Random graph vs a random permutation of itself.
    const std::int64_t n = 5 + static_cast<std::int64_t>(uniform_below(rng, 8));
    std::vector<std::pair<std::int32_t, std::int32_t>> edges;
    for (std::int32_t u = 0; u < n; ++u)
      for (std::int32_t v = u + 1; v < n; ++v)
        if (uniform01(rng) < 0.4) edges.emplace_back(u, v);
    const CsrMatrix g = build_csr(edges, n);
    std::vector<std::int32_t> perm(static_cast<std::size_t>(n));
    for (std::size_t j = 0; j < perm.size(); ++j) perm[j] = static_cast<std::int32_t>(j);
    shuffle_inplace(rng, perm);
    std::vector<std::pair<std::int32_t, std::int32_t>> pedges;
    for (const auto& [u, v] : edges) {
      const std::int32_t pu = perm[u], pv = perm[v];
      pedges.emplace_back(std::min(pu, pv), std::max(pu, pv));
    }
    if (wl_distinguish(g, build_csr(pedges, n), static_cast<std::size_t>(n))) {
      std::fprintf(stderr, "wl-selftest: permuted pair %d wrongly distinguished\n", i);
      ok = false;
    }
  }
  std::printf("wl-selftest %s\n", ok ? "pass" : "FAIL");
  return ok ? 0 : 1;
}

int cmd_probe(const ProbeOpts& p) {
  if (p.wl_selftest) return wl_selftest();

  ProbeConfig cfg;
  cfg.min_nodes = p.min_nodes;
  cfg.max_nodes = p.max_nodes;
  cfg.train_graphs = p.train_graphs;
  cfg.epochs_per_layer = p.epochs_per_layer;

  const std::vector<CapacityRow> rows =
      capacity_vs_depth(p.depths, p.pairs, p.seeds, cfg);

  const fs::path out_dir(p.out);
  fs::create_directories(out_dir);
  CsvTable table;
  table.header = {"depth", "seed", "num_pairs", "distinguished", "estimate",
                  "std_error"};
  for (const CapacityRow& r : rows)
    table.rows.push_back({std::to_string(r.depth), std::to_string(r.seed),
                          std::to_string(r.estimate.num_pairs),
                          std::to_string(r.estimate.distinguished),
                          format_g(r.estimate.estimate),
                          format_g(r.estimate.std_error)});
  write_csv(table, out_dir / "capacity.csv");
  std::printf("probe wrote %zu rows to %s\n", rows.size(),
              (out_dir / "capacity.csv").string().c_str());
  return 0;
}

// ------------------------------------------------------------- gen-sbm -----

int cmd_gen_sbm(const DataOpts& d, const std::string& out) {
  if (d.sbm_blocks.empty())
    throw ValidationError("gen-sbm requires --sbm-blocks");
  SbmParams params;
  params.block_sizes = d.sbm_blocks;
  params.intra_prob = d.sbm_intra;
  params.inter_prob = d.sbm_inter;
  params.feature_dim = d.sbm_feature_dim;
  params.feature_noise = d.sbm_noise;
  params.seed = d.sbm_seed;
  const GraphDataset ds = generate_sbm(params);
  write_dataset(ds, out);
  std::printf("gen-sbm wrote %lld nodes, %lld edges to %s\n",
              static_cast<long long>(ds.num_nodes),
              static_cast<long long>(ds.num_edges), out.c_str());
  return 0;
}

void print_error(const char* type, const std::string& message) {
  json err;
  err["error"] = {{"type", type}, {"message", message}};
  std::fprintf(stderr, "%s\n", err.dump().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Layer-wise GCN training engine"};
  app.require_subcommand(1);

  json cfg;
  try {
    cfg = load_config_arg(argc, argv);
  } catch (const ValidationError& e) {
    print_error("validation", e.what());
    return 2;
  }
  std::string config_path;  // parsed for help text only; handled above

  DataOpts data;
  TrainOpts train;
  SearchOpts search_opts;
  ProbeOpts probe;
  std::vector<std::string> bench_trainers = {"layerwise", "vanilla-minibatch"};
  bool bench_parallel = false;
  std::string gen_out = "dataset";

  apply_data_config(cfg, data);
  apply_train_config(cfg, train);

  const auto add_train_options = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file (flags override)");
    cmd->add_option("--trainer", train.trainer,
                    "layerwise | fullbatch | vanilla-minibatch");
    cmd->add_option("--depth", train.depth, "Number of GCN layers");
    cmd->add_option("--hidden", train.hidden, "Hidden widths (single value broadcasts)")
        ->delimiter(',');
    cmd->add_option("--epochs", train.epochs,
                    "Epochs per layer (layer-wise) or total (joint trainers)")
        ->delimiter(',');
    cmd->add_option("--batch", train.batch, "Mini-batch size");
    cmd->add_option("--lr", train.lr, "Learning rate");
    cmd->add_option("--loss", train.loss, "softmax | bce | auto");
    cmd->add_option("--precision", train.precision, "f32 | f64")
        ->check(CLI::IsMember({"f32", "f64"}));
    cmd->add_option("--seed", train.seed, "Run seed");
    cmd->add_option("--out", train.out, "Output directory");
    add_data_options(cmd, data);
  };

  CLI::App* c_train = app.add_subcommand("train", "Train one model");
  add_train_options(c_train);

  CLI::App* c_search = app.add_subcommand("search", "L2 controller search + deploy");
  add_train_options(c_search);
  {
    from_config(cfg, "iterations", search_opts.iterations);
    from_config(cfg, "granularity", search_opts.granularity);
    from_config(cfg, "max_epochs_per_layer", search_opts.max_epochs_per_layer);
    from_config(cfg, "ctrl_hidden", search_opts.ctrl_hidden);
    from_config(cfg, "embed_dim", search_opts.embed_dim);
    from_config(cfg, "ctrl_lr", search_opts.ctrl_lr);
    from_config(cfg, "rho_thres", search_opts.stop_threshold);
    from_config(cfg, "loss_weight", search_opts.loss_weight);
    from_config(cfg, "epoch_weight", search_opts.epoch_weight);
    from_config(cfg, "baseline_decay", search_opts.baseline_decay);
    from_config(cfg, "no_baseline", search_opts.no_baseline);
    from_config(cfg, "load_policy", search_opts.load_policy_path);
    c_search->add_option("--iterations", search_opts.iterations, "Search iterations");
    c_search->add_option("--granularity", search_opts.granularity,
                         "Epochs between stop decisions (k)");
    c_search->add_option("--max-epochs-per-layer", search_opts.max_epochs_per_layer,
                         "Per-layer epoch budget (multiple of k)");
    c_search->add_option("--ctrl-hidden", search_opts.ctrl_hidden, "Controller RNN width");
    c_search->add_option("--embed-dim", search_opts.embed_dim, "Action embedding width");
    c_search->add_option("--ctrl-lr", search_opts.ctrl_lr, "Controller Adam learning rate");
    c_search->add_option("--rho-thres", search_opts.stop_threshold,
                         "Deployment stop threshold");
    c_search->add_option("--loss-weight", search_opts.loss_weight, "Reward loss weight");
    c_search->add_option("--epoch-weight", search_opts.epoch_weight,
                         "Reward epoch weight (negative = auto)");
    c_search->add_option("--baseline-decay", search_opts.baseline_decay,
                         "Moving baseline decay");
    c_search->add_flag("--no-baseline", search_opts.no_baseline,
                       "Plain REINFORCE without a baseline");
    c_search->add_option("--load-policy", search_opts.load_policy_path,
                         "Deploy an existing policy file instead of searching");
  }

  CLI::App* c_bench = app.add_subcommand("bench", "Compare trainers on one dataset");
  add_train_options(c_bench);
  c_bench->add_option("--trainers", bench_trainers, "Trainer kinds to compare (>= 2)")
      ->delimiter(',');
  c_bench->add_flag("--parallel", bench_parallel, "Run trainers concurrently");

  CLI::App* c_probe = app.add_subcommand("probe", "WL / capacity probe");
  {
    from_config(cfg, "depths", probe.depths);
    from_config(cfg, "pairs", probe.pairs);
    from_config(cfg, "seeds", probe.seeds);
    from_config(cfg, "min_nodes", probe.min_nodes);
    from_config(cfg, "max_nodes", probe.max_nodes);
    from_config(cfg, "train_graphs", probe.train_graphs);
    from_config(cfg, "epochs_per_layer", probe.epochs_per_layer);
    from_config(cfg, "out", probe.out);
    c_probe->add_option("--config", config_path, "JSON config file (flags override)");
    c_probe->add_option("--depths", probe.depths, "Model depths")->delimiter(',');
    c_probe->add_option("--pairs", probe.pairs, "Sampled pairs per estimate");
    c_probe->add_option("--seeds", probe.seeds, "Probe seeds")->delimiter(',');
    c_probe->add_flag("--wl-selftest", probe.wl_selftest, "Run the known-pair WL suite");
    c_probe->add_option("--min-nodes", probe.min_nodes, "Smallest template graph");
    c_probe->add_option("--max-nodes", probe.max_nodes, "Largest template graph");
    c_probe->add_option("--train-graphs", probe.train_graphs,
                        "Templates in the probe training set");
    c_probe->add_option("--epochs-per-layer", probe.epochs_per_layer,
                        "Training epochs per layer");
    c_probe->add_option("--out", probe.out, "Output directory");
  }

  CLI::App* c_gen = app.add_subcommand("gen-sbm", "Write an SBM dataset directory");
  add_data_options(c_gen, data);
  c_gen->add_option("--out", gen_out, "Dataset directory to create");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (c_train->parsed()) return cmd_train(data, train);
    if (c_search->parsed()) return cmd_search(data, train, search_opts);
    if (c_bench->parsed()) return cmd_bench(data, train, bench_trainers, bench_parallel);
    if (c_probe->parsed()) return cmd_probe(probe);
    if (c_gen->parsed()) return cmd_gen_sbm(data, gen_out);
  } catch (const ValidationError& e) {
    print_error("validation", e.what());
    return 2;
  } catch (const std::exception& e) {
    print_error("runtime", e.what());
    return 1;
  }
  return 0;
}
