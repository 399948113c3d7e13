#include "lgcn/controller.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "lgcn/common.hpp"
#include "lgcn/rng.hpp"

namespace lgcn {
namespace {

using json = nlohmann::json;

void require(bool ok, const std::string& msg) {
  if (!ok) throw Error(msg);
}

// softmax over two logits; returns p(stop).
double stop_probability(double logit_cont, double logit_stop) {
  const double mx = std::max(logit_cont, logit_stop);
  const double ec = std::exp(logit_cont - mx);
  const double es = std::exp(logit_stop - mx);
  return es / (ec + es);
}

std::vector<double> step_input(const ControllerPolicy& p, Action prev_action,
                               double loss_norm, std::size_t layer_index,
                               std::size_t total_layers) {
  std::vector<double> x(p.input_dim());
  const double* emb = p.action_embeddings.row(static_cast<std::size_t>(prev_action));
  std::copy(emb, emb + p.cfg.embed_dim, x.begin());
  x[p.cfg.embed_dim] = loss_norm;
  x[p.cfg.embed_dim + 1] =
      static_cast<double>(layer_index) / static_cast<double>(total_layers);
  return x;
}

struct CellForward {
  std::vector<double> x;
  std::vector<double> h;  // post-tanh state after this step
  double p_stop = 0.0;
};

// One cell update from explicit buffers; shared by inference and BPTT.
CellForward cell_forward(const ControllerPolicy& p, std::span<const double> h_prev,
                         std::vector<double> x) {
  const std::size_t hd = p.cfg.hidden_dim;
  CellForward out;
  out.x = std::move(x);
  out.h.assign(hd, 0.0);
  for (std::size_t i = 0; i < hd; ++i) {
    double u = p.bias(0, i);
    const double* wi = p.w_input.row(i);
    for (std::size_t j = 0; j < out.x.size(); ++j) u += wi[j] * out.x[j];
    const double* wh = p.w_hidden.row(i);
    for (std::size_t j = 0; j < hd; ++j) u += wh[j] * h_prev[j];
    out.h[i] = std::tanh(u);
  }
  double z0 = p.head_b(0, 0), z1 = p.head_b(0, 1);
  for (std::size_t j = 0; j < hd; ++j) {
    z0 += p.head_w(0, j) * out.h[j];
    z1 += p.head_w(1, j) * out.h[j];
  }
  out.p_stop = stop_probability(z0, z1);
  return out;
}

json matrix_to_json(const Matrix<double>& m) {
  json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  j["data"] = m.values();
  return j;
}

Matrix<double> matrix_from_json(const json& j, const std::string& name) {
  if (!j.contains("rows") || !j.contains("cols") || !j.contains("data"))
    throw ValidationError("policy file: malformed tensor '" + name + "'");
  return Matrix<double>::from(j.at("rows").get<std::size_t>(),
                              j.at("cols").get<std::size_t>(),
                              j.at("data").get<std::vector<double>>());
}

json adam_to_json(const AdamState<double>& s) {
  json j;
  j["step_count"] = s.step_count;
  j["m"] = s.first_moment;
  j["v"] = s.second_moment;
  j["learning_rate"] = s.learning_rate;
  return j;
}

AdamState<double> adam_from_json(const json& j) {
  AdamState<double> s;
  s.step_count = j.at("step_count").get<std::uint64_t>();
  s.first_moment = j.at("m").get<std::vector<double>>();
  s.second_moment = j.at("v").get<std::vector<double>>();
  s.learning_rate = j.at("learning_rate").get<double>();
  return s;
}

}  // namespace

double compute_reward(double final_loss, std::size_t total_epochs,
                      const RewardConfig& cfg) {
  require(cfg.epoch_weight >= 0.0 && cfg.loss_weight >= 0.0,
          "compute_reward: weights must be resolved and nonnegative");
  return -(cfg.loss_weight * final_loss +
           cfg.epoch_weight * static_cast<double>(total_epochs));
}

RewardConfig resolve_reward_config(RewardConfig cfg, std::size_t depth,
                                   std::size_t max_epochs_per_layer) {
  if (cfg.epoch_weight < 0.0)
    cfg.epoch_weight = 1.0 / static_cast<double>(depth * max_epochs_per_layer);
  if (cfg.loss_weight == 0.0 && cfg.epoch_weight == 0.0)
    throw ValidationError("reward: loss and epoch weights cannot both be zero");
  return cfg;
}

bool ControllerPolicy::same_parameters(const ControllerPolicy& other) const {
  return w_input == other.w_input && w_hidden == other.w_hidden &&
         bias == other.bias && head_w == other.head_w && head_b == other.head_b &&
         action_embeddings == other.action_embeddings;
}

ControllerPolicy make_controller(const ControllerConfig& cfg,
                                 const RewardConfig& reward) {
  require(cfg.hidden_dim > 0 && cfg.embed_dim > 0, "controller: dims must be positive");
  require(cfg.decision_epochs > 0, "controller: decision granularity must be positive");
  if (cfg.max_epochs_per_layer == 0 ||
      cfg.max_epochs_per_layer % cfg.decision_epochs != 0)
    throw ValidationError(
        "controller: max_epochs_per_layer must be a positive multiple of the "
        "decision granularity");

  ControllerPolicy p;
  p.cfg = cfg;
  p.reward = reward;
  const std::size_t in = p.input_dim();
  p.w_input = xavier_init<double>(cfg.hidden_dim, in, seed_stream(cfg.seed, "ctrl-wx"));
  p.w_hidden = xavier_init<double>(cfg.hidden_dim, cfg.hidden_dim,
                                   seed_stream(cfg.seed, "ctrl-wh"));
  p.bias = Matrix<double>(1, cfg.hidden_dim);
  p.head_w = xavier_init<double>(2, cfg.hidden_dim, seed_stream(cfg.seed, "ctrl-head"));
  p.head_b = Matrix<double>(1, 2);

  // Fixed random embeddings: entries drawn from a five-way multinomial.
  p.action_embeddings = Matrix<double>(2, cfg.embed_dim);
  {
    static constexpr double kLevels[5] = {-1.0, -0.5, 0.0, 0.5, 1.0};
    std::mt19937_64 rng(seed_stream(cfg.seed, "ctrl-embed"));
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t e = 0; e < cfg.embed_dim; ++e)
        p.action_embeddings(a, e) = kLevels[uniform_below(rng, 5)];
  }

  p.opt_w_input = AdamState<double>::for_param(p.w_input, cfg.learning_rate);
  p.opt_w_hidden = AdamState<double>::for_param(p.w_hidden, cfg.learning_rate);
  p.opt_bias = AdamState<double>::for_param(p.bias, cfg.learning_rate);
  p.opt_head_w = AdamState<double>::for_param(p.head_w, cfg.learning_rate);
  p.opt_head_b = AdamState<double>::for_param(p.head_b, cfg.learning_rate);
  return p;
}

ControllerStepOut controller_step(const ControllerPolicy& policy,
                                  std::span<const double> hidden,
                                  Action prev_action, double epoch_loss,
                                  std::size_t layer_index,
                                  std::size_t total_layers) {
  require(hidden.size() == policy.cfg.hidden_dim, "controller_step: hidden size mismatch");
  require(layer_index < total_layers, "controller_step: layer index out of range");
  require(std::isfinite(epoch_loss), "controller_step: non-finite loss input");
  for (const double h : hidden)
    require(std::isfinite(h), "controller_step: non-finite hidden input");

  CellForward fwd = cell_forward(
      policy, hidden,
      step_input(policy, prev_action, epoch_loss, layer_index, total_layers));
  return {std::move(fwd.h), fwd.p_stop};
}

Action decide(const ControllerPolicy& policy, double stop_prob, DecideMode mode,
              std::mt19937_64& rng) {
  require(stop_prob >= 0.0 && stop_prob <= 1.0, "decide: probability out of range");
  if (mode == DecideMode::sample)
    return uniform01(rng) < stop_prob ? Action::stop : Action::cont;
  return stop_prob > policy.cfg.stop_threshold ? Action::stop : Action::cont;
}

template <typename T>
RolloutResult<T> rollout(const ControllerPolicy& policy,
                         const GraphDataset& dataset,
                         const NormalizedAdjacency& a_hat,
                         const TrainerConfig& base, DecideMode mode,
                         std::uint64_t rng_seed) {
  const std::size_t depth = base.hidden_dims.size();
  require(depth >= 1, "rollout: depth must be >= 1");
  const std::size_t k = policy.cfg.decision_epochs;
  const std::size_t cap = policy.cfg.max_epochs_per_layer;

  std::vector<LayerTrainConfig> configs;
  for (std::size_t l = 0; l < depth; ++l)
    configs.push_back({cap, base.batch_size, base.learning_rate, base.seed,
                       base.loss_kind});

  std::mt19937_64 rng(rng_seed);
  RolloutResult<T> out;
  std::vector<double> hidden(policy.cfg.hidden_dim, 0.0);
  Action prev_action = Action::cont;
  std::size_t block_layer = static_cast<std::size_t>(-1);
  double first_block_loss = 0.0;

  const StopHook hook = [&](const StopContext& ctx) -> bool {
    if (ctx.completed_epochs % k != 0) return false;
    if (ctx.layer_index != block_layer) {
      block_layer = ctx.layer_index;
      first_block_loss = ctx.epoch_mean_loss;
    }
    const double loss_norm = std::abs(first_block_loss) > 1e-12
                                 ? ctx.epoch_mean_loss / first_block_loss
                                 : 1.0;
    const ControllerStepOut step = controller_step(policy, hidden, prev_action,
                                                   loss_norm, ctx.layer_index, depth);
    hidden = step.hidden;
    const Action action = decide(policy, step.stop_prob, mode, rng);
    out.trajectory.steps.push_back({prev_action, loss_norm, ctx.layer_index, depth,
                                    action, step.stop_prob,
                                    action == Action::stop ? step.stop_prob
                                                           : 1.0 - step.stop_prob});
    prev_action = action;
    return action == Action::stop;
  };

  out.train = train_layerwise<T>(dataset, a_hat, base.hidden_dims, configs, hook);
  out.trajectory.schedule = out.train.schedule;
  out.trajectory.total_epochs = 0;
  for (const std::size_t e : out.train.schedule) out.trajectory.total_epochs += e;
  out.trajectory.final_loss = out.train.loss_curves.back().back();
  out.trajectory.reward =
      compute_reward(out.trajectory.final_loss, out.trajectory.total_epochs,
                     resolve_reward_config(policy.reward, depth, cap));
  return out;
}

double trajectory_objective(const ControllerPolicy& policy,
                            std::span<const Trajectory> trajectories,
                            std::span<const double> advantages) {
  require(trajectories.size() == advantages.size(), "objective: size mismatch");
  double j = 0.0;
  for (std::size_t t = 0; t < trajectories.size(); ++t) {
    std::vector<double> hidden(policy.cfg.hidden_dim, 0.0);
    for (const DecisionStep& s : trajectories[t].steps) {
      CellForward fwd = cell_forward(
          policy, hidden,
          step_input(policy, s.prev_action, s.loss_norm, s.layer_index,
                     s.total_layers));
      const double p = s.action == Action::stop ? fwd.p_stop : 1.0 - fwd.p_stop;
      j += advantages[t] * std::log(std::max(p, 1e-300));
      hidden = std::move(fwd.h);
    }
  }
  return j / static_cast<double>(trajectories.size());
}

ReinforceGradients reinforce_gradients(const ControllerPolicy& policy,
                                       std::span<const Trajectory> trajectories,
                                       double baseline) {
  require(!trajectories.empty(), "reinforce_gradients: empty batch");
  const std::size_t hd = policy.cfg.hidden_dim;
  const std::size_t in = policy.input_dim();

  Matrix<double> g_w_input(hd, in), g_w_hidden(hd, hd), g_bias(1, hd);
  Matrix<double> g_head_w(2, hd), g_head_b(1, 2);
  double mean_advantage = 0.0;

  for (const Trajectory& traj : trajectories) {
    const double adv = traj.reward - baseline;
    mean_advantage += adv;
    if (traj.steps.empty()) continue;

    // Forward pass over the recorded decision states.
    std::vector<CellForward> fwd;
    fwd.reserve(traj.steps.size());
    std::vector<double> hidden(hd, 0.0);
    for (const DecisionStep& s : traj.steps) {
      fwd.push_back(cell_forward(
          policy, hidden,
          step_input(policy, s.prev_action, s.loss_norm, s.layer_index,
                     s.total_layers)));
      hidden = fwd.back().h;
    }

    // Backpropagation through time on -sum(adv * log pi).
    std::vector<double> dh_next(hd, 0.0);
    for (std::size_t t = traj.steps.size(); t-- > 0;) {
      const CellForward& f = fwd[t];
      const double p_stop = f.p_stop;
      const int a = static_cast<int>(traj.steps[t].action);
      // d(-J)/dz for the 2-way softmax head.
      const double dz[2] = {adv * ((1.0 - p_stop) - (a == 0 ? 1.0 : 0.0)),
                            adv * (p_stop - (a == 1 ? 1.0 : 0.0))};
      std::vector<double> dh = dh_next;
      for (std::size_t i = 0; i < 2; ++i) {
        g_head_b(0, i) += dz[i];
        for (std::size_t j = 0; j < hd; ++j) {
          g_head_w(i, j) += dz[i] * f.h[j];
          dh[j] += policy.head_w(i, j) * dz[i];
        }
      }
      const std::span<const double> h_prev =
          t == 0 ? std::span<const double>() : std::span<const double>(fwd[t - 1].h);
      std::fill(dh_next.begin(), dh_next.end(), 0.0);
      for (std::size_t i = 0; i < hd; ++i) {
        const double du = dh[i] * (1.0 - f.h[i] * f.h[i]);
        g_bias(0, i) += du;
        for (std::size_t j = 0; j < in; ++j) g_w_input(i, j) += du * f.x[j];
        if (!h_prev.empty()) {
          for (std::size_t j = 0; j < hd; ++j) {
            g_w_hidden(i, j) += du * h_prev[j];
            dh_next[j] += policy.w_hidden(i, j) * du;
          }
        }
      }
    }
  }

  const double scale = 1.0 / static_cast<double>(trajectories.size());
  const auto scale_all = [scale](Matrix<double>& m) {
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] *= scale;
  };
  scale_all(g_w_input);
  scale_all(g_w_hidden);
  scale_all(g_bias);
  scale_all(g_head_w);
  scale_all(g_head_b);

  ReinforceGradients out;
  out.w_input = std::move(g_w_input);
  out.w_hidden = std::move(g_w_hidden);
  out.bias = std::move(g_bias);
  out.head_w = std::move(g_head_w);
  out.head_b = std::move(g_head_b);
  out.mean_advantage = mean_advantage / static_cast<double>(trajectories.size());
  return out;
}

double reinforce_update(ControllerPolicy& policy,
                        std::span<const Trajectory> trajectories) {
  require(!trajectories.empty(), "reinforce_update: empty batch");

  double batch_mean = 0.0;
  for (const Trajectory& t : trajectories) batch_mean += t.reward;
  batch_mean /= static_cast<double>(trajectories.size());

  double baseline = 0.0;
  if (policy.reward.use_baseline) {
    if (!policy.baseline_initialized) {
      policy.baseline = batch_mean;
      policy.baseline_initialized = true;
    }
    baseline = policy.baseline;
    policy.baseline = policy.reward.baseline_decay * policy.baseline +
                      (1.0 - policy.reward.baseline_decay) * batch_mean;
  }

  // A batch whose every advantage is zero contributes no gradient; leave the
  // optimizer state alone so the update is a strict no-op.
  bool all_zero = true;
  for (const Trajectory& t : trajectories)
    if (t.reward - baseline != 0.0) all_zero = false;
  if (all_zero) return 0.0;

  ReinforceGradients g = reinforce_gradients(policy, trajectories, baseline);
  adam_step(policy.w_input, g.w_input, policy.opt_w_input);
  adam_step(policy.w_hidden, g.w_hidden, policy.opt_w_hidden);
  adam_step(policy.bias, g.bias, policy.opt_bias);
  adam_step(policy.head_w, g.head_w, policy.opt_head_w);
  adam_step(policy.head_b, g.head_b, policy.opt_head_b);
  return g.mean_advantage;
}

template <typename T>
SearchResult<T> search(const GraphDataset& dataset,
                       const NormalizedAdjacency& a_hat,
                       const TrainerConfig& base, const ControllerConfig& ccfg,
                       const RewardConfig& rcfg, std::size_t iterations,
                       std::uint64_t seed) {
  require(iterations >= 1, "search: iterations must be >= 1");
  const RewardConfig reward =
      resolve_reward_config(rcfg, base.hidden_dims.size(), ccfg.max_epochs_per_layer);

  SearchResult<T> out;
  out.policy = make_controller(ccfg, reward);

  bool have_best = false;
  for (std::size_t it = 0; it < iterations; ++it) {
    RolloutResult<T> r = rollout<T>(out.policy, dataset, a_hat, base,
                                    DecideMode::sample, seed_stream(seed, "rollout", it));
    const Trajectory& traj = r.trajectory;
    reinforce_update(out.policy, std::span<const Trajectory>(&traj, 1));
    out.history.push_back({it, traj.reward, out.policy.baseline, traj.final_loss,
                           traj.total_epochs, traj.schedule});
    if (!have_best || traj.reward > out.best.reward) {
      out.best = traj;
      have_best = true;
    }
  }

  out.deployed = rollout<T>(out.policy, dataset, a_hat, base, DecideMode::threshold,
                            seed_stream(seed, "deploy"));
  return out;
}

void save_policy(const ControllerPolicy& policy, const std::filesystem::path& path) {
  json j;
  j["format"] = "lgcn-controller";
  j["version"] = 1;
  j["hidden_dim"] = policy.cfg.hidden_dim;
  j["embed_dim"] = policy.cfg.embed_dim;
  j["decision_epochs"] = policy.cfg.decision_epochs;
  j["max_epochs_per_layer"] = policy.cfg.max_epochs_per_layer;
  j["learning_rate"] = policy.cfg.learning_rate;
  j["stop_threshold"] = policy.cfg.stop_threshold;
  j["seed"] = policy.cfg.seed;
  j["reward"] = {{"loss_weight", policy.reward.loss_weight},
                 {"epoch_weight", policy.reward.epoch_weight},
                 {"baseline_decay", policy.reward.baseline_decay},
                 {"use_baseline", policy.reward.use_baseline}};
  j["w_input"] = matrix_to_json(policy.w_input);
  j["w_hidden"] = matrix_to_json(policy.w_hidden);
  j["bias"] = matrix_to_json(policy.bias);
  j["head_w"] = matrix_to_json(policy.head_w);
  j["head_b"] = matrix_to_json(policy.head_b);
  j["action_embeddings"] = matrix_to_json(policy.action_embeddings);
  j["adam"] = {{"w_input", adam_to_json(policy.opt_w_input)},
               {"w_hidden", adam_to_json(policy.opt_w_hidden)},
               {"bias", adam_to_json(policy.opt_bias)},
               {"head_w", adam_to_json(policy.opt_head_w)},
               {"head_b", adam_to_json(policy.opt_head_b)}};
  j["baseline"] = {{"value", policy.baseline},
                   {"initialized", policy.baseline_initialized}};
  std::ofstream out(path);
  if (!out) throw Error("cannot write policy file: " + path.string());
  out << j.dump(2) << "\n";
}

ControllerPolicy load_policy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open policy file: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("policy file " + path.string() + " is corrupt: " + e.what());
  }
  if (!j.contains("format") || j.at("format") != "lgcn-controller")
    throw ValidationError("policy file " + path.string() + ": unknown format");
  if (j.at("version").get<int>() != 1)
    throw ValidationError("policy file " + path.string() + ": unsupported version");

  try {
    ControllerPolicy p;
    p.cfg.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    p.cfg.embed_dim = j.at("embed_dim").get<std::size_t>();
    p.cfg.decision_epochs = j.at("decision_epochs").get<std::size_t>();
    p.cfg.max_epochs_per_layer = j.at("max_epochs_per_layer").get<std::size_t>();
    p.cfg.learning_rate = j.at("learning_rate").get<double>();
    p.cfg.stop_threshold = j.at("stop_threshold").get<double>();
    p.cfg.seed = j.at("seed").get<std::uint64_t>();
    const json& r = j.at("reward");
    p.reward.loss_weight = r.at("loss_weight").get<double>();
    p.reward.epoch_weight = r.at("epoch_weight").get<double>();
    p.reward.baseline_decay = r.at("baseline_decay").get<double>();
    p.reward.use_baseline = r.at("use_baseline").get<bool>();
    p.w_input = matrix_from_json(j.at("w_input"), "w_input");
    p.w_hidden = matrix_from_json(j.at("w_hidden"), "w_hidden");
    p.bias = matrix_from_json(j.at("bias"), "bias");
    p.head_w = matrix_from_json(j.at("head_w"), "head_w");
    p.head_b = matrix_from_json(j.at("head_b"), "head_b");
    p.action_embeddings = matrix_from_json(j.at("action_embeddings"), "action_embeddings");
    const json& a = j.at("adam");
    p.opt_w_input = adam_from_json(a.at("w_input"));
    p.opt_w_hidden = adam_from_json(a.at("w_hidden"));
    p.opt_bias = adam_from_json(a.at("bias"));
    p.opt_head_w = adam_from_json(a.at("head_w"));
    p.opt_head_b = adam_from_json(a.at("head_b"));
    p.baseline = j.at("baseline").at("value").get<double>();
    p.baseline_initialized = j.at("baseline").at("initialized").get<bool>();

    if (p.w_input.rows() != p.cfg.hidden_dim || p.w_input.cols() != p.input_dim() ||
        p.w_hidden.rows() != p.cfg.hidden_dim || p.w_hidden.cols() != p.cfg.hidden_dim ||
        p.head_w.rows() != 2 || p.head_w.cols() != p.cfg.hidden_dim ||
        p.action_embeddings.rows() != 2 ||
        p.action_embeddings.cols() != p.cfg.embed_dim)
      throw ValidationError("policy file " + path.string() + ": tensor shape mismatch");
    return p;
  } catch (const json::exception& e) {
    throw ValidationError("policy file " + path.string() + " is missing fields: " + e.what());
  }
}

template RolloutResult<float> rollout<float>(const ControllerPolicy&,
                                             const GraphDataset&,
                                             const NormalizedAdjacency&,
                                             const TrainerConfig&, DecideMode,
                                             std::uint64_t);
template RolloutResult<double> rollout<double>(const ControllerPolicy&,
                                               const GraphDataset&,
                                               const NormalizedAdjacency&,
                                               const TrainerConfig&, DecideMode,
                                               std::uint64_t);
template SearchResult<float> search<float>(const GraphDataset&,
                                           const NormalizedAdjacency&,
                                           const TrainerConfig&,
                                           const ControllerConfig&,
                                           const RewardConfig&, std::size_t,
                                           std::uint64_t);
template SearchResult<double> search<double>(const GraphDataset&,
                                             const NormalizedAdjacency&,
                                             const TrainerConfig&,
                                             const ControllerConfig&,
                                             const RewardConfig&, std::size_t,
                                             std::uint64_t);

}  // namespace lgcn
