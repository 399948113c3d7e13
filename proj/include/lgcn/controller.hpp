#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "lgcn/graph.hpp"
#include "lgcn/matrix.hpp"
#include "lgcn/tensor.hpp"
#include "lgcn/trainers.hpp"

namespace lgcn {

// Reward R̂ = -(loss_weight * final_loss + epoch_weight * total_epochs);
// larger is better. A negative epoch_weight asks for the scale-free default
// 1/(L * max_epochs_per_layer).
struct RewardConfig {
  double loss_weight = 1.0;
  double epoch_weight = -1.0;
  double baseline_decay = 0.9;
  // Moving-average baseline is an extension over plain REINFORCE; disable for
  // fidelity runs.
  bool use_baseline = true;
};

double compute_reward(double final_loss, std::size_t total_epochs,
                      const RewardConfig& cfg);

RewardConfig resolve_reward_config(RewardConfig cfg, std::size_t depth,
                                   std::size_t max_epochs_per_layer);

struct ControllerConfig {
  std::size_t hidden_dim = 64;
  std::size_t embed_dim = 32;
  std::size_t decision_epochs = 10;       // k: epochs between decisions
  std::size_t max_epochs_per_layer = 100; // must be a multiple of k
  double learning_rate = 0.05;
  double stop_threshold = 0.5;            // rho_thres at deployment
  std::uint64_t seed = 1;
};

enum class Action : int { cont = 0, stop = 1 };
enum class DecideMode { sample, threshold };

// Single-gate tanh recurrent cell with a 2-way softmax head. Action
// embeddings are drawn once from a seeded multinomial table and stay frozen.
struct ControllerPolicy {
  ControllerConfig cfg;
  RewardConfig reward;
  Matrix<double> w_input;            // H x (E+2)
  Matrix<double> w_hidden;           // H x H
  Matrix<double> bias;               // 1 x H
  Matrix<double> head_w;             // 2 x H
  Matrix<double> head_b;             // 1 x 2
  Matrix<double> action_embeddings;  // 2 x E, frozen
  AdamState<double> opt_w_input, opt_w_hidden, opt_bias, opt_head_w, opt_head_b;
  double baseline = 0.0;
  bool baseline_initialized = false;

  std::size_t input_dim() const { return cfg.embed_dim + 2; }
  bool same_parameters(const ControllerPolicy& other) const;
};

ControllerPolicy make_controller(const ControllerConfig& cfg,
                                 const RewardConfig& reward = {});

struct ControllerStepOut {
  std::vector<double> hidden;
  double stop_prob = 0.0;
};

// One recurrent update: x = [embed(prev_action), epoch_loss, layer/L].
ControllerStepOut controller_step(const ControllerPolicy& policy,
                                  std::span<const double> hidden,
                                  Action prev_action, double epoch_loss,
                                  std::size_t layer_index,
                                  std::size_t total_layers);

Action decide(const ControllerPolicy& policy, double stop_prob, DecideMode mode,
              std::mt19937_64& rng);

struct DecisionStep {
  Action prev_action = Action::cont;
  double loss_norm = 1.0;   // block loss / first block loss of the layer
  std::size_t layer_index = 0;
  std::size_t total_layers = 0;
  Action action = Action::cont;
  double stop_prob = 0.0;
  double prob_of_action = 0.0;
};

struct Trajectory {
  std::vector<DecisionStep> steps;
  std::vector<std::size_t> schedule;  // epochs per layer
  double final_loss = 0.0;
  std::size_t total_epochs = 0;
  double reward = 0.0;
};

template <typename T>
struct RolloutResult {
  Trajectory trajectory;
  TrainOutput<T> train;
};

// Runs layer-wise training with the controller consulted every k epochs.
template <typename T>
RolloutResult<T> rollout(const ControllerPolicy& policy,
                         const GraphDataset& dataset,
                         const NormalizedAdjacency& a_hat,
                         const TrainerConfig& base, DecideMode mode,
                         std::uint64_t rng_seed);

// Gradients of the REINFORCE surrogate -mean(advantage * sum log pi(a|s))
// with respect to every trainable tensor, by backpropagation through time
// over the recorded decision states.
struct ReinforceGradients {
  Matrix<double> w_input, w_hidden, bias, head_w, head_b;
  double mean_advantage = 0.0;
};

ReinforceGradients reinforce_gradients(const ControllerPolicy& policy,
                                       std::span<const Trajectory> trajectories,
                                       double baseline);

// REINFORCE ascent on sum over steps of advantage * log pi(a|s), applied
// through the policy's Adam state with analytic backpropagation through time.
// Returns the mean advantage of the batch.
double reinforce_update(ControllerPolicy& policy,
                        std::span<const Trajectory> trajectories);

// Sum of advantage-weighted log-probabilities for fixed trajectories; the
// quantity reinforce_update ascends (used by its gradient checks).
double trajectory_objective(const ControllerPolicy& policy,
                            std::span<const Trajectory> trajectories,
                            std::span<const double> advantages);

struct SearchIteration {
  std::size_t iteration = 0;
  double reward = 0.0;
  double baseline = 0.0;
  double final_loss = 0.0;
  std::size_t total_epochs = 0;
  std::vector<std::size_t> schedule;
};

template <typename T>
struct SearchResult {
  ControllerPolicy policy;
  Trajectory best;
  std::vector<SearchIteration> history;
  RolloutResult<T> deployed;  // threshold-mode rollout of the final policy
};

template <typename T>
SearchResult<T> search(const GraphDataset& dataset,
                       const NormalizedAdjacency& a_hat,
                       const TrainerConfig& base, const ControllerConfig& ccfg,
                       const RewardConfig& rcfg, std::size_t iterations,
                       std::uint64_t seed);

void save_policy(const ControllerPolicy& policy, const std::filesystem::path& path);
ControllerPolicy load_policy(const std::filesystem::path& path);

}  // namespace lgcn
