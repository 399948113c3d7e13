#include "lgcn/trainers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "lgcn/common.hpp"
#include "lgcn/kernels/kernels.hpp"
#include "lgcn/rng.hpp"

namespace lgcn {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw Error(msg);
}

// Batch membership comes from an epoch-level shuffle; rows within a batch are
// processed in ascending node order so a whole-training-set batch reproduces
// the full-batch step bit for bit.
std::vector<std::vector<std::int32_t>> make_batches(
    const std::vector<std::int32_t>& shuffled, std::size_t batch_size) {
  std::vector<std::vector<std::int32_t>> batches;
  for (std::size_t start = 0; start < shuffled.size(); start += batch_size) {
    const std::size_t end = std::min(start + batch_size, shuffled.size());
    std::vector<std::int32_t> b(shuffled.begin() + start, shuffled.begin() + end);
    std::sort(b.begin(), b.end());
    batches.push_back(std::move(b));
  }
  return batches;
}

template <typename T>
LossGrad<T> batch_loss(const Matrix<T>& logits,
                       std::span<const std::int32_t> nodes,
                       const GraphDataset& ds, LossKind kind) {
  if (kind == LossKind::softmax) {
    require(ds.label_kind == LabelKind::single,
            "softmax loss requires single-label data");
    std::vector<std::int32_t> y(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i)
      y[i] = ds.labels[static_cast<std::size_t>(nodes[i])];
    return softmax_cross_entropy(logits, y);
  }
  require(ds.label_kind == LabelKind::multi, "bce loss requires multi-label data");
  Matrix<double> rows = gather_rows(ds.label_matrix, nodes);
  return sigmoid_bce(logits, matrix_cast<T>(rows));
}

std::uint64_t weight_seed(std::uint64_t seed, std::size_t layer) {
  return seed_stream(seed, "init-w", layer);
}
std::uint64_t classifier_seed(std::uint64_t seed, std::size_t layer) {
  return seed_stream(seed, "init-theta", layer);
}

std::vector<std::int32_t> local_index_map(std::int64_t num_nodes,
                                          std::span<const std::int32_t> nodes) {
  std::vector<std::int32_t> map(static_cast<std::size_t>(num_nodes), -1);
  for (std::size_t i = 0; i < nodes.size(); ++i)
    map[static_cast<std::size_t>(nodes[i])] = static_cast<std::int32_t>(i);
  return map;
}

}  // namespace

std::vector<LayerTrainConfig> TrainerConfig::per_layer() const {
  if (epochs.size() != hidden_dims.size())
    throw ValidationError("config: epoch schedule length " +
                          std::to_string(epochs.size()) + " does not match depth " +
                          std::to_string(hidden_dims.size()));
  std::vector<LayerTrainConfig> out;
  for (const std::size_t e : epochs)
    out.push_back({e, batch_size, learning_rate, seed, loss_kind});
  return out;
}

const char* split_name(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    default: return "test";
  }
}

template <typename T>
LayerBatchResult<T> layerwise_batch_gradients(const Matrix<T>& x_hat_rows,
                                              const Matrix<T>& w,
                                              const Matrix<T>& theta,
                                              std::span<const std::int32_t> batch_nodes,
                                              const GraphDataset& dataset,
                                              LossKind loss_kind,
                                              ActivationGuard* activations) {
  const auto& kt = kern::table<T>();
  AffineReluOut<T> ar = affine_relu_forward(x_hat_rows, w, activations);
  Matrix<T> logits = matmul(ar.hidden, theta);
  LossGrad<T> lg = batch_loss(logits, batch_nodes, dataset, loss_kind);
  if (activations != nullptr) {
    activations->track_matrix(logits);
    activations->track_matrix(lg.grad);
  }

  LayerBatchResult<T> out;
  out.loss = lg.loss;
  out.grad_theta = matmul_tn(ar.hidden, lg.grad);
  Matrix<T> d_hidden = matmul_nt(lg.grad, theta);
  if (activations != nullptr) activations->track_matrix(d_hidden);
  kt.relu_mask(d_hidden.data(), d_hidden.data(), ar.pre_activation.data(),
               d_hidden.size());
  out.grad_w = matmul_tn(x_hat_rows, d_hidden);
  return out;
}

template <typename T>
FullbatchResult<T> fullbatch_gradients(const GraphDataset& dataset,
                                       const NormalizedAdjacency& a_hat,
                                       std::span<const Matrix<T>> weights,
                                       const Matrix<T>& theta, LossKind loss_kind,
                                       ActivationGuard* activations) {
  const std::size_t depth = weights.size();
  require(depth >= 1, "fullbatch_gradients: no layers");
  const auto& kt = kern::table<T>();
  const std::vector<std::int32_t>& train = dataset.train_mask;

  const Matrix<T> x0 = matrix_cast<T>(dataset.features);
  std::vector<Matrix<T>> x_hats(depth), pres(depth), xs(depth);
  for (std::size_t l = 0; l < depth; ++l) {
    x_hats[l] = spmm(a_hat, l == 0 ? x0 : xs[l - 1]);
    if (activations != nullptr) activations->track_matrix(x_hats[l]);
    AffineReluOut<T> ar = affine_relu_forward(x_hats[l], weights[l], activations);
    pres[l] = std::move(ar.pre_activation);
    xs[l] = std::move(ar.hidden);
  }

  Matrix<T> train_embed = gather_rows(xs[depth - 1], train);
  Matrix<T> logits = matmul(train_embed, theta);
  LossGrad<T> lg = batch_loss(logits, train, dataset, loss_kind);
  if (activations != nullptr) {
    activations->track_matrix(train_embed);
    activations->track_matrix(logits);
    activations->track_matrix(lg.grad);
  }

  FullbatchResult<T> out;
  out.loss = lg.loss;
  out.grad_theta = matmul_tn(train_embed, lg.grad);
  out.grad_weights.resize(depth);

  // Scatter the classifier gradient back onto full-graph rows.
  Matrix<T> d_x(xs[depth - 1].rows(), xs[depth - 1].cols());
  {
    Matrix<T> d_rows = matmul_nt(lg.grad, theta);
    for (std::size_t i = 0; i < train.size(); ++i) {
      const T* src = d_rows.row(i);
      std::copy(src, src + d_rows.cols(), d_x.row(static_cast<std::size_t>(train[i])));
    }
  }
  if (activations != nullptr) activations->track_matrix(d_x);

  for (std::size_t l = depth; l-- > 0;) {
    kt.relu_mask(d_x.data(), d_x.data(), pres[l].data(), d_x.size());
    out.grad_weights[l] = matmul_tn(x_hats[l], d_x);
    if (l > 0) {
      Matrix<T> d_x_hat = matmul_nt(d_x, weights[l]);
      d_x = spmm_adjoint(a_hat, d_x_hat);
      if (activations != nullptr) activations->track_matrix(d_x);
    }
  }
  return out;
}

template <typename T>
TrainOutput<T> train_layerwise(const GraphDataset& dataset,
                               const NormalizedAdjacency& a_hat,
                               const std::vector<std::size_t>& hidden_dims,
                               const std::vector<LayerTrainConfig>& configs,
                               const StopHook& stop_hook) {
  const std::size_t depth = hidden_dims.size();
  require(depth >= 1, "train_layerwise: at least one layer required");
  if (configs.size() != depth)
    throw ValidationError("train_layerwise: config list length does not match depth");
  require(!dataset.train_mask.empty(), "train_layerwise: empty train mask");

  TrainOutput<T> out;
  out.loss_curves.resize(depth);
  out.schedule.assign(depth, 0);
  LedgerScope scope(out.ledger);
  const auto start = Clock::now();
  const auto& kt = kern::table<T>();

  GraphBytesGuard graph_bytes;
  Matrix<T> x = matrix_cast<T>(dataset.features);
  graph_bytes.track(x.byte_size());

  for (std::size_t l = 0; l < depth; ++l) {
    const LayerTrainConfig& cfg = configs[l];
    require(cfg.batch_size >= 1, "train_layerwise: batch_size must be >= 1");
    const std::size_t d_in = x.cols();
    const std::size_t d_out = hidden_dims[l];

    // One aggregation for the whole layer, reused by every batch and epoch.
    Matrix<T> x_hat = spmm(a_hat, x);
    graph_bytes.track(x_hat.byte_size());

    Matrix<T> w = xavier_init<T>(d_in, d_out, weight_seed(cfg.seed, l));
    Matrix<T> theta = xavier_init<T>(d_out, static_cast<std::size_t>(dataset.class_count),
                                     classifier_seed(cfg.seed, l));
    AdamState<T> opt_w = AdamState<T>::for_param(w, cfg.learning_rate);
    AdamState<T> opt_theta = AdamState<T>::for_param(theta, cfg.learning_rate);

    std::mt19937_64 shuffle_rng(seed_stream(cfg.seed, "shuffle", l));
    std::vector<std::int32_t> order = dataset.train_mask;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
      shuffle_inplace(shuffle_rng, order);
      double loss_sum = 0.0;
      for (const auto& batch : make_batches(order, cfg.batch_size)) {
        ActivationGuard acts;
        Matrix<T> xb = gather_rows(x_hat, batch);
        acts.track_matrix(xb);
        LayerBatchResult<T> grads =
            layerwise_batch_gradients(xb, w, theta, batch, dataset, cfg.loss_kind, &acts);
        adam_step(theta, grads.grad_theta, opt_theta);
        adam_step(w, grads.grad_w, opt_w);
        loss_sum += grads.loss * static_cast<double>(batch.size());
      }
      const double mean_loss = loss_sum / static_cast<double>(order.size());
      out.loss_curves[l].push_back(mean_loss);
      out.schedule[l] = epoch + 1;
      if (stop_hook && stop_hook({l, epoch + 1, mean_loss})) break;
    }

    // Materialize X(l) for all nodes; input to the next layer's aggregation.
    {
      Matrix<T> pre = matmul(x_hat, w);
      graph_bytes.track(pre.byte_size());
      Matrix<T> next(pre.rows(), pre.cols());
      kt.relu(next.data(), pre.data(), pre.size());
      graph_bytes.track(next.byte_size());
      graph_bytes.release(x.byte_size());
      x = std::move(next);
      graph_bytes.release(pre.byte_size());
      graph_bytes.release(x_hat.byte_size());
    }

    out.model.layer_weights.push_back(std::move(w));
    if (l + 1 == depth) out.model.classifier = std::move(theta);
  }

  out.ledger.wall_train_seconds = seconds_since(start);
  return out;
}

template <typename T>
TrainOutput<T> train_conventional_fullbatch(const GraphDataset& dataset,
                                            const NormalizedAdjacency& a_hat,
                                            const std::vector<std::size_t>& hidden_dims,
                                            std::size_t epochs,
                                            const LayerTrainConfig& config) {
  const std::size_t depth = hidden_dims.size();
  require(depth >= 1, "train_fullbatch: at least one layer required");
  require(!dataset.train_mask.empty(), "train_fullbatch: empty train mask");

  TrainOutput<T> out;
  out.loss_curves.resize(1);
  LedgerScope scope(out.ledger);
  const auto start = Clock::now();

  std::vector<Matrix<T>> weights;
  std::vector<AdamState<T>> opt_w;
  for (std::size_t l = 0; l < depth; ++l) {
    const std::size_t d_in = l == 0 ? dataset.features.cols() : hidden_dims[l - 1];
    weights.push_back(xavier_init<T>(d_in, hidden_dims[l], weight_seed(config.seed, l)));
    opt_w.push_back(AdamState<T>::for_param(weights.back(), config.learning_rate));
  }
  Matrix<T> theta = xavier_init<T>(hidden_dims.back(),
                                   static_cast<std::size_t>(dataset.class_count),
                                   classifier_seed(config.seed, depth - 1));
  AdamState<T> opt_theta = AdamState<T>::for_param(theta, config.learning_rate);

  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    ActivationGuard acts;
    FullbatchResult<T> grads = fullbatch_gradients<T>(
        dataset, a_hat, weights, theta, config.loss_kind, &acts);
    out.loss_curves[0].push_back(grads.loss);
    adam_step(theta, grads.grad_theta, opt_theta);
    for (std::size_t l = 0; l < depth; ++l)
      adam_step(weights[l], grads.grad_weights[l], opt_w[l]);
  }

  out.model.layer_weights = std::move(weights);
  out.model.classifier = std::move(theta);
  out.schedule = {epochs};
  out.ledger.wall_train_seconds = seconds_since(start);
  return out;
}

template <typename T>
TrainOutput<T> train_vanilla_minibatch(const GraphDataset& dataset,
                                       const NormalizedAdjacency& a_hat,
                                       const std::vector<std::size_t>& hidden_dims,
                                       std::size_t epochs,
                                       const LayerTrainConfig& config) {
  const std::size_t depth = hidden_dims.size();
  require(depth >= 1, "train_vanilla: at least one layer required");
  require(!dataset.train_mask.empty(), "train_vanilla: empty train mask");
  require(config.batch_size >= 1, "train_vanilla: batch_size must be >= 1");

  TrainOutput<T> out;
  out.loss_curves.resize(1);
  LedgerScope scope(out.ledger);
  const auto start = Clock::now();
  const auto& kt = kern::table<T>();

  const Matrix<T> x0 = matrix_cast<T>(dataset.features);

  std::vector<Matrix<T>> weights;
  std::vector<AdamState<T>> opt_w;
  for (std::size_t l = 0; l < depth; ++l) {
    const std::size_t d_in = l == 0 ? x0.cols() : hidden_dims[l - 1];
    weights.push_back(xavier_init<T>(d_in, hidden_dims[l], weight_seed(config.seed, l)));
    opt_w.push_back(AdamState<T>::for_param(weights.back(), config.learning_rate));
  }
  Matrix<T> theta = xavier_init<T>(hidden_dims.back(),
                                   static_cast<std::size_t>(dataset.class_count),
                                   classifier_seed(config.seed, depth - 1));
  AdamState<T> opt_theta = AdamState<T>::for_param(theta, config.learning_rate);

  std::mt19937_64 shuffle_rng(seed_stream(config.seed, "shuffle"));
  std::vector<std::int32_t> order = dataset.train_mask;

  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    shuffle_inplace(shuffle_rng, order);
    double loss_sum = 0.0;
    for (const auto& batch : make_batches(order, config.batch_size)) {
      ActivationGuard acts;

      // levels[l] holds the nodes whose layer-l representations this batch
      // needs; levels[depth] is the batch itself, each step expands one hop.
      std::vector<std::vector<std::int32_t>> levels(depth + 1);
      levels[depth] = batch;
      for (std::size_t l = depth; l-- > 0;)
        levels[l] = k_hop_ball(a_hat.matrix, levels[l + 1], 1);

      std::vector<std::vector<std::int32_t>> maps(depth + 1);
      for (std::size_t l = 0; l <= depth; ++l)
        maps[l] = local_index_map(dataset.num_nodes, levels[l]);

      std::vector<Matrix<T>> xs(depth + 1), x_hats(depth + 1), pres(depth + 1);
      xs[0] = gather_rows(x0, levels[0]);
      acts.track_matrix(xs[0]);
      for (std::size_t l = 0; l < depth; ++l) {
        x_hats[l + 1] = spmm_gather(a_hat, xs[l], maps[l], levels[l + 1]);
        acts.track_matrix(x_hats[l + 1]);
        AffineReluOut<T> ar = affine_relu_forward(x_hats[l + 1], weights[l], &acts);
        pres[l + 1] = std::move(ar.pre_activation);
        xs[l + 1] = std::move(ar.hidden);
      }

      Matrix<T> logits = matmul(xs[depth], theta);
      acts.track_matrix(logits);
      LossGrad<T> lg = batch_loss(logits, batch, dataset, config.loss_kind);
      acts.track_matrix(lg.grad);

      Matrix<T> d_theta = matmul_tn(xs[depth], lg.grad);
      Matrix<T> d_x = matmul_nt(lg.grad, theta);
      acts.track_matrix(d_x);

      std::vector<Matrix<T>> d_weights(depth);
      for (std::size_t l = depth; l-- > 0;) {
        kt.relu_mask(d_x.data(), d_x.data(), pres[l + 1].data(), d_x.size());
        d_weights[l] = matmul_tn(x_hats[l + 1], d_x);
        if (l > 0) {
          Matrix<T> d_x_hat = matmul_nt(d_x, weights[l]);
          d_x = spmm_gather_adjoint(a_hat, d_x_hat, levels[l + 1], maps[l],
                                    levels[l].size());
          acts.track_matrix(d_x);
        }
      }

      adam_step(theta, d_theta, opt_theta);
      for (std::size_t l = 0; l < depth; ++l)
        adam_step(weights[l], d_weights[l], opt_w[l]);
      loss_sum += lg.loss * static_cast<double>(batch.size());
    }
    out.loss_curves[0].push_back(loss_sum / static_cast<double>(order.size()));
  }

  out.model.layer_weights = std::move(weights);
  out.model.classifier = std::move(theta);
  out.schedule = {epochs};
  out.ledger.wall_train_seconds = seconds_since(start);
  return out;
}

template <typename T>
Matrix<T> infer_embeddings(const LayerwiseModel<T>& model,
                           const NormalizedAdjacency& a_hat,
                           const Matrix<T>& features, std::size_t up_to_layer) {
  require(up_to_layer <= model.depth(), "infer_embeddings: layer out of range");
  const auto& kt = kern::table<T>();
  Matrix<T> x = features;
  for (std::size_t l = 0; l < up_to_layer; ++l) {
    Matrix<T> x_hat = spmm(a_hat, x);
    Matrix<T> pre = matmul(x_hat, model.layer_weights[l]);
    x = Matrix<T>(pre.rows(), pre.cols());
    kt.relu(x.data(), pre.data(), pre.size());
  }
  return x;
}

template <typename T>
Matrix<T> model_logits(const LayerwiseModel<T>& model,
                       const NormalizedAdjacency& a_hat,
                       const Matrix<T>& features) {
  return matmul(infer_embeddings(model, a_hat, features, model.depth()),
                model.classifier);
}

F1Scores f1_single_label(std::span<const std::int32_t> predicted,
                         std::span<const std::int32_t> actual,
                         std::int32_t class_count) {
  require(predicted.size() == actual.size(), "f1: size mismatch");
  std::vector<std::int64_t> tp(class_count, 0), fp(class_count, 0), fn(class_count, 0);
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] == actual[i]) {
      ++tp[predicted[i]];
    } else {
      ++fp[predicted[i]];
      ++fn[actual[i]];
    }
  }
  std::int64_t tp_sum = 0, fp_sum = 0, fn_sum = 0;
  double macro = 0.0;
  for (std::int32_t c = 0; c < class_count; ++c) {
    tp_sum += tp[c];
    fp_sum += fp[c];
    fn_sum += fn[c];
    const double denom = static_cast<double>(2 * tp[c] + fp[c] + fn[c]);
    macro += denom > 0.0 ? 2.0 * static_cast<double>(tp[c]) / denom : 0.0;
  }
  F1Scores out;
  const double micro_denom = static_cast<double>(2 * tp_sum + fp_sum + fn_sum);
  out.micro = micro_denom > 0.0 ? 2.0 * static_cast<double>(tp_sum) / micro_denom : 0.0;
  out.macro = class_count > 0 ? macro / static_cast<double>(class_count) : 0.0;
  return out;
}

F1Scores f1_multi_label(const Matrix<double>& predicted, const Matrix<double>& actual) {
  require(predicted.same_shape(actual), "f1: shape mismatch");
  const std::size_t c = predicted.cols();
  std::vector<std::int64_t> tp(c, 0), fp(c, 0), fn(c, 0);
  for (std::size_t i = 0; i < predicted.rows(); ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      const bool p = predicted(i, j) != 0.0;
      const bool a = actual(i, j) != 0.0;
      if (p && a) ++tp[j];
      else if (p) ++fp[j];
      else if (a) ++fn[j];
    }
  }
  std::int64_t tp_sum = 0, fp_sum = 0, fn_sum = 0;
  double macro = 0.0;
  for (std::size_t j = 0; j < c; ++j) {
    tp_sum += tp[j];
    fp_sum += fp[j];
    fn_sum += fn[j];
    const double denom = static_cast<double>(2 * tp[j] + fp[j] + fn[j]);
    macro += denom > 0.0 ? 2.0 * static_cast<double>(tp[j]) / denom : 0.0;
  }
  F1Scores out;
  const double micro_denom = static_cast<double>(2 * tp_sum + fp_sum + fn_sum);
  out.micro = micro_denom > 0.0 ? 2.0 * static_cast<double>(tp_sum) / micro_denom : 0.0;
  out.macro = c > 0 ? macro / static_cast<double>(c) : 0.0;
  return out;
}

template <typename T>
EvalReport evaluate(const LayerwiseModel<T>& model, const GraphDataset& dataset,
                    const NormalizedAdjacency& a_hat, Split split,
                    LossKind loss_kind) {
  const std::vector<std::int32_t>& mask = split == Split::train ? dataset.train_mask
                                          : split == Split::val ? dataset.val_mask
                                                                : dataset.test_mask;
  require(!mask.empty(), std::string("evaluate: empty ") + split_name(split) + " split");

  Matrix<T> logits_all = model_logits(model, a_hat, matrix_cast<T>(dataset.features));
  Matrix<T> logits = gather_rows(logits_all, mask);

  EvalReport report;
  report.split = split;
  if (dataset.label_kind == LabelKind::single) {
    std::vector<std::int32_t> pred(mask.size()), truth(mask.size());
    std::size_t correct = 0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
      const T* row = logits.row(i);
      std::int32_t best = 0;
      for (std::size_t j = 1; j < logits.cols(); ++j)
        if (row[j] > row[best]) best = static_cast<std::int32_t>(j);
      pred[i] = best;
      truth[i] = dataset.labels[static_cast<std::size_t>(mask[i])];
      if (pred[i] == truth[i]) ++correct;
    }
    const F1Scores f1 = f1_single_label(pred, truth, dataset.class_count);
    const double accuracy = static_cast<double>(correct) / static_cast<double>(mask.size());
    require(std::abs(f1.micro - accuracy) < 1e-12,
            "evaluate: single-label micro-F1 must equal accuracy");
    report.micro_f1 = f1.micro;
    report.macro_f1 = f1.macro;
  } else {
    Matrix<double> pred(mask.size(), logits.cols());
    for (std::size_t i = 0; i < mask.size(); ++i)
      for (std::size_t j = 0; j < logits.cols(); ++j)
        pred(i, j) = logits(i, j) >= T(0) ? 1.0 : 0.0;  // sigmoid >= 0.5
    const F1Scores f1 = f1_multi_label(pred, gather_rows(dataset.label_matrix, mask));
    report.micro_f1 = f1.micro;
    report.macro_f1 = f1.macro;
  }
  report.loss = batch_loss(logits, mask, dataset, loss_kind).loss;
  return report;
}

#define LGCN_INSTANTIATE(T)                                                        \
  template TrainOutput<T> train_layerwise<T>(                                      \
      const GraphDataset&, const NormalizedAdjacency&,                             \
      const std::vector<std::size_t>&, const std::vector<LayerTrainConfig>&,       \
      const StopHook&);                                                            \
  template TrainOutput<T> train_conventional_fullbatch<T>(                         \
      const GraphDataset&, const NormalizedAdjacency&,                             \
      const std::vector<std::size_t>&, std::size_t, const LayerTrainConfig&);      \
  template TrainOutput<T> train_vanilla_minibatch<T>(                              \
      const GraphDataset&, const NormalizedAdjacency&,                             \
      const std::vector<std::size_t>&, std::size_t, const LayerTrainConfig&);      \
  template Matrix<T> infer_embeddings<T>(const LayerwiseModel<T>&,                 \
                                         const NormalizedAdjacency&,               \
                                         const Matrix<T>&, std::size_t);           \
  template Matrix<T> model_logits<T>(const LayerwiseModel<T>&,                     \
                                     const NormalizedAdjacency&, const Matrix<T>&);\
  template EvalReport evaluate<T>(const LayerwiseModel<T>&, const GraphDataset&,   \
                                  const NormalizedAdjacency&, Split, LossKind);    \
  template LayerBatchResult<T> layerwise_batch_gradients<T>(                       \
      const Matrix<T>&, const Matrix<T>&, const Matrix<T>&,                        \
      std::span<const std::int32_t>, const GraphDataset&, LossKind,                \
      ActivationGuard*);                                                           \
  template FullbatchResult<T> fullbatch_gradients<T>(                              \
      const GraphDataset&, const NormalizedAdjacency&, std::span<const Matrix<T>>, \
      const Matrix<T>&, LossKind, ActivationGuard*);

LGCN_INSTANTIATE(float)
LGCN_INSTANTIATE(double)

#undef LGCN_INSTANTIATE

}  // namespace lgcn
