#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ntgnn/dag_mlp.hpp"
#include "ntgnn/error.hpp"
#include "ntgnn/matrices.hpp"

namespace ntgnn {

enum class Optimizer { sgd, momentum };

inline Optimizer parse_optimizer(std::string_view s) {
  if (s == "sgd") return Optimizer::sgd;
  if (s == "momentum") return Optimizer::momentum;
  throw ArgumentError("optimizer must be sgd or momentum, got '" + std::string(s) + "'");
}
inline const char* to_string(Optimizer o) { return o == Optimizer::sgd ? "sgd" : "momentum"; }

struct TrainConfig {
  double learning_rate = 0.01;
  std::size_t epochs = 100;
  std::size_t batch_size = 0;  // 0 = all graphs in one batch
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::momentum;
  double momentum = 0.9;
  double clip_norm = 0.0;  // 0 disables gradient clipping

  void validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ArgumentError("learning rate must be >= 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ArgumentError("momentum must lie in [0, 1)");
    if (!(clip_norm >= 0.0)) throw ArgumentError("clip norm must be >= 0");
  }
};

// Graph classification data over one preprocessed collection.
struct TrainingData {
  LayeredMatrices matrices;
  ReadoutPlan plan;
  std::vector<std::int64_t> targets;  // one class per graph
};

template <typename S>
struct LossEval {
  S loss = 0;
  std::size_t correct = 0;
  std::size_t total = 0;

  double accuracy() const { return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total); }
};

// Forward pass over the whole DAG, loss over the graphs in `batch`. When
// grad is given, accumulates the full gradient into it.
template <typename S>
LossEval<S> loss_and_gradient(const TrainingData& data, const MlpStack<S>& p, std::span<const std::size_t> batch,
                              MlpStack<S>* grad, FirstAddend mode = FirstAddend::initial) {
  if (data.targets.size() != data.plan.num_graphs()) throw DimensionError("one target per graph is required");
  const auto fw = forward_dag(data.matrices, p, mode);
  const Mat<S> emb = readout(fw.x, data.plan, p.readout, p.pool);
  typename Mlp<S>::Cache head_cache;
  const Mat<S> logits = p.head.forward(emb, &head_cache);
  std::vector<std::int64_t> targets;
  for (std::size_t g : batch) targets.push_back(data.targets.at(g));

  LossEval<S> out;
  Mat<S> d_logits;
  out.loss = cross_entropy<S>(logits, batch, targets, grad ? &d_logits : nullptr);
  out.total = batch.size();
  for (std::size_t i = 0; i < batch.size(); ++i) {
    Eigen::Index best = 0;
    logits.row(static_cast<Eigen::Index>(batch[i])).maxCoeff(&best);
    if (best == targets[i]) ++out.correct;
  }
  if (grad) {
    const Mat<S> d_emb = p.head.backward(head_cache, d_logits, grad->head);
    Mat<S> d_x = Mat<S>::Zero(fw.x.rows(), fw.x.cols());
    backward_readout(d_emb, data.plan, p.readout, p.pool, d_x);
    backward_dag(data.matrices, p, fw, std::move(d_x), *grad);
  }
  return out;
}

template <typename S>
LossEval<S> evaluate(const TrainingData& data, const MlpStack<S>& p) {
  std::vector<std::size_t> all(data.plan.num_graphs());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return loss_and_gradient<S>(data, p, all, nullptr);
}

// Owns the parameters and optimizer state.
template <typename S>
class Trainer {
 public:
  Trainer(MlpStack<S> params, TrainConfig cfg) : params_(std::move(params)), cfg_(cfg), rng_(cfg.seed) {
    cfg_.validate();
  }

  const MlpStack<S>& params() const { return params_; }
  const TrainConfig& config() const { return cfg_; }

  // One gradient step on the batch; returns the loss before the step.
  // Throws NumericError (and leaves the parameters untouched) when the loss
  // or the gradient is not finite.
  LossEval<S> backward_and_step(const TrainingData& data, std::span<const std::size_t> batch) {
    MlpStack<S> grad = MlpStack<S>::zeros_like(params_);
    const auto eval = loss_and_gradient<S>(data, params_, batch, &grad);
    if (!std::isfinite(static_cast<double>(eval.loss))) throw NumericError("non-finite loss; no step taken");
    std::vector<S> g = grad.flatten();
    double norm2 = 0;
    for (S x : g) norm2 += static_cast<double>(x) * static_cast<double>(x);
    if (!std::isfinite(norm2)) throw NumericError("non-finite gradient; no step taken");
    if (cfg_.clip_norm > 0 && norm2 > cfg_.clip_norm * cfg_.clip_norm) {
      const S scale = static_cast<S>(cfg_.clip_norm / std::sqrt(norm2));
      for (S& x : g) x *= scale;
    }
    std::vector<S> w = params_.flatten();
    const S lr = static_cast<S>(cfg_.learning_rate);
    if (cfg_.optimizer == Optimizer::momentum) {
      if (velocity_.size() != g.size()) velocity_.assign(g.size(), S(0));
      const S mu = static_cast<S>(cfg_.momentum);
      for (std::size_t i = 0; i < g.size(); ++i) {
        velocity_[i] = mu * velocity_[i] + g[i];
        w[i] -= lr * velocity_[i];
      }
    } else {
      for (std::size_t i = 0; i < g.size(); ++i) w[i] -= lr * g[i];
    }
    params_.unflatten(w);
    return eval;
  }

  // One pass over all graphs in shuffled batches; returns the mean batch loss.
  S epoch(const TrainingData& data) {
    std::vector<std::size_t> order(data.plan.num_graphs());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng_() % i]);
    const std::size_t bs = cfg_.batch_size == 0 ? std::max<std::size_t>(1, order.size()) : cfg_.batch_size;
    S total = 0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      std::span<const std::size_t> batch(order.data() + start, std::min(bs, order.size() - start));
      total += backward_and_step(data, batch).loss;
      ++batches;
    }
    return batches ? total / static_cast<S>(batches) : S(0);
  }

 private:
  MlpStack<S> params_;
  TrainConfig cfg_;
  std::mt19937_64 rng_;
  std::vector<S> velocity_;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  std::string split;
  double loss = 0;
  double accuracy = 0;
};

// Trains for cfg.epochs epochs, evaluating the training split after each
// one. Stops early when `stop` returns true for the latest metrics.
template <typename S>
std::vector<EpochMetrics> train(Trainer<S>& trainer, const TrainingData& data,
                                const std::function<bool(const EpochMetrics&)>& stop = {}) {
  std::vector<EpochMetrics> history;
  for (std::size_t e = 1; e <= trainer.config().epochs; ++e) {
    trainer.epoch(data);
    const auto eval = evaluate<S>(data, trainer.params());
    history.push_back({e, "train", static_cast<double>(eval.loss), eval.accuracy()});
    if (stop && stop(history.back())) break;
  }
  return history;
}

inline void write_metrics_csv(const std::vector<EpochMetrics>& rows, std::ostream& out) {
  out << "epoch,split,loss,accuracy\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%s,%.9g,%.6f\n", r.epoch, r.split.c_str(), r.loss, r.accuracy);
    out << buf;
  }
}

// Versioned JSON checkpoint.
inline constexpr int kCheckpointVersion = 1;

namespace detail {

template <typename S>
nlohmann::json matrix_to_json(const Mat<S>& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(static_cast<double>(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename S>
Mat<S> matrix_from_json(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) throw DimensionError("checkpoint matrix shape");
  Mat<S> m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw DimensionError("checkpoint matrix shape");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = static_cast<S>(row[static_cast<std::size_t>(c)].get<double>());
  }
  return m;
}

template <typename S>
nlohmann::json mlp_to_json(const Mlp<S>& m) {
  return {{"hidden", {{"weight", matrix_to_json<S>(m.hidden.weight)}, {"bias", matrix_to_json<S>(m.hidden.bias)[0]}}},
          {"output", {{"weight", matrix_to_json<S>(m.output.weight)}, {"bias", matrix_to_json<S>(m.output.bias)[0]}}}};
}

template <typename S>
void mlp_from_json(const nlohmann::json& j, Mlp<S>& m) {
  auto load = [](const nlohmann::json& d, Dense<S>& dense) {
    dense.weight = matrix_from_json<S>(d.at("weight"), dense.weight.rows(), dense.weight.cols());
    dense.bias = matrix_from_json<S>(nlohmann::json::array({d.at("bias")}), 1, dense.bias.cols());
  };
  load(j.at("hidden"), m.hidden);
  load(j.at("output"), m.output);
}

}  // namespace detail

template <typename S>
nlohmann::json checkpoint_to_json(const MlpStack<S>& p) {
  nlohmann::json j;
  j["format"] = "ntgnn-checkpoint";
  j["version"] = kCheckpointVersion;
  j["shape"] = {{"input_dim", p.shape.input_dim},
                {"hidden_dim", p.shape.hidden_dim},
                {"embed_dim", p.shape.embed_dim},
                {"num_layers", p.shape.num_layers},
                {"num_classes", p.shape.num_classes}};
  j["readout"] = to_string(p.readout);
  j["pool"] = to_string(p.pool);
  auto eps = nlohmann::json::array();
  for (std::size_t i = 1; i < p.eps.size(); ++i) eps.push_back(static_cast<double>(p.eps[i]));
  j["eps"] = std::move(eps);
  auto mlps = nlohmann::json::array();
  for (const auto& m : p.mlps) mlps.push_back(detail::mlp_to_json(m));
  j["mlps"] = std::move(mlps);
  j["head"] = detail::mlp_to_json(p.head);
  return j;
}

template <typename S>
MlpStack<S> checkpoint_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "ntgnn-checkpoint") throw DataError("not a checkpoint file");
    if (j.at("version").get<int>() != kCheckpointVersion) throw DataError("unsupported checkpoint version");
    const auto& s = j.at("shape");
    ModelShape shape{s.at("input_dim").get<std::size_t>(), s.at("hidden_dim").get<std::size_t>(),
                     s.at("embed_dim").get<std::size_t>(), s.at("num_layers").get<std::size_t>(),
                     s.at("num_classes").get<std::size_t>()};
    auto p = MlpStack<S>::init(shape, parse_readout(j.at("readout").get<std::string>()),
                               parse_pool(j.at("pool").get<std::string>()), 0);
    const auto& eps = j.at("eps");
    const auto& mlps = j.at("mlps");
    if (eps.size() != shape.num_layers || mlps.size() != shape.num_layers + 1) {
      throw DimensionError("checkpoint layer count does not match its shape");
    }
    for (std::size_t i = 0; i < eps.size(); ++i) p.eps[i + 1] = static_cast<S>(eps[i].get<double>());
    for (std::size_t i = 0; i < mlps.size(); ++i) detail::mlp_from_json(mlps[i], p.mlps[i]);
    detail::mlp_from_json(j.at("head"), p.head);
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  }
}

}  // namespace ntgnn
