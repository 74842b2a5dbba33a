// Central finite differences against the analytic gradient.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "ntgnn/generators.hpp"
#include "ntgnn/train.hpp"

namespace oracle {

struct GradCheck {
  double max_rel_error = 0;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
  // Some probe theta +- step flipped a ReLU, so the central difference
  // straddles a kink and says nothing about the derivative at theta.
  bool crosses_kink = false;
};

// Sign pattern of every hidden ReLU pre-activation in the full forward pass.
inline std::vector<bool> relu_pattern(const ntgnn::TrainingData& data, const ntgnn::MlpStack<double>& p,
                                      ntgnn::FirstAddend mode) {
  std::vector<bool> out;
  auto add = [&out](const ntgnn::Mat<double>& pre) {
    for (Eigen::Index i = 0; i < pre.size(); ++i) out.push_back(pre.data()[i] > 0);
  };
  const auto fw = ntgnn::forward_dag(data.matrices, p, mode);
  add(fw.mlp0_cache.pre);
  for (const auto& c : fw.layer_cache) add(c.pre);
  ntgnn::Mlp<double>::Cache head;
  p.head.forward(ntgnn::readout(fw.x, data.plan, p.readout, p.pool), &head);
  add(head.pre);
  return out;
}

// Relative error |a - n| / max(|a|, |n|, floor); the floor keeps
// parameters whose true gradient is (numerically) zero from dividing
// rounding noise by itself.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

// Random biases and eps in [-0.5, 0.5). Zero biases put pre-activations
// exactly on the ReLU kink (e.g. behind a dead unit), where a central
// difference does not estimate the one-sided derivative backprop uses.
inline void randomize_offsets(ntgnn::MlpStack<double>& p, std::mt19937_64& rng) {
  auto draw = [&rng] { return ntgnn::uniform01(rng) - 0.5; };
  auto fill = [&](ntgnn::Mlp<double>& m) {
    for (auto* b : {&m.hidden.bias, &m.output.bias}) {
      for (Eigen::Index i = 0; i < b->size(); ++i) (*b)(i) = draw();
    }
  };
  for (auto& m : p.mlps) fill(m);
  fill(p.head);
  for (std::size_t i = 1; i < p.eps.size(); ++i) p.eps[i] = draw();
}

inline GradCheck check_gradient(const ntgnn::TrainingData& data, const ntgnn::MlpStack<double>& p,
                                ntgnn::FirstAddend mode = ntgnn::FirstAddend::initial, double step = 1e-5) {
  std::vector<std::size_t> all(data.plan.num_graphs());
  std::iota(all.begin(), all.end(), std::size_t{0});
  auto grad = ntgnn::MlpStack<double>::zeros_like(p);
  ntgnn::loss_and_gradient<double>(data, p, all, &grad, mode);
  const auto analytic = grad.flatten();
  auto theta = p.flatten();
  auto probe = p;
  const auto base_pattern = relu_pattern(data, p, mode);
  GradCheck out;
  auto loss_at = [&](std::size_t i, double value) {
    const double saved = theta[i];
    theta[i] = value;
    probe.unflatten(theta);
    theta[i] = saved;
    if (relu_pattern(data, probe, mode) != base_pattern) out.crosses_kink = true;
    return ntgnn::loss_and_gradient<double>(data, probe, all, nullptr, mode).loss;
  };
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double numeric = (loss_at(i, theta[i] + step) - loss_at(i, theta[i] - step)) / (2 * step);
    const double rel = relative_error(analytic[i], numeric);
    if (rel > out.max_rel_error) {
      out.max_rel_error = rel;
      out.worst_index = i;
    }
    ++out.checked;
  }
  return out;
}

}  // namespace oracle
