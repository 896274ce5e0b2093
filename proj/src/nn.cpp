#include "propspot/nn.hpp"

#include <algorithm>
#include <cmath>

#include "propspot/rng.hpp"

namespace propspot::nn {

namespace {
constexpr double kProbClamp = 1e-7;

double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }
}  // namespace

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

DenseLayer::DenseLayer(std::size_t in, std::size_t out, Activation act)
    : weight(out, in),
      bias(out, 0.0),
      activation(act),
      grad_weight(out, in),
      grad_bias(out, 0.0) {}

Vec DenseLayer::forward(const Vec& x, Vec* pre) const {
  if (x.size() != weight.cols) {
    throw ValidationError("dense_forward: input dimension " + std::to_string(x.size()) +
                          " does not match layer input " + std::to_string(weight.cols));
  }
  Vec z(weight.rows, 0.0);
  for (std::size_t r = 0; r < weight.rows; ++r) {
    double acc = bias[r];
    const double* wr = &weight.data[r * weight.cols];
    for (std::size_t c = 0; c < weight.cols; ++c) acc += wr[c] * x[c];
    z[r] = acc;
  }
  if (pre != nullptr) *pre = z;
  switch (activation) {
    case Activation::Identity:
      return z;
    case Activation::Relu:
      for (double& v : z) v = v > 0.0 ? v : 0.0;
      return z;
    case Activation::Sigmoid:
      for (double& v : z) v = sigmoid(v);
      return z;
  }
  return z;
}

Vec DenseLayer::backward(const Vec& x, const Vec& pre, const Vec& dy) {
  if (dy.size() != weight.rows || pre.size() != weight.rows || x.size() != weight.cols) {
    throw ValidationError("dense_backward: shape mismatch");
  }
  Vec dz(weight.rows, 0.0);
  for (std::size_t r = 0; r < weight.rows; ++r) {
    switch (activation) {
      case Activation::Identity:
        dz[r] = dy[r];
        break;
      case Activation::Relu:
        dz[r] = pre[r] > 0.0 ? dy[r] : 0.0;
        break;
      case Activation::Sigmoid: {
        const double s = sigmoid(pre[r]);
        dz[r] = dy[r] * s * (1.0 - s);
        break;
      }
    }
  }
  Vec dx(weight.cols, 0.0);
  for (std::size_t r = 0; r < weight.rows; ++r) {
    const double g = dz[r];
    if (g == 0.0) continue;
    double* gw = &grad_weight.data[r * weight.cols];
    const double* wr = &weight.data[r * weight.cols];
    for (std::size_t c = 0; c < weight.cols; ++c) {
      gw[c] += g * x[c];
      dx[c] += g * wr[c];
    }
  }
  for (std::size_t r = 0; r < weight.rows; ++r) grad_bias[r] += dz[r];
  return dx;
}

void DenseLayer::zero_grad() {
  std::fill(grad_weight.data.begin(), grad_weight.data.end(), 0.0);
  std::fill(grad_bias.begin(), grad_bias.end(), 0.0);
}

LossValue smooth_l1(const Vec& pred, const Vec& target, double beta) {
  if (pred.size() != target.size()) {
    throw ValidationError("smooth_l1: length mismatch");
  }
  if (!(beta > 0.0)) {
    throw ValidationError("smooth_l1: beta must be positive");
  }
  LossValue loss;
  loss.grad.assign(pred.size(), 0.0);
  const double n = static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    if (std::abs(d) < beta) {
      loss.value += 0.5 * d * d / beta;
      loss.grad[i] = d / beta / n;
    } else {
      loss.value += std::abs(d) - 0.5 * beta;
      loss.grad[i] = (d > 0.0 ? 1.0 : -1.0) / n;
    }
  }
  loss.value /= n;
  return loss;
}

LossValue bce(const Vec& prob, const Vec& label) {
  if (prob.size() != label.size()) {
    throw ValidationError("bce: length mismatch");
  }
  LossValue loss;
  loss.grad.assign(prob.size(), 0.0);
  const double n = static_cast<double>(prob.size());
  for (std::size_t i = 0; i < prob.size(); ++i) {
    const double p = clamp_prob(prob[i]);
    const double y = label[i];
    loss.value += -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
    loss.grad[i] = (p - y) / (p * (1.0 - p)) / n;
  }
  loss.value /= n;
  return loss;
}

Vec softmax(const Vec& logits) {
  Vec out(logits.size(), 0.0);
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

LossValue softmax_ce(const Vec& logits, std::size_t class_index, double class_weight) {
  if (class_index >= logits.size()) {
    throw ValidationError("softmax_ce: class index out of range");
  }
  const Vec p = softmax(logits);
  LossValue loss;
  loss.value = -class_weight * std::log(std::max(p[class_index], kProbClamp));
  loss.grad.assign(logits.size(), 0.0);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    loss.grad[i] = class_weight * (p[i] - (i == class_index ? 1.0 : 0.0));
  }
  return loss;
}

void adam_step(const AdamConfig& config, std::span<ParamBlock> blocks,
               std::vector<AdamState>& states) {
  if (states.size() != blocks.size()) {
    states.assign(blocks.size(), AdamState{});
  }
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    auto& block = blocks[b];
    auto& state = states[b];
    auto& value = *block.value;
    const auto& grad = *block.grad;
    if (state.m.size() != value.size()) {
      state.m.assign(value.size(), 0.0);
      state.v.assign(value.size(), 0.0);
      state.t = 0;
    }
    for (double g : grad) {
      if (!std::isfinite(g)) {
        throw ValidationError("adam_step: non-finite gradient in parameter block \"" +
                              block.name + "\"");
      }
    }
    state.t += 1;
    const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < value.size(); ++i) {
      state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * grad[i];
      state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
      const double mhat = state.m[i] / bc1;
      const double vhat = state.v[i] / bc2;
      value[i] -= config.lr * mhat / (std::sqrt(vhat) + config.eps);
    }
  }
}

std::vector<double> grad_check_per_block(std::span<ParamBlock> blocks,
                                         const std::function<double()>& loss,
                                         const std::function<void()>& compute_grads,
                                         double epsilon) {
  compute_grads();
  // Copy out the analytics before the perturbation loop touches anything.
  std::vector<std::vector<double>> analytic;
  analytic.reserve(blocks.size());
  for (const auto& b : blocks) analytic.push_back(*b.grad);

  std::vector<double> per_block(blocks.size(), 0.0);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    auto& value = *blocks[b].value;
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double saved = value[i];
      value[i] = saved + epsilon;
      const double up = loss();
      value[i] = saved - epsilon;
      const double down = loss();
      value[i] = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double a = analytic[b][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
      per_block[b] = std::max(per_block[b], std::abs(a - numeric) / denom);
    }
  }
  return per_block;
}

double grad_check(std::span<ParamBlock> blocks, const std::function<double()>& loss,
                  const std::function<void()>& compute_grads, double epsilon) {
  const auto per_block = grad_check_per_block(blocks, loss, compute_grads, epsilon);
  double max_rel = 0.0;
  for (double r : per_block) max_rel = std::max(max_rel, r);
  return max_rel;
}

void init_layer(DenseLayer& layer, Rng& rng, double scale) {
  for (double& w : layer.weight.data) w = rng.normal() * scale;
  std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
}

}  // namespace propspot::nn
