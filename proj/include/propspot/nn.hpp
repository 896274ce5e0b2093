#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "propspot/common.hpp"

namespace propspot {
class Rng;
}

namespace propspot::nn {

// All numerics are 64-bit so finite-difference checks stay reliable.

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

enum class Activation { Identity, Relu, Sigmoid };

double sigmoid(double z);

// Single affine layer with a pointwise activation. Gradients accumulate in
// grad_weight/grad_bias until zero_grad().
struct DenseLayer {
  Matrix weight;  // out x in
  Vec bias;       // out
  Activation activation = Activation::Identity;
  Matrix grad_weight;
  Vec grad_bias;

  DenseLayer() = default;
  DenseLayer(std::size_t in, std::size_t out, Activation act);

  std::size_t in_dim() const { return weight.cols; }
  std::size_t out_dim() const { return weight.rows; }

  // y = act(Wx + b); pre (optional) receives the pre-activation, needed by
  // backward and by relu kink-margin tracking.
  Vec forward(const Vec& x, Vec* pre = nullptr) const;

  // dy is the gradient w.r.t. the post-activation output. Accumulates into
  // grad_weight/grad_bias and returns the gradient w.r.t. x.
  Vec backward(const Vec& x, const Vec& pre, const Vec& dy);

  void zero_grad();
};

// Scalar loss plus gradient w.r.t. the predictions it was computed from.
struct LossValue {
  double value = 0.0;
  Vec grad;
};

// Piecewise quadratic/linear regression loss, mean over elements. The
// gradient is bounded by 1/N per element once |pred - target| >= beta.
LossValue smooth_l1(const Vec& pred, const Vec& target, double beta = 1.0);

// Binary cross-entropy, mean over elements; probabilities are clamped to
// [1e-7, 1 - 1e-7] so the loss stays finite on saturated sigmoids.
LossValue bce(const Vec& prob, const Vec& label);

Vec softmax(const Vec& logits);

// -w * ln softmax(logits)[class_index], max-subtracted for stability.
LossValue softmax_ce(const Vec& logits, std::size_t class_index, double class_weight = 1.0);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  Vec m;
  Vec v;
  std::int64_t t = 0;
};

// Named view over one parameter tensor and its gradient buffer.
struct ParamBlock {
  std::string name;
  std::vector<double>* value = nullptr;
  std::vector<double>* grad = nullptr;
};

// Standard bias-corrected update over each block; one shared step counter per
// state vector entry. Throws on non-finite gradients, naming the block.
void adam_step(const AdamConfig& config, std::span<ParamBlock> blocks,
               std::vector<AdamState>& states);

// Compares the analytic gradients (accumulated into the blocks by
// compute_grads) against central finite differences of loss(). Relative
// error per element is |a - n| / max(|a|, |n|, 1e-6); one entry per block.
std::vector<double> grad_check_per_block(std::span<ParamBlock> blocks,
                                         const std::function<double()>& loss,
                                         const std::function<void()>& compute_grads,
                                         double epsilon = 1e-4);

// Max relative error over every parameter of every block.
double grad_check(std::span<ParamBlock> blocks, const std::function<double()>& loss,
                  const std::function<void()>& compute_grads, double epsilon = 1e-4);

// Gaussian init with the given scale; biases start at zero.
void init_layer(DenseLayer& layer, Rng& rng, double scale);

}  // namespace propspot::nn
