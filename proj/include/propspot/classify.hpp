#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "propspot/common.hpp"
#include "propspot/corpus.hpp"
#include "propspot/embed.hpp"
#include "propspot/features.hpp"
#include "propspot/nn.hpp"

namespace propspot::classify {

using SparseRow = std::vector<std::pair<std::size_t, double>>;

// w_c = N / (K * n_c); the weighted class masses n_c * w_c all equal N / K.
Vec class_weights(const std::vector<long>& counts);

struct LogRegModel {
  std::size_t n_features = 0;
  std::vector<std::string> class_names;
  nn::Matrix weight;  // K x D
  Vec bias;           // K
  double lambda = 1.0;
  Vec class_weight;
  nn::Matrix grad_weight;
  Vec grad_bias;

  Vec predict_logits(const SparseRow& x) const;
  Vec predict_proba(const SparseRow& x) const;
  std::vector<nn::ParamBlock> param_blocks();
};

struct LogRegConfig {
  double lambda = 1.0;
  double lr = 0.05;
  std::size_t epochs = 500;
  std::uint64_t seed = 0;  // kept for interface symmetry; fitting is zero-init
};

struct LogRegFit {
  LogRegModel model;
  std::vector<double> objective_trace;  // per accepted epoch, non-increasing
};

// Full-batch Adam on mean class-weighted softmax cross-entropy plus
// lambda * ||W||^2 (bias unregularized). An epoch that raises the objective
// is rolled back and retried at half the learning rate, so the recorded
// trace never increases.
LogRegFit logreg_fit(const std::vector<SparseRow>& x, const std::vector<std::size_t>& y,
                     std::size_t n_features, const std::vector<std::string>& class_names,
                     const Vec& class_weight, const LogRegConfig& config);

double logreg_objective(const LogRegModel& model, const std::vector<SparseRow>& x,
                        const std::vector<std::size_t>& y);

// Zeroes the model's gradient buffers, then accumulates the full-batch
// objective gradients; returns the objective value.
double logreg_backward(LogRegModel& model, const std::vector<SparseRow>& x,
                       const std::vector<std::size_t>& y);

struct MinMaxScaler {
  Vec min;
  Vec max;
};

MinMaxScaler minmax_fit(const std::vector<Vec>& rows);
// (x - min) / (max - min); constant dimensions map to 0; no clamping for
// out-of-fit-range inputs.
Vec minmax_apply(const MinMaxScaler& scaler, const Vec& row);

struct NeuralTCConfig {
  std::size_t hidden_dim = 16;
  double lr = 0.01;
  std::size_t epochs = 300;
  double val_fraction = 0.1;  // 0 disables checkpoint selection
  std::uint64_t seed = 42;
};

// One hidden affine+relu layer and a linear output layer over the
// mean-pooled frozen embeddings of a span's tokens.
struct NeuralTC {
  std::size_t input_dim = 0;
  std::vector<std::string> class_names;
  nn::DenseLayer hidden;  // d -> h, relu
  nn::DenseLayer output;  // h -> K, identity
  NeuralTCConfig config;

  Vec logits(const Vec& pooled) const;
  std::vector<nn::ParamBlock> param_blocks();
};

NeuralTC neural_tc_fit(const std::vector<Vec>& pooled, const std::vector<std::size_t>& labels,
                       const std::vector<std::string>& class_names, const Vec& class_weight,
                       const NeuralTCConfig& config);

// Span -> mean-pooled token embedding + raw text, resolved against articles.
struct TCDataset {
  std::vector<Vec> pooled;
  std::vector<std::string> texts;
  std::vector<std::size_t> labels;           // empty when building from bare spans
  std::vector<std::size_t> kept;             // indices into the input list
  std::vector<std::size_t> skipped;          // spans with no tokens
};

// require_labels resolves techniques to class indices (training/scoring).
// unk_for_empty keeps tokenless spans by substituting the provider's unk
// vector (prediction must emit a row per input span); otherwise such spans
// are skipped with a warning.
TCDataset build_tc_dataset(const std::vector<corpus::TechniqueInstance>& spans,
                           const std::vector<corpus::Article>& articles,
                           const embed::EmbeddingProvider& provider, bool require_labels,
                           bool unk_for_empty = false);

struct EnsembleConfig {
  LogRegConfig logreg;          // feature member and meta share these
  NeuralTCConfig neural;
  features::PipelineConfig pipeline;
  bool out_of_fold = false;  // 5-fold member outputs for the meta stage
  std::size_t folds = 5;
  std::uint64_t seed = 42;
};

// Stacking: neural logits and feature-member probabilities, each min-max
// scaled, concatenated (neural first) into the meta logistic regression.
struct EnsembleModel {
  std::vector<std::string> class_order;
  NeuralTC neural;
  LogRegModel feature_member;
  features::FeaturePipeline pipeline;
  MinMaxScaler scaler_neural;
  MinMaxScaler scaler_feature;
  LogRegModel meta;

  Vec member_neural(const Vec& pooled) const;           // logits
  Vec member_feature(const std::string& text) const;    // probabilities
  Vec meta_input(const Vec& pooled, const std::string& text) const;  // 2K wide
};

EnsembleModel ensemble_fit(const std::vector<corpus::TechniqueInstance>& train_spans,
                           const std::vector<corpus::Article>& articles,
                           const embed::EmbeddingProvider& provider,
                           const EnsembleConfig& config);

struct TCPrediction {
  std::string technique;
  Vec probabilities;
};

TCPrediction ensemble_predict(const EnsembleModel& model, const Vec& pooled,
                              const std::string& text);

void save_ensemble(const std::filesystem::path& path, const EnsembleModel& model);
EnsembleModel load_ensemble(const std::filesystem::path& path);

}  // namespace propspot::classify
