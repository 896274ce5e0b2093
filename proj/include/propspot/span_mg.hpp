#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "propspot/common.hpp"
#include "propspot/corpus.hpp"
#include "propspot/embed.hpp"
#include "propspot/eval.hpp"
#include "propspot/nn.hpp"

namespace propspot::span_mg {

struct MGConfig {
  std::size_t embedding_dim = 768;
  std::size_t article_dim = 64;
  std::size_t sentence_dim = 64;
  std::size_t token_dim = 64;
  double alpha = 0.5;  // trade-off between the regression and classification losses
  double lr = 1e-3;
  std::size_t epochs = 20;
  std::uint64_t seed = 42;
  double threshold = 0.5;  // token decision threshold
  double val_fraction = 0.05;
  bool token_only = false;  // ablation: no sentence/article context, BCE_T only
};

// Three encoders feeding three heads. The sentence head sees its encoding
// concatenated with the article encoding; the token head additionally sees
// the sentence encoding, so context flows from lower to higher granularity.
struct MGModel {
  MGConfig config;
  nn::DenseLayer enc_article;   // d -> a, relu
  nn::DenseLayer enc_sentence;  // d -> s, relu
  nn::DenseLayer enc_token;     // d -> t, relu
  nn::DenseLayer head_ratio;    // a -> 1, sigmoid
  nn::DenseLayer head_sentence;  // s+a -> 1, sigmoid
  nn::DenseLayer head_token;     // t+s+a -> 1 (t -> 1 when token_only), sigmoid

  std::vector<nn::ParamBlock> param_blocks();
  void zero_grads();
};

MGModel init_model(const MGConfig& config);

void save_model(const std::filesystem::path& path, const MGModel& model);
MGModel load_model(const std::filesystem::path& path);

// One article per batch: the propaganda-ratio target is article-level, so a
// batch must contain a whole article.
struct MGBatch {
  std::string article_id;
  Vec title_embedding;
  std::vector<Vec> sentence_embeddings;
  std::vector<Vec> token_embeddings;
  std::vector<std::size_t> token_sentence;  // owning sentence per token
  std::vector<corpus::Token> tokens;
  double ratio_target = 0.0;
  std::vector<int> sentence_labels;
  std::vector<int> token_labels;
  std::vector<char> token_in_train;  // loss mask; empty = all tokens
};

// Fraction of sentences that contain a propaganda span.
double propaganda_ratio(const std::vector<int>& sentence_labels);

MGBatch build_batch(const corpus::Article& article, const std::vector<corpus::Token>& tokens,
                    const embed::EmbeddingProvider& provider);
MGBatch build_batch(const corpus::LabeledArticle& article,
                    const embed::EmbeddingProvider& provider);

struct MGOutputs {
  double ratio_pred = 0.0;
  Vec sentence_probs;
  Vec token_probs;
};

MGOutputs mg_forward(const MGModel& model, const MGBatch& batch);

struct MGLossParts {
  double sl1_article = 0.0;
  double bce_sentence = 0.0;
  double bce_token = 0.0;
  double combined = 0.0;
};

double combine_losses(double sl1_article, double bce_sentence, double bce_token, double alpha);

// Combined objective over one batch; token BCE averages over the batch's
// train mask when one is set.
MGLossParts mg_loss(const MGOutputs& outputs, const MGBatch& batch, double alpha);

// Forward + analytic backward; gradients accumulate into the model layers.
MGLossParts mg_forward_backward(MGModel& model, const MGBatch& batch);

// Smallest |pre-activation| over the relu encoders; a finite-difference check
// near a kink is meaningless, so callers resample when this is tiny.
double min_relu_margin(const MGModel& model, const MGBatch& batch);

struct EpochLog {
  std::size_t epoch = 0;
  double sl1_article = 0.0;
  double bce_sentence = 0.0;
  double bce_token = 0.0;
  double combined = 0.0;
  eval::BinaryMetrics val;
};

struct TrainResult {
  MGModel model;
  std::vector<EpochLog> log;
  double best_val_f1 = 0.0;
};

// Joint training over all granularities, one optimization step per article
// per epoch. The 95-5 token split drives checkpoint selection by validation
// token-F1.
TrainResult train_si(const corpus::LabeledCorpus& corpus, const embed::EmbeddingProvider& provider,
                     const MGConfig& config);

// Tokens above the threshold merge into spans over maximal consecutive runs
// within a sentence.
std::vector<corpus::SpanLabel> predict_spans(const MGModel& model, const corpus::Article& article,
                                             const embed::EmbeddingProvider& provider,
                                             double threshold = 0.5);

std::string format_training_log(const std::vector<EpochLog>& log);

}  // namespace propspot::span_mg
