#include "propspot/span_mg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <nlohmann/json.hpp>

#include "propspot/io_util.hpp"
#include "propspot/rng.hpp"

namespace propspot::span_mg {

using nlohmann::json;

namespace {

Vec concat2(const Vec& a, const Vec& b) {
  Vec out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

Vec concat3(const Vec& a, const Vec& b, const Vec& c) {
  Vec out;
  out.reserve(a.size() + b.size() + c.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  out.insert(out.end(), c.begin(), c.end());
  return out;
}

json layer_to_json(const nn::DenseLayer& layer) {
  json j;
  j["in"] = layer.in_dim();
  j["out"] = layer.out_dim();
  switch (layer.activation) {
    case nn::Activation::Identity: j["activation"] = "identity"; break;
    case nn::Activation::Relu: j["activation"] = "relu"; break;
    case nn::Activation::Sigmoid: j["activation"] = "sigmoid"; break;
  }
  json rows = json::array();
  for (std::size_t r = 0; r < layer.out_dim(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < layer.in_dim(); ++c) row.push_back(layer.weight(r, c));
    rows.push_back(std::move(row));
  }
  j["weight"] = std::move(rows);
  j["bias"] = layer.bias;
  return j;
}

nn::DenseLayer layer_from_json(const json& j) {
  const std::size_t in = j.at("in").get<std::size_t>();
  const std::size_t out = j.at("out").get<std::size_t>();
  const std::string act = j.at("activation").get<std::string>();
  nn::Activation activation = nn::Activation::Identity;
  if (act == "relu") activation = nn::Activation::Relu;
  else if (act == "sigmoid") activation = nn::Activation::Sigmoid;
  else if (act != "identity") throw ParseError("unknown activation \"" + act + "\"");
  nn::DenseLayer layer(in, out, activation);
  const auto& rows = j.at("weight");
  if (rows.size() != out) throw ParseError("weight row count mismatch");
  for (std::size_t r = 0; r < out; ++r) {
    const auto& row = rows[r];
    if (row.size() != in) throw ParseError("weight column count mismatch");
    for (std::size_t c = 0; c < in; ++c) layer.weight(r, c) = row[c].get<double>();
  }
  const auto& bias = j.at("bias");
  if (bias.size() != out) throw ParseError("bias length mismatch");
  for (std::size_t r = 0; r < out; ++r) layer.bias[r] = bias[r].get<double>();
  return layer;
}

struct ForwardCache {
  Vec pre_article, enc_article_out;
  double pre_ratio = 0.0;
  std::vector<Vec> pre_sentence, enc_sentence_out, sentence_head_input;
  Vec pre_sentence_head;
  std::vector<Vec> pre_token, enc_token_out, token_head_input;
  Vec pre_token_head;
};

// Shared by mg_forward / mg_forward_backward / min_relu_margin.
MGOutputs run_forward(const MGModel& model, const MGBatch& batch, ForwardCache* cache) {
  const bool token_only = model.config.token_only;
  MGOutputs out;

  Vec enc_a;
  if (!token_only) {
    Vec pre_a;
    enc_a = model.enc_article.forward(batch.title_embedding, &pre_a);
    Vec pre_r;
    const Vec r = model.head_ratio.forward(enc_a, &pre_r);
    out.ratio_pred = r[0];
    if (cache != nullptr) {
      cache->pre_article = std::move(pre_a);
      cache->enc_article_out = enc_a;
      cache->pre_ratio = pre_r[0];
    }
  } else {
    out.ratio_pred = 0.5;
  }

  std::vector<Vec> enc_s(batch.sentence_embeddings.size());
  if (!token_only) {
    out.sentence_probs.resize(batch.sentence_embeddings.size());
    if (cache != nullptr) {
      cache->pre_sentence.resize(enc_s.size());
      cache->enc_sentence_out.resize(enc_s.size());
      cache->sentence_head_input.resize(enc_s.size());
      cache->pre_sentence_head.resize(enc_s.size());
    }
    for (std::size_t i = 0; i < batch.sentence_embeddings.size(); ++i) {
      Vec pre_s;
      enc_s[i] = model.enc_sentence.forward(batch.sentence_embeddings[i], &pre_s);
      Vec u = concat2(enc_s[i], enc_a);
      Vec pre_p;
      const Vec p = model.head_sentence.forward(u, &pre_p);
      out.sentence_probs[i] = p[0];
      if (cache != nullptr) {
        cache->pre_sentence[i] = std::move(pre_s);
        cache->enc_sentence_out[i] = enc_s[i];
        cache->sentence_head_input[i] = std::move(u);
        cache->pre_sentence_head[i] = pre_p[0];
      }
    }
  } else {
    out.sentence_probs.assign(batch.sentence_embeddings.size(), 0.5);
  }

  out.token_probs.resize(batch.token_embeddings.size());
  if (cache != nullptr) {
    cache->pre_token.resize(batch.token_embeddings.size());
    cache->enc_token_out.resize(batch.token_embeddings.size());
    cache->token_head_input.resize(batch.token_embeddings.size());
    cache->pre_token_head.resize(batch.token_embeddings.size());
  }
  for (std::size_t j = 0; j < batch.token_embeddings.size(); ++j) {
    Vec pre_t;
    Vec enc_t = model.enc_token.forward(batch.token_embeddings[j], &pre_t);
    Vec v = token_only ? enc_t : concat3(enc_t, enc_s[batch.token_sentence[j]], enc_a);
    Vec pre_q;
    const Vec q = model.head_token.forward(v, &pre_q);
    out.token_probs[j] = q[0];
    if (cache != nullptr) {
      cache->pre_token[j] = std::move(pre_t);
      cache->enc_token_out[j] = std::move(enc_t);
      cache->token_head_input[j] = std::move(v);
      cache->pre_token_head[j] = pre_q[0];
    }
  }
  return out;
}

}  // namespace

std::vector<nn::ParamBlock> MGModel::param_blocks() {
  std::vector<nn::ParamBlock> blocks;
  const auto add = [&blocks](const std::string& name, nn::DenseLayer& layer) {
    blocks.push_back({name + ".weight", &layer.weight.data, &layer.grad_weight.data});
    blocks.push_back({name + ".bias", &layer.bias, &layer.grad_bias});
  };
  add("enc_article", enc_article);
  add("enc_sentence", enc_sentence);
  add("enc_token", enc_token);
  add("head_ratio", head_ratio);
  add("head_sentence", head_sentence);
  add("head_token", head_token);
  return blocks;
}

void MGModel::zero_grads() {
  enc_article.zero_grad();
  enc_sentence.zero_grad();
  enc_token.zero_grad();
  head_ratio.zero_grad();
  head_sentence.zero_grad();
  head_token.zero_grad();
}

MGModel init_model(const MGConfig& config) {
  if (config.embedding_dim == 0 || config.article_dim == 0 || config.sentence_dim == 0 ||
      config.token_dim == 0) {
    throw ValidationError("mg: encoder dimensions must be at least 1");
  }
  if (!(config.alpha >= 0.0 && config.alpha <= 1.0)) {
    throw ValidationError("mg: alpha must lie in [0, 1]");
  }
  if (!(config.threshold > 0.0 && config.threshold < 1.0)) {
    throw ValidationError("mg: threshold must lie in (0, 1)");
  }
  MGModel model;
  model.config = config;
  const std::size_t d = config.embedding_dim;
  const std::size_t a = config.article_dim;
  const std::size_t s = config.sentence_dim;
  const std::size_t t = config.token_dim;
  model.enc_article = nn::DenseLayer(d, a, nn::Activation::Relu);
  model.enc_sentence = nn::DenseLayer(d, s, nn::Activation::Relu);
  model.enc_token = nn::DenseLayer(d, t, nn::Activation::Relu);
  model.head_ratio = nn::DenseLayer(a, 1, nn::Activation::Sigmoid);
  model.head_sentence = nn::DenseLayer(s + a, 1, nn::Activation::Sigmoid);
  model.head_token =
      nn::DenseLayer(config.token_only ? t : t + s + a, 1, nn::Activation::Sigmoid);

  Rng rng(config.seed);
  nn::init_layer(model.enc_article, rng, 1.0 / std::sqrt(static_cast<double>(d)));
  nn::init_layer(model.enc_sentence, rng, 1.0 / std::sqrt(static_cast<double>(d)));
  nn::init_layer(model.enc_token, rng, 1.0 / std::sqrt(static_cast<double>(d)));
  nn::init_layer(model.head_ratio, rng, 1.0 / std::sqrt(static_cast<double>(a)));
  nn::init_layer(model.head_sentence, rng, 1.0 / std::sqrt(static_cast<double>(s + a)));
  nn::init_layer(model.head_token, rng,
                 1.0 / std::sqrt(static_cast<double>(model.head_token.in_dim())));
  return model;
}

void save_model(const std::filesystem::path& path, const MGModel& model) {
  json j;
  j["format_version"] = 1;
  j["kind"] = "mg_model";
  json cfg;
  cfg["embedding_dim"] = model.config.embedding_dim;
  cfg["article_dim"] = model.config.article_dim;
  cfg["sentence_dim"] = model.config.sentence_dim;
  cfg["token_dim"] = model.config.token_dim;
  cfg["alpha"] = model.config.alpha;
  cfg["lr"] = model.config.lr;
  cfg["epochs"] = model.config.epochs;
  cfg["seed"] = model.config.seed;
  cfg["threshold"] = model.config.threshold;
  cfg["val_fraction"] = model.config.val_fraction;
  cfg["token_only"] = model.config.token_only;
  j["config"] = std::move(cfg);
  json layers;
  layers["enc_article"] = layer_to_json(model.enc_article);
  layers["enc_sentence"] = layer_to_json(model.enc_sentence);
  layers["enc_token"] = layer_to_json(model.enc_token);
  layers["head_ratio"] = layer_to_json(model.head_ratio);
  layers["head_sentence"] = layer_to_json(model.head_sentence);
  layers["head_token"] = layer_to_json(model.head_token);
  j["layers"] = std::move(layers);
  io::atomic_write_file(path, j.dump(2) + "\n");
}

MGModel load_model(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (j.value("format_version", 0) != 1 || j.value("kind", "") != "mg_model") {
    throw ParseError(path.string() + ": not a version-1 mg_model document");
  }
  MGModel model;
  const auto& cfg = j.at("config");
  model.config.embedding_dim = cfg.at("embedding_dim").get<std::size_t>();
  model.config.article_dim = cfg.at("article_dim").get<std::size_t>();
  model.config.sentence_dim = cfg.at("sentence_dim").get<std::size_t>();
  model.config.token_dim = cfg.at("token_dim").get<std::size_t>();
  model.config.alpha = cfg.at("alpha").get<double>();
  model.config.lr = cfg.at("lr").get<double>();
  model.config.epochs = cfg.at("epochs").get<std::size_t>();
  model.config.seed = cfg.at("seed").get<std::uint64_t>();
  model.config.threshold = cfg.at("threshold").get<double>();
  model.config.val_fraction = cfg.at("val_fraction").get<double>();
  model.config.token_only = cfg.at("token_only").get<bool>();
  const auto& layers = j.at("layers");
  model.enc_article = layer_from_json(layers.at("enc_article"));
  model.enc_sentence = layer_from_json(layers.at("enc_sentence"));
  model.enc_token = layer_from_json(layers.at("enc_token"));
  model.head_ratio = layer_from_json(layers.at("head_ratio"));
  model.head_sentence = layer_from_json(layers.at("head_sentence"));
  model.head_token = layer_from_json(layers.at("head_token"));
  return model;
}

double propaganda_ratio(const std::vector<int>& sentence_labels) {
  if (sentence_labels.empty()) {
    throw ValidationError("propaganda_ratio: article has no sentences");
  }
  std::size_t positives = 0;
  for (int l : sentence_labels) positives += static_cast<std::size_t>(l != 0);
  return static_cast<double>(positives) / static_cast<double>(sentence_labels.size());
}

MGBatch build_batch(const corpus::Article& article, const std::vector<corpus::Token>& tokens,
                    const embed::EmbeddingProvider& provider) {
  MGBatch batch;
  batch.article_id = article.id;
  batch.tokens = tokens;
  batch.token_sentence.reserve(tokens.size());
  batch.token_embeddings.reserve(tokens.size());

  // Pieces pooled per sentence; empty sentences fall back to the unk vector,
  // like empty titles do.
  std::vector<std::vector<Vec>> sentence_pieces(article.sentences.size());
  std::vector<std::size_t> within_sentence_counter(article.sentences.size(), 0);
  for (const auto& token : tokens) {
    const std::size_t s = token.sentence_index;
    embed::TokenRef ref{&article.id, s, within_sentence_counter[s]++, &token.text};
    auto pieces = provider.pieces(ref);
    batch.token_embeddings.push_back(provider.token_embedding(ref));
    batch.token_sentence.push_back(s);
    for (auto& p : pieces) sentence_pieces[s].push_back(std::move(p));
  }
  batch.sentence_embeddings.resize(article.sentences.size());
  for (std::size_t i = 0; i < article.sentences.size(); ++i) {
    batch.sentence_embeddings[i] =
        sentence_pieces[i].empty() ? provider.unk() : embed::pool_mean(sentence_pieces[i]);
  }
  batch.title_embedding =
      sentence_pieces.empty() || sentence_pieces[0].empty() ? provider.unk()
                                                            : embed::pool_mean(sentence_pieces[0]);
  return batch;
}

MGBatch build_batch(const corpus::LabeledArticle& article,
                    const embed::EmbeddingProvider& provider) {
  MGBatch batch = build_batch(article.article, article.tokens, provider);
  batch.ratio_target = article.ratio_target;
  batch.sentence_labels = article.sentence_labels;
  batch.token_labels = article.token_labels;
  return batch;
}

MGOutputs mg_forward(const MGModel& model, const MGBatch& batch) {
  if (!batch.token_embeddings.empty() &&
      batch.token_embeddings.front().size() != model.config.embedding_dim) {
    throw ValidationError("mg_forward: embedding dimension mismatch");
  }
  return run_forward(model, batch, nullptr);
}

double combine_losses(double sl1_article, double bce_sentence, double bce_token, double alpha) {
  return alpha * sl1_article + (1.0 - alpha) * (bce_sentence + bce_token);
}

namespace {

// Token BCE over the batch's train mask; returns per-token gradient scatter.
nn::LossValue masked_token_bce(const MGOutputs& outputs, const MGBatch& batch, Vec* scatter) {
  if (batch.token_labels.size() != outputs.token_probs.size()) {
    throw ValidationError("mg: token label count does not match token count");
  }
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < outputs.token_probs.size(); ++j) {
    if (batch.token_in_train.empty() || batch.token_in_train[j]) active.push_back(j);
  }
  nn::LossValue loss;
  if (scatter != nullptr) scatter->assign(outputs.token_probs.size(), 0.0);
  if (active.empty()) {
    loss.value = 0.0;
    return loss;
  }
  Vec probs(active.size()), labels(active.size());
  for (std::size_t k = 0; k < active.size(); ++k) {
    probs[k] = outputs.token_probs[active[k]];
    labels[k] = static_cast<double>(batch.token_labels[active[k]]);
  }
  loss = nn::bce(probs, labels);
  if (scatter != nullptr) {
    for (std::size_t k = 0; k < active.size(); ++k) (*scatter)[active[k]] = loss.grad[k];
  }
  return loss;
}

}  // namespace

MGLossParts mg_loss(const MGOutputs& outputs, const MGBatch& batch, double alpha) {
  MGLossParts parts;
  if (outputs.token_probs.size() != batch.token_labels.size()) {
    throw ValidationError("mg_loss: token label count mismatch");
  }
  parts.bce_token = masked_token_bce(outputs, batch, nullptr).value;
  if (!outputs.sentence_probs.empty() && !batch.sentence_labels.empty()) {
    Vec labels(batch.sentence_labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
      labels[i] = static_cast<double>(batch.sentence_labels[i]);
    parts.bce_sentence = nn::bce(outputs.sentence_probs, labels).value;
    parts.sl1_article = nn::smooth_l1({outputs.ratio_pred}, {batch.ratio_target}).value;
  }
  parts.combined = combine_losses(parts.sl1_article, parts.bce_sentence, parts.bce_token, alpha);
  return parts;
}

MGLossParts mg_forward_backward(MGModel& model, const MGBatch& batch) {
  const bool token_only = model.config.token_only;
  const double alpha = model.config.alpha;
  ForwardCache cache;
  const MGOutputs outputs = run_forward(model, batch, &cache);

  MGLossParts parts;
  Vec token_grad;
  const nn::LossValue token_loss = masked_token_bce(outputs, batch, &token_grad);
  parts.bce_token = token_loss.value;

  nn::LossValue sentence_loss;
  nn::LossValue ratio_loss;
  if (!token_only) {
    Vec labels(batch.sentence_labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
      labels[i] = static_cast<double>(batch.sentence_labels[i]);
    sentence_loss = nn::bce(outputs.sentence_probs, labels);
    ratio_loss = nn::smooth_l1({outputs.ratio_pred}, {batch.ratio_target});
    parts.bce_sentence = sentence_loss.value;
    parts.sl1_article = ratio_loss.value;
  }
  parts.combined = token_only
                       ? parts.bce_token
                       : combine_losses(parts.sl1_article, parts.bce_sentence, parts.bce_token,
                                        alpha);

  const double cls_w = token_only ? 1.0 : 1.0 - alpha;
  const std::size_t s_dim = model.config.sentence_dim;
  const std::size_t a_dim = model.config.article_dim;
  const std::size_t t_dim = model.config.token_dim;

  Vec d_enc_article(token_only ? 0 : a_dim, 0.0);
  std::vector<Vec> d_enc_sentence;
  if (!token_only) d_enc_sentence.assign(batch.sentence_embeddings.size(), Vec(s_dim, 0.0));

  // Token heads first; their context slices feed the shared encodings.
  for (std::size_t j = 0; j < batch.token_embeddings.size(); ++j) {
    const Vec dq{cls_w * token_grad[j]};
    Vec dv = model.head_token.backward(cache.token_head_input[j], {cache.pre_token_head[j]}, dq);
    Vec d_enc_t(dv.begin(), dv.begin() + static_cast<std::ptrdiff_t>(t_dim));
    model.enc_token.backward(batch.token_embeddings[j], cache.pre_token[j], d_enc_t);
    if (!token_only) {
      const std::size_t s = batch.token_sentence[j];
      for (std::size_t i = 0; i < s_dim; ++i) d_enc_sentence[s][i] += dv[t_dim + i];
      for (std::size_t i = 0; i < a_dim; ++i) d_enc_article[i] += dv[t_dim + s_dim + i];
    }
  }

  if (!token_only) {
    for (std::size_t i = 0; i < batch.sentence_embeddings.size(); ++i) {
      const Vec dp{cls_w * sentence_loss.grad[i]};
      Vec du = model.head_sentence.backward(cache.sentence_head_input[i],
                                            {cache.pre_sentence_head[i]}, dp);
      for (std::size_t k = 0; k < s_dim; ++k) d_enc_sentence[i][k] += du[k];
      for (std::size_t k = 0; k < a_dim; ++k) d_enc_article[k] += du[s_dim + k];
      model.enc_sentence.backward(batch.sentence_embeddings[i], cache.pre_sentence[i],
                                  d_enc_sentence[i]);
    }
    const Vec dr{alpha * ratio_loss.grad[0]};
    Vec da = model.head_ratio.backward(cache.enc_article_out, {cache.pre_ratio}, dr);
    for (std::size_t k = 0; k < a_dim; ++k) d_enc_article[k] += da[k];
    model.enc_article.backward(batch.title_embedding, cache.pre_article, d_enc_article);
  }
  return parts;
}

double min_relu_margin(const MGModel& model, const MGBatch& batch) {
  ForwardCache cache;
  run_forward(model, batch, &cache);
  double margin = std::numeric_limits<double>::infinity();
  const auto scan = [&margin](const Vec& pre) {
    for (double z : pre) margin = std::min(margin, std::abs(z));
  };
  scan(cache.pre_article);
  for (const auto& p : cache.pre_sentence) scan(p);
  for (const auto& p : cache.pre_token) scan(p);
  return margin;
}

TrainResult train_si(const corpus::LabeledCorpus& labeled,
                     const embed::EmbeddingProvider& provider, const MGConfig& config) {
  if (labeled.articles.empty()) {
    throw ValidationError("train_si: corpus has no articles");
  }
  if (provider.dim() != config.embedding_dim) {
    throw ValidationError("train_si: provider dimension " + std::to_string(provider.dim()) +
                          " does not match configured embedding_dim " +
                          std::to_string(config.embedding_dim));
  }

  std::vector<MGBatch> batches;
  batches.reserve(labeled.articles.size());
  std::size_t total_tokens = 0;
  for (const auto& la : labeled.articles) {
    batches.push_back(build_batch(la, provider));
    total_tokens += la.tokens.size();
  }
  if (total_tokens == 0) {
    throw ValidationError("train_si: corpus has no tokens");
  }

  // 95-5 token-level split; the withheld tokens drive checkpoint selection.
  const auto split =
      corpus::split_train_val(total_tokens, 1.0 - config.val_fraction, config.seed);
  std::vector<char> in_train(total_tokens, 0);
  for (std::size_t idx : split.train) in_train[idx] = 1;
  {
    std::size_t offset = 0;
    for (auto& batch : batches) {
      batch.token_in_train.assign(batch.token_embeddings.size(), 0);
      for (std::size_t j = 0; j < batch.token_embeddings.size(); ++j) {
        batch.token_in_train[j] = in_train[offset + j];
      }
      offset += batch.token_embeddings.size();
    }
  }

  TrainResult result;
  result.model = init_model(config);
  auto blocks = result.model.param_blocks();
  std::vector<nn::AdamState> states;
  nn::AdamConfig adam;
  adam.lr = config.lr;

  std::vector<std::vector<double>> best_params;
  double best_f1 = -1.0;
  const bool use_val = !split.val.empty();

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    EpochLog log;
    log.epoch = epoch;
    for (auto& batch : batches) {
      result.model.zero_grads();
      const MGLossParts parts = mg_forward_backward(result.model, batch);
      if (!std::isfinite(parts.combined)) {
        throw ValidationError("train_si: non-finite loss at epoch " + std::to_string(epoch) +
                              ", article " + batch.article_id);
      }
      nn::adam_step(adam, std::span<nn::ParamBlock>(blocks), states);
      log.sl1_article += parts.sl1_article;
      log.bce_sentence += parts.bce_sentence;
      log.bce_token += parts.bce_token;
      log.combined += parts.combined;
    }
    const double n = static_cast<double>(batches.size());
    log.sl1_article /= n;
    log.bce_sentence /= n;
    log.bce_token /= n;
    log.combined /= n;

    // Validation token metrics at the decision threshold.
    std::vector<int> pred, gold;
    for (const auto& batch : batches) {
      const MGOutputs out = run_forward(result.model, batch, nullptr);
      for (std::size_t j = 0; j < out.token_probs.size(); ++j) {
        const bool is_val = !batch.token_in_train.empty() && !batch.token_in_train[j];
        if (is_val == use_val) {
          pred.push_back(out.token_probs[j] > config.threshold ? 1 : 0);
          gold.push_back(batch.token_labels[j]);
        }
      }
    }
    log.val = eval::token_metrics(pred, gold);
    result.log.push_back(log);

    if (log.val.f1 > best_f1) {
      best_f1 = log.val.f1;
      best_params.clear();
      for (const auto& b : blocks) best_params.push_back(*b.value);
    }
  }

  if (!best_params.empty()) {
    for (std::size_t i = 0; i < blocks.size(); ++i) *blocks[i].value = best_params[i];
  }
  result.best_val_f1 = best_f1;
  return result;
}

std::vector<corpus::SpanLabel> predict_spans(const MGModel& model, const corpus::Article& article,
                                             const embed::EmbeddingProvider& provider,
                                             double threshold) {
  const auto tokens = corpus::tokenize_article(article);
  if (tokens.empty()) return {};
  const MGBatch batch = build_batch(article, tokens, provider);
  const MGOutputs out = run_forward(model, batch, nullptr);

  std::vector<corpus::SpanLabel> spans;
  std::size_t run_start = 0;
  bool in_run = false;
  for (std::size_t j = 0; j <= tokens.size(); ++j) {
    const bool positive = j < tokens.size() && out.token_probs[j] > threshold;
    const bool breaks_run =
        in_run && (j == tokens.size() || !positive ||
                   tokens[j].sentence_index != tokens[run_start].sentence_index);
    if (breaks_run) {
      spans.push_back({article.id, tokens[run_start].begin, tokens[j - 1].end});
      in_run = false;
    }
    if (j < tokens.size() && positive && !in_run) {
      run_start = j;
      in_run = true;
    }
  }
  return spans;
}

std::string format_training_log(const std::vector<EpochLog>& log) {
  std::string out = "epoch\tsl1_article\tbce_sentence\tbce_token\tcombined\tval_precision\t"
                    "val_recall\tval_f1\tval_accuracy\n";
  char buf[256];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof(buf), "%zu\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\n",
                  e.epoch, e.sl1_article, e.bce_sentence, e.bce_token, e.combined,
                  e.val.precision, e.val.recall, e.val.f1, e.val.accuracy);
    out += buf;
  }
  return out;
}

}  // namespace propspot::span_mg
