#include "propspot/classify.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "propspot/io_util.hpp"
#include "propspot/rng.hpp"

namespace propspot::classify {

using nlohmann::json;

Vec class_weights(const std::vector<long>& counts) {
  long total = 0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] < 1) {
      throw ValidationError("class_weights: class " + std::to_string(c) +
                            " is absent from the training set");
    }
    total += counts[c];
  }
  Vec weights(counts.size(), 0.0);
  const double n = static_cast<double>(total);
  const double k = static_cast<double>(counts.size());
  for (std::size_t c = 0; c < counts.size(); ++c) {
    weights[c] = n / (k * static_cast<double>(counts[c]));
  }
  return weights;
}

Vec LogRegModel::predict_logits(const SparseRow& x) const {
  Vec z = bias;
  for (const auto& [col, v] : x) {
    if (col >= n_features) {
      throw ValidationError("logreg: feature column " + std::to_string(col) +
                            " out of range (D=" + std::to_string(n_features) + ")");
    }
    for (std::size_t k = 0; k < z.size(); ++k) z[k] += weight(k, col) * v;
  }
  return z;
}

Vec LogRegModel::predict_proba(const SparseRow& x) const { return nn::softmax(predict_logits(x)); }

std::vector<nn::ParamBlock> LogRegModel::param_blocks() {
  return {{"logreg.weight", &weight.data, &grad_weight.data},
          {"logreg.bias", &bias, &grad_bias}};
}

namespace {

// Mean class-weighted CE + lambda * ||W||^2; gradients accumulate when
// grads=true (bias unregularized).
double logreg_epoch(LogRegModel& model, const std::vector<SparseRow>& x,
                    const std::vector<std::size_t>& y, bool grads) {
  const double m = static_cast<double>(x.size());
  double value = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Vec logits = model.predict_logits(x[i]);
    const nn::LossValue loss = nn::softmax_ce(logits, y[i], model.class_weight[y[i]]);
    value += loss.value / m;
    if (!grads) continue;
    for (std::size_t k = 0; k < logits.size(); ++k) {
      const double g = loss.grad[k] / m;
      if (g == 0.0) continue;
      model.grad_bias[k] += g;
      for (const auto& [col, v] : x[i]) model.grad_weight(k, col) += g * v;
    }
  }
  double reg = 0.0;
  for (std::size_t idx = 0; idx < model.weight.data.size(); ++idx) {
    reg += model.weight.data[idx] * model.weight.data[idx];
    if (grads) model.grad_weight.data[idx] += 2.0 * model.lambda * model.weight.data[idx];
  }
  return value + model.lambda * reg;
}

}  // namespace

double logreg_objective(const LogRegModel& model, const std::vector<SparseRow>& x,
                        const std::vector<std::size_t>& y) {
  LogRegModel copy = model;
  return logreg_epoch(copy, x, y, false);
}

double logreg_backward(LogRegModel& model, const std::vector<SparseRow>& x,
                       const std::vector<std::size_t>& y) {
  std::fill(model.grad_weight.data.begin(), model.grad_weight.data.end(), 0.0);
  std::fill(model.grad_bias.begin(), model.grad_bias.end(), 0.0);
  return logreg_epoch(model, x, y, true);
}

LogRegFit logreg_fit(const std::vector<SparseRow>& x, const std::vector<std::size_t>& y,
                     std::size_t n_features, const std::vector<std::string>& class_names,
                     const Vec& class_weight, const LogRegConfig& config) {
  if (x.empty() || x.size() != y.size()) {
    throw ValidationError("logreg_fit: need a non-empty dataset with matching labels");
  }
  const std::size_t k = class_names.size();
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] >= k) {
      throw ValidationError("logreg_fit: label out of range at row " + std::to_string(i));
    }
    for (const auto& [col, v] : x[i]) {
      if (!std::isfinite(v)) {
        throw ValidationError("logreg_fit: non-finite feature at row " + std::to_string(i));
      }
      if (col >= n_features) {
        throw ValidationError("logreg_fit: feature column out of range at row " +
                              std::to_string(i));
      }
    }
  }
  if (class_weight.size() != k) {
    throw ValidationError("logreg_fit: class weight count mismatch");
  }

  LogRegFit fit;
  LogRegModel& model = fit.model;
  model.n_features = n_features;
  model.class_names = class_names;
  model.class_weight = class_weight;
  model.lambda = config.lambda;
  model.weight = nn::Matrix(k, n_features);
  model.bias.assign(k, 0.0);
  model.grad_weight = nn::Matrix(k, n_features);
  model.grad_bias.assign(k, 0.0);

  auto blocks = model.param_blocks();
  std::vector<nn::AdamState> states;
  nn::AdamConfig adam;
  adam.lr = config.lr;

  double prev = logreg_epoch(model, x, y, false);
  fit.objective_trace.push_back(prev);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    // Snapshot so a bad step can be rolled back at a smaller learning rate.
    const Vec saved_w = model.weight.data;
    const Vec saved_b = model.bias;
    const std::vector<nn::AdamState> saved_states = states;

    std::fill(model.grad_weight.data.begin(), model.grad_weight.data.end(), 0.0);
    std::fill(model.grad_bias.begin(), model.grad_bias.end(), 0.0);
    logreg_epoch(model, x, y, true);
    nn::adam_step(adam, std::span<nn::ParamBlock>(blocks), states);

    const double now = logreg_epoch(model, x, y, false);
    if (now > prev) {
      model.weight.data = saved_w;
      model.bias = saved_b;
      states = saved_states;
      adam.lr *= 0.5;
      if (adam.lr < 1e-12) break;
      --epoch;  // retry this epoch
      continue;
    }
    prev = now;
    fit.objective_trace.push_back(now);
  }
  return fit;
}

MinMaxScaler minmax_fit(const std::vector<Vec>& rows) {
  if (rows.empty()) {
    throw ValidationError("minmax_fit: need at least one row");
  }
  MinMaxScaler scaler;
  scaler.min = rows.front();
  scaler.max = rows.front();
  for (const auto& row : rows) {
    if (row.size() != scaler.min.size()) {
      throw ValidationError("minmax_fit: inconsistent row widths");
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      scaler.min[i] = std::min(scaler.min[i], row[i]);
      scaler.max[i] = std::max(scaler.max[i], row[i]);
    }
  }
  return scaler;
}

Vec minmax_apply(const MinMaxScaler& scaler, const Vec& row) {
  if (row.size() != scaler.min.size()) {
    throw ValidationError("minmax_apply: row width mismatch");
  }
  Vec out(row.size(), 0.0);
  for (std::size_t i = 0; i < row.size(); ++i) {
    const double range = scaler.max[i] - scaler.min[i];
    out[i] = range > 0.0 ? (row[i] - scaler.min[i]) / range : 0.0;
  }
  return out;
}

Vec NeuralTC::logits(const Vec& pooled) const { return output.forward(hidden.forward(pooled)); }

std::vector<nn::ParamBlock> NeuralTC::param_blocks() {
  return {{"neural.hidden.weight", &hidden.weight.data, &hidden.grad_weight.data},
          {"neural.hidden.bias", &hidden.bias, &hidden.grad_bias},
          {"neural.output.weight", &output.weight.data, &output.grad_weight.data},
          {"neural.output.bias", &output.bias, &output.grad_bias}};
}

NeuralTC neural_tc_fit(const std::vector<Vec>& pooled, const std::vector<std::size_t>& labels,
                       const std::vector<std::string>& class_names, const Vec& class_weight,
                       const NeuralTCConfig& config) {
  if (pooled.empty() || pooled.size() != labels.size()) {
    throw ValidationError("neural_tc_fit: need a non-empty dataset with matching labels");
  }
  const std::size_t d = pooled.front().size();
  const std::size_t k = class_names.size();

  NeuralTC model;
  model.input_dim = d;
  model.class_names = class_names;
  model.config = config;
  model.hidden = nn::DenseLayer(d, config.hidden_dim, nn::Activation::Relu);
  model.output = nn::DenseLayer(config.hidden_dim, k, nn::Activation::Identity);
  Rng rng(config.seed);
  nn::init_layer(model.hidden, rng, 1.0 / std::sqrt(static_cast<double>(d)));
  nn::init_layer(model.output, rng, 1.0 / std::sqrt(static_cast<double>(config.hidden_dim)));

  // Held-out split for checkpoint selection by validation micro-F1.
  std::vector<std::size_t> train_idx, val_idx;
  if (config.val_fraction > 0.0 && pooled.size() >= 2) {
    const auto split =
        corpus::split_train_val(pooled.size(), 1.0 - config.val_fraction, config.seed);
    train_idx = split.train;
    val_idx = split.val;
  }
  if (train_idx.empty()) {
    train_idx.resize(pooled.size());
    for (std::size_t i = 0; i < pooled.size(); ++i) train_idx[i] = i;
    val_idx.clear();
  }

  auto blocks = model.param_blocks();
  std::vector<nn::AdamState> states;
  nn::AdamConfig adam;
  adam.lr = config.lr;
  const double m = static_cast<double>(train_idx.size());

  double best_f1 = -1.0;
  std::vector<Vec> best_params;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    model.hidden.zero_grad();
    model.output.zero_grad();
    for (std::size_t i : train_idx) {
      Vec pre_h, pre_o;
      const Vec h = model.hidden.forward(pooled[i], &pre_h);
      const Vec logits = model.output.forward(h, &pre_o);
      nn::LossValue loss = nn::softmax_ce(logits, labels[i], class_weight[labels[i]]);
      for (double& g : loss.grad) g /= m;
      const Vec dh = model.output.backward(h, pre_o, loss.grad);
      model.hidden.backward(pooled[i], pre_h, dh);
    }
    nn::adam_step(adam, std::span<nn::ParamBlock>(blocks), states);

    if (!val_idx.empty()) {
      long correct = 0;
      for (std::size_t i : val_idx) {
        const Vec logits = model.logits(pooled[i]);
        std::size_t arg = 0;
        for (std::size_t c = 1; c < logits.size(); ++c) {
          if (logits[c] > logits[arg]) arg = c;
        }
        if (arg == labels[i]) ++correct;
      }
      // Micro-F1 equals accuracy for single-label predictions.
      const double f1 = static_cast<double>(correct) / static_cast<double>(val_idx.size());
      if (f1 > best_f1) {
        best_f1 = f1;
        best_params.clear();
        for (const auto& b : blocks) best_params.push_back(*b.value);
      }
    }
  }
  if (!best_params.empty()) {
    for (std::size_t i = 0; i < blocks.size(); ++i) *blocks[i].value = best_params[i];
  }
  return model;
}

TCDataset build_tc_dataset(const std::vector<corpus::TechniqueInstance>& spans,
                           const std::vector<corpus::Article>& articles,
                           const embed::EmbeddingProvider& provider, bool require_labels,
                           bool unk_for_empty) {
  std::unordered_map<std::string, const corpus::Article*> by_id;
  std::unordered_map<std::string, std::vector<corpus::Token>> tokens_by_id;
  for (const auto& a : articles) by_id[a.id] = &a;

  TCDataset ds;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const auto& span = spans[i];
    const auto it = by_id.find(span.article_id);
    if (it == by_id.end()) {
      throw ValidationError("tc: unknown article id \"" + span.article_id + "\"");
    }
    const corpus::Article& article = *it->second;
    auto& tokens = tokens_by_id[span.article_id];
    if (tokens.empty()) tokens = corpus::tokenize_article(article);

    // Tokens overlapping the span; the same rule as token labeling.
    std::vector<Vec> pieces;
    std::vector<std::size_t> within(article.sentences.size(), 0);
    for (const auto& token : tokens) {
      const std::size_t within_idx = within[token.sentence_index]++;
      if (token.begin < span.end && span.begin < token.end) {
        embed::TokenRef ref{&article.id, token.sentence_index, within_idx, &token.text};
        for (auto& p : provider.pieces(ref)) pieces.push_back(std::move(p));
      }
    }
    if (pieces.empty()) {
      if (!unk_for_empty) {
        std::cerr << "warning: span " << span.article_id << " [" << span.begin << ", " << span.end
                  << ") has no tokens; skipped\n";
        ds.skipped.push_back(i);
        continue;
      }
      pieces.push_back(provider.unk());
    }
    ds.pooled.push_back(embed::pool_mean(pieces));
    ds.texts.push_back(span.text.empty() ? article.substring(span.begin, span.end) : span.text);
    if (require_labels) {
      const auto idx = corpus::technique_index(span.technique);
      if (!idx) {
        throw ValidationError("tc: unknown technique \"" + span.technique + "\"");
      }
      ds.labels.push_back(*idx);
    }
    ds.kept.push_back(i);
  }
  return ds;
}

Vec EnsembleModel::member_neural(const Vec& pooled) const { return neural.logits(pooled); }

Vec EnsembleModel::member_feature(const std::string& text) const {
  return feature_member.predict_proba(pipeline.transform_row(text));
}

Vec EnsembleModel::meta_input(const Vec& pooled, const std::string& text) const {
  const Vec neural_scaled = minmax_apply(scaler_neural, member_neural(pooled));
  const Vec feature_scaled = minmax_apply(scaler_feature, member_feature(text));
  Vec row;
  row.reserve(neural_scaled.size() + feature_scaled.size());
  row.insert(row.end(), neural_scaled.begin(), neural_scaled.end());
  row.insert(row.end(), feature_scaled.begin(), feature_scaled.end());
  return row;
}

namespace {

SparseRow dense_to_sparse(const Vec& row) {
  SparseRow out;
  out.reserve(row.size());
  for (std::size_t i = 0; i < row.size(); ++i) out.emplace_back(i, row[i]);
  return out;
}

Vec counts_to_weights(const std::vector<std::size_t>& labels, std::size_t k) {
  std::vector<long> counts(k, 0);
  for (std::size_t y : labels) counts[y] += 1;
  // Classes absent from this training set get weight 1 rather than failing:
  // fold subsets of a skewed corpus routinely miss a class.
  long total = 0;
  std::size_t present = 0;
  for (long c : counts) {
    total += c;
    present += c > 0 ? 1 : 0;
  }
  Vec weights(k, 1.0);
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] > 0) {
      weights[c] = static_cast<double>(total) /
                   (static_cast<double>(present) * static_cast<double>(counts[c]));
    }
  }
  return weights;
}

struct MemberOutputs {
  std::vector<Vec> neural_logits;
  std::vector<Vec> feature_probs;
};

MemberOutputs fit_members_and_collect(const std::vector<Vec>& pooled,
                                      const std::vector<std::string>& texts,
                                      const std::vector<std::size_t>& labels,
                                      const std::vector<std::size_t>& train_on,
                                      const std::vector<std::size_t>& predict_on,
                                      const EnsembleConfig& config,
                                      const features::FeaturePipeline& pipeline,
                                      const std::vector<std::string>& class_names) {
  std::vector<Vec> sub_pooled;
  std::vector<std::size_t> sub_labels;
  std::vector<SparseRow> sub_rows;
  for (std::size_t i : train_on) {
    sub_pooled.push_back(pooled[i]);
    sub_labels.push_back(labels[i]);
    sub_rows.push_back(pipeline.transform_row(texts[i]));
  }
  const Vec fold_weight = counts_to_weights(sub_labels, class_names.size());
  const NeuralTC neural =
      neural_tc_fit(sub_pooled, sub_labels, class_names, fold_weight, config.neural);
  const LogRegModel feature_member =
      logreg_fit(sub_rows, sub_labels, pipeline.dim(), class_names, fold_weight, config.logreg)
          .model;

  MemberOutputs out;
  for (std::size_t i : predict_on) {
    out.neural_logits.push_back(neural.logits(pooled[i]));
    out.feature_probs.push_back(feature_member.predict_proba(pipeline.transform_row(texts[i])));
  }
  return out;
}

}  // namespace

EnsembleModel ensemble_fit(const std::vector<corpus::TechniqueInstance>& train_spans,
                           const std::vector<corpus::Article>& articles,
                           const embed::EmbeddingProvider& provider,
                           const EnsembleConfig& config) {
  const TCDataset ds = build_tc_dataset(train_spans, articles, provider, true);
  if (ds.pooled.empty()) {
    throw ValidationError("ensemble_fit: no usable training spans");
  }
  const auto& class_names = corpus::technique_names();
  const std::size_t k = class_names.size();

  EnsembleModel model;
  model.class_order = class_names;
  model.pipeline = features::fit_pipeline(ds.texts, config.pipeline);

  // Inverse-count weights over the classes that occur; absent classes keep
  // weight 1 and simply never receive probability mass from training.
  const Vec weight = counts_to_weights(ds.labels, k);

  // Final members always train on the full training set.
  std::vector<SparseRow> rows;
  rows.reserve(ds.texts.size());
  for (const auto& t : ds.texts) rows.push_back(model.pipeline.transform_row(t));
  NeuralTCConfig neural_cfg = config.neural;
  neural_cfg.seed = config.seed;
  model.neural = neural_tc_fit(ds.pooled, ds.labels, class_names, weight, neural_cfg);
  model.feature_member =
      logreg_fit(rows, ds.labels, model.pipeline.dim(), class_names, weight, config.logreg).model;

  // Member outputs feeding the meta stage: in-sample by default, or
  // out-of-fold from a deterministic k-fold when configured.
  std::vector<Vec> neural_out(ds.pooled.size()), feature_out(ds.pooled.size());
  if (!config.out_of_fold) {
    for (std::size_t i = 0; i < ds.pooled.size(); ++i) {
      neural_out[i] = model.neural.logits(ds.pooled[i]);
      feature_out[i] = model.feature_member.predict_proba(rows[i]);
    }
  } else {
    std::vector<std::size_t> order(ds.pooled.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(config.seed);
    rng.shuffle(order);
    const std::size_t folds = std::min<std::size_t>(config.folds, order.size());
    for (std::size_t f = 0; f < folds; ++f) {
      std::vector<std::size_t> hold, rest;
      for (std::size_t pos = 0; pos < order.size(); ++pos) {
        (pos % folds == f ? hold : rest).push_back(order[pos]);
      }
      if (rest.empty()) continue;
      EnsembleConfig fold_cfg = config;
      fold_cfg.neural.seed = config.seed + f + 1;
      const MemberOutputs out = fit_members_and_collect(ds.pooled, ds.texts, ds.labels, rest,
                                                        hold, fold_cfg, model.pipeline,
                                                        class_names);
      for (std::size_t pos = 0; pos < hold.size(); ++pos) {
        neural_out[hold[pos]] = out.neural_logits[pos];
        feature_out[hold[pos]] = out.feature_probs[pos];
      }
    }
  }

  model.scaler_neural = minmax_fit(neural_out);
  model.scaler_feature = minmax_fit(feature_out);

  std::vector<SparseRow> meta_rows;
  meta_rows.reserve(ds.pooled.size());
  for (std::size_t i = 0; i < ds.pooled.size(); ++i) {
    const Vec a = minmax_apply(model.scaler_neural, neural_out[i]);
    const Vec b = minmax_apply(model.scaler_feature, feature_out[i]);
    Vec row;
    row.reserve(a.size() + b.size());
    row.insert(row.end(), a.begin(), a.end());
    row.insert(row.end(), b.begin(), b.end());
    meta_rows.push_back(dense_to_sparse(row));
  }
  // Same hyper-parameters and class-weight scheme as the feature member.
  model.meta =
      logreg_fit(meta_rows, ds.labels, 2 * k, class_names, weight, config.logreg).model;
  return model;
}

TCPrediction ensemble_predict(const EnsembleModel& model, const Vec& pooled,
                              const std::string& text) {
  TCPrediction pred;
  pred.probabilities = model.meta.predict_proba(dense_to_sparse(model.meta_input(pooled, text)));
  std::size_t arg = 0;
  for (std::size_t c = 1; c < pred.probabilities.size(); ++c) {
    if (pred.probabilities[c] > pred.probabilities[arg]) arg = c;  // ties keep canonical order
  }
  pred.technique = model.class_order[arg];
  return pred;
}

namespace {

json matrix_to_json(const nn::Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows; ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols; ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

nn::Matrix matrix_from_json(const json& j) {
  const std::size_t rows = j.size();
  const std::size_t cols = rows > 0 ? j[0].size() : 0;
  nn::Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (j[r].size() != cols) throw ParseError("matrix rows have inconsistent widths");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

json logreg_to_json(const LogRegModel& m) {
  json j;
  j["n_features"] = m.n_features;
  j["class_names"] = m.class_names;
  j["lambda"] = m.lambda;
  j["class_weight"] = m.class_weight;
  j["weight"] = matrix_to_json(m.weight);
  j["bias"] = m.bias;
  return j;
}

LogRegModel logreg_from_json(const json& j) {
  LogRegModel m;
  m.n_features = j.at("n_features").get<std::size_t>();
  m.class_names = j.at("class_names").get<std::vector<std::string>>();
  m.lambda = j.at("lambda").get<double>();
  m.class_weight = j.at("class_weight").get<Vec>();
  m.weight = matrix_from_json(j.at("weight"));
  m.bias = j.at("bias").get<Vec>();
  m.grad_weight = nn::Matrix(m.weight.rows, m.weight.cols);
  m.grad_bias.assign(m.bias.size(), 0.0);
  return m;
}

json scaler_to_json(const MinMaxScaler& s) {
  json j;
  j["min"] = s.min;
  j["max"] = s.max;
  return j;
}

MinMaxScaler scaler_from_json(const json& j) {
  MinMaxScaler s;
  s.min = j.at("min").get<Vec>();
  s.max = j.at("max").get<Vec>();
  return s;
}

}  // namespace

void save_ensemble(const std::filesystem::path& path, const EnsembleModel& model) {
  json j;
  j["format_version"] = 1;
  j["kind"] = "tc_ensemble";
  j["class_order"] = model.class_order;
  json neural;
  neural["input_dim"] = model.neural.input_dim;
  neural["hidden_dim"] = model.neural.config.hidden_dim;
  neural["hidden_weight"] = matrix_to_json(model.neural.hidden.weight);
  neural["hidden_bias"] = model.neural.hidden.bias;
  neural["output_weight"] = matrix_to_json(model.neural.output.weight);
  neural["output_bias"] = model.neural.output.bias;
  j["neural"] = std::move(neural);
  j["feature_member"] = logreg_to_json(model.feature_member);
  j["scaler_neural"] = scaler_to_json(model.scaler_neural);
  j["scaler_feature"] = scaler_to_json(model.scaler_feature);
  j["meta"] = logreg_to_json(model.meta);
  j["pipeline"] = features::pipeline_to_json(model.pipeline);
  io::atomic_write_file(path, j.dump(2) + "\n");
}

EnsembleModel load_ensemble(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (j.value("format_version", 0) != 1 || j.value("kind", "") != "tc_ensemble") {
    throw ParseError(path.string() + ": not a version-1 tc_ensemble document");
  }
  EnsembleModel model;
  model.class_order = j.at("class_order").get<std::vector<std::string>>();
  const auto& neural = j.at("neural");
  model.neural.input_dim = neural.at("input_dim").get<std::size_t>();
  model.neural.config.hidden_dim = neural.at("hidden_dim").get<std::size_t>();
  model.neural.class_names = model.class_order;
  model.neural.hidden =
      nn::DenseLayer(model.neural.input_dim, model.neural.config.hidden_dim, nn::Activation::Relu);
  model.neural.hidden.weight = matrix_from_json(neural.at("hidden_weight"));
  model.neural.hidden.bias = neural.at("hidden_bias").get<Vec>();
  model.neural.output = nn::DenseLayer(model.neural.config.hidden_dim, model.class_order.size(),
                                       nn::Activation::Identity);
  model.neural.output.weight = matrix_from_json(neural.at("output_weight"));
  model.neural.output.bias = neural.at("output_bias").get<Vec>();
  model.feature_member = logreg_from_json(j.at("feature_member"));
  model.scaler_neural = scaler_from_json(j.at("scaler_neural"));
  model.scaler_feature = scaler_from_json(j.at("scaler_feature"));
  model.meta = logreg_from_json(j.at("meta"));
  model.pipeline = features::pipeline_from_json(j.at("pipeline"));
  return model;
}

}  // namespace propspot::classify
