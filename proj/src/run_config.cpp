#include "propspot/run_config.hpp"

#include <set>

#include <nlohmann/json.hpp>

#include "propspot/io_util.hpp"

namespace propspot {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (allowed.count(key) == 0) {
      throw ValidationError("config: unknown key \"" + key + "\" in " + where);
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

void read_path(const json& j, const char* key, std::filesystem::path& target) {
  if (j.contains(key)) target = j.at(key).get<std::string>();
}

void load_mg(const json& j, span_mg::MGConfig& mg) {
  reject_unknown_keys(j,
                      {"embedding_dim", "article_dim", "sentence_dim", "token_dim", "alpha", "lr",
                       "epochs", "threshold", "val_fraction", "token_only"},
                      "mg");
  read(j, "embedding_dim", mg.embedding_dim);
  read(j, "article_dim", mg.article_dim);
  read(j, "sentence_dim", mg.sentence_dim);
  read(j, "token_dim", mg.token_dim);
  read(j, "alpha", mg.alpha);
  read(j, "lr", mg.lr);
  read(j, "epochs", mg.epochs);
  read(j, "threshold", mg.threshold);
  read(j, "val_fraction", mg.val_fraction);
  read(j, "token_only", mg.token_only);
}

void load_features(const json& j, features::PipelineConfig& f) {
  reject_unknown_keys(j,
                      {"word_n_min", "word_n_max", "char_n_min", "char_n_max", "max_grams",
                       "contextual_counts", "drop_non_ascii", "lowercase", "collapse_whitespace",
                       "remove_stopwords", "stem"},
                      "features");
  read(j, "word_n_min", f.word_n_min);
  read(j, "word_n_max", f.word_n_max);
  read(j, "char_n_min", f.char_n_min);
  read(j, "char_n_max", f.char_n_max);
  read(j, "max_grams", f.max_grams);
  read(j, "contextual_counts", f.contextual_counts);
  read(j, "drop_non_ascii", f.pre.drop_non_ascii);
  read(j, "lowercase", f.pre.lowercase);
  read(j, "collapse_whitespace", f.pre.collapse_whitespace);
  read(j, "remove_stopwords", f.pre.remove_stopwords);
  read(j, "stem", f.pre.stem);
}

void load_classifier(const json& j, classify::EnsembleConfig& c) {
  reject_unknown_keys(j,
                      {"lambda", "lr", "epochs", "hidden_dim", "neural_lr", "neural_epochs",
                       "val_fraction", "out_of_fold", "folds"},
                      "classifier");
  read(j, "lambda", c.logreg.lambda);
  read(j, "lr", c.logreg.lr);
  read(j, "epochs", c.logreg.epochs);
  read(j, "hidden_dim", c.neural.hidden_dim);
  read(j, "neural_lr", c.neural.lr);
  read(j, "neural_epochs", c.neural.epochs);
  read(j, "val_fraction", c.neural.val_fraction);
  read(j, "out_of_fold", c.out_of_fold);
  read(j, "folds", c.folds);
}

void load_synth(const json& j, synth::SynthSpec& s, std::string& what) {
  reject_unknown_keys(j,
                      {"articles", "sentences_per_article", "tokens_per_sentence", "embedding_dim",
                       "snr", "signal_title", "signal_sentence", "signal_token",
                       "tc_embedding_dim", "tc_snr", "tc_majority_count", "tc_minority_count",
                       "tc_test_majority", "tc_test_minority", "tc_lexical_prob",
                       "tc_spans_per_article", "what"},
                      "synth");
  read(j, "articles", s.articles);
  read(j, "sentences_per_article", s.sentences_per_article);
  read(j, "tokens_per_sentence", s.tokens_per_sentence);
  read(j, "embedding_dim", s.embedding_dim);
  read(j, "snr", s.snr);
  read(j, "signal_title", s.signal_title);
  read(j, "signal_sentence", s.signal_sentence);
  read(j, "signal_token", s.signal_token);
  read(j, "tc_embedding_dim", s.tc_embedding_dim);
  read(j, "tc_snr", s.tc_snr);
  read(j, "tc_majority_count", s.tc_majority_count);
  read(j, "tc_minority_count", s.tc_minority_count);
  read(j, "tc_test_majority", s.tc_test_majority);
  read(j, "tc_test_minority", s.tc_test_minority);
  read(j, "tc_lexical_prob", s.tc_lexical_prob);
  read(j, "tc_spans_per_article", s.tc_spans_per_article);
  read(j, "what", what);
  if (what != "si" && what != "tc" && what != "both") {
    throw ValidationError("config: synth.what must be \"si\", \"tc\", or \"both\"");
  }
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  reject_unknown_keys(j,
                      {"seed", "out_dir", "articles_dir", "si_labels", "tc_labels",
                       "tc_labels_eval", "tc_spans", "predictions", "model", "embedding_table",
                       "token_vectors", "stopwords", "mg", "features", "classifier", "synth",
                       "eval", "embed", "corpus"},
                      "the top level");
  RunConfig config;
  read(j, "seed", config.seed);
  read_path(j, "out_dir", config.out_dir);
  read_path(j, "articles_dir", config.articles_dir);
  read_path(j, "si_labels", config.si_labels);
  read_path(j, "tc_labels", config.tc_labels);
  read_path(j, "tc_labels_eval", config.tc_labels_eval);
  read_path(j, "tc_spans", config.tc_spans);
  read_path(j, "predictions", config.predictions);
  read_path(j, "model", config.model_path);
  read_path(j, "embedding_table", config.embedding_table);
  read_path(j, "token_vectors", config.token_vectors);
  read_path(j, "stopwords", config.stopwords);
  config.mg.embedding_dim = 0;  // default: take the provider's dimension
  if (j.contains("mg")) load_mg(j.at("mg"), config.mg);
  if (j.contains("features")) load_features(j.at("features"), config.features);
  if (j.contains("classifier")) load_classifier(j.at("classifier"), config.classifier);
  if (j.contains("synth")) load_synth(j.at("synth"), config.synth, config.synth_what);
  if (j.contains("eval")) {
    reject_unknown_keys(j.at("eval"), {"macro_present_only", "normalized_span_metric"}, "eval");
    read(j.at("eval"), "macro_present_only", config.macro_present_only);
    read(j.at("eval"), "normalized_span_metric", config.normalized_span_metric);
  }
  if (j.contains("embed")) {
    reject_unknown_keys(j.at("embed"), {"left_piece_only"}, "embed");
    read(j.at("embed"), "left_piece_only", config.left_piece_only);
  }
  if (j.contains("corpus")) {
    reject_unknown_keys(j.at("corpus"), {"containment_labels"}, "corpus");
    read(j.at("corpus"), "containment_labels", config.containment_labels);
  }
  apply_seed(config, config.seed);
  return config;
}

void apply_seed(RunConfig& config, std::uint64_t seed) {
  config.seed = seed;
  config.mg.seed = seed;
  config.classifier.seed = seed;
  config.classifier.neural.seed = seed;
  config.classifier.logreg.seed = seed;
  config.synth.seed = seed;
}

}  // namespace propspot
