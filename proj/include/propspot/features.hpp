#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "propspot/common.hpp"

namespace propspot::features {

// Preprocessing stages apply in this fixed order: drop non-ASCII, lowercase,
// collapse whitespace; then, on the word channel only, stopword removal and
// stemming. The char stream keeps punctuation.
struct PreprocessConfig {
  bool drop_non_ascii = true;
  bool lowercase = true;
  bool collapse_whitespace = true;
  bool remove_stopwords = true;
  bool stem = true;
  std::vector<std::string> stopwords;  // empty -> built-in list
};

struct Preprocessed {
  std::vector<std::string> words;
  std::string char_stream;
};

Preprocessed preprocess(const std::string& text, const PreprocessConfig& config);

const std::vector<std::string>& default_stopwords();
std::vector<std::string> load_stopwords(const std::filesystem::path& path);

// Small ordered suffix-stripping table:
//   "sses"->"ss", "ies"->"y", "ing"->"" (undouble), "ed"->"" (undouble),
//   "ly"->"", "es"->"", "s"->"" (stem >= 3, not ending in 's')
// where "undouble" drops one of a trailing double letter and every rule
// requires the stem to keep at least two characters.
std::string stem_word(const std::string& word);

enum class ChannelKind { Word, Char };

struct ChannelSpec {
  ChannelKind kind = ChannelKind::Word;
  int n_min = 1;
  int n_max = 1;
  std::size_t max_grams = 200000;  // kept by document frequency, ties lexicographic
};

struct TfidfVocabulary {
  ChannelSpec spec;
  std::unordered_map<std::string, std::size_t> gram_to_column;
  std::vector<double> idf;  // by column; ln((1+N)/(1+df)) + 1
  std::size_t doc_count = 0;

  std::size_t size() const { return idf.size(); }
};

std::vector<std::string> extract_grams(const Preprocessed& doc, const ChannelSpec& spec);

TfidfVocabulary fit_tfidf(const std::vector<std::string>& corpus_texts, const ChannelSpec& spec,
                          const PreprocessConfig& pre);

// Sparse TF-IDF channels (each L2-normalized) stacked by column offset, plus
// a dense tail: span char count, and optionally '!' count, '?' count, and
// word-token count.
struct FeatureVector {
  std::vector<std::pair<std::size_t, double>> sparse;  // sorted by column
  std::vector<double> dense;
};

struct FeaturePipeline {
  PreprocessConfig pre;
  std::vector<TfidfVocabulary> channels;
  bool contextual_counts = false;

  std::size_t sparse_dim() const;
  std::size_t dense_dim() const { return contextual_counts ? 4 : 1; }
  std::size_t dim() const { return sparse_dim() + dense_dim(); }

  FeatureVector transform(const std::string& text) const;

  // Whole feature vector as one sparse row over [0, dim()): the sparse
  // channels first, then the dense tail.
  std::vector<std::pair<std::size_t, double>> transform_row(const std::string& text) const;
};

struct PipelineConfig {
  PreprocessConfig pre;
  int word_n_min = 1;
  int word_n_max = 3;
  int char_n_min = 1;
  int char_n_max = 6;
  std::size_t max_grams = 200000;
  bool contextual_counts = false;
};

// Fits the default channels (word 1-3 grams, char 1-6 grams) on the texts.
FeaturePipeline fit_pipeline(const std::vector<std::string>& texts, const PipelineConfig& config);

nlohmann::json pipeline_to_json(const FeaturePipeline& pipeline);
FeaturePipeline pipeline_from_json(const nlohmann::json& j);

void save_pipeline(const std::filesystem::path& path, const FeaturePipeline& pipeline);
FeaturePipeline load_pipeline(const std::filesystem::path& path);

}  // namespace propspot::features
