#include "propspot/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "propspot/io_util.hpp"

namespace propspot::features {

using nlohmann::json;

const std::vector<std::string>& default_stopwords() {
  static const std::vector<std::string> kStopwords = {
      "a",    "an",   "and",  "are",  "as",   "at",   "be",   "but",  "by",   "for",
      "from", "had",  "has",  "have", "he",   "her",  "his",  "i",    "in",   "is",
      "it",   "its",  "of",   "on",   "or",   "our",  "she",  "that", "the",  "their",
      "them", "they", "this", "to",   "was",  "we",   "were", "will", "with", "you",
      "your"};
  return kStopwords;
}

std::vector<std::string> load_stopwords(const std::filesystem::path& path) {
  const std::string bytes = io::read_file(path);
  std::vector<std::string> words;
  std::istringstream in(bytes);
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) words.push_back(line);
  }
  return words;
}

namespace {

bool ends_with(const std::string& s, const char* suffix) {
  const std::size_t n = std::char_traits<char>::length(suffix);
  return s.size() >= n && s.compare(s.size() - n, n, suffix) == 0;
}

std::string undouble(std::string stem) {
  if (stem.size() >= 3 && stem[stem.size() - 1] == stem[stem.size() - 2]) {
    stem.pop_back();
  }
  return stem;
}

bool is_ascii_alnum(char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

}  // namespace

std::string stem_word(const std::string& word) {
  struct Rule {
    const char* suffix;
    const char* replacement;
    bool undouble;
  };
  static const Rule kRules[] = {
      {"sses", "ss", false}, {"ies", "y", false}, {"ing", "", true},
      {"ed", "", true},      {"ly", "", false},   {"es", "", false},
  };
  for (const Rule& rule : kRules) {
    if (!ends_with(word, rule.suffix)) continue;
    const std::size_t n = std::char_traits<char>::length(rule.suffix);
    std::string stem = word.substr(0, word.size() - n) + rule.replacement;
    if (rule.undouble) stem = undouble(stem);
    if (stem.size() >= 2) return stem;
  }
  if (ends_with(word, "s") && word.size() >= 4 && word[word.size() - 2] != 's') {
    return word.substr(0, word.size() - 1);
  }
  return word;
}

Preprocessed preprocess(const std::string& text, const PreprocessConfig& config) {
  // Stage 1-3 build the char stream.
  std::string stream;
  stream.reserve(text.size());
  for (unsigned char c : text) {
    if (config.drop_non_ascii && c >= 0x80) continue;
    stream.push_back(static_cast<char>(c));
  }
  if (config.lowercase) {
    for (char& c : stream) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
  }
  if (config.collapse_whitespace) {
    std::string collapsed;
    collapsed.reserve(stream.size());
    bool pending_space = false;
    for (char c : stream) {
      if (is_ascii_space(c)) {
        pending_space = !collapsed.empty();
        continue;
      }
      if (pending_space) {
        collapsed.push_back(' ');
        pending_space = false;
      }
      collapsed.push_back(c);
    }
    stream = std::move(collapsed);
  }

  Preprocessed out;
  out.char_stream = stream;

  // Word channel: alphanumeric runs, minus stopwords, stemmed.
  std::unordered_set<std::string> stop;
  if (config.remove_stopwords) {
    const auto& list = config.stopwords.empty() ? default_stopwords() : config.stopwords;
    stop.insert(list.begin(), list.end());
  }
  std::size_t i = 0;
  while (i < stream.size()) {
    if (!is_ascii_alnum(stream[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < stream.size() && is_ascii_alnum(stream[j])) ++j;
    std::string word = stream.substr(i, j - i);
    i = j;
    if (config.remove_stopwords && stop.count(word) > 0) continue;
    if (config.stem) word = stem_word(word);
    out.words.push_back(std::move(word));
  }
  return out;
}

std::vector<std::string> extract_grams(const Preprocessed& doc, const ChannelSpec& spec) {
  std::vector<std::string> grams;
  if (spec.kind == ChannelKind::Word) {
    for (int n = spec.n_min; n <= spec.n_max; ++n) {
      if (n < 1 || doc.words.size() < static_cast<std::size_t>(n)) continue;
      for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= doc.words.size(); ++i) {
        std::string gram = doc.words[i];
        for (int k = 1; k < n; ++k) {
          gram += ' ';
          gram += doc.words[i + static_cast<std::size_t>(k)];
        }
        grams.push_back(std::move(gram));
      }
    }
  } else {
    const std::string& s = doc.char_stream;
    for (int n = spec.n_min; n <= spec.n_max; ++n) {
      if (n < 1 || s.size() < static_cast<std::size_t>(n)) continue;
      for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= s.size(); ++i) {
        grams.push_back(s.substr(i, static_cast<std::size_t>(n)));
      }
    }
  }
  return grams;
}

TfidfVocabulary fit_tfidf(const std::vector<std::string>& corpus_texts, const ChannelSpec& spec,
                          const PreprocessConfig& pre) {
  if (corpus_texts.empty()) {
    throw ValidationError("fit_tfidf: empty corpus");
  }
  std::map<std::string, std::size_t> df;  // ordered: lexicographic ties for free
  for (const auto& text : corpus_texts) {
    const auto grams = extract_grams(preprocess(text, pre), spec);
    std::set<std::string> unique(grams.begin(), grams.end());
    for (const auto& g : unique) df[g] += 1;
  }

  std::vector<const std::pair<const std::string, std::size_t>*> entries;
  entries.reserve(df.size());
  for (const auto& e : df) entries.push_back(&e);
  if (entries.size() > spec.max_grams) {
    std::stable_sort(entries.begin(), entries.end(),
                     [](const auto* a, const auto* b) { return a->second > b->second; });
    entries.resize(spec.max_grams);
  }
  std::sort(entries.begin(), entries.end(),
            [](const auto* a, const auto* b) { return a->first < b->first; });

  TfidfVocabulary vocab;
  vocab.spec = spec;
  vocab.doc_count = corpus_texts.size();
  vocab.idf.reserve(entries.size());
  const double n = static_cast<double>(corpus_texts.size());
  for (std::size_t col = 0; col < entries.size(); ++col) {
    vocab.gram_to_column[entries[col]->first] = col;
    vocab.idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(entries[col]->second))) +
                        1.0);
  }
  return vocab;
}

std::size_t FeaturePipeline::sparse_dim() const {
  std::size_t total = 0;
  for (const auto& c : channels) total += c.size();
  return total;
}

FeatureVector FeaturePipeline::transform(const std::string& text) const {
  const Preprocessed doc = preprocess(text, pre);
  FeatureVector fv;
  std::size_t offset = 0;
  for (const auto& vocab : channels) {
    std::map<std::size_t, double> weights;  // ordered columns within the channel
    for (const auto& gram : extract_grams(doc, vocab.spec)) {
      const auto it = vocab.gram_to_column.find(gram);
      if (it == vocab.gram_to_column.end()) continue;  // unseen grams ignored
      weights[it->second] += vocab.idf[it->second];
    }
    double norm_sq = 0.0;
    for (const auto& [col, w] : weights) norm_sq += w * w;
    const double norm = std::sqrt(norm_sq);
    for (const auto& [col, w] : weights) {
      fv.sparse.emplace_back(offset + col, norm > 0.0 ? w / norm : 0.0);
    }
    offset += vocab.size();
  }

  fv.dense.push_back(static_cast<double>(io::utf8_length(text)));
  if (contextual_counts) {
    double excl = 0.0, quest = 0.0;
    for (char c : text) {
      if (c == '!') excl += 1.0;
      if (c == '?') quest += 1.0;
    }
    fv.dense.push_back(excl);
    fv.dense.push_back(quest);
    fv.dense.push_back(static_cast<double>(doc.words.size()));
  }
  return fv;
}

std::vector<std::pair<std::size_t, double>> FeaturePipeline::transform_row(
    const std::string& text) const {
  const FeatureVector fv = transform(text);
  std::vector<std::pair<std::size_t, double>> row = fv.sparse;
  const std::size_t base = sparse_dim();
  for (std::size_t i = 0; i < fv.dense.size(); ++i) {
    row.emplace_back(base + i, fv.dense[i]);
  }
  return row;
}

FeaturePipeline fit_pipeline(const std::vector<std::string>& texts, const PipelineConfig& config) {
  FeaturePipeline pipeline;
  pipeline.pre = config.pre;
  pipeline.contextual_counts = config.contextual_counts;
  ChannelSpec word{ChannelKind::Word, config.word_n_min, config.word_n_max, config.max_grams};
  ChannelSpec chars{ChannelKind::Char, config.char_n_min, config.char_n_max, config.max_grams};
  pipeline.channels.push_back(fit_tfidf(texts, word, config.pre));
  pipeline.channels.push_back(fit_tfidf(texts, chars, config.pre));
  return pipeline;
}

namespace {

json vocabulary_to_json(const TfidfVocabulary& vocab) {
  json j;
  j["kind"] = vocab.spec.kind == ChannelKind::Word ? "word" : "char";
  j["n_min"] = vocab.spec.n_min;
  j["n_max"] = vocab.spec.n_max;
  j["max_grams"] = vocab.spec.max_grams;
  j["doc_count"] = vocab.doc_count;
  std::vector<std::string> grams(vocab.size());
  for (const auto& [gram, col] : vocab.gram_to_column) grams[col] = gram;
  j["grams"] = grams;
  j["idf"] = vocab.idf;
  return j;
}

TfidfVocabulary vocabulary_from_json(const json& j) {
  TfidfVocabulary vocab;
  const std::string kind = j.at("kind").get<std::string>();
  vocab.spec.kind = kind == "word" ? ChannelKind::Word : ChannelKind::Char;
  vocab.spec.n_min = j.at("n_min").get<int>();
  vocab.spec.n_max = j.at("n_max").get<int>();
  vocab.spec.max_grams = j.at("max_grams").get<std::size_t>();
  vocab.doc_count = j.at("doc_count").get<std::size_t>();
  const auto grams = j.at("grams").get<std::vector<std::string>>();
  vocab.idf = j.at("idf").get<std::vector<double>>();
  if (grams.size() != vocab.idf.size()) {
    throw ParseError("tfidf vocabulary: grams/idf length mismatch");
  }
  for (std::size_t col = 0; col < grams.size(); ++col) vocab.gram_to_column[grams[col]] = col;
  return vocab;
}

}  // namespace

json pipeline_to_json(const FeaturePipeline& pipeline) {
  json j;
  j["format_version"] = 1;
  j["kind"] = "feature_pipeline";
  json pre;
  pre["drop_non_ascii"] = pipeline.pre.drop_non_ascii;
  pre["lowercase"] = pipeline.pre.lowercase;
  pre["collapse_whitespace"] = pipeline.pre.collapse_whitespace;
  pre["remove_stopwords"] = pipeline.pre.remove_stopwords;
  pre["stem"] = pipeline.pre.stem;
  pre["stopwords"] = pipeline.pre.stopwords;
  j["pre"] = std::move(pre);
  j["contextual_counts"] = pipeline.contextual_counts;
  json channels = json::array();
  for (const auto& c : pipeline.channels) channels.push_back(vocabulary_to_json(c));
  j["channels"] = std::move(channels);
  return j;
}

FeaturePipeline pipeline_from_json(const json& j) {
  if (j.value("format_version", 0) != 1 || j.value("kind", "") != "feature_pipeline") {
    throw ParseError("not a version-1 feature_pipeline document");
  }
  FeaturePipeline pipeline;
  const auto& pre = j.at("pre");
  pipeline.pre.drop_non_ascii = pre.at("drop_non_ascii").get<bool>();
  pipeline.pre.lowercase = pre.at("lowercase").get<bool>();
  pipeline.pre.collapse_whitespace = pre.at("collapse_whitespace").get<bool>();
  pipeline.pre.remove_stopwords = pre.at("remove_stopwords").get<bool>();
  pipeline.pre.stem = pre.at("stem").get<bool>();
  pipeline.pre.stopwords = pre.at("stopwords").get<std::vector<std::string>>();
  pipeline.contextual_counts = j.at("contextual_counts").get<bool>();
  for (const auto& c : j.at("channels")) {
    pipeline.channels.push_back(vocabulary_from_json(c));
  }
  return pipeline;
}

void save_pipeline(const std::filesystem::path& path, const FeaturePipeline& pipeline) {
  io::atomic_write_file(path, pipeline_to_json(pipeline).dump(2) + "\n");
}

FeaturePipeline load_pipeline(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  try {
    return pipeline_from_json(j);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace propspot::features
