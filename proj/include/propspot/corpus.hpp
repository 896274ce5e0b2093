#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "propspot/common.hpp"

namespace propspot::corpus {

// All character offsets count Unicode scalar values in article-file
// coordinates, matching the label files. Ranges are half-open [begin, end).

struct Sentence {
  std::size_t index = 0;
  std::string text;  // UTF-8
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct Article {
  std::string id;
  std::string title;  // line 1 of the file; also sentences[0]
  std::vector<Sentence> sentences;
  std::size_t raw_length = 0;
  std::u32string text32;  // decoded file contents

  // UTF-8 text of the scalar range [begin, end).
  std::string substring(std::size_t begin, std::size_t end) const;
};

struct Token {
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t sentence_index = 0;
};

struct SpanLabel {
  std::string article_id;
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct TechniqueInstance {
  std::string article_id;
  std::string technique;
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string text;  // filled from the article when articles are supplied
};

// The closed 14-technique set in canonical report row order.
const std::vector<std::string>& technique_names();
std::optional<std::size_t> technique_index(const std::string& name);

// First line is the title; every line (including empty ones) is a sentence;
// the '\n' separator counts one character. Empty file -> ParseError.
Article load_article(const std::filesystem::path& path);

// Same line/offset rules applied to an in-memory UTF-8 string.
Article article_from_text(const std::string& id, const std::string& utf8_text);

// Loads every article*.txt (and *.txt fallback) in the directory, sorted by id.
std::vector<Article> load_articles_dir(const std::filesystem::path& dir);

// TSV `<id>\t<begin>\t<end>`, no header. Order and duplicates preserved.
std::vector<SpanLabel> load_span_labels(const std::filesystem::path& path);
void write_span_labels(const std::filesystem::path& path, const std::vector<SpanLabel>& labels);

// TSV `<id>\t<technique>\t<begin>\t<end>`. Technique must be in the 14-name
// set. When articles are supplied, offsets are bounds-checked and the covered
// text is filled in.
std::vector<TechniqueInstance> load_technique_labels(
    const std::filesystem::path& path, const std::vector<Article>* articles = nullptr);
void write_technique_labels(const std::filesystem::path& path,
                            const std::vector<TechniqueInstance>& labels);

// Maximal runs of word characters plus single punctuation characters.
// Word characters are ASCII alphanumerics and non-ASCII scalars outside the
// whitespace and general-punctuation classes. Offsets are article-file
// coordinates (the sentence knows its own begin offset).
std::vector<Token> tokenize(const Sentence& sentence);
std::vector<Token> tokenize_article(const Article& article);

// A token is positive iff its range shares at least one character with any
// gold span (containment=true restricts to tokens fully inside a span).
// Spans must belong to the tokens' article; ids are not re-checked here.
std::vector<int> label_tokens(const std::vector<Token>& tokens,
                              const std::vector<SpanLabel>& spans,
                              bool containment = false);

// A sentence is positive iff its range overlaps any gold span for this article.
std::vector<int> label_sentences(const Article& article, const std::vector<SpanLabel>& spans);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  bool val_empty_warning = false;
};

// Deterministic shuffle under seed; |train| = round(fraction * n).
SplitIndices split_train_val(std::size_t n, double fraction, std::uint64_t seed);

struct LabeledArticle {
  Article article;
  std::vector<Token> tokens;  // article order
  std::vector<int> token_labels;
  std::vector<int> sentence_labels;
  double ratio_target = 0.0;
};

struct LabeledCorpus {
  std::vector<LabeledArticle> articles;
};

LabeledCorpus build_labeled_corpus(std::vector<Article> articles,
                                   const std::vector<SpanLabel>& spans,
                                   bool containment = false);

}  // namespace propspot::corpus
