#include "propspot/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "propspot/io_util.hpp"
#include "propspot/rng.hpp"

namespace propspot::corpus {

namespace {

bool is_space32(char32_t c) {
  switch (c) {
    case U' ':
    case U'\t':
    case U'\n':
    case U'\r':
    case U'\v':
    case U'\f':
    case 0x85:
    case 0xA0:
    case 0x1680:
    case 0x2028:
    case 0x2029:
    case 0x202F:
    case 0x205F:
    case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200B;
  }
}

bool is_word_char(char32_t c) {
  if (c < 0x80) {
    return (c >= U'0' && c <= U'9') || (c >= U'A' && c <= U'Z') || (c >= U'a' && c <= U'z');
  }
  if (is_space32(c)) return false;
  // Treat general punctuation and Latin-1 punctuation blocks as punctuation;
  // everything else non-ASCII clusters into word runs.
  if (c >= 0x2000 && c <= 0x206F) return false;
  if (c >= 0xA1 && c <= 0xBF) return false;
  return true;
}

std::string article_id_from_path(const std::filesystem::path& path) {
  std::string stem = path.stem().string();
  if (stem.rfind("article", 0) == 0 && stem.size() > 7) {
    return stem.substr(7);
  }
  return stem;
}

bool ranges_overlap(std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
  return a < d && c < b;
}

}  // namespace

const std::vector<std::string>& technique_names() {
  // Row order of the class-wise report; comma-joined superclass names carry
  // no spaces.
  static const std::vector<std::string> kNames = {
      "Appeal_to_Authority",
      "Appeal_to_fear-prejudice",
      "Bandwagon,Reductio_ad_hitlerum",
      "Black-and-White_Fallacy",
      "Causal_Oversimplification",
      "Doubt",
      "Exaggeration,Minimisation",
      "Flag-Waving",
      "Loaded_Language",
      "Name_Calling,labelling",
      "Repetition",
      "Slogans",
      "Thought-terminating_Cliches",
      "Whataboutism,Straw_Men,Red_Herring",
  };
  return kNames;
}

std::optional<std::size_t> technique_index(const std::string& name) {
  const auto& names = technique_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  return std::nullopt;
}

std::string Article::substring(std::size_t begin, std::size_t end) const {
  if (begin > end || end > text32.size()) {
    throw ValidationError("article " + id + ": substring range [" + std::to_string(begin) + ", " +
                          std::to_string(end) + ") out of bounds (length " +
                          std::to_string(text32.size()) + ")");
  }
  return io::utf8_encode(std::u32string_view(text32).substr(begin, end - begin));
}

namespace {

Article article_from_text32(std::string id, std::u32string text) {
  if (text.empty()) {
    throw ParseError("article " + id + ": empty article file (no title line)");
  }
  Article art;
  art.id = std::move(id);
  art.raw_length = text.size();

  // n separators produce n+1 lines, so a trailing '\n' yields a final empty
  // sentence and reconstruction stays exact.
  std::size_t line_begin = 0;
  std::size_t index = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == U'\n') {
      Sentence s;
      s.index = index++;
      s.begin = line_begin;
      s.end = i;
      s.text = io::utf8_encode(std::u32string_view(text).substr(line_begin, i - line_begin));
      art.sentences.push_back(std::move(s));
      line_begin = i + 1;
    }
  }
  art.title = art.sentences.front().text;
  art.text32 = std::move(text);
  return art;
}

}  // namespace

Article load_article(const std::filesystem::path& path) {
  const std::string bytes = io::read_file(path);
  std::u32string text;
  try {
    text = io::utf8_decode(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (text.empty()) {
    throw ParseError(path.string() + ": empty article file (no title line)");
  }
  return article_from_text32(article_id_from_path(path), std::move(text));
}

Article article_from_text(const std::string& id, const std::string& utf8_text) {
  return article_from_text32(id, io::utf8_decode(utf8_text));
}

std::vector<Article> load_articles_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("not a directory: " + dir.string());
  }
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      paths.push_back(entry.path());
    }
  }
  std::sort(paths.begin(), paths.end());
  std::vector<Article> articles;
  articles.reserve(paths.size());
  for (const auto& p : paths) {
    articles.push_back(load_article(p));
  }
  return articles;
}

std::vector<SpanLabel> load_span_labels(const std::filesystem::path& path) {
  const std::string bytes = io::read_file(path);
  std::vector<SpanLabel> labels;
  std::istringstream in(bytes);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = io::split_tabs(line);
    const std::string ctx = path.string() + ":" + std::to_string(lineno);
    if (fields.size() != 3) {
      throw ParseError(ctx + ": expected 3 tab-separated fields, got " +
                       std::to_string(fields.size()));
    }
    SpanLabel label;
    label.article_id = fields[0];
    label.begin = io::parse_index(fields[1], ctx);
    label.end = io::parse_index(fields[2], ctx);
    if (label.begin >= label.end) {
      throw ValidationError(ctx + ": span begin " + std::to_string(label.begin) +
                            " must be less than end " + std::to_string(label.end));
    }
    labels.push_back(std::move(label));
  }
  return labels;
}

void write_span_labels(const std::filesystem::path& path, const std::vector<SpanLabel>& labels) {
  std::string out;
  for (const auto& l : labels) {
    out += l.article_id;
    out += '\t';
    out += std::to_string(l.begin);
    out += '\t';
    out += std::to_string(l.end);
    out += '\n';
  }
  io::atomic_write_file(path, out);
}

std::vector<TechniqueInstance> load_technique_labels(const std::filesystem::path& path,
                                                     const std::vector<Article>* articles) {
  std::unordered_map<std::string, const Article*> by_id;
  if (articles != nullptr) {
    for (const auto& a : *articles) by_id[a.id] = &a;
  }

  const std::string bytes = io::read_file(path);
  std::vector<TechniqueInstance> out;
  std::istringstream in(bytes);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = io::split_tabs(line);
    const std::string ctx = path.string() + ":" + std::to_string(lineno);
    if (fields.size() != 4) {
      throw ParseError(ctx + ": expected 4 tab-separated fields, got " +
                       std::to_string(fields.size()));
    }
    TechniqueInstance inst;
    inst.article_id = fields[0];
    inst.technique = fields[1];
    inst.begin = io::parse_index(fields[2], ctx);
    inst.end = io::parse_index(fields[3], ctx);
    if (!technique_index(inst.technique)) {
      std::string valid;
      for (const auto& n : technique_names()) {
        if (!valid.empty()) valid += ", ";
        valid += n;
      }
      throw ValidationError(ctx + ": unknown technique \"" + inst.technique +
                            "\"; valid techniques: " + valid);
    }
    if (inst.begin >= inst.end) {
      throw ValidationError(ctx + ": span begin " + std::to_string(inst.begin) +
                            " must be less than end " + std::to_string(inst.end));
    }
    if (articles != nullptr) {
      auto it = by_id.find(inst.article_id);
      if (it == by_id.end()) {
        throw ValidationError(ctx + ": unknown article id \"" + inst.article_id + "\"");
      }
      if (inst.end > it->second->raw_length) {
        throw ValidationError(ctx + ": span end " + std::to_string(inst.end) +
                              " beyond article " + inst.article_id + " length " +
                              std::to_string(it->second->raw_length));
      }
      inst.text = it->second->substring(inst.begin, inst.end);
    }
    out.push_back(std::move(inst));
  }
  return out;
}

void write_technique_labels(const std::filesystem::path& path,
                            const std::vector<TechniqueInstance>& labels) {
  std::string out;
  for (const auto& l : labels) {
    out += l.article_id;
    out += '\t';
    out += l.technique;
    out += '\t';
    out += std::to_string(l.begin);
    out += '\t';
    out += std::to_string(l.end);
    out += '\n';
  }
  io::atomic_write_file(path, out);
}

std::vector<Token> tokenize(const Sentence& sentence) {
  const std::u32string text = io::utf8_decode(sentence.text);
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    const char32_t c = text[i];
    if (is_space32(c)) {
      ++i;
      continue;
    }
    if (is_word_char(c)) {
      std::size_t j = i;
      while (j < text.size() && is_word_char(text[j])) ++j;
      Token t;
      t.text = io::utf8_encode(std::u32string_view(text).substr(i, j - i));
      t.begin = sentence.begin + i;
      t.end = sentence.begin + j;
      t.sentence_index = sentence.index;
      tokens.push_back(std::move(t));
      i = j;
    } else {
      Token t;
      t.text = io::utf8_encode(std::u32string_view(text).substr(i, 1));
      t.begin = sentence.begin + i;
      t.end = sentence.begin + i + 1;
      t.sentence_index = sentence.index;
      tokens.push_back(std::move(t));
      ++i;
    }
  }
  return tokens;
}

std::vector<Token> tokenize_article(const Article& article) {
  std::vector<Token> tokens;
  for (const auto& s : article.sentences) {
    auto ts = tokenize(s);
    tokens.insert(tokens.end(), ts.begin(), ts.end());
  }
  return tokens;
}

std::vector<int> label_tokens(const std::vector<Token>& tokens,
                              const std::vector<SpanLabel>& spans,
                              bool containment) {
  std::vector<int> labels(tokens.size(), 0);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (const auto& span : spans) {
      const bool hit = containment
                           ? (span.begin <= tokens[i].begin && tokens[i].end <= span.end)
                           : ranges_overlap(tokens[i].begin, tokens[i].end, span.begin, span.end);
      if (hit) {
        labels[i] = 1;
        break;
      }
    }
  }
  return labels;
}

std::vector<int> label_sentences(const Article& article, const std::vector<SpanLabel>& spans) {
  std::vector<int> labels(article.sentences.size(), 0);
  for (std::size_t i = 0; i < article.sentences.size(); ++i) {
    const auto& s = article.sentences[i];
    for (const auto& span : spans) {
      if (span.article_id != article.id) continue;
      if (ranges_overlap(s.begin, s.end, span.begin, span.end)) {
        labels[i] = 1;
        break;
      }
    }
  }
  return labels;
}

SplitIndices split_train_val(std::size_t n, double fraction, std::uint64_t seed) {
  if (n == 0) {
    throw ValidationError("split_train_val: cannot split zero records");
  }
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ValidationError("split_train_val: fraction must be in (0, 1)");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  const std::size_t train_count =
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  SplitIndices split;
  split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(train_count));
  split.val.assign(order.begin() + static_cast<std::ptrdiff_t>(train_count), order.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  if (split.val.empty()) {
    split.val_empty_warning = true;
    std::cerr << "warning: validation split is empty (n=" << n << ", fraction=" << fraction
              << ")\n";
  }
  return split;
}

LabeledCorpus build_labeled_corpus(std::vector<Article> articles,
                                   const std::vector<SpanLabel>& spans,
                                   bool containment) {
  std::map<std::string, std::vector<SpanLabel>> by_id;
  for (const auto& s : spans) by_id[s.article_id].push_back(s);

  LabeledCorpus corpus;
  corpus.articles.reserve(articles.size());
  for (auto& art : articles) {
    LabeledArticle la;
    la.tokens = tokenize_article(art);
    const auto it = by_id.find(art.id);
    static const std::vector<SpanLabel> kNone;
    const auto& article_spans = it == by_id.end() ? kNone : it->second;
    for (const auto& span : article_spans) {
      if (span.end > art.raw_length) {
        throw ValidationError("article " + art.id + ": span end " + std::to_string(span.end) +
                              " beyond article length " + std::to_string(art.raw_length));
      }
    }
    la.token_labels = label_tokens(la.tokens, article_spans, containment);
    la.sentence_labels = label_sentences(art, article_spans);
    std::size_t positives = 0;
    for (int l : la.sentence_labels) positives += static_cast<std::size_t>(l);
    la.ratio_target =
        static_cast<double>(positives) / static_cast<double>(la.sentence_labels.size());
    la.article = std::move(art);
    corpus.articles.push_back(std::move(la));
  }
  return corpus;
}

}  // namespace propspot::corpus
