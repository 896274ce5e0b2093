#include "propspot/embed.hpp"

#include <algorithm>
#include <cctype>
#include <iostream>
#include <sstream>

#include "propspot/io_util.hpp"

namespace propspot::embed {

namespace {

std::string ascii_lower(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

Vec mean_of(const std::vector<const Vec*>& vectors, std::size_t dim) {
  Vec mean(dim, 0.0);
  for (const Vec* v : vectors) {
    for (std::size_t i = 0; i < dim; ++i) mean[i] += (*v)[i];
  }
  const double n = static_cast<double>(vectors.size());
  for (double& x : mean) x /= n;
  return mean;
}

}  // namespace

EmbeddingTable load_table(const std::filesystem::path& path) {
  const std::string bytes = io::read_file(path);
  EmbeddingTable table;
  std::istringstream in(bytes);
  std::string line;
  std::size_t lineno = 0;
  Vec sum;
  std::size_t count = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string word;
    fields >> word;
    Vec v;
    std::string tok;
    while (fields >> tok) {
      v.push_back(io::parse_double(tok, path.string() + ":" + std::to_string(lineno)));
    }
    if (v.empty()) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": no vector components");
    }
    if (table.dim == 0) {
      table.dim = v.size();
      sum.assign(table.dim, 0.0);
    } else if (v.size() != table.dim) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": dimension " +
                       std::to_string(v.size()) + " does not match table dimension " +
                       std::to_string(table.dim));
    }
    for (std::size_t i = 0; i < table.dim; ++i) sum[i] += v[i];
    ++count;
    if (table.entries.count(word) > 0) {
      std::cerr << "warning: duplicate word \"" << word << "\" at " << path.string() << ":"
                << lineno << "; keeping the last entry\n";
    }
    table.entries[word] = std::move(v);
  }
  if (count == 0) {
    throw ParseError(path.string() + ": empty embedding table");
  }
  table.unk_vector.assign(table.dim, 0.0);
  for (std::size_t i = 0; i < table.dim; ++i) {
    table.unk_vector[i] = sum[i] / static_cast<double>(count);
  }
  return table;
}

std::string TokenVectorFile::key(const std::string& article_id, std::size_t sentence_index,
                                 std::size_t token_index) {
  return article_id + "\x1f" + std::to_string(sentence_index) + "\x1f" +
         std::to_string(token_index);
}

const Vec& TokenVectorFile::at(const std::string& article_id, std::size_t sentence_index,
                               std::size_t token_index) const {
  const auto it = vectors.find(key(article_id, sentence_index, token_index));
  if (it == vectors.end()) {
    throw ValidationError("token vector missing for article " + article_id + ", sentence " +
                          std::to_string(sentence_index) + ", token " +
                          std::to_string(token_index));
  }
  return it->second;
}

TokenVectorFile load_token_vectors(const std::filesystem::path& path) {
  const std::string bytes = io::read_file(path);
  TokenVectorFile file;
  std::istringstream in(bytes);
  std::string line;
  std::size_t lineno = 0;
  Vec sum;
  std::size_t count = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = io::split_tabs(line);
    const std::string ctx = path.string() + ":" + std::to_string(lineno);
    if (fields.size() != 4) {
      throw ParseError(ctx + ": expected 4 tab-separated fields, got " +
                       std::to_string(fields.size()));
    }
    const std::size_t sentence_index = io::parse_index(fields[1], ctx);
    const std::size_t token_index = io::parse_index(fields[2], ctx);
    Vec v;
    std::size_t start = 0;
    const std::string& packed = fields[3];
    while (start <= packed.size()) {
      std::size_t comma = packed.find(',', start);
      if (comma == std::string::npos) comma = packed.size();
      v.push_back(io::parse_double(std::string_view(packed).substr(start, comma - start), ctx));
      start = comma + 1;
      if (comma == packed.size()) break;
    }
    if (file.dim == 0) {
      file.dim = v.size();
      sum.assign(file.dim, 0.0);
    } else if (v.size() != file.dim) {
      throw ParseError(ctx + ": dimension " + std::to_string(v.size()) +
                       " does not match file dimension " + std::to_string(file.dim));
    }
    for (std::size_t i = 0; i < file.dim; ++i) sum[i] += v[i];
    ++count;
    file.vectors[TokenVectorFile::key(fields[0], sentence_index, token_index)] = std::move(v);
  }
  if (count == 0) {
    throw ParseError(path.string() + ": empty token vector file");
  }
  file.unk_vector.assign(file.dim, 0.0);
  for (std::size_t i = 0; i < file.dim; ++i) {
    file.unk_vector[i] = sum[i] / static_cast<double>(count);
  }
  return file;
}

void write_token_vectors(const std::filesystem::path& path, const TokenVectorFile& file) {
  // Keys sort as (article_id, sentence, token) for reproducible files.
  std::vector<std::pair<std::string, const Vec*>> rows;
  rows.reserve(file.vectors.size());
  for (const auto& [key, vec] : file.vectors) rows.emplace_back(key, &vec);
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    const auto parse = [](const std::string& k) {
      const std::size_t p1 = k.find('\x1f');
      const std::size_t p2 = k.find('\x1f', p1 + 1);
      return std::tuple<std::string, unsigned long, unsigned long>(
          k.substr(0, p1), std::stoul(k.substr(p1 + 1, p2 - p1 - 1)), std::stoul(k.substr(p2 + 1)));
    };
    return parse(a.first) < parse(b.first);
  });
  std::string out;
  for (const auto& [key, vec] : rows) {
    std::string row = key;
    std::replace(row.begin(), row.end(), '\x1f', '\t');
    out += row;
    out += '\t';
    for (std::size_t i = 0; i < vec->size(); ++i) {
      if (i > 0) out += ',';
      out += io::format_double((*vec)[i]);
    }
    out += '\n';
  }
  io::atomic_write_file(path, out);
}

namespace {

template <typename Contains>
std::optional<std::pair<std::string, std::string>> split_impl(const std::string& word,
                                                              Contains&& contains) {
  if (contains(word)) return std::nullopt;  // in-vocabulary, no split needed
  if (word.size() < 4) return std::nullopt;
  std::size_t best_min = 0;
  std::size_t best_i = 0;
  for (std::size_t i = 2; i + 2 <= word.size(); ++i) {
    if (!contains(word.substr(0, i)) || !contains(word.substr(i))) continue;
    const std::size_t m = std::min(i, word.size() - i);
    if (m > best_min) {  // strict: ties keep the leftmost split point
      best_min = m;
      best_i = i;
    }
  }
  if (best_min == 0) return std::nullopt;
  return std::make_pair(word.substr(0, best_i), word.substr(best_i));
}

}  // namespace

std::optional<std::pair<std::string, std::string>> subword_split(
    const std::string& word, const std::unordered_set<std::string>& vocabulary) {
  return split_impl(word, [&](const std::string& w) { return vocabulary.count(w) > 0; });
}

std::optional<std::pair<std::string, std::string>> subword_split(const std::string& word,
                                                                 const EmbeddingTable& table) {
  return split_impl(word, [&](const std::string& w) { return table.contains(w); });
}

Vec pool_mean(const std::vector<Vec>& vectors) {
  if (vectors.empty()) {
    throw ValidationError("pool_mean: cannot pool an empty list of vectors");
  }
  const std::size_t dim = vectors.front().size();
  for (const auto& v : vectors) {
    if (v.size() != dim) {
      throw ValidationError("pool_mean: mismatched vector dimensions");
    }
  }
  std::vector<const Vec*> refs;
  refs.reserve(vectors.size());
  for (const auto& v : vectors) refs.push_back(&v);
  return mean_of(refs, dim);
}

double coverage(const EmbeddingTable& table, const std::vector<std::string>& corpus_vocabulary,
                bool subword_fallback) {
  if (corpus_vocabulary.empty()) {
    throw ValidationError("coverage: empty corpus vocabulary");
  }
  std::size_t covered = 0;
  for (const auto& word : corpus_vocabulary) {
    if (table.contains(word) || table.contains(ascii_lower(word))) {
      ++covered;
    } else if (subword_fallback && subword_split(ascii_lower(word), table)) {
      ++covered;
    }
  }
  return static_cast<double>(covered) / static_cast<double>(corpus_vocabulary.size());
}

EmbeddingProvider EmbeddingProvider::from_table(EmbeddingTable table, bool left_piece_only) {
  EmbeddingProvider p;
  p.source_ = std::move(table);
  p.left_piece_only_ = left_piece_only;
  return p;
}

EmbeddingProvider EmbeddingProvider::from_token_vectors(TokenVectorFile file) {
  EmbeddingProvider p;
  p.source_ = std::move(file);
  return p;
}

EmbeddingProvider EmbeddingProvider::load(const std::filesystem::path& table_path,
                                          const std::filesystem::path& token_vectors_path,
                                          bool left_piece_only) {
  const bool have_table = !table_path.empty();
  const bool have_vectors = !token_vectors_path.empty();
  if (have_table == have_vectors) {
    throw ValidationError(
        "exactly one of embedding_table and token_vectors must be configured");
  }
  if (have_table) return from_table(load_table(table_path), left_piece_only);
  return from_token_vectors(load_token_vectors(token_vectors_path));
}

std::size_t EmbeddingProvider::dim() const {
  if (const auto* t = std::get_if<EmbeddingTable>(&source_)) return t->dim;
  return std::get<TokenVectorFile>(source_).dim;
}

const Vec& EmbeddingProvider::unk() const {
  if (const auto* t = std::get_if<EmbeddingTable>(&source_)) return t->unk_vector;
  return std::get<TokenVectorFile>(source_).unk_vector;
}

bool EmbeddingProvider::is_positional() const {
  return std::holds_alternative<TokenVectorFile>(source_);
}

std::vector<Vec> EmbeddingProvider::pieces(const TokenRef& ref) const {
  if (const auto* file = std::get_if<TokenVectorFile>(&source_)) {
    return {file->at(*ref.article_id, ref.sentence_index, ref.token_index)};
  }
  const auto& table = std::get<EmbeddingTable>(source_);
  const std::string& word = *ref.text;
  auto it = table.entries.find(word);
  if (it != table.entries.end()) return {it->second};
  const std::string lower = ascii_lower(word);
  it = table.entries.find(lower);
  if (it != table.entries.end()) return {it->second};
  if (const auto split = subword_split(lower, table)) {
    return {table.entries.at(split->first), table.entries.at(split->second)};
  }
  return {table.unk_vector};
}

Vec EmbeddingProvider::token_embedding(const TokenRef& ref) const {
  auto vs = pieces(ref);
  if (vs.size() == 1 || left_piece_only_) return vs.front();
  return pool_mean(vs);
}

}  // namespace propspot::embed
