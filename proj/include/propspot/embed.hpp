#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "propspot/common.hpp"

namespace propspot::embed {

// Frozen word-vector table. Immutable after load.
struct EmbeddingTable {
  std::size_t dim = 0;
  std::unordered_map<std::string, Vec> entries;
  Vec unk_vector;  // componentwise mean of all loaded vectors

  bool contains(const std::string& word) const { return entries.count(word) > 0; }
};

// One `word v1 ... vd` line per word, space-separated. unk = mean of all
// vectors; duplicate words resolve last-wins with a warning on stderr.
EmbeddingTable load_table(const std::filesystem::path& path);

// Precomputed per-token contextual vectors, keyed by position.
struct TokenVectorFile {
  std::size_t dim = 0;
  std::unordered_map<std::string, Vec> vectors;
  Vec unk_vector;  // mean of all stored vectors (empty-pool fallback)

  static std::string key(const std::string& article_id, std::size_t sentence_index,
                         std::size_t token_index);
  const Vec& at(const std::string& article_id, std::size_t sentence_index,
                std::size_t token_index) const;
};

// TSV `article_id\tsentence_idx\ttoken_idx\tv1,...,vd` (comma-joined floats).
TokenVectorFile load_token_vectors(const std::filesystem::path& path);
void write_token_vectors(const std::filesystem::path& path, const TokenVectorFile& file);

// Splits an OOV word into two in-vocabulary pieces, each at least two
// characters long. Among valid splits the one maximizing
// min(len(left), len(right)) wins; ties break to the leftmost split point.
// Returns nothing when the word is in-vocabulary or no valid split exists.
std::optional<std::pair<std::string, std::string>> subword_split(
    const std::string& word, const std::unordered_set<std::string>& vocabulary);
std::optional<std::pair<std::string, std::string>> subword_split(const std::string& word,
                                                                 const EmbeddingTable& table);

Vec pool_mean(const std::vector<Vec>& vectors);

// Fraction of the corpus vocabulary found in the table (exact or lowercased
// match; with subword_fallback a splittable word also counts).
double coverage(const EmbeddingTable& table, const std::vector<std::string>& corpus_vocabulary,
                bool subword_fallback = false);

struct TokenRef {
  const std::string* article_id = nullptr;
  std::size_t sentence_index = 0;
  std::size_t token_index = 0;
  const std::string* text = nullptr;
};

// Uniform front over the two vector sources. Read-only after construction.
class EmbeddingProvider {
 public:
  static EmbeddingProvider from_table(EmbeddingTable table, bool left_piece_only = false);
  static EmbeddingProvider from_token_vectors(TokenVectorFile file);
  static EmbeddingProvider load(const std::filesystem::path& table_path,
                                const std::filesystem::path& token_vectors_path,
                                bool left_piece_only = false);

  std::size_t dim() const;
  const Vec& unk() const;
  bool is_positional() const;

  // Resolution order for tables: exact -> lowercased -> subword split (two
  // vectors) -> unk. Positional sources return exactly one vector and throw
  // on a missing position.
  std::vector<Vec> pieces(const TokenRef& ref) const;

  // One vector per token: the mean of its pieces (or the left piece only,
  // when configured so).
  Vec token_embedding(const TokenRef& ref) const;

 private:
  EmbeddingProvider() = default;
  std::variant<EmbeddingTable, TokenVectorFile> source_;
  bool left_piece_only_ = false;
};

}  // namespace propspot::embed
