#include <doctest.h>

#include <unordered_set>

#include "propspot/embed.hpp"
#include "propspot/io_util.hpp"
#include "propspot/rng.hpp"
#include "test_util.hpp"

using namespace propspot;
using namespace propspot::embed;

TEST_CASE("load_table parses word-vector lines") {
  TempDir tmp;
  SUBCASE("two lines of three floats") {
    const auto table = load_table(tmp.file("v.txt", "cat 1 2 3\ndog 4 5 6\n"));
    CHECK(table.dim == 3);
    CHECK(table.entries.size() == 2);
    CHECK(table.entries.at("cat") == Vec{1, 2, 3});
  }
  SUBCASE("dimension mismatch names the line") {
    try {
      load_table(tmp.file("v.txt", "cat 1 2 3\ndog 4 5 6 7\n"));
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
  }
  SUBCASE("unk vector is the mean of all vectors") {
    const auto table = load_table(tmp.file("v.txt", "a 1 1\nb 3 3\n"));
    CHECK(table.unk_vector == Vec{2, 2});
  }
  SUBCASE("duplicate word keeps the last entry") {
    const auto table = load_table(tmp.file("v.txt", "a 1 1\na 9 9\n"));
    CHECK(table.entries.at("a") == Vec{9, 9});
  }
}

namespace {

EmbeddingTable table_of(const std::vector<std::string>& words, std::size_t dim = 2) {
  EmbeddingTable t;
  t.dim = dim;
  double v = 1.0;
  for (const auto& w : words) {
    t.entries[w] = Vec(dim, v);
    v += 1.0;
  }
  t.unk_vector = Vec(dim, -1.0);
  return t;
}

}  // namespace

TEST_CASE("subword_split reproduces the conjunct-word examples") {
  const std::unordered_set<std::string> vocab{"jaw",   "boned", "anti",  "christs", "trump",
                                              "ists",  "cyber", "spies", "at",      "least"};
  const auto check_split = [&](const std::string& word, const std::string& left,
                               const std::string& right) {
    const auto split = subword_split(word, vocab);
    REQUIRE(split.has_value());
    CHECK(split->first == left);
    CHECK(split->second == right);
  };
  check_split("jawboned", "jaw", "boned");
  check_split("antichrists", "anti", "christs");
  check_split("trumpists", "trump", "ists");
  check_split("cyberspies", "cyber", "spies");
  check_split("atleast", "at", "least");
}

TEST_CASE("subword_split rules") {
  SUBCASE("no valid split returns nothing") {
    CHECK(!subword_split("xqzzy", std::unordered_set<std::string>{"a", "b"}).has_value());
  }
  SUBCASE("in-vocabulary words are not split") {
    CHECK(!subword_split("atleast", std::unordered_set<std::string>{"atleast", "at", "least"})
               .has_value());
  }
  SUBCASE("each piece must have at least two characters") {
    // "x" + "bcdef" would leave a one-character piece.
    CHECK(!subword_split("xbcdef", std::unordered_set<std::string>{"x", "bcdef"}).has_value());
    CHECK(subword_split("xybcdef", std::unordered_set<std::string>{"xy", "bcdef"}).has_value());
  }
  SUBCASE("the split maximizing the smaller piece wins") {
    const std::unordered_set<std::string> vocab{"cyb", "erspies", "cyber", "spies"};
    const auto split = subword_split("cyberspies", vocab);
    REQUIRE(split.has_value());
    CHECK(split->first == "cyber");  // min 5 beats min 3
  }
  SUBCASE("ties break to the leftmost split point") {
    const std::unordered_set<std::string> vocab{"aaa", "aaaaa"};
    const auto split = subword_split("aaaaaaaa", vocab);
    REQUIRE(split.has_value());
    CHECK(split->first == "aaa");
    CHECK(split->second == "aaaaa");
  }
}

TEST_CASE("table lookup resolution order") {
  EmbeddingTable t = table_of({"home", "at", "least"});
  const std::string id = "a";
  auto provider = EmbeddingProvider::from_table(t);
  const auto pieces_of = [&](const std::string& word) {
    TokenRef ref{&id, 0, 0, &word};
    return provider.pieces(ref);
  };
  SUBCASE("exact hit") {
    const auto vs = pieces_of("home");
    REQUIRE(vs.size() == 1);
    CHECK(vs[0] == t.entries.at("home"));
  }
  SUBCASE("lowercased hit") {
    const auto vs = pieces_of("Home");
    REQUIRE(vs.size() == 1);
    CHECK(vs[0] == t.entries.at("home"));
  }
  SUBCASE("subword split yields two vectors") {
    const auto vs = pieces_of("atleast");
    REQUIRE(vs.size() == 2);
    CHECK(vs[0] == t.entries.at("at"));
    CHECK(vs[1] == t.entries.at("least"));
  }
  SUBCASE("unsplittable word falls back to unk") {
    const auto vs = pieces_of("xqzzy");
    REQUIRE(vs.size() == 1);
    CHECK(vs[0] == t.unk_vector);
  }
  SUBCASE("token embedding averages split pieces") {
    const std::string word = "atleast";
    TokenRef ref{&id, 0, 0, &word};
    const Vec emb = provider.token_embedding(ref);
    CHECK(emb[0] == doctest::Approx(0.5 * (t.entries.at("at")[0] + t.entries.at("least")[0])));
  }
  SUBCASE("left-piece-only mode uses the first piece") {
    auto left_provider = EmbeddingProvider::from_table(t, true);
    const std::string word = "atleast";
    TokenRef ref{&id, 0, 0, &word};
    CHECK(left_provider.token_embedding(ref) == t.entries.at("at"));
  }
}

TEST_CASE("lookup outputs always match the provider dimension") {
  EmbeddingTable t = table_of({"aa", "bb", "ccdd"}, 3);
  auto provider = EmbeddingProvider::from_table(t);
  const std::string id = "a";
  for (const std::string word : {"aa", "AA", "aabb", "zzzz", "ccdd"}) {
    TokenRef ref{&id, 0, 0, &word};
    for (const auto& v : provider.pieces(ref)) CHECK(v.size() == provider.dim());
  }
}

TEST_CASE("token vector files resolve by position") {
  TempDir tmp;
  const auto path = tmp.file("tv.tsv", "a1\t0\t0\t1,2\na1\t0\t1\t3,4\na2\t1\t0\t5,6\n");
  const auto file = load_token_vectors(path);
  CHECK(file.dim == 2);
  CHECK(file.at("a1", 0, 1) == Vec{3, 4});
  CHECK_THROWS_AS(file.at("a1", 9, 9), ValidationError);
  try {
    file.at("a1", 9, 9);
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("a1") != std::string::npos);
    CHECK(msg.find("9") != std::string::npos);
  }

  // Round-trip through the writer.
  write_token_vectors(tmp.path / "out.tsv", file);
  const auto again = load_token_vectors(tmp.path / "out.tsv");
  CHECK(again.vectors == file.vectors);
  CHECK(io::read_file(tmp.path / "out.tsv") == io::read_file(path));
}

TEST_CASE("pool_mean") {
  CHECK(pool_mean({{1, 2}, {3, 4}}) == Vec{2, 3});
  CHECK(pool_mean({{7, 8}}) == Vec{7, 8});
  CHECK(pool_mean({{7, 8}, {7, 8}}) == Vec{7, 8});
  CHECK_THROWS_AS(pool_mean({}), ValidationError);
  CHECK_THROWS_AS(pool_mean({{1, 2}, {1, 2, 3}}), ValidationError);
}

TEST_CASE("pool_mean is order-invariant over a fixed multiset") {
  Rng rng(3);
  std::vector<Vec> vs;
  for (int i = 0; i < 6; ++i) {
    Vec v(4);
    for (double& x : v) x = rng.normal();
    vs.push_back(v);
  }
  const Vec base = pool_mean(vs);
  std::vector<Vec> shuffled = {vs[3], vs[0], vs[5], vs[1], vs[4], vs[2]};
  const Vec other = pool_mean(shuffled);
  for (std::size_t i = 0; i < base.size(); ++i) {
    CHECK(base[i] == doctest::Approx(other[i]).epsilon(1e-12));
  }
}

TEST_CASE("coverage counts table hits and optional split coverage") {
  EmbeddingTable t = table_of({"a", "at", "least"});
  SUBCASE("plain intersection") {
    CHECK(coverage(t, {"a", "b"}) == doctest::Approx(0.5));
    CHECK(coverage(t, {"a", "at"}) == doctest::Approx(1.0));
  }
  SUBCASE("split coverage counts splittable words") {
    CHECK(coverage(t, {"atleast"}, false) == doctest::Approx(0.0));
    CHECK(coverage(t, {"atleast"}, true) == doctest::Approx(1.0));
  }
  SUBCASE("empty vocabulary is an error") {
    CHECK_THROWS_AS(coverage(t, {}), ValidationError);
  }
}

TEST_CASE("coverage with fallback never decreases") {
  Rng rng(21);
  const std::vector<std::string> pool{"ab", "cd", "ef", "abcd", "cdef", "abef", "xq", "zz"};
  for (int round = 0; round < 20; ++round) {
    std::vector<std::string> table_words, vocab;
    for (const auto& w : pool) {
      if (rng.bernoulli(0.5)) table_words.push_back(w);
      if (rng.bernoulli(0.5)) vocab.push_back(w + (rng.bernoulli(0.3) ? "x" : ""));
    }
    if (table_words.empty() || vocab.empty()) continue;
    EmbeddingTable t = table_of(table_words);
    CHECK(coverage(t, vocab, true) >= coverage(t, vocab, false));
  }
}
