#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "propspot/common.hpp"
#include "propspot/corpus.hpp"
#include "propspot/embed.hpp"

namespace propspot::synth {

// Deterministic generators for desk-scale experiments. Both corpora are pure
// functions of the spec and write the exact file formats the loaders read.
struct SynthSpec {
  std::uint64_t seed = 7;

  // Span-identification corpus.
  std::size_t articles = 48;
  std::size_t sentences_per_article = 10;  // content sentences, excluding the title
  std::size_t tokens_per_sentence = 10;    // content tokens, excluding the sentence marker
  std::size_t embedding_dim = 12;
  double snr = 6.0;  // signal amplitude over noise sigma
  bool signal_title = true;
  bool signal_sentence = true;
  bool signal_token = true;

  // Technique-classification corpus (class 0 is the planted minority).
  std::size_t tc_embedding_dim = 16;
  double tc_snr = 25.0;
  std::size_t tc_majority_count = 40;
  std::size_t tc_minority_count = 6;
  std::size_t tc_test_majority = 10;
  std::size_t tc_test_minority = 4;
  double tc_lexical_prob = 0.7;  // majority class word presence in span text
  std::size_t tc_spans_per_article = 20;
};

struct SICorpus {
  std::vector<corpus::Article> articles;
  std::vector<corpus::SpanLabel> spans;
  embed::TokenVectorFile vectors;
};

// Token labels follow y = T AND (A OR S): T is a per-token bit visible in the
// token's own vector, A lives only in the title tokens and S only in each
// sentence's leading marker token. A token-only classifier observes just T,
// so its Bayes rule predicts positive whenever T = 1, giving
//   precision = P(A or S) = 0.75, recall = 1, F1 = 6/7 ~ 0.857,
// while the full-context Bayes F1 is 1. Disabling signal_title or
// signal_sentence removes the corresponding factor from the label rule
// (with neither, y = T and a token-only model can be perfect).
SICorpus gen_si_corpus(const SynthSpec& spec);

// Writes articles/, si_labels.tsv, token_vectors.tsv under dir.
void write_si_corpus(const SICorpus& corpus, const std::filesystem::path& dir);

struct TCCorpus {
  std::vector<corpus::Article> articles;  // train + test articles
  std::vector<corpus::TechniqueInstance> train;
  std::vector<corpus::TechniqueInstance> test;
  embed::TokenVectorFile vectors;
};

// Majority classes are separable in the embedding channel (one tight cluster
// per class). The minority class copies majority clusters round-robin, so no
// embedding-based classifier can recover it; its spans instead always carry
// a reserved marker word that only the lexical feature channel sees.
TCCorpus gen_tc_corpus(const SynthSpec& spec);

// Writes articles/, tc_labels_train.tsv, tc_labels_test.tsv,
// token_vectors.tsv under dir.
void write_tc_corpus(const TCCorpus& corpus, const std::filesystem::path& dir);

}  // namespace propspot::synth
