#include "propspot/synth.hpp"

#include <algorithm>
#include <string>

#include "propspot/io_util.hpp"
#include "propspot/rng.hpp"

namespace propspot::synth {

namespace {

Vec noise_vector(Rng& rng, std::size_t dim, double sigma) {
  Vec v(dim, 0.0);
  for (double& x : v) x = rng.normal() * sigma;
  return v;
}

std::string pad_id(const char* prefix, std::size_t i) {
  std::string n = std::to_string(i);
  while (n.size() < 4) n.insert(n.begin(), '0');
  return prefix + n;
}

}  // namespace

SICorpus gen_si_corpus(const SynthSpec& spec) {
  if (spec.articles < 1 || spec.sentences_per_article < 1 || spec.tokens_per_sentence < 1) {
    throw ValidationError("synth: article/sentence/token counts must be at least 1");
  }
  if (spec.embedding_dim < 4) {
    throw ValidationError("synth: SI embedding_dim must be at least 4");
  }
  if (!(spec.snr > 0.0)) {
    throw ValidationError("synth: snr must be positive");
  }
  const double sigma = 1.0 / spec.snr;
  const std::size_t dim = spec.embedding_dim;
  Rng rng(spec.seed);

  SICorpus out;
  out.vectors.dim = dim;
  Vec vector_sum(dim, 0.0);
  std::size_t vector_count = 0;
  const auto emit_vector = [&](const std::string& id, std::size_t s, std::size_t t, Vec v) {
    for (std::size_t i = 0; i < dim; ++i) vector_sum[i] += v[i];
    ++vector_count;
    out.vectors.vectors[embed::TokenVectorFile::key(id, s, t)] = std::move(v);
  };

  constexpr std::size_t kTitleTokens = 4;
  for (std::size_t a = 0; a < spec.articles; ++a) {
    const std::string id = pad_id("s", a + 1);
    const bool article_bit = rng.bernoulli(0.5);

    std::string text = "ttl";
    for (std::size_t t = 1; t < kTitleTokens; ++t) text += " ttl";
    for (std::size_t t = 0; t < kTitleTokens; ++t) {
      Vec v = noise_vector(rng, dim, sigma);
      if (spec.signal_title && article_bit) v[2] += 1.0;
      emit_vector(id, 0, t, std::move(v));
    }

    struct PendingSpan {
      std::size_t begin, end;
    };
    std::vector<PendingSpan> spans;
    for (std::size_t s = 0; s < spec.sentences_per_article; ++s) {
      const bool sentence_bit = rng.bernoulli(0.5);
      const std::size_t sentence_index = s + 1;
      text += '\n';
      std::size_t cursor = io::utf8_length(text);  // ASCII here, but stay exact

      // Leading marker token carries the sentence signal.
      text += "mrk";
      {
        Vec v = noise_vector(rng, dim, sigma);
        if (spec.signal_sentence && sentence_bit) v[1] += 1.0;
        emit_vector(id, sentence_index, 0, std::move(v));
      }
      cursor += 3;

      bool in_run = false;
      std::size_t run_begin = 0;
      for (std::size_t t = 0; t < spec.tokens_per_sentence; ++t) {
        const bool token_bit = rng.bernoulli(0.5);
        bool context = true;
        if (spec.signal_title && spec.signal_sentence) {
          context = article_bit || sentence_bit;
        } else if (spec.signal_title) {
          context = article_bit;
        } else if (spec.signal_sentence) {
          context = sentence_bit;
        }
        const bool label = token_bit && context;

        const std::string word = token_bit ? "tok1" : "tok0";
        text += ' ';
        ++cursor;
        const std::size_t begin = cursor;
        text += word;
        cursor += word.size();

        Vec v = noise_vector(rng, dim, sigma);
        if (spec.signal_token && token_bit) v[0] += 1.0;
        emit_vector(id, sentence_index, t + 1, std::move(v));

        if (label && !in_run) {
          in_run = true;
          run_begin = begin;
        }
        if (!label && in_run) {
          spans.push_back({run_begin, begin - 1});  // up to the preceding space
          in_run = false;
        }
        if (label && t + 1 == spec.tokens_per_sentence) {
          spans.push_back({run_begin, cursor});
          in_run = false;
        }
      }
    }

    out.articles.push_back(corpus::article_from_text(id, text));
    for (const auto& span : spans) {
      out.spans.push_back({id, span.begin, span.end});
    }
  }

  out.vectors.unk_vector.assign(dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) {
    out.vectors.unk_vector[i] = vector_sum[i] / static_cast<double>(vector_count);
  }
  return out;
}

void write_si_corpus(const SICorpus& corpus, const std::filesystem::path& dir) {
  for (const auto& article : corpus.articles) {
    io::atomic_write_file(dir / "articles" / ("article" + article.id + ".txt"),
                          io::utf8_encode(article.text32));
  }
  corpus::write_span_labels(dir / "si_labels.tsv", corpus.spans);
  embed::write_token_vectors(dir / "token_vectors.tsv", corpus.vectors);
}

TCCorpus gen_tc_corpus(const SynthSpec& spec) {
  const auto& classes = corpus::technique_names();
  const std::size_t k = classes.size();
  if (spec.tc_embedding_dim < k + 1) {
    throw ValidationError("synth: tc_embedding_dim must be at least " + std::to_string(k + 1));
  }
  if (spec.tc_majority_count < 1 || spec.tc_minority_count < 1) {
    throw ValidationError("synth: class counts must be at least 1");
  }
  if (!(spec.tc_snr > 0.0)) {
    throw ValidationError("synth: tc_snr must be positive");
  }
  const double sigma = 1.0 / spec.tc_snr;
  const std::size_t dim = spec.tc_embedding_dim;

  static const char* kFillers[] = {"lorem", "ipsum",  "dolor", "amet",  "porta",
                                   "vitae", "ornare", "felis", "augue", "neque"};
  constexpr std::size_t kFillerCount = sizeof(kFillers) / sizeof(kFillers[0]);
  const std::string kMarker = "aqzmark";  // reserved; only minority spans carry it

  Rng rng(spec.seed + 0x7c001);

  TCCorpus out;
  out.vectors.dim = dim;
  Vec vector_sum(dim, 0.0);
  std::size_t vector_count = 0;

  // Interleaved label sequence with exact per-class counts.
  const auto make_labels = [&](std::size_t majority, std::size_t minority) {
    std::vector<std::size_t> labels;
    for (std::size_t c = 1; c < k; ++c) {
      for (std::size_t i = 0; i < majority; ++i) labels.push_back(c);
    }
    for (std::size_t i = 0; i < minority; ++i) labels.push_back(0);
    rng.shuffle(labels);
    return labels;
  };

  std::size_t minority_round_robin = 0;
  const auto build_split = [&](const char* id_prefix, const std::vector<std::size_t>& labels,
                               std::vector<corpus::TechniqueInstance>& dest) {
    std::size_t article_no = 0;
    std::size_t line_in_article = 0;
    std::string text;
    std::string article_id;
    std::vector<std::pair<std::size_t, std::size_t>> line_ranges;  // per span line
    std::vector<std::size_t> line_labels;

    const auto flush_article = [&]() {
      if (line_in_article == 0) return;
      out.articles.push_back(corpus::article_from_text(article_id, text));
      for (std::size_t i = 0; i < line_ranges.size(); ++i) {
        corpus::TechniqueInstance inst;
        inst.article_id = article_id;
        inst.technique = classes[line_labels[i]];
        inst.begin = line_ranges[i].first;
        inst.end = line_ranges[i].second;
        inst.text = out.articles.back().substring(inst.begin, inst.end);
        dest.push_back(std::move(inst));
      }
      line_ranges.clear();
      line_labels.clear();
      line_in_article = 0;
    };

    for (std::size_t n = 0; n < labels.size(); ++n) {
      if (line_in_article == 0) {
        ++article_no;
        article_id = pad_id(id_prefix, article_no);
        text = "doc " + article_id;  // title line
        // Title tokens get plain noise vectors.
        const auto title_tokens = corpus::tokenize(corpus::Sentence{0, text, 0, text.size()});
        for (std::size_t t = 0; t < title_tokens.size(); ++t) {
          Vec v = noise_vector(rng, dim, sigma);
          for (std::size_t i = 0; i < dim; ++i) vector_sum[i] += v[i];
          ++vector_count;
          out.vectors.vectors[embed::TokenVectorFile::key(article_id, 0, t)] = std::move(v);
        }
      }
      const std::size_t label = labels[n];
      const std::size_t sentence_index = line_in_article + 1;

      // Span direction: majority classes own an axis; the minority copies
      // majority clusters round-robin so embeddings never identify it.
      std::size_t direction;
      if (label == 0) {
        direction = 1 + (minority_round_robin % (k - 1));
        ++minority_round_robin;
      } else {
        direction = label;
      }

      std::vector<std::string> words;
      const std::size_t filler_count = 3 + rng.below(4);
      for (std::size_t i = 0; i < filler_count; ++i) {
        words.push_back(kFillers[rng.below(kFillerCount)]);
      }
      if (label == 0) {
        words.insert(words.begin() + static_cast<std::ptrdiff_t>(rng.below(words.size() + 1)),
                     kMarker);
      } else if (rng.bernoulli(spec.tc_lexical_prob)) {
        words.insert(words.begin() + static_cast<std::ptrdiff_t>(rng.below(words.size() + 1)),
                     "cls" + std::to_string(label));
      }

      text += '\n';
      const std::size_t line_begin = io::utf8_length(text);
      std::string line;
      for (std::size_t i = 0; i < words.size(); ++i) {
        if (i > 0) line += ' ';
        line += words[i];
      }
      text += line;
      line_ranges.emplace_back(line_begin, line_begin + line.size());
      line_labels.push_back(label);

      for (std::size_t t = 0; t < words.size(); ++t) {
        Vec v = noise_vector(rng, dim, sigma);
        v[direction] += 1.0;
        for (std::size_t i = 0; i < dim; ++i) vector_sum[i] += v[i];
        ++vector_count;
        out.vectors.vectors[embed::TokenVectorFile::key(article_id, sentence_index, t)] =
            std::move(v);
      }

      ++line_in_article;
      if (line_in_article == spec.tc_spans_per_article || n + 1 == labels.size()) {
        flush_article();
      }
    }
  };

  build_split("tctr", make_labels(spec.tc_majority_count, spec.tc_minority_count), out.train);
  build_split("tcte", make_labels(spec.tc_test_majority, spec.tc_test_minority), out.test);

  out.vectors.unk_vector.assign(dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) {
    out.vectors.unk_vector[i] = vector_sum[i] / static_cast<double>(vector_count);
  }
  return out;
}

void write_tc_corpus(const TCCorpus& corpus, const std::filesystem::path& dir) {
  for (const auto& article : corpus.articles) {
    io::atomic_write_file(dir / "articles" / ("article" + article.id + ".txt"),
                          io::utf8_encode(article.text32));
  }
  corpus::write_technique_labels(dir / "tc_labels_train.tsv", corpus.train);
  corpus::write_technique_labels(dir / "tc_labels_test.tsv", corpus.test);
  embed::write_token_vectors(dir / "token_vectors.tsv", corpus.vectors);
}

}  // namespace propspot::synth
