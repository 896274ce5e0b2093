// Acceptance suite: runs every criterion end to end and prints one PASS/FAIL
// line per criterion. The CLI binary path arrives as argv[1].

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "propspot/classify.hpp"
#include "propspot/corpus.hpp"
#include "propspot/embed.hpp"
#include "propspot/eval.hpp"
#include "propspot/features.hpp"
#include "propspot/io_util.hpp"
#include "propspot/rng.hpp"
#include "propspot/span_mg.hpp"
#include "propspot/synth.hpp"

using namespace propspot;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string g_cli;
fs::path g_work;

double seconds_since(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = g_cli + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  return WEXITSTATUS(status);
}

std::string read_all(const fs::path& p) { return io::read_file(p); }

bool files_equal(const fs::path& a, const fs::path& b) { return read_all(a) == read_all(b); }

double median5(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

// --------------------------------------------------------------------------

bool criterion1_gradcheck(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  const int code = run_cli("gradcheck --seed 42", g_work / "gradcheck.log");
  const double elapsed = seconds_since(start);
  detail = "exit " + std::to_string(code) + ", " + std::to_string(elapsed) + " s";
  if (code != 0) return false;
  if (elapsed >= 60.0) return false;
  const int fault = run_cli("gradcheck --seed 42 --inject-fault", g_work / "gradfault.log");
  detail += ", fault-injection exit " + std::to_string(fault);
  return fault == 1;
}

bool criterion2_span_oracle(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(9090);
  double max_diff = 0.0;
  for (int round = 0; round < 1000; ++round) {
    std::vector<corpus::SpanLabel> pred, gold;
    const std::size_t n_articles = 1 + rng.below(3);
    double precision_sum = 0.0, recall_sum = 0.0;
    for (std::size_t a = 0; a < n_articles; ++a) {
      const std::string id = "a" + std::to_string(a);
      std::vector<corpus::SpanLabel> p, g;
      for (std::size_t i = 0, np = rng.below(11); i < np; ++i) {
        const std::size_t b = rng.below(400);
        p.push_back({id, b, b + 1 + rng.below(50)});
      }
      for (std::size_t i = 0, ng = rng.below(11); i < ng; ++i) {
        const std::size_t b = rng.below(400);
        g.push_back({id, b, b + 1 + rng.below(50)});
      }
      // Character-set oracle.
      for (const auto& s : p) {
        for (const auto& t : g) {
          std::size_t inter = 0;
          for (std::size_t c = s.begin; c < s.end; ++c) {
            if (c >= t.begin && c < t.end) ++inter;
          }
          if (inter == 0) continue;
          precision_sum += static_cast<double>(inter) / static_cast<double>(s.end - s.begin);
          recall_sum += static_cast<double>(inter) / static_cast<double>(t.end - t.begin);
        }
      }
      pred.insert(pred.end(), p.begin(), p.end());
      gold.insert(gold.end(), g.begin(), g.end());
    }
    const double oracle_p = pred.empty() ? 0.0 : precision_sum / static_cast<double>(pred.size());
    const double oracle_r = gold.empty() ? 0.0 : recall_sum / static_cast<double>(gold.size());
    const double oracle_f =
        oracle_p + oracle_r > 0.0 ? 2.0 * oracle_p * oracle_r / (oracle_p + oracle_r) : 0.0;
    const auto fast = eval::span_metrics(pred, gold);
    max_diff = std::max({max_diff, std::abs(fast.precision - oracle_p),
                         std::abs(fast.recall - oracle_r), std::abs(fast.f1 - oracle_f)});
  }
  const double elapsed = seconds_since(start);
  detail = "max |diff| " + io::format_double(max_diff) + ", " + std::to_string(elapsed) + " s";
  return max_diff < 1e-9 && elapsed < 30.0;
}

bool criterion3_worked_examples(std::string& detail) {
  const auto half = eval::span_metrics({{"a", 0, 10}}, {{"a", 5, 15}});
  const auto two = eval::span_metrics({{"a", 0, 10}}, {{"a", 0, 3}, {"a", 5, 8}});
  const bool spans_ok = std::abs(half.precision - 0.5) < 1e-12 &&
                        std::abs(half.recall - 0.5) < 1e-12 && std::abs(half.f1 - 0.5) < 1e-12 &&
                        std::abs(two.precision - 0.6) < 1e-12 &&
                        std::abs(two.recall - 1.0) < 1e-12 && std::abs(two.f1 - 0.75) < 1e-12;

  features::PreprocessConfig pre;
  pre.remove_stopwords = false;
  pre.stem = false;
  features::FeaturePipeline pipeline;
  pipeline.pre = pre;
  pipeline.channels.push_back(
      features::fit_tfidf({"a b", "a c"}, {features::ChannelKind::Word, 1, 1, 200000}, pre));
  const auto fv = pipeline.transform("a b");
  double w_a = 0.0, w_b = 0.0;
  for (const auto& [col, w] : fv.sparse) {
    if (col == pipeline.channels[0].gram_to_column.at("a")) w_a = w;
    if (col == pipeline.channels[0].gram_to_column.at("b")) w_b = w;
  }
  const bool tfidf_ok = std::abs(w_a - 0.5797) < 1e-4 && std::abs(w_b - 0.8148) < 1e-4;
  detail = "spans " + std::string(spans_ok ? "exact" : "WRONG") + "; tfidf a=" +
           io::format_double(w_a) + " b=" + io::format_double(w_b);
  return spans_ok && tfidf_ok;
}

span_mg::MGConfig mg_config_for(const synth::SynthSpec& spec, std::uint64_t seed,
                                bool token_only) {
  span_mg::MGConfig cfg;
  cfg.embedding_dim = spec.embedding_dim;
  cfg.article_dim = 8;
  cfg.sentence_dim = 8;
  cfg.token_dim = 8;
  cfg.lr = 0.02;
  cfg.epochs = 25;
  cfg.seed = seed;
  cfg.token_only = token_only;
  return cfg;
}

bool criterion4_mg_benefit(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<double> mg_f1, token_f1;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    synth::SynthSpec spec;
    spec.seed = 1000 + seed;
    spec.articles = 48;
    spec.sentences_per_article = 10;
    spec.tokens_per_sentence = 10;
    const auto corpus_data = synth::gen_si_corpus(spec);
    const auto provider = embed::EmbeddingProvider::from_token_vectors(corpus_data.vectors);
    const auto labeled = corpus::build_labeled_corpus(corpus_data.articles, corpus_data.spans);
    mg_f1.push_back(
        span_mg::train_si(labeled, provider, mg_config_for(spec, seed, false)).best_val_f1);
    token_f1.push_back(
        span_mg::train_si(labeled, provider, mg_config_for(spec, seed, true)).best_val_f1);
  }
  const double mg_median = median5(mg_f1);
  const double token_median = median5(token_f1);
  const double elapsed = seconds_since(start);
  detail = "median MG " + io::format_double(mg_median) + " vs token-only " +
           io::format_double(token_median) + ", " + std::to_string(elapsed) + " s";
  return mg_median - token_median >= 0.05 && elapsed < 300.0;
}

bool criterion5_alpha_endpoints(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  synth::SynthSpec spec;
  spec.seed = 77;
  spec.articles = 8;
  spec.sentences_per_article = 5;
  spec.tokens_per_sentence = 6;
  const auto corpus_data = synth::gen_si_corpus(spec);
  const auto provider = embed::EmbeddingProvider::from_token_vectors(corpus_data.vectors);
  const auto labeled = corpus::build_labeled_corpus(corpus_data.articles, corpus_data.spans);

  const auto bits_equal = [](std::vector<double>& a, std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
  };
  bool ok = true;
  for (const double alpha : {1.0, 0.0}) {
    auto cfg = mg_config_for(spec, 3, false);
    cfg.alpha = alpha;
    cfg.epochs = 5;
    span_mg::MGModel before = span_mg::init_model(cfg);
    auto result = span_mg::train_si(labeled, provider, cfg);
    auto before_blocks = before.param_blocks();
    auto after_blocks = result.model.param_blocks();
    for (std::size_t i = 0; i < before_blocks.size(); ++i) {
      const std::string& name = before_blocks[i].name;
      const bool same = bits_equal(*before_blocks[i].value, *after_blocks[i].value);
      if (alpha == 1.0 &&
          (name.rfind("head_sentence", 0) == 0 || name.rfind("head_token", 0) == 0)) {
        ok = ok && same;
      }
      if (alpha == 0.0 && name.rfind("head_ratio", 0) == 0) {
        ok = ok && same;
      }
    }
  }
  const double elapsed = seconds_since(start);
  detail = std::string(ok ? "heads frozen bit-for-bit" : "HEAD PARAMETERS MOVED") + ", " +
           std::to_string(elapsed) + " s";
  return ok && elapsed < 30.0;
}

struct TCOutcome {
  double neural_minority_f1 = 0.0;
  double ensemble_minority_f1 = 0.0;
  double neural_macro = 0.0;
  double ensemble_macro = 0.0;
  double neural_micro = 0.0;
  double feature_micro = 0.0;
  double ensemble_micro = 0.0;
};

TCOutcome run_tc_seed(std::uint64_t seed) {
  synth::SynthSpec spec;
  spec.seed = 5000 + seed;
  spec.tc_majority_count = 30;
  spec.tc_minority_count = 5;
  spec.tc_test_majority = 10;
  spec.tc_test_minority = 4;
  const auto tc = synth::gen_tc_corpus(spec);
  const auto provider = embed::EmbeddingProvider::from_token_vectors(tc.vectors);

  classify::EnsembleConfig cfg;
  cfg.seed = seed;
  cfg.neural.seed = seed;
  cfg.neural.epochs = 150;
  cfg.neural.lr = 0.05;
  cfg.neural.hidden_dim = 24;
  cfg.logreg.lambda = 1e-4;
  cfg.logreg.epochs = 250;
  cfg.logreg.lr = 0.1;
  const auto model = classify::ensemble_fit(tc.train, tc.articles, provider, cfg);
  const auto test = classify::build_tc_dataset(tc.test, tc.articles, provider, true);

  const auto& names = corpus::technique_names();
  const auto argmax = [](const Vec& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (v[i] > v[best]) best = i;
    }
    return best;
  };
  std::vector<std::string> gold, neural, feature, ensembled;
  for (std::size_t i = 0; i < test.pooled.size(); ++i) {
    gold.push_back(names[test.labels[i]]);
    neural.push_back(names[argmax(model.member_neural(test.pooled[i]))]);
    feature.push_back(names[argmax(model.member_feature(test.texts[i]))]);
    ensembled.push_back(
        classify::ensemble_predict(model, test.pooled[i], test.texts[i]).technique);
  }
  const auto rn = eval::class_report(neural, gold);
  const auto rf = eval::class_report(feature, gold);
  const auto re = eval::class_report(ensembled, gold);
  TCOutcome out;
  out.neural_minority_f1 = rn.per_class[0].f1;
  out.ensemble_minority_f1 = re.per_class[0].f1;
  out.neural_macro = rn.macro_f1;
  out.ensemble_macro = re.macro_f1;
  out.neural_micro = rn.micro_f1;
  out.feature_micro = rf.micro_f1;
  out.ensemble_micro = re.micro_f1;
  return out;
}

std::vector<TCOutcome> g_tc_outcomes;

bool criterion6_imbalance_rescue(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  g_tc_outcomes.clear();
  bool ok = true;
  std::ostringstream oss;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const TCOutcome out = run_tc_seed(seed);
    g_tc_outcomes.push_back(out);
    const bool seed_ok = out.neural_minority_f1 == 0.0 && out.ensemble_minority_f1 > 0.0 &&
                         out.ensemble_macro > out.neural_macro;
    ok = ok && seed_ok;
    oss << " s" << seed << "(" << out.neural_minority_f1 << "->" << out.ensemble_minority_f1
        << ")";
  }
  const double elapsed = seconds_since(start);
  detail = "minority F1 per seed:" + oss.str() + ", " + std::to_string(elapsed) + " s";
  return ok && elapsed < 300.0;
}

bool criterion7_ensemble_micro(std::string& detail) {
  if (g_tc_outcomes.empty()) {
    detail = "skipped: criterion 6 did not run";
    return false;
  }
  bool ok = true;
  std::ostringstream oss;
  for (const auto& out : g_tc_outcomes) {
    const double best = std::max(out.neural_micro, out.feature_micro);
    ok = ok && out.ensemble_micro >= best - 0.02;
    oss << " " << io::format_double(out.ensemble_micro) << ">=" << io::format_double(best)
        << "-0.02";
  }
  detail = oss.str();
  return ok;
}

bool criterion8_subword_fixtures(std::string& detail) {
  const std::unordered_set<std::string> vocab{"jaw",   "boned", "anti",  "christs", "trump",
                                              "ists",  "cyber", "spies", "at",      "least"};
  const std::vector<std::pair<std::string, std::pair<std::string, std::string>>> fixtures{
      {"jawboned", {"jaw", "boned"}},   {"antichrists", {"anti", "christs"}},
      {"trumpists", {"trump", "ists"}}, {"cyberspies", {"cyber", "spies"}},
      {"atleast", {"at", "least"}},
  };
  bool ok = true;
  for (const auto& [word, expected] : fixtures) {
    const auto split = embed::subword_split(word, vocab);
    ok = ok && split.has_value() && *split == expected;
  }
  // Min-length-2: a one-character piece never qualifies.
  const std::unordered_set<std::string> tiny{"x", "least", "xl", "east"};
  const auto split = embed::subword_split("xleast", tiny);
  ok = ok && split.has_value() && split->first == "xl" && split->second == "east";
  const std::unordered_set<std::string> only_short{"x", "least"};
  ok = ok && !embed::subword_split("xleast", only_short).has_value();
  detail = ok ? "all five paper pairs + min-length guard" : "MISMATCH";
  return ok;
}

// Writes the run-config JSON driving the CLI battery.
fs::path write_battery_config(const fs::path& dir, const fs::path& out_dir) {
  json j;
  j["seed"] = 42;
  j["out_dir"] = out_dir.string();
  j["articles_dir"] = (out_dir / "si" / "articles").string();
  j["si_labels"] = (out_dir / "si" / "si_labels.tsv").string();
  j["token_vectors"] = (out_dir / "si" / "token_vectors.tsv").string();
  j["mg"] = {{"article_dim", 8}, {"sentence_dim", 8}, {"token_dim", 8},
             {"lr", 0.02},       {"epochs", 6}};
  j["synth"] = {{"articles", 12},        {"sentences_per_article", 6},
                {"tokens_per_sentence", 6}, {"tc_majority_count", 6},
                {"tc_minority_count", 2},   {"tc_test_majority", 3},
                {"tc_test_minority", 1},    {"what", "both"}};
  j["classifier"] = {{"lambda", 1e-4}, {"epochs", 60}, {"lr", 0.1}, {"neural_epochs", 40},
                     {"neural_lr", 0.05}};
  const fs::path path = dir / "config.json";
  io::atomic_write_file(path, j.dump(2) + "\n");
  return path;
}

fs::path write_tc_config(const fs::path& dir, const fs::path& out_dir) {
  json j;
  j["seed"] = 42;
  j["out_dir"] = out_dir.string();
  j["articles_dir"] = (out_dir / "tc" / "articles").string();
  j["tc_labels"] = (out_dir / "tc" / "tc_labels_train.tsv").string();
  j["tc_labels_eval"] = (out_dir / "tc" / "tc_labels_test.tsv").string();
  j["tc_spans"] = (out_dir / "tc" / "tc_labels_test.tsv").string();
  j["token_vectors"] = (out_dir / "tc" / "token_vectors.tsv").string();
  j["classifier"] = {{"lambda", 1e-4}, {"epochs", 60}, {"lr", 0.1}, {"neural_epochs", 40},
                     {"neural_lr", 0.05}};
  const fs::path path = dir / "config_tc.json";
  io::atomic_write_file(path, j.dump(2) + "\n");
  return path;
}

bool run_battery(const fs::path& out_dir, std::string& detail) {
  fs::create_directories(out_dir);
  const fs::path config = write_battery_config(out_dir, out_dir);
  const fs::path log = out_dir / "cli.log";
  const auto step = [&](const std::string& args) {
    const int code = run_cli(args, log);
    if (code != 0) {
      detail = "command \"" + args + "\" exited " + std::to_string(code) + "; see " +
               log.string();
      return false;
    }
    return true;
  };
  if (!step("synth --config " + config.string())) return false;
  if (!step("validate --config " + config.string())) return false;
  if (!step("train-si --config " + config.string())) return false;
  if (!step("predict-si --config " + config.string())) return false;
  if (!step("score-si --config " + config.string())) return false;
  const fs::path tc_config = write_tc_config(out_dir, out_dir);
  if (!step("train-tc --config " + tc_config.string())) return false;
  if (!step("predict-tc --config " + tc_config.string())) return false;
  if (!step("score-tc --config " + tc_config.string())) return false;
  if (!step("featurize --config " + tc_config.string())) return false;
  return true;
}

const std::vector<std::string> kBatteryOutputs = {
    "si/si_labels.tsv",   "si/token_vectors.tsv", "tc/tc_labels_train.tsv",
    "tc/tc_labels_test.tsv", "tc/token_vectors.tsv", "mg_model.json",
    "train_si_log.tsv",   "predictions_si.tsv",   "score_si.tsv",
    "tc_ensemble.json",   "predictions_tc.tsv",   "score_tc.tsv",
    "feature_pipeline.json", "features.tsv",
};

bool criterion9_determinism(std::string& detail) {
  const fs::path run1 = g_work / "run1";
  const fs::path run2 = g_work / "run2";
  if (!run_battery(run1, detail)) return false;
  if (!run_battery(run2, detail)) return false;
  for (const auto& rel : kBatteryOutputs) {
    if (!files_equal(run1 / rel, run2 / rel)) {
      detail = "outputs differ: " + rel;
      return false;
    }
  }
  detail = std::to_string(kBatteryOutputs.size()) + " artifacts byte-identical across reruns";
  return true;
}

bool criterion10_round_trips(std::string& detail) {
  const fs::path run1 = g_work / "run1";
  if (!fs::exists(run1 / "mg_model.json")) {
    detail = "skipped: criterion 9 battery missing";
    return false;
  }
  // TSVs: load -> save -> byte compare.
  {
    const auto spans = corpus::load_span_labels(run1 / "predictions_si.tsv");
    corpus::write_span_labels(g_work / "rt_si.tsv", spans);
    if (!files_equal(run1 / "predictions_si.tsv", g_work / "rt_si.tsv")) {
      detail = "SI TSV round-trip differs";
      return false;
    }
    const auto tech = corpus::load_technique_labels(run1 / "predictions_tc.tsv");
    corpus::write_technique_labels(g_work / "rt_tc.tsv", tech);
    if (!files_equal(run1 / "predictions_tc.tsv", g_work / "rt_tc.tsv")) {
      detail = "TC TSV round-trip differs";
      return false;
    }
  }
  // JSON bundles: load -> save -> byte compare.
  {
    span_mg::save_model(g_work / "rt_mg.json", span_mg::load_model(run1 / "mg_model.json"));
    if (!files_equal(run1 / "mg_model.json", g_work / "rt_mg.json")) {
      detail = "MG model round-trip differs";
      return false;
    }
    classify::save_ensemble(g_work / "rt_ens.json",
                            classify::load_ensemble(run1 / "tc_ensemble.json"));
    if (!files_equal(run1 / "tc_ensemble.json", g_work / "rt_ens.json")) {
      detail = "ensemble round-trip differs";
      return false;
    }
    features::save_pipeline(g_work / "rt_pipe.json",
                            features::load_pipeline(run1 / "feature_pipeline.json"));
    if (!files_equal(run1 / "feature_pipeline.json", g_work / "rt_pipe.json")) {
      detail = "pipeline round-trip differs";
      return false;
    }
  }
  detail = "SI/TC TSVs and all three JSON bundles load-save byte-identically";
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: propspot_acceptance <path-to-propspot-cli>\n";
    return 2;
  }
  g_cli = argv[1];
  g_work = fs::temp_directory_path() /
           ("propspot_acceptance_" + std::to_string(std::random_device{}()));
  fs::create_directories(g_work);

  struct Criterion {
    int number;
    std::string name;
    std::function<bool(std::string&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "gradient correctness via cmd_gradcheck (< 1e-4, < 60 s)", criterion1_gradcheck},
      {2, "span scorer matches the character-set oracle (1e-9, 1000 configs)",
       criterion2_span_oracle},
      {3, "worked metric examples (span 0.5/0.5/0.5, 0.6/1.0/0.75; tf-idf 0.5797/0.8148)",
       criterion3_worked_examples},
      {4, "multi-granularity benefit: median val token-F1 gap >= 0.05 over 5 seeds",
       criterion4_mg_benefit},
      {5, "objective endpoints freeze the unused heads bit-for-bit", criterion5_alpha_endpoints},
      {6, "class-imbalance rescue: neural minority F1 = 0, ensemble > 0, macro up (5 seeds)",
       criterion6_imbalance_rescue},
      {7, "ensemble micro-F1 within 0.02 of the best member", criterion7_ensemble_micro},
      {8, "subword-split fixtures with the min-length-2 constraint", criterion8_subword_fixtures},
      {9, "byte-identical outputs for every command under a fixed seed", criterion9_determinism},
      {10, "lossless TSV and JSON round-trips", criterion10_round_trips},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << c.number << ": " << c.name;
    if (!detail.empty()) std::cout << " [" << detail << "]";
    std::cout << "\n";
    if (!ok) ++failures;
  }

  std::error_code ec;
  fs::remove_all(g_work, ec);
  std::cout << (failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED") << " ("
            << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size()
            << ")\n";
  return failures == 0 ? 0 : 1;
}
