#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <unordered_set>

#include "propspot/classify.hpp"
#include "propspot/corpus.hpp"
#include "propspot/embed.hpp"
#include "propspot/eval.hpp"
#include "propspot/features.hpp"
#include "propspot/span_mg.hpp"
#include "propspot/synth.hpp"

namespace py = pybind11;
using namespace propspot;

PYBIND11_MODULE(_propspot, m) {
  m.doc() = "propaganda span identification and technique classification toolkit";

  py::register_exception<IoError>(m, "IoError");
  py::register_exception<ParseError>(m, "ParseError");
  py::register_exception<ValidationError>(m, "ValidationError");

  // corpus ------------------------------------------------------------------
  py::class_<corpus::Sentence>(m, "Sentence")
      .def(py::init<>())
      .def_readwrite("index", &corpus::Sentence::index)
      .def_readwrite("text", &corpus::Sentence::text)
      .def_readwrite("begin", &corpus::Sentence::begin)
      .def_readwrite("end", &corpus::Sentence::end)
      .def("__repr__", [](const corpus::Sentence& s) {
        return "Sentence(" + std::to_string(s.index) + ", [" + std::to_string(s.begin) + ", " +
               std::to_string(s.end) + "))";
      });

  py::class_<corpus::Token>(m, "Token")
      .def_readonly("text", &corpus::Token::text)
      .def_readonly("begin", &corpus::Token::begin)
      .def_readonly("end", &corpus::Token::end)
      .def_readonly("sentence_index", &corpus::Token::sentence_index)
      .def("__repr__", [](const corpus::Token& t) {
        return "Token('" + t.text + "', [" + std::to_string(t.begin) + ", " +
               std::to_string(t.end) + "))";
      });

  py::class_<corpus::Article>(m, "Article")
      .def_readonly("id", &corpus::Article::id)
      .def_readonly("title", &corpus::Article::title)
      .def_readonly("sentences", &corpus::Article::sentences)
      .def_readonly("raw_length", &corpus::Article::raw_length)
      .def("substring", &corpus::Article::substring);

  py::class_<corpus::SpanLabel>(m, "SpanLabel")
      .def(py::init([](std::string id, std::size_t begin, std::size_t end) {
             return corpus::SpanLabel{std::move(id), begin, end};
           }),
           py::arg("article_id"), py::arg("begin"), py::arg("end"))
      .def_readwrite("article_id", &corpus::SpanLabel::article_id)
      .def_readwrite("begin", &corpus::SpanLabel::begin)
      .def_readwrite("end", &corpus::SpanLabel::end)
      .def("__repr__", [](const corpus::SpanLabel& s) {
        return "SpanLabel('" + s.article_id + "', " + std::to_string(s.begin) + ", " +
               std::to_string(s.end) + ")";
      });

  py::class_<corpus::TechniqueInstance>(m, "TechniqueInstance")
      .def(py::init([](std::string id, std::string technique, std::size_t begin, std::size_t end,
                       std::string text) {
             return corpus::TechniqueInstance{std::move(id), std::move(technique), begin, end,
                                              std::move(text)};
           }),
           py::arg("article_id"), py::arg("technique"), py::arg("begin"), py::arg("end"),
           py::arg("text") = "")
      .def_readwrite("article_id", &corpus::TechniqueInstance::article_id)
      .def_readwrite("technique", &corpus::TechniqueInstance::technique)
      .def_readwrite("begin", &corpus::TechniqueInstance::begin)
      .def_readwrite("end", &corpus::TechniqueInstance::end)
      .def_readwrite("text", &corpus::TechniqueInstance::text);

  m.def("technique_names", &corpus::technique_names,
        "the 14 technique names in canonical report order");
  m.def("load_article", &corpus::load_article);
  m.def("article_from_text", &corpus::article_from_text);
  m.def("load_articles_dir", &corpus::load_articles_dir);
  m.def("load_span_labels", &corpus::load_span_labels);
  m.def("write_span_labels", &corpus::write_span_labels);
  m.def(
      "load_technique_labels",
      [](const std::filesystem::path& path,
         std::optional<std::vector<corpus::Article>> articles) {
        return corpus::load_technique_labels(path, articles ? &*articles : nullptr);
      },
      py::arg("path"), py::arg("articles") = std::nullopt);
  m.def("write_technique_labels", &corpus::write_technique_labels);
  m.def("tokenize", py::overload_cast<const corpus::Sentence&>(&corpus::tokenize));
  m.def("tokenize_article", &corpus::tokenize_article);
  m.def("label_tokens", &corpus::label_tokens, py::arg("tokens"), py::arg("spans"),
        py::arg("containment") = false);
  m.def("label_sentences", &corpus::label_sentences);
  m.def(
      "split_train_val",
      [](std::size_t n, double fraction, std::uint64_t seed) {
        const auto split = corpus::split_train_val(n, fraction, seed);
        return py::make_tuple(split.train, split.val);
      },
      py::arg("n"), py::arg("fraction") = 0.95, py::arg("seed") = 42);

  // embed -------------------------------------------------------------------
  py::class_<embed::EmbeddingTable>(m, "EmbeddingTable")
      .def_readonly("dim", &embed::EmbeddingTable::dim)
      .def_readonly("unk_vector", &embed::EmbeddingTable::unk_vector)
      .def("contains", &embed::EmbeddingTable::contains)
      .def("__len__", [](const embed::EmbeddingTable& t) { return t.entries.size(); });

  py::class_<embed::EmbeddingProvider>(m, "EmbeddingProvider")
      .def_static("from_table", &embed::EmbeddingProvider::from_table, py::arg("table"),
                  py::arg("left_piece_only") = false)
      .def_static("from_token_vectors", &embed::EmbeddingProvider::from_token_vectors)
      .def_static("load", &embed::EmbeddingProvider::load, py::arg("table_path") = "",
                  py::arg("token_vectors_path") = "", py::arg("left_piece_only") = false)
      .def_property_readonly("dim", &embed::EmbeddingProvider::dim)
      .def_property_readonly("positional", &embed::EmbeddingProvider::is_positional);

  py::class_<embed::TokenVectorFile>(m, "TokenVectorFile")
      .def_readonly("dim", &embed::TokenVectorFile::dim)
      .def("__len__", [](const embed::TokenVectorFile& f) { return f.vectors.size(); });

  m.def("load_table", &embed::load_table);
  m.def("load_token_vectors", &embed::load_token_vectors);
  m.def(
      "subword_split",
      [](const std::string& word, const std::vector<std::string>& vocabulary)
          -> std::optional<std::pair<std::string, std::string>> {
        const std::unordered_set<std::string> vocab(vocabulary.begin(), vocabulary.end());
        return embed::subword_split(word, vocab);
      },
      py::arg("word"), py::arg("vocabulary"));
  m.def("pool_mean", &embed::pool_mean);
  m.def("coverage", &embed::coverage, py::arg("table"), py::arg("corpus_vocabulary"),
        py::arg("subword_fallback") = false);

  // eval --------------------------------------------------------------------
  py::class_<eval::BinaryMetrics>(m, "BinaryMetrics")
      .def_readonly("precision", &eval::BinaryMetrics::precision)
      .def_readonly("recall", &eval::BinaryMetrics::recall)
      .def_readonly("f1", &eval::BinaryMetrics::f1)
      .def_readonly("accuracy", &eval::BinaryMetrics::accuracy)
      .def_readonly("tp", &eval::BinaryMetrics::tp)
      .def_readonly("fp", &eval::BinaryMetrics::fp)
      .def_readonly("fn", &eval::BinaryMetrics::fn)
      .def_readonly("tn", &eval::BinaryMetrics::tn);

  py::class_<eval::SpanMetrics>(m, "SpanMetrics")
      .def_readonly("precision", &eval::SpanMetrics::precision)
      .def_readonly("recall", &eval::SpanMetrics::recall)
      .def_readonly("f1", &eval::SpanMetrics::f1);

  py::class_<eval::ClassScores>(m, "ClassScores")
      .def_readonly("name", &eval::ClassScores::name)
      .def_readonly("precision", &eval::ClassScores::precision)
      .def_readonly("recall", &eval::ClassScores::recall)
      .def_readonly("f1", &eval::ClassScores::f1)
      .def_readonly("support", &eval::ClassScores::support);

  py::class_<eval::ClassReport>(m, "ClassReport")
      .def_readonly("per_class", &eval::ClassReport::per_class)
      .def_readonly("micro_f1", &eval::ClassReport::micro_f1)
      .def_readonly("macro_f1", &eval::ClassReport::macro_f1);

  m.def("token_metrics", &eval::token_metrics);
  m.def("span_metrics", &eval::span_metrics, py::arg("pred"), py::arg("gold"),
        py::arg("normalized") = false);
  m.def("class_report", &eval::class_report, py::arg("pred"), py::arg("gold"),
        py::arg("class_names") = corpus::technique_names(),
        py::arg("macro_present_only") = false);

  // features ----------------------------------------------------------------
  py::class_<features::FeaturePipeline>(m, "FeaturePipeline")
      .def_property_readonly("dim", &features::FeaturePipeline::dim)
      .def("transform", [](const features::FeaturePipeline& p, const std::string& text) {
        const auto fv = p.transform(text);
        return py::make_tuple(fv.sparse, fv.dense);
      });

  m.def("stem_word", &features::stem_word);
  m.def(
      "preprocess",
      [](const std::string& text, bool remove_stopwords, bool stem) {
        features::PreprocessConfig cfg;
        cfg.remove_stopwords = remove_stopwords;
        cfg.stem = stem;
        const auto out = features::preprocess(text, cfg);
        return py::make_tuple(out.words, out.char_stream);
      },
      py::arg("text"), py::arg("remove_stopwords") = true, py::arg("stem") = true);
  m.def(
      "fit_pipeline",
      [](const std::vector<std::string>& texts, bool contextual_counts) {
        features::PipelineConfig cfg;
        cfg.contextual_counts = contextual_counts;
        return features::fit_pipeline(texts, cfg);
      },
      py::arg("texts"), py::arg("contextual_counts") = false);
  m.def("save_pipeline", &features::save_pipeline);
  m.def("load_pipeline", &features::load_pipeline);

  // span identification -----------------------------------------------------
  py::class_<span_mg::MGConfig>(m, "MGConfig")
      .def(py::init<>())
      .def_readwrite("embedding_dim", &span_mg::MGConfig::embedding_dim)
      .def_readwrite("article_dim", &span_mg::MGConfig::article_dim)
      .def_readwrite("sentence_dim", &span_mg::MGConfig::sentence_dim)
      .def_readwrite("token_dim", &span_mg::MGConfig::token_dim)
      .def_readwrite("alpha", &span_mg::MGConfig::alpha)
      .def_readwrite("lr", &span_mg::MGConfig::lr)
      .def_readwrite("epochs", &span_mg::MGConfig::epochs)
      .def_readwrite("seed", &span_mg::MGConfig::seed)
      .def_readwrite("threshold", &span_mg::MGConfig::threshold)
      .def_readwrite("val_fraction", &span_mg::MGConfig::val_fraction)
      .def_readwrite("token_only", &span_mg::MGConfig::token_only);

  py::class_<span_mg::MGModel>(m, "MGModel")
      .def_property_readonly("alpha",
                             [](const span_mg::MGModel& m_) { return m_.config.alpha; })
      .def_property_readonly("threshold",
                             [](const span_mg::MGModel& m_) { return m_.config.threshold; });

  py::class_<corpus::LabeledCorpus>(m, "LabeledCorpus")
      .def("__len__",
           [](const corpus::LabeledCorpus& c) { return c.articles.size(); });

  m.def("build_labeled_corpus", &corpus::build_labeled_corpus, py::arg("articles"),
        py::arg("spans"), py::arg("containment") = false);
  m.def("propaganda_ratio", &span_mg::propaganda_ratio);
  m.def(
      "train_si",
      [](const corpus::LabeledCorpus& corpus_, const embed::EmbeddingProvider& provider,
         const span_mg::MGConfig& config) {
        auto result = span_mg::train_si(corpus_, provider, config);
        return py::make_tuple(std::move(result.model), result.best_val_f1);
      },
      py::arg("corpus"), py::arg("provider"), py::arg("config"));
  m.def("predict_spans", &span_mg::predict_spans, py::arg("model"), py::arg("article"),
        py::arg("provider"), py::arg("threshold") = 0.5);
  m.def("save_mg_model", &span_mg::save_model);
  m.def("load_mg_model", &span_mg::load_model);

  // technique classification ------------------------------------------------
  py::class_<classify::EnsembleConfig>(m, "EnsembleConfig")
      .def(py::init<>())
      .def_readwrite("out_of_fold", &classify::EnsembleConfig::out_of_fold)
      .def_readwrite("seed", &classify::EnsembleConfig::seed)
      .def_property(
          "lambda_", [](const classify::EnsembleConfig& c) { return c.logreg.lambda; },
          [](classify::EnsembleConfig& c, double v) { c.logreg.lambda = v; })
      .def_property(
          "logreg_epochs", [](const classify::EnsembleConfig& c) { return c.logreg.epochs; },
          [](classify::EnsembleConfig& c, std::size_t v) { c.logreg.epochs = v; })
      .def_property(
          "logreg_lr", [](const classify::EnsembleConfig& c) { return c.logreg.lr; },
          [](classify::EnsembleConfig& c, double v) { c.logreg.lr = v; })
      .def_property(
          "neural_epochs", [](const classify::EnsembleConfig& c) { return c.neural.epochs; },
          [](classify::EnsembleConfig& c, std::size_t v) { c.neural.epochs = v; })
      .def_property(
          "neural_lr", [](const classify::EnsembleConfig& c) { return c.neural.lr; },
          [](classify::EnsembleConfig& c, double v) { c.neural.lr = v; })
      .def_property(
          "hidden_dim", [](const classify::EnsembleConfig& c) { return c.neural.hidden_dim; },
          [](classify::EnsembleConfig& c, std::size_t v) { c.neural.hidden_dim = v; });

  py::class_<classify::EnsembleModel>(m, "EnsembleModel")
      .def_readonly("class_order", &classify::EnsembleModel::class_order);

  m.def("class_weights", &classify::class_weights);
  m.def("ensemble_fit", &classify::ensemble_fit, py::arg("train_spans"), py::arg("articles"),
        py::arg("provider"), py::arg("config"));
  m.def(
      "predict_techniques",
      [](const classify::EnsembleModel& model, const std::vector<corpus::TechniqueInstance>& spans,
         const std::vector<corpus::Article>& articles, const embed::EmbeddingProvider& provider) {
        const auto ds = classify::build_tc_dataset(spans, articles, provider, false, true);
        std::vector<std::string> out(spans.size());
        for (std::size_t row = 0; row < ds.kept.size(); ++row) {
          out[ds.kept[row]] =
              classify::ensemble_predict(model, ds.pooled[row], ds.texts[row]).technique;
        }
        return out;
      },
      py::arg("model"), py::arg("spans"), py::arg("articles"), py::arg("provider"));
  m.def("save_ensemble", &classify::save_ensemble);
  m.def("load_ensemble", &classify::load_ensemble);

  // synthetic corpora ---------------------------------------------------
  py::class_<synth::SynthSpec>(m, "SynthSpec")
      .def(py::init<>())
      .def_readwrite("seed", &synth::SynthSpec::seed)
      .def_readwrite("articles", &synth::SynthSpec::articles)
      .def_readwrite("sentences_per_article", &synth::SynthSpec::sentences_per_article)
      .def_readwrite("tokens_per_sentence", &synth::SynthSpec::tokens_per_sentence)
      .def_readwrite("embedding_dim", &synth::SynthSpec::embedding_dim)
      .def_readwrite("snr", &synth::SynthSpec::snr)
      .def_readwrite("signal_title", &synth::SynthSpec::signal_title)
      .def_readwrite("signal_sentence", &synth::SynthSpec::signal_sentence)
      .def_readwrite("signal_token", &synth::SynthSpec::signal_token)
      .def_readwrite("tc_embedding_dim", &synth::SynthSpec::tc_embedding_dim)
      .def_readwrite("tc_snr", &synth::SynthSpec::tc_snr)
      .def_readwrite("tc_majority_count", &synth::SynthSpec::tc_majority_count)
      .def_readwrite("tc_minority_count", &synth::SynthSpec::tc_minority_count)
      .def_readwrite("tc_test_majority", &synth::SynthSpec::tc_test_majority)
      .def_readwrite("tc_test_minority", &synth::SynthSpec::tc_test_minority)
      .def_readwrite("tc_lexical_prob", &synth::SynthSpec::tc_lexical_prob);

  m.def(
      "generate_si_corpus",
      [](const synth::SynthSpec& spec, const std::filesystem::path& dir) {
        synth::write_si_corpus(synth::gen_si_corpus(spec), dir);
      },
      py::arg("spec"), py::arg("dir"));
  m.def(
      "generate_tc_corpus",
      [](const synth::SynthSpec& spec, const std::filesystem::path& dir) {
        synth::write_tc_corpus(synth::gen_tc_corpus(spec), dir);
      },
      py::arg("spec"), py::arg("dir"));
}
