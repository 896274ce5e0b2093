#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "propspot/classify.hpp"
#include "propspot/common.hpp"
#include "propspot/features.hpp"
#include "propspot/span_mg.hpp"
#include "propspot/synth.hpp"

namespace propspot {

// One JSON document drives every command. Unknown keys are rejected at every
// nesting level; the full schema is documented in the README.
struct RunConfig {
  std::uint64_t seed = 42;
  std::filesystem::path out_dir = "out";

  std::filesystem::path articles_dir;
  std::filesystem::path si_labels;
  std::filesystem::path tc_labels;
  std::filesystem::path tc_labels_eval;
  std::filesystem::path tc_spans;
  std::filesystem::path predictions;
  std::filesystem::path model_path;
  std::filesystem::path embedding_table;
  std::filesystem::path token_vectors;
  std::filesystem::path stopwords;

  span_mg::MGConfig mg;              // mg.embedding_dim 0 = take the provider's
  features::PipelineConfig features;
  classify::EnsembleConfig classifier;
  synth::SynthSpec synth;
  std::string synth_what = "both";  // "si", "tc", or "both"

  bool macro_present_only = false;
  bool normalized_span_metric = false;
  bool left_piece_only = false;
  bool containment_labels = false;
};

RunConfig load_run_config(const std::filesystem::path& path);

// --seed overrides the config seed everywhere it is consumed.
void apply_seed(RunConfig& config, std::uint64_t seed);

}  // namespace propspot
