#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "emopanel/aggregate.hpp"
#include "emopanel/bigru.hpp"
#include "emopanel/common.hpp"
#include "emopanel/corpus.hpp"
#include "emopanel/econ.hpp"
#include "emopanel/toymodel.hpp"

/// Stage-by-stage orchestration over files in an output directory.
namespace emopanel::pipeline {

inline constexpr std::string_view kVersion = "0.1.0";

/// An upstream artifact is missing; the message names the stage to run first.
class MissingArtifact : public DataError {
 public:
  using DataError::DataError;
};

struct Paths {
  /// Directory holding messages.jsonl, users.jsonl, announcements.csv,
  /// quotes.csv, factors.csv, listing.csv, matched.txt (and optionally
  /// true_emotion.csv). Empty means <out>/data, which `synth` fills.
  std::string data_dir;
  std::string lexicons;      // empty: built-in tables
  std::string dictionaries;  // empty: built-in dictionaries
};

struct AttributeConfig {
  std::size_t n_messages = 60;
  std::size_t n_samples = 500;
  std::size_t min_count = 5;
};

struct ToyConfig {
  toy::ToyParams params;
  toy::Signals signals{0.1, 0.05};
  double eta_min = -0.5, eta_max = 0.5;
  std::size_t eta_points = 21;
};

struct PipelineConfig {
  std::uint64_t seed = 7;
  std::string out_dir = "out";
  Paths paths;
  corpus::SynthConfig synth;
  std::size_t automated_threshold = 1000;
  std::size_t window_user_min = 2;
  double nb_smoothing = 1.0;
  bigru::Hyperparams model = bigru::Hyperparams::desk_scale();
  std::size_t vocab_cap = 60000;
  std::size_t cv_folds = 0;  // 0 skips cross validation
  AttributeConfig attribute;
  econ::EventStudyConfig event_study;
  aggregate::PanelConfig panel;
  bool panel_variants = true;
  std::vector<econ::RegressionSpec> specs = econ::standard_specs();
  econ::PortfolioConfig portfolio;
  ToyConfig toy;

  /// Reads a JSON config; unknown keys are rejected. Relative paths are
  /// resolved against the directory of `path`.
  static PipelineConfig load(const std::string& path);
  /// Canonical JSON of every setting (hashed into manifests).
  std::string to_json() const;
  void validate() const;

  std::string data_dir() const;
  std::string out(const std::string& name) const;
};

const std::vector<std::string>& stage_names();

struct StageResult {
  std::string stage;
  std::vector<std::string> outputs;  // relative to out_dir
  std::vector<std::string> log;      // human-readable notes
};

/// Runs one stage (or "all" in order). Throws MissingArtifact when an input
/// is absent, DataError on bad data, InvalidArgument on a bad stage name or
/// configuration.
std::vector<StageResult> run_stage(const std::string& name, const PipelineConfig& config);

}  // namespace emopanel::pipeline
