#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nodality/nodality.hpp"
#include "nodality/regress.hpp"
#include "nodality/timeutil.hpp"

namespace nodality {

inline constexpr const char* kToolVersion = "0.1.0";

enum class LabelPolicy { multi, majority };

/// Everything a full run needs. Stages communicate exclusively through
/// files in out_dir, so any prefix of the pipeline can be reused when its
/// inputs have not changed.
struct PipelineConfig {
  std::string events_path;
  std::string roster_path;
  std::string lfs_path;     // optional: labeling functions
  std::string corpus_path;  // optional: text_id,text table for labeling
  LabelPolicy label_policy = LabelPolicy::multi;

  std::vector<std::string> topics;
  std::optional<TimeWindow> study_window;  // default: derived from the events
  int window_days = 14;

  /// Metrics used for scoring; empty means run the combination search and
  /// use the selected subset.
  std::vector<MetricKind> metrics;
  double eigenvector_eps = 0.01;
  ClusterOptions cluster;

  int lag = 1;
  int bins = 2;
  int bin_days = 1;
  bool pool_windows = false;
  Aggregate aggregate = Aggregate::mean;
  double journalist_decile = 0.10;

  std::string out_dir;
  std::size_t threads = 1;
};

PipelineConfig read_pipeline_config_file(const std::string& path);
void write_pipeline_config_file(const std::string& path, const PipelineConfig& config);

struct StageInfo {
  std::string name;
  std::map<std::string, std::string> inputs;   // path -> sha256
  std::map<std::string, std::string> outputs;  // path -> sha256
  bool cached = false;
  std::vector<std::string> notes;
};

struct PipelineResult {
  std::vector<StageInfo> stages;
  std::string manifest_path;
};

/// Runs ingest, labeling, graph export, centrality, nodality scoring,
/// influence, regression, and figure-data stages, writing a manifest that
/// records the hash of every artifact. A stage whose inputs and outputs
/// all match the previous run's manifest is skipped. Reruns with identical
/// config and inputs produce byte-identical artifacts (the manifest's
/// generated_at timestamp aside). Failures carry the stage name.
PipelineResult run_pipeline(const PipelineConfig& config);

}  // namespace nodality
