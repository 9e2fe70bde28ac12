#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "nodality/digest.hpp"
#include "nodality/pipeline.hpp"
#include "nodality/synth.hpp"

using namespace nodality;
namespace fs = std::filesystem;

namespace {

constexpr std::int64_t kDay = kSecondsPerDay;

struct Workspace {
  fs::path root;

  explicit Workspace(const std::string& name) {
    root = fs::temp_directory_path() / ("nodality_pipe_" + name);
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~Workspace() { fs::remove_all(root); }

  std::string path(const std::string& leaf) const { return (root / leaf).string(); }
};

SynthConfig input_config() {
  SynthConfig c;
  c.seed = 5;
  c.days = 56;
  c.topics = {"alpha", "beta"};
  c.groups = {
      {"leaders", 6, Tier::leader, ActorKind::mp, ActorRole::cabinet, "gov", 5.0},
      {"press", 12, Tier::funneler, ActorKind::journalist, ActorRole::journalist, "", 2.0},
      {"rank", 40, Tier::receiver, ActorKind::mp, ActorRole::opposition_backbench, "opp", 1.0},
  };
  c.events_per_actor_day = 1.5;
  c.specialist_fraction = 0.0;
  return c;
}

PipelineConfig base_pipeline(const Workspace& ws, const std::string& out_leaf) {
  SynthResult data = generate(input_config());
  write_events_file(ws.path("events.jsonl"), data.events);
  write_roster_file(ws.path("roster.csv"), data.roster);

  PipelineConfig config;
  config.events_path = ws.path("events.jsonl");
  config.roster_path = ws.path("roster.csv");
  config.topics = {"alpha", "beta"};
  config.window_days = 14;
  config.metrics = {MetricKind::strength, MetricKind::degree, MetricKind::funnel_bandwidth};
  config.out_dir = ws.path(out_leaf);
  return config;
}

std::map<std::string, bool> cached_by_stage(const PipelineResult& result) {
  std::map<std::string, bool> out;
  for (const auto& stage : result.stages) out[stage.name] = stage.cached;
  return out;
}

}  // namespace

TEST_CASE("a full run produces every artifact and a manifest") {
  Workspace ws("full");
  PipelineConfig config = base_pipeline(ws, "out");
  PipelineResult result = run_pipeline(config);

  std::vector<std::string> names;
  for (const auto& stage : result.stages) names.push_back(stage.name);
  CHECK(names == std::vector<std::string>{"ingest", "label", "graphs", "centrality",
                                          "nodality", "influence", "regress", "figures"});
  for (const auto& stage : result.stages) {
    CHECK(!stage.cached);
    for (const auto& [path, hash] : stage.outputs) {
      INFO(stage.name << " output " << path);
      CHECK(fs::exists(path));
      CHECK(hash.size() == 64);
    }
  }

  for (const std::string leaf :
       {"events_clean.jsonl", "roster_clean.csv", "groups.csv", "ingest_report.json",
        "events_final.jsonl", "range.json", "graph_alpha_topic.graphml",
        "graph_alpha_null.graphml", "graph_beta_topic.graphml", "graph_beta_null.graphml",
        "matrix_alpha.csv", "matrix_beta.csv", "scores_alpha.csv", "scores_alpha_windows.csv",
        "scores_beta.csv", "scores_beta_windows.csv", "influence_alpha.csv",
        "influence_beta.csv", "design.csv", "regression.json", "fig_daily_volume.csv",
        "fig_pca_scatter.csv", "fig_phi_by_group.csv", "fig_nodality_by_group.csv",
        "manifest.json"}) {
    INFO(leaf);
    CHECK(fs::exists(fs::path(config.out_dir) / leaf));
  }
  // pinned metrics: no combination search, no labeling stage artifacts
  CHECK(!fs::exists(fs::path(config.out_dir) / "search_report.json"));
  CHECK(!fs::exists(fs::path(config.out_dir) / "labels.csv"));
  CHECK(result.manifest_path == (fs::path(config.out_dir) / "manifest.json").string());
}

TEST_CASE("a second run over the same directory reuses every stage") {
  Workspace ws("cache");
  PipelineConfig config = base_pipeline(ws, "out");
  run_pipeline(config);

  std::map<std::string, std::string> before;
  for (const auto& entry : fs::directory_iterator(config.out_dir))
    if (entry.path().filename() != "manifest.json")
      before[entry.path().string()] = sha256_file(entry.path().string());

  PipelineResult second = run_pipeline(config);
  for (const auto& [stage, cached] : cached_by_stage(second)) {
    INFO(stage);
    CHECK(cached);
  }
  for (const auto& [path, hash] : before) CHECK(sha256_file(path) == hash);
}

TEST_CASE("editing the event file invalidates the run") {
  Workspace ws("touch");
  PipelineConfig config = base_pipeline(ws, "out");
  run_pipeline(config);

  // append one more valid event
  SynthResult extra = generate(input_config());
  std::vector<Event> events = extra.events;
  Event added = events.back();
  added.event_id = "added_event";
  events.push_back(added);
  write_events_file(config.events_path, events);

  PipelineResult rerun = run_pipeline(config);
  auto cached = cached_by_stage(rerun);
  CHECK(!cached.at("ingest"));
  CHECK(!cached.at("graphs"));
}

TEST_CASE("independent runs produce byte-identical tables") {
  Workspace ws("identical");
  PipelineConfig config = base_pipeline(ws, "out_a");
  run_pipeline(config);
  PipelineConfig again = config;
  again.out_dir = ws.path("out_b");
  again.threads = 4;  // parallelism must not leak into the artifacts
  run_pipeline(again);

  for (const std::string leaf :
       {"scores_alpha.csv", "scores_beta.csv", "scores_alpha_windows.csv",
        "scores_beta_windows.csv", "influence_alpha.csv", "influence_beta.csv", "design.csv",
        "regression.json", "matrix_alpha.csv", "matrix_beta.csv"}) {
    INFO(leaf);
    CHECK(sha256_file((fs::path(config.out_dir) / leaf).string()) ==
          sha256_file((fs::path(again.out_dir) / leaf).string()));
  }
}

TEST_CASE("failures name the stage and keep upstream artifacts") {
  Workspace ws("fail");
  PipelineConfig config = base_pipeline(ws, "out");
  // a three-day study window cannot hold a single 14-day snapshot
  config.study_window = TimeWindow{1640995200, 1640995200 + 3 * kDay};
  try {
    run_pipeline(config);
    FAIL("expected a graphs-stage failure");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).rfind("stage graphs:", 0) == 0);
  }
  CHECK(fs::exists(fs::path(config.out_dir) / "events_clean.jsonl"));
  CHECK(fs::exists(fs::path(config.out_dir) / "events_final.jsonl"));
  CHECK(!fs::exists(fs::path(config.out_dir) / "range.json"));
}

TEST_CASE("configs are validated before any stage runs") {
  Workspace ws("valid");
  PipelineConfig config = base_pipeline(ws, "out");

  PipelineConfig no_roster = config;
  no_roster.roster_path.clear();
  CHECK_THROWS_AS(run_pipeline(no_roster), std::invalid_argument);

  PipelineConfig no_topics = config;
  no_topics.topics.clear();
  CHECK_THROWS_AS(run_pipeline(no_topics), std::invalid_argument);

  PipelineConfig bad_window = config;
  bad_window.window_days = 0;
  CHECK_THROWS_AS(run_pipeline(bad_window), std::invalid_argument);

  PipelineConfig half_labeling = config;
  half_labeling.lfs_path = ws.path("lfs.jsonl");
  CHECK_THROWS_AS(run_pipeline(half_labeling), std::invalid_argument);

  CHECK(!fs::exists(fs::path(config.out_dir) / "manifest.json"));
}

TEST_CASE("pipeline config files round-trip") {
  Workspace ws("config");
  PipelineConfig config;
  config.events_path = "/data/events.jsonl";
  config.roster_path = "/data/roster.csv";
  config.lfs_path = "/data/lfs.jsonl";
  config.corpus_path = "/data/corpus.csv";
  config.label_policy = LabelPolicy::majority;
  config.topics = {"economy", "nhs"};
  config.study_window = TimeWindow{1640995200, 1646092800};
  config.window_days = 7;
  config.metrics = {MetricKind::degree, MetricKind::strength};
  config.eigenvector_eps = 0.02;
  config.cluster.seed = 99;
  config.cluster.restarts = 10;
  config.lag = 2;
  config.bins = 3;
  config.bin_days = 2;
  config.pool_windows = true;
  config.aggregate = Aggregate::sum;
  config.journalist_decile = 0.2;
  config.out_dir = "/tmp/out";
  config.threads = 8;

  std::string path = ws.path("pipeline.json");
  write_pipeline_config_file(path, config);
  PipelineConfig back = read_pipeline_config_file(path);
  CHECK(back.events_path == config.events_path);
  CHECK(back.roster_path == config.roster_path);
  CHECK(back.lfs_path == config.lfs_path);
  CHECK(back.corpus_path == config.corpus_path);
  CHECK(back.label_policy == config.label_policy);
  CHECK(back.topics == config.topics);
  REQUIRE(back.study_window.has_value());
  CHECK(*back.study_window == *config.study_window);
  CHECK(back.window_days == config.window_days);
  CHECK(back.metrics == config.metrics);
  CHECK(back.eigenvector_eps == config.eigenvector_eps);
  CHECK(back.cluster.seed == config.cluster.seed);
  CHECK(back.cluster.restarts == config.cluster.restarts);
  CHECK(back.lag == config.lag);
  CHECK(back.bins == config.bins);
  CHECK(back.bin_days == config.bin_days);
  CHECK(back.pool_windows == config.pool_windows);
  CHECK(back.aggregate == config.aggregate);
  CHECK(back.journalist_decile == config.journalist_decile);
  CHECK(back.out_dir == config.out_dir);
  CHECK(back.threads == config.threads);

  // study_window stays optional
  PipelineConfig open = config;
  open.study_window.reset();
  write_pipeline_config_file(path, open);
  CHECK(!read_pipeline_config_file(path).study_window.has_value());
}
