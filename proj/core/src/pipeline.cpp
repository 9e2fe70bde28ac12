#include "nodality/pipeline.hpp"

#include <algorithm>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

#include "nodality/csv.hpp"
#include "nodality/digest.hpp"
#include "nodality/graph.hpp"
#include "nodality/graph_io.hpp"
#include "nodality/influence.hpp"
#include "nodality/ingest.hpp"
#include "nodality/weaklabel.hpp"

namespace nodality {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void spit(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path);
}

json parse_json_file(const std::string& path) {
  json parsed = json::parse(slurp(path), nullptr, false);
  if (parsed.is_discarded()) throw std::runtime_error("invalid JSON in " + path);
  return parsed;
}

void spit_json(const std::string& path, const json& value) { spit(path, value.dump(2) + "\n"); }

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if (a % b != 0 && (a < 0) != (b < 0)) --q;
  return q;
}

/// File-name-safe form of a topic id.
std::string slug(const std::string& topic) {
  std::string out;
  for (char c : topic) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
              c == '-' || c == '_';
    out.push_back(ok ? c : '_');
  }
  return out;
}

json config_to_json(const PipelineConfig& config) {
  json j;
  j["events"] = config.events_path;
  j["roster"] = config.roster_path;
  if (!config.lfs_path.empty()) j["lfs"] = config.lfs_path;
  if (!config.corpus_path.empty()) j["corpus"] = config.corpus_path;
  j["label_policy"] = config.label_policy == LabelPolicy::multi ? "multi" : "majority";
  j["topics"] = config.topics;
  if (config.study_window) {
    j["study_start"] = format_iso8601(config.study_window->start);
    j["study_end"] = format_iso8601(config.study_window->end);
  }
  j["window_days"] = config.window_days;
  if (!config.metrics.empty()) {
    json names = json::array();
    for (MetricKind kind : config.metrics) names.push_back(to_string(kind));
    j["metrics"] = names;
  }
  j["eigenvector_eps"] = config.eigenvector_eps;
  j["cluster_seed"] = config.cluster.seed;
  j["cluster_restarts"] = config.cluster.restarts;
  j["cluster_max_iterations"] = config.cluster.max_iterations;
  j["lag"] = config.lag;
  j["bins"] = config.bins;
  j["bin_days"] = config.bin_days;
  j["pool_windows"] = config.pool_windows;
  j["aggregate"] = to_string(config.aggregate);
  j["journalist_decile"] = config.journalist_decile;
  j["out_dir"] = config.out_dir;
  j["threads"] = config.threads;
  return j;
}

PipelineConfig config_from_json(const json& j) {
  PipelineConfig config;
  config.events_path = j.value("events", "");
  config.roster_path = j.value("roster", "");
  config.lfs_path = j.value("lfs", "");
  config.corpus_path = j.value("corpus", "");
  std::string policy = j.value("label_policy", "multi");
  if (policy == "multi") {
    config.label_policy = LabelPolicy::multi;
  } else if (policy == "majority") {
    config.label_policy = LabelPolicy::majority;
  } else {
    throw std::runtime_error("unknown label_policy: " + policy);
  }
  config.topics = j.value("topics", std::vector<std::string>{});
  if (j.contains("study_start") != j.contains("study_end"))
    throw std::runtime_error("study_start and study_end must be given together");
  if (j.contains("study_start")) {
    auto start = parse_iso8601(j.at("study_start").get<std::string>());
    auto end = parse_iso8601(j.at("study_end").get<std::string>());
    if (!start || !end) throw std::runtime_error("invalid study window timestamp");
    config.study_window = TimeWindow{*start, *end};
  }
  config.window_days = j.value("window_days", 14);
  if (j.contains("metrics")) {
    for (const auto& name : j.at("metrics")) {
      auto kind = metric_from_string(name.get<std::string>());
      if (!kind) throw std::runtime_error("unknown metric: " + name.get<std::string>());
      config.metrics.push_back(*kind);
    }
  }
  config.eigenvector_eps = j.value("eigenvector_eps", 0.01);
  config.cluster.seed = j.value("cluster_seed", std::uint64_t{42});
  config.cluster.restarts = j.value("cluster_restarts", 100);
  config.cluster.max_iterations = j.value("cluster_max_iterations", 300);
  config.lag = j.value("lag", 1);
  config.bins = j.value("bins", 2);
  config.bin_days = j.value("bin_days", 1);
  config.pool_windows = j.value("pool_windows", false);
  std::string aggregate = j.value("aggregate", "mean");
  if (aggregate == "mean") {
    config.aggregate = Aggregate::mean;
  } else if (aggregate == "sum") {
    config.aggregate = Aggregate::sum;
  } else {
    throw std::runtime_error("unknown aggregate: " + aggregate);
  }
  config.journalist_decile = j.value("journalist_decile", 0.10);
  config.out_dir = j.value("out_dir", "");
  config.threads = j.value("threads", std::size_t{1});
  return config;
}

struct StudyRange {
  TimeWindow range;
  int window_days = 0;
  std::size_t windows = 0;
};

StudyRange derive_range(const std::vector<Event>& events, const PipelineConfig& config) {
  StudyRange out;
  out.window_days = config.window_days;
  std::int64_t start = 0;
  std::int64_t span_days = 0;
  if (config.study_window) {
    start = config.study_window->start;
    span_days = floor_div(config.study_window->length(), kSecondsPerDay);
  } else {
    if (events.empty()) throw std::runtime_error("no events to derive a study range from");
    std::int64_t lo = events.front().ts;
    std::int64_t hi = events.front().ts;
    for (const Event& event : events) {
      lo = std::min(lo, event.ts);
      hi = std::max(hi, event.ts);
    }
    start = floor_div(lo, kSecondsPerDay) * kSecondsPerDay;
    span_days = floor_div(hi, kSecondsPerDay) - floor_div(lo, kSecondsPerDay) + 1;
  }
  out.windows = static_cast<std::size_t>(span_days / config.window_days);
  if (out.windows == 0)
    throw std::runtime_error("study range is shorter than one analysis window");
  out.range.start = start;
  out.range.end =
      start + static_cast<std::int64_t>(out.windows) * config.window_days * kSecondsPerDay;
  return out;
}

void write_range(const std::string& path, const StudyRange& range) {
  json j;
  j["start"] = format_iso8601(range.range.start);
  j["end"] = format_iso8601(range.range.end);
  j["window_days"] = range.window_days;
  j["windows"] = range.windows;
  spit_json(path, j);
}

StudyRange read_range(const std::string& path) {
  json j = parse_json_file(path);
  StudyRange out;
  auto start = parse_iso8601(j.at("start").get<std::string>());
  auto end = parse_iso8601(j.at("end").get<std::string>());
  if (!start || !end) throw std::runtime_error("invalid timestamp in " + path);
  out.range = TimeWindow{*start, *end};
  out.window_days = j.at("window_days").get<int>();
  out.windows = j.at("windows").get<std::size_t>();
  return out;
}

std::vector<TimeWindow> window_list(const StudyRange& range) {
  std::vector<TimeWindow> out;
  std::int64_t len = static_cast<std::int64_t>(range.window_days) * kSecondsPerDay;
  for (std::size_t i = 0; i < range.windows; ++i) {
    std::int64_t start = range.range.start + static_cast<std::int64_t>(i) * len;
    out.push_back(TimeWindow{start, start + len});
  }
  return out;
}

void write_groups_csv(const std::string& path, const std::map<std::string, std::string>& groups) {
  std::ostringstream out;
  write_csv_row(out, {"actor_id", "group"});
  for (const auto& [actor, group] : groups) write_csv_row(out, {actor, group});
  spit(path, out.str());
}

std::map<std::string, std::string> read_groups_csv(const std::string& path) {
  CsvTable table = read_csv_file(path);
  int actor_col = table.column("actor_id");
  int group_col = table.column("group");
  if (actor_col < 0 || group_col < 0)
    throw std::runtime_error(path + " must have actor_id and group columns");
  std::map<std::string, std::string> out;
  for (const auto& row : table.rows) out[row[actor_col]] = row[group_col];
  return out;
}

void write_matrix_csv(const std::string& path, const NodalityMatrix& matrix) {
  std::ostringstream out;
  std::vector<std::string> header = {"actor_id"};
  for (MetricKind kind : matrix.kinds) header.push_back("topic:" + to_string(kind));
  for (MetricKind kind : matrix.kinds) header.push_back("null:" + to_string(kind));
  write_csv_row(out, header);
  for (std::size_t i = 0; i < matrix.actors.size(); ++i) {
    std::vector<std::string> row = {matrix.actors[i]};
    for (Eigen::Index c = 0; c < matrix.values.cols(); ++c)
      row.push_back(format_double(matrix.values(static_cast<Eigen::Index>(i), c)));
    write_csv_row(out, row);
  }
  spit(path, out.str());
}

NodalityMatrix read_matrix_csv(const std::string& path, const std::string& topic,
                               TimeWindow window) {
  CsvTable table = read_csv_file(path);
  if (table.header.empty() || table.header[0] != "actor_id")
    throw std::runtime_error(path + " must start with an actor_id column");
  NodalityMatrix out;
  out.topic = topic;
  out.window = window;
  std::size_t metric_cols = table.header.size() - 1;
  if (metric_cols == 0 || metric_cols % 2 != 0)
    throw std::runtime_error(path + " must have matching topic:/null: column pairs");
  std::size_t m = metric_cols / 2;
  for (std::size_t c = 0; c < m; ++c) {
    const std::string& label = table.header[1 + c];
    if (label.rfind("topic:", 0) != 0)
      throw std::runtime_error(path + ": expected topic: column, got " + label);
    auto kind = metric_from_string(label.substr(6));
    if (!kind) throw std::runtime_error(path + ": unknown metric column " + label);
    out.kinds.push_back(*kind);
    const std::string& mirror = table.header[1 + m + c];
    if (mirror != "null:" + label.substr(6))
      throw std::runtime_error(path + ": null-side columns must mirror the topic side");
  }
  out.values.resize(static_cast<Eigen::Index>(table.rows.size()),
                    static_cast<Eigen::Index>(metric_cols));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out.actors.push_back(table.rows[r][0]);
    for (std::size_t c = 0; c < metric_cols; ++c)
      out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          std::stod(table.rows[r][1 + c]);
  }
  return out;
}

NodalityMatrix subset_matrix(const NodalityMatrix& matrix,
                             const std::vector<MetricKind>& kinds) {
  NodalityMatrix out;
  out.actors = matrix.actors;
  out.kinds = kinds;
  out.topic = matrix.topic;
  out.window = matrix.window;
  std::size_t m = matrix.kinds.size();
  out.values.resize(matrix.values.rows(), static_cast<Eigen::Index>(2 * kinds.size()));
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    auto it = std::find(matrix.kinds.begin(), matrix.kinds.end(), kinds[k]);
    if (it == matrix.kinds.end())
      throw std::runtime_error("metric " + to_string(kinds[k]) + " missing from matrix");
    std::size_t source = static_cast<std::size_t>(it - matrix.kinds.begin());
    out.values.col(static_cast<Eigen::Index>(k)) =
        matrix.values.col(static_cast<Eigen::Index>(source));
    out.values.col(static_cast<Eigen::Index>(kinds.size() + k)) =
        matrix.values.col(static_cast<Eigen::Index>(m + source));
  }
  return out;
}

void write_scores_csv(const std::string& path, const NodalityScores& scores,
                      const std::map<std::string, Tier>& tiers) {
  std::ostringstream out;
  write_csv_row(out, {"actor_id", "inherent", "active", "tier"});
  for (const auto& [actor, score] : scores) {
    auto tier = tiers.find(actor);
    write_csv_row(out, {actor, format_double(score.inherent), format_double(score.active),
                        tier == tiers.end() ? "" : to_string(tier->second)});
  }
  spit(path, out.str());
}

void write_window_scores_csv(const std::string& path,
                             const std::vector<WindowScores>& windows) {
  std::ostringstream out;
  write_csv_row(out, {"window_start", "window_end", "actor_id", "inherent", "active"});
  for (const WindowScores& ws : windows) {
    for (const auto& [actor, score] : ws.scores) {
      write_csv_row(out, {format_iso8601(ws.window.start), format_iso8601(ws.window.end), actor,
                          format_double(score.inherent), format_double(score.active)});
    }
  }
  spit(path, out.str());
}

std::vector<WindowScores> read_window_scores_csv(const std::string& path) {
  CsvTable table = read_csv_file(path);
  int start_col = table.column("window_start");
  int end_col = table.column("window_end");
  int actor_col = table.column("actor_id");
  int inherent_col = table.column("inherent");
  int active_col = table.column("active");
  if (start_col < 0 || end_col < 0 || actor_col < 0 || inherent_col < 0 || active_col < 0)
    throw std::runtime_error(path + " is missing window score columns");
  std::map<std::int64_t, WindowScores> by_start;
  for (const auto& row : table.rows) {
    auto start = parse_iso8601(row[start_col]);
    auto end = parse_iso8601(row[end_col]);
    if (!start || !end) throw std::runtime_error(path + ": invalid window timestamp");
    WindowScores& ws = by_start[*start];
    ws.window = TimeWindow{*start, *end};
    ws.scores[row[actor_col]] =
        NodalityScore{std::stod(row[inherent_col]), std::stod(row[active_col])};
  }
  std::vector<WindowScores> out;
  for (auto& [start, ws] : by_start) out.push_back(std::move(ws));
  return out;
}

void write_influence_csv(const std::string& path, const std::vector<InfluenceRecord>& records) {
  std::ostringstream out;
  write_csv_row(out, {"group", "window_start", "phi", "te_xy", "te_yx", "h_x", "h_y"});
  for (const InfluenceRecord& record : records) {
    write_csv_row(out, {record.group, format_iso8601(record.window.start),
                        format_double(record.phi), format_double(record.te_xy),
                        format_double(record.te_yx), format_double(record.h_x),
                        format_double(record.h_y)});
  }
  spit(path, out.str());
}

std::vector<InfluenceRecord> read_influence_csv(const std::string& path,
                                                const std::string& topic,
                                                std::int64_t window_seconds) {
  CsvTable table = read_csv_file(path);
  int group_col = table.column("group");
  int start_col = table.column("window_start");
  int phi_col = table.column("phi");
  int te_xy_col = table.column("te_xy");
  int te_yx_col = table.column("te_yx");
  int h_x_col = table.column("h_x");
  int h_y_col = table.column("h_y");
  if (group_col < 0 || start_col < 0 || phi_col < 0 || te_xy_col < 0 || te_yx_col < 0 ||
      h_x_col < 0 || h_y_col < 0)
    throw std::runtime_error(path + " is missing influence columns");
  std::vector<InfluenceRecord> out;
  for (const auto& row : table.rows) {
    auto start = parse_iso8601(row[start_col]);
    if (!start) throw std::runtime_error(path + ": invalid window timestamp");
    InfluenceRecord record;
    record.group = row[group_col];
    record.topic = topic;
    record.window = TimeWindow{*start, *start + window_seconds};
    record.phi = std::stod(row[phi_col]);
    record.te_xy = std::stod(row[te_xy_col]);
    record.te_yx = std::stod(row[te_yx_col]);
    record.h_x = std::stod(row[h_x_col]);
    record.h_y = std::stod(row[h_y_col]);
    out.push_back(std::move(record));
  }
  return out;
}

std::map<std::string, NodeAttributes> roster_attributes(const Roster& roster) {
  std::map<std::string, NodeAttributes> out;
  for (const Actor& actor : roster.actors) {
    NodeAttributes attrs;
    attrs.kind = to_string(actor.kind);
    attrs.role = to_string(actor.role);
    attrs.party = actor.party;
    attrs.follower_count = actor.follower_count;
    out[actor.actor_id] = attrs;
  }
  return out;
}

struct StageDef {
  std::string name;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::function<void(std::vector<std::string>&)> run;
};

/// True when the previous run's record for this stage still describes the
/// world: same inputs, and every recorded output present and unmodified.
bool reuse_stage(const StageInfo* previous, const std::map<std::string, std::string>& inputs,
                 StageInfo& info) {
  if (previous == nullptr) return false;
  if (previous->inputs != inputs) return false;
  for (const auto& [path, hash] : previous->outputs) {
    if (!fs::exists(path)) return false;
    if (sha256_file(path) != hash) return false;
  }
  info.outputs = previous->outputs;
  info.notes = previous->notes;
  info.cached = true;
  return true;
}

}  // namespace

PipelineConfig read_pipeline_config_file(const std::string& path) {
  return config_from_json(parse_json_file(path));
}

void write_pipeline_config_file(const std::string& path, const PipelineConfig& config) {
  spit_json(path, config_to_json(config));
}

PipelineResult run_pipeline(const PipelineConfig& config) {
  if (config.events_path.empty()) throw std::invalid_argument("events path is required");
  if (config.roster_path.empty()) throw std::invalid_argument("roster path is required");
  if (config.out_dir.empty()) throw std::invalid_argument("output directory is required");
  if (config.topics.empty()) throw std::invalid_argument("at least one topic is required");
  if (config.window_days < 1) throw std::invalid_argument("window_days must be positive");
  if (config.lfs_path.empty() != config.corpus_path.empty())
    throw std::invalid_argument("labeling needs both the LF file and the text corpus");

  std::vector<std::string> topics = config.topics;
  std::sort(topics.begin(), topics.end());
  topics.erase(std::unique(topics.begin(), topics.end()), topics.end());
  {
    std::set<std::string> slugs;
    for (const std::string& topic : topics)
      if (!slugs.insert(slug(topic)).second)
        throw std::invalid_argument("topic file names collide: " + topic);
  }

  fs::create_directories(config.out_dir);
  const std::string& out_dir = config.out_dir;

  json config_json = config_to_json(config);
  json hashed = config_json;
  hashed.erase("out_dir");
  hashed.erase("threads");
  const std::string config_hash = sha256_hex(hashed.dump());

  const std::string manifest_path = join_path(out_dir, "manifest.json");
  std::map<std::string, StageInfo> previous;
  if (fs::exists(manifest_path)) {
    json last = json::parse(slurp(manifest_path), nullptr, false);
    if (!last.is_discarded() && last.value("config_hash", "") == config_hash &&
        last.contains("stages")) {
      for (const auto& stage : last.at("stages")) {
        StageInfo info;
        info.name = stage.value("name", "");
        // Name the temporaries: items() holds a reference to its container,
        // which a range-for would otherwise destroy before the first pass.
        const json inputs = stage.value("inputs", json::object());
        for (const auto& [path, hash] : inputs.items())
          info.inputs[path] = hash.get<std::string>();
        const json outputs = stage.value("outputs", json::object());
        for (const auto& [path, hash] : outputs.items())
          info.outputs[path] = hash.get<std::string>();
        for (const auto& note : stage.value("notes", json::array()))
          info.notes.push_back(note.get<std::string>());
        previous[info.name] = std::move(info);
      }
    }
  }

  const std::string events_clean = join_path(out_dir, "events_clean.jsonl");
  const std::string roster_clean = join_path(out_dir, "roster_clean.csv");
  const std::string groups_path = join_path(out_dir, "groups.csv");
  const std::string ingest_report = join_path(out_dir, "ingest_report.json");
  const std::string events_final = join_path(out_dir, "events_final.jsonl");
  const std::string labels_path = join_path(out_dir, "labels.csv");
  const std::string range_path = join_path(out_dir, "range.json");
  const std::string search_report = join_path(out_dir, "search_report.json");
  const std::string design_path = join_path(out_dir, "design.csv");
  const std::string regression_path = join_path(out_dir, "regression.json");

  auto topic_file = [&](const std::string& prefix, const std::string& topic,
                        const std::string& suffix) {
    return join_path(out_dir, prefix + slug(topic) + suffix);
  };

  const bool labeling = !config.lfs_path.empty();
  const bool searching = config.metrics.empty();

  std::vector<StageDef> stages;

  {
    StageDef stage;
    stage.name = "ingest";
    stage.inputs = {config.events_path, config.roster_path};
    stage.outputs = {events_clean, roster_clean, groups_path, ingest_report};
    stage.run = [&](std::vector<std::string>& notes) {
      ParseOptions options;
      options.study_window = config.study_window;
      EventLog log = read_events_file(config.events_path, options);
      Roster roster = read_roster_file(config.roster_path);
      std::size_t off_roster = filter_to_roster(log.events, roster);
      write_events_file(events_clean, log.events);
      write_roster_file(roster_clean, roster);
      GroupOptions group_options;
      group_options.decile = config.journalist_decile;
      auto groups = assign_groups(roster, group_options);
      write_groups_csv(groups_path, groups);

      json report;
      report["events_kept"] = log.events.size();
      report["events_off_roster"] = off_roster;
      report["self_interactions"] = log.self_interactions.size();
      report["out_of_window"] = log.out_of_window;
      report["actors"] = roster.size();
      json errors = json::array();
      for (const ParseError& error : log.errors)
        errors.push_back({{"line", error.line}, {"message", error.message}});
      report["parse_errors"] = errors;
      std::map<std::string, std::size_t> group_sizes;
      for (const auto& [actor, group] : groups) ++group_sizes[group];
      report["groups"] = group_sizes;
      spit_json(ingest_report, report);

      if (!log.errors.empty())
        notes.push_back(std::to_string(log.errors.size()) + " malformed event lines skipped");
      if (log.events.empty()) throw std::runtime_error("no usable events after ingest");
    };
    stages.push_back(std::move(stage));
  }

  {
    StageDef stage;
    stage.name = "label";
    stage.inputs = {events_clean};
    if (labeling) {
      stage.inputs.push_back(config.lfs_path);
      stage.inputs.push_back(config.corpus_path);
      stage.outputs = {events_final, labels_path};
    } else {
      stage.outputs = {events_final};
    }
    stage.run = [&](std::vector<std::string>& notes) {
      if (!labeling) {
        spit(events_final, slurp(events_clean));
        notes.push_back("no labeling functions configured; events passed through");
        return;
      }
      auto lfs = read_lfs_file(config.lfs_path);
      CsvTable corpus = read_csv_file(config.corpus_path);
      int id_col = corpus.column("text_id");
      int text_col = corpus.column("text");
      if (id_col < 0 || text_col < 0)
        throw std::runtime_error("corpus must have text_id and text columns");
      std::vector<std::string> ids;
      std::vector<std::string> texts;
      for (const auto& row : corpus.rows) {
        ids.push_back(row[id_col]);
        texts.push_back(row[text_col]);
      }
      {
        std::set<std::string> seen;
        for (const std::string& id : ids)
          if (!seen.insert(id).second) throw std::runtime_error("duplicate text_id: " + id);
      }
      LabelMatrix matrix = apply_lfs(lfs, texts, config.threads);
      std::map<std::string, std::vector<std::string>> labels;
      if (config.label_policy == LabelPolicy::multi) {
        auto per_text = aggregate_multi(matrix);
        for (std::size_t i = 0; i < ids.size(); ++i) labels[ids[i]] = per_text[i];
      } else {
        auto per_text = aggregate(matrix, AggregatePolicy::majority);
        for (std::size_t i = 0; i < ids.size(); ++i) {
          if (per_text[i] && *per_text[i] != kOtherClass)
            labels[ids[i]] = {*per_text[i]};
          else
            labels[ids[i]] = {};
        }
      }
      {
        std::ostringstream out;
        write_csv_row(out, {"text_id", "topics"});
        for (const auto& [id, topic_list] : labels) {
          std::string joined;
          for (std::size_t i = 0; i < topic_list.size(); ++i) {
            if (i > 0) joined += ";";
            joined += topic_list[i];
          }
          write_csv_row(out, {id, joined});
        }
        spit(labels_path, out.str());
      }
      EventLog log = read_events_file(events_clean);
      std::size_t touched = 0;
      for (Event& event : log.events) {
        if (event.text_ref.empty()) continue;
        auto it = labels.find(event.text_ref);
        if (it == labels.end() || it->second.empty()) continue;
        std::set<std::string> merged(event.topics.begin(), event.topics.end());
        std::size_t before = merged.size();
        merged.insert(it->second.begin(), it->second.end());
        if (merged.size() != before || event.topics.size() != merged.size()) ++touched;
        event.topics.assign(merged.begin(), merged.end());
      }
      write_events_file(events_final, log.events);
      notes.push_back(std::to_string(touched) + " events labeled from the corpus");
    };
    stages.push_back(std::move(stage));
  }

  {
    StageDef stage;
    stage.name = "graphs";
    stage.inputs = {events_final, roster_clean};
    stage.outputs = {range_path};
    for (const std::string& topic : topics) {
      stage.outputs.push_back(topic_file("graph_", topic, "_topic.graphml"));
      stage.outputs.push_back(topic_file("graph_", topic, "_null.graphml"));
    }
    stage.run = [&](std::vector<std::string>&) {
      EventLog log = read_events_file(events_final);
      Roster roster = read_roster_file(roster_clean);
      StudyRange range = derive_range(log.events, config);
      write_range(range_path, range);
      auto attrs = roster_attributes(roster);
      for (const std::string& topic : topics) {
        DiscourseGraph topic_graph =
            build_network(log.events, topic, range.range, GraphKind::topic);
        DiscourseGraph null_graph =
            build_network(log.events, topic, range.range, GraphKind::null);
        write_graphml_file(topic_file("graph_", topic, "_topic.graphml"), topic_graph, attrs);
        write_graphml_file(topic_file("graph_", topic, "_null.graphml"), null_graph, attrs);
      }
    };
    stages.push_back(std::move(stage));
  }

  {
    StageDef stage;
    stage.name = "centrality";
    stage.inputs = {events_final, roster_clean, range_path};
    for (const std::string& topic : topics)
      stage.outputs.push_back(topic_file("matrix_", topic, ".csv"));
    stage.run = [&](std::vector<std::string>&) {
      EventLog log = read_events_file(events_final);
      Roster roster = read_roster_file(roster_clean);
      StudyRange range = read_range(range_path);
      FollowerMap followers;
      std::vector<std::string> universe;
      for (const Actor& actor : roster.actors) {
        followers[actor.actor_id] = actor.follower_count;
        universe.push_back(actor.actor_id);
      }
      std::vector<MetricKind> kinds(kAllMetrics.begin(), kAllMetrics.end());
      for (const std::string& topic : topics) {
        DiscourseGraph topic_graph =
            build_network(log.events, topic, range.range, GraphKind::topic);
        DiscourseGraph null_graph =
            build_network(log.events, topic, range.range, GraphKind::null);
        NodalityMatrix matrix = metric_matrix(topic_graph, null_graph, kinds, followers,
                                              &universe, config.threads);
        write_matrix_csv(topic_file("matrix_", topic, ".csv"), matrix);
      }
    };
    stages.push_back(std::move(stage));
  }

  {
    StageDef stage;
    stage.name = "nodality";
    stage.inputs = {events_final, roster_clean, range_path};
    for (const std::string& topic : topics)
      stage.inputs.push_back(topic_file("matrix_", topic, ".csv"));
    if (searching) stage.outputs.push_back(search_report);
    for (const std::string& topic : topics) {
      stage.outputs.push_back(topic_file("scores_", topic, ".csv"));
      stage.outputs.push_back(topic_file("scores_", topic, "_windows.csv"));
    }
    stage.run = [&](std::vector<std::string>& notes) {
      EventLog log = read_events_file(events_final);
      Roster roster = read_roster_file(roster_clean);
      StudyRange range = read_range(range_path);
      FollowerMap followers;
      std::vector<std::string> universe;
      for (const Actor& actor : roster.actors) {
        followers[actor.actor_id] = actor.follower_count;
        universe.push_back(actor.actor_id);
      }
      std::map<std::string, NodalityMatrix> full;
      for (const std::string& topic : topics)
        full.emplace(topic, read_matrix_csv(topic_file("matrix_", topic, ".csv"), topic,
                                            range.range));

      std::vector<MetricKind> selected = config.metrics;
      if (searching) {
        SearchOptions options;
        options.eps = config.eigenvector_eps;
        options.cluster = config.cluster;
        options.threads = config.threads;
        CombinationReport report = search_combinations(full, options);
        json j;
        json outcomes = json::array();
        for (const SubsetOutcome& outcome : report.outcomes) {
          json entry;
          json names = json::array();
          for (MetricKind kind : outcome.metrics) names.push_back(to_string(kind));
          entry["metrics"] = names;
          json per_topic;
          for (const auto& [topic, passed] : outcome.topic_pass) per_topic[topic] = passed;
          entry["topic_pass"] = per_topic;
          entry["passed_all"] = outcome.passed_all;
          if (outcome.passed_all) entry["leader_intersection"] = outcome.leader_intersection;
          outcomes.push_back(std::move(entry));
        }
        j["outcomes"] = outcomes;
        if (report.selected) {
          json names = json::array();
          for (MetricKind kind : *report.selected) names.push_back(to_string(kind));
          j["selected"] = names;
        } else {
          j["selected"] = nullptr;
        }
        spit_json(search_report, j);
        if (!report.selected)
          throw std::runtime_error("no metric subset passed the sign test on every topic");
        selected = *report.selected;
        std::string joined;
        for (MetricKind kind : selected) joined += (joined.empty() ? "" : ", ") + to_string(kind);
        notes.push_back("selected metrics: " + joined);
      }

      for (const std::string& topic : topics) {
        NodalityMatrix sub = subset_matrix(full.at(topic), selected);
        PcaResult result = pca(sub);
        NodalityScores full_scores = scores(result);
        TierAssignment tiers = cluster(result, config.cluster);
        write_scores_csv(topic_file("scores_", topic, ".csv"), full_scores, tiers.tier_of);

        SnapshotSeries series = snapshot_series(log.events, topic, range.range,
                                                range.window_days);
        std::vector<WindowScores> window_scores;
        for (const Snapshot& snapshot : series.snapshots) {
          try {
            NodalityMatrix wm = metric_matrix(snapshot.topic_graph, snapshot.null_graph,
                                              selected, followers, &universe, config.threads);
            PcaResult wp = pca(wm);
            window_scores.push_back(WindowScores{snapshot.window, scores(wp)});
          } catch (const std::invalid_argument& error) {
            notes.push_back(topic + " " + format_iso8601(snapshot.window.start) +
                            ": window skipped (" + error.what() + ")");
          }
        }
        write_window_scores_csv(topic_file("scores_", topic, "_windows.csv"), window_scores);
      }
    };
    stages.push_back(std::move(stage));
  }

  {
    StageDef stage;
    stage.name = "influence";
    stage.inputs = {events_final, groups_path, range_path};
    for (const std::string& topic : topics)
      stage.outputs.push_back(topic_file("influence_", topic, ".csv"));
    stage.run = [&](std::vector<std::string>&) {
      EventLog log = read_events_file(events_final);
      auto groups = read_groups_csv(groups_path);
      StudyRange range = read_range(range_path);
      std::vector<TimeWindow> windows = window_list(range);
      InfluenceOptions options;
      options.lag = config.lag;
      options.bins = config.bins;
      options.bin_days = config.bin_days;
      options.pool_windows = config.pool_windows;
      for (const std::string& topic : topics) {
        auto records = group_influence_table(log.events, groups, topic, windows, options);
        write_influence_csv(topic_file("influence_", topic, ".csv"), records);
      }
    };
    stages.push_back(std::move(stage));
  }

  {
    StageDef stage;
    stage.name = "regress";
    stage.inputs = {range_path, groups_path};
    for (const std::string& topic : topics) {
      stage.inputs.push_back(topic_file("influence_", topic, ".csv"));
      stage.inputs.push_back(topic_file("scores_", topic, "_windows.csv"));
    }
    stage.outputs = {design_path, regression_path};
    stage.run = [&](std::vector<std::string>& notes) {
      StudyRange range = read_range(range_path);
      auto groups = read_groups_csv(groups_path);
      std::int64_t window_seconds =
          static_cast<std::int64_t>(range.window_days) * kSecondsPerDay;
      std::map<std::string, std::vector<WindowScores>> scores_by_topic;
      std::vector<InfluenceRecord> records;
      std::size_t skipped = 0;
      for (const std::string& topic : topics) {
        auto window_scores = read_window_scores_csv(topic_file("scores_", topic, "_windows.csv"));
        std::set<std::int64_t> scored;
        for (const WindowScores& ws : window_scores) scored.insert(ws.window.start);
        scores_by_topic[topic] = std::move(window_scores);
        for (InfluenceRecord& record :
             read_influence_csv(topic_file("influence_", topic, ".csv"), topic, window_seconds)) {
          if (scored.count(record.window.start) == 0) {
            ++skipped;
            continue;
          }
          records.push_back(std::move(record));
        }
      }
      if (skipped > 0)
        notes.push_back(std::to_string(skipped) +
                        " influence rows dropped: no scores for their window");
      std::vector<DesignRow> rows = build_design(records, scores_by_topic, groups,
                                                 config.aggregate);
      {
        std::ostringstream out;
        write_csv_row(out, {"group", "topic", "window_index", "phi", "inherent", "active",
                            "interaction", "time"});
        for (const DesignRow& row : rows) {
          write_csv_row(out, {row.group, row.topic, std::to_string(row.window_index),
                              format_double(row.phi), format_double(row.inherent),
                              format_double(row.active), format_double(row.interaction),
                              format_double(row.time)});
        }
        spit(design_path, out.str());
      }
      RegressionResult fit = fit_ols(rows);
      json j;
      j["n"] = fit.n;
      j["r_squared"] = fit.r_squared;
      j["sigma"] = fit.sigma;
      j["robust"] = fit.robust;
      json coefficients = json::array();
      for (const Coefficient& c : fit.coefficients) {
        coefficients.push_back({{"name", c.name},
                                {"estimate", c.estimate},
                                {"std_error", c.std_error},
                                {"t_stat", c.t_stat},
                                {"p_value", c.p_value}});
      }
      j["coefficients"] = coefficients;
      spit_json(regression_path, j);
    };
    stages.push_back(std::move(stage));
  }

  {
    StageDef stage;
    stage.name = "figures";
    stage.inputs = {events_final, roster_clean, range_path, groups_path};
    for (const std::string& topic : topics) {
      stage.inputs.push_back(topic_file("scores_", topic, ".csv"));
      stage.inputs.push_back(topic_file("influence_", topic, ".csv"));
    }
    const std::string volume_path = join_path(out_dir, "fig_daily_volume.csv");
    const std::string scatter_path = join_path(out_dir, "fig_pca_scatter.csv");
    const std::string phi_path = join_path(out_dir, "fig_phi_by_group.csv");
    const std::string box_path = join_path(out_dir, "fig_nodality_by_group.csv");
    stage.outputs = {volume_path, scatter_path, phi_path, box_path};
    stage.run = [&, volume_path, scatter_path, phi_path, box_path](std::vector<std::string>&) {
      EventLog log = read_events_file(events_final);
      Roster roster = read_roster_file(roster_clean);
      StudyRange range = read_range(range_path);
      auto groups = read_groups_csv(groups_path);

      std::map<std::tuple<std::int64_t, std::string, std::string>, std::int64_t> volume;
      for (const Event& event : log.events) {
        if (!range.range.contains(event.ts)) continue;
        const Actor* initiator = roster.find(event.target);
        if (initiator == nullptr) continue;
        std::int64_t day = floor_div(event.ts, kSecondsPerDay) * kSecondsPerDay;
        for (const std::string& topic : event.topics) {
          if (!std::binary_search(topics.begin(), topics.end(), topic)) continue;
          ++volume[{day, topic, to_string(initiator->kind)}];
        }
      }
      {
        std::ostringstream out;
        write_csv_row(out, {"date", "topic", "kind", "count"});
        for (const auto& [key, count] : volume) {
          const auto& [day, topic, kind] = key;
          write_csv_row(out, {format_iso_date(day), topic, kind, std::to_string(count)});
        }
        spit(volume_path, out.str());
      }

      std::ostringstream scatter;
      write_csv_row(scatter, {"topic", "actor_id", "inherent", "active", "tier"});
      std::ostringstream box;
      write_csv_row(box, {"topic", "group", "actor_id", "inherent", "active"});
      for (const std::string& topic : topics) {
        CsvTable table = read_csv_file(topic_file("scores_", topic, ".csv"));
        int actor_col = table.column("actor_id");
        int inherent_col = table.column("inherent");
        int active_col = table.column("active");
        int tier_col = table.column("tier");
        for (const auto& row : table.rows) {
          write_csv_row(scatter, {topic, row[actor_col], row[inherent_col], row[active_col],
                                  row[tier_col]});
          auto group = groups.find(row[actor_col]);
          if (group == groups.end()) continue;
          write_csv_row(box, {topic, group->second, row[actor_col], row[inherent_col],
                              row[active_col]});
        }
      }
      spit(scatter_path, scatter.str());
      spit(box_path, box.str());

      std::ostringstream phi;
      write_csv_row(phi, {"topic", "group", "window_start", "phi"});
      for (const std::string& topic : topics) {
        CsvTable table = read_csv_file(topic_file("influence_", topic, ".csv"));
        int group_col = table.column("group");
        int start_col = table.column("window_start");
        int phi_col = table.column("phi");
        for (const auto& row : table.rows)
          write_csv_row(phi, {topic, row[group_col], row[start_col], row[phi_col]});
      }
      spit(phi_path, phi.str());
    };
    stages.push_back(std::move(stage));
  }

  PipelineResult result;
  result.manifest_path = manifest_path;
  for (StageDef& stage : stages) {
    StageInfo info;
    info.name = stage.name;
    for (const std::string& input : stage.inputs) {
      if (!fs::exists(input))
        throw std::runtime_error("stage " + stage.name + ": missing input " + input);
      info.inputs[input] = sha256_file(input);
    }
    const StageInfo* last = nullptr;
    auto it = previous.find(stage.name);
    if (it != previous.end()) last = &it->second;
    if (!reuse_stage(last, info.inputs, info)) {
      try {
        stage.run(info.notes);
      } catch (const std::exception& error) {
        throw std::runtime_error("stage " + stage.name + ": " + error.what());
      }
      for (const std::string& output : stage.outputs) {
        if (!fs::exists(output))
          throw std::runtime_error("stage " + stage.name + " did not produce " + output);
        info.outputs[output] = sha256_file(output);
      }
    }
    result.stages.push_back(std::move(info));
  }

  json manifest;
  manifest["tool_version"] = kToolVersion;
  manifest["config_hash"] = config_hash;
  manifest["config"] = config_json;
  manifest["seed"] = config.cluster.seed;
  manifest["generated_at"] = format_iso8601(static_cast<std::int64_t>(std::time(nullptr)));
  json stage_list = json::array();
  for (const StageInfo& info : result.stages) {
    json entry;
    entry["name"] = info.name;
    entry["cached"] = info.cached;
    entry["inputs"] = info.inputs;
    entry["outputs"] = info.outputs;
    entry["notes"] = info.notes;
    stage_list.push_back(std::move(entry));
  }
  manifest["stages"] = stage_list;
  spit_json(manifest_path, manifest);
  return result;
}

}  // namespace nodality
