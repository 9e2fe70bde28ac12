#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nodality/centrality.hpp"
#include "nodality/csv.hpp"
#include "nodality/graph.hpp"
#include "nodality/graph_io.hpp"
#include "nodality/influence.hpp"
#include "nodality/ingest.hpp"
#include "nodality/nodality.hpp"
#include "nodality/pipeline.hpp"
#include "nodality/regress.hpp"
#include "nodality/synth.hpp"
#include "nodality/timeutil.hpp"
#include "nodality/weaklabel.hpp"

namespace {

using nodality::format_double;
using nodality::format_iso8601;
using nodality::kSecondsPerDay;
using nodality::TimeWindow;
using json = nlohmann::json;

std::int64_t parse_time_or_throw(const std::string& text, const std::string& what) {
  auto parsed = nodality::parse_iso8601(text);
  if (!parsed) throw CLI::ValidationError(what, "not an ISO-8601 UTC timestamp: " + text);
  return *parsed;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

/// Writes to the path when given, stdout otherwise.
void emit(const std::string& path, const std::string& content) {
  if (path.empty())
    std::cout << content;
  else
    write_text(path, content);
}

nodality::FollowerMap followers_from_roster(const std::string& path) {
  nodality::FollowerMap out;
  nodality::Roster roster = nodality::read_roster_file(path);
  for (const nodality::Actor& actor : roster.actors) out[actor.actor_id] = actor.follower_count;
  return out;
}

/// Follower counts for a graph: the roster file when given, otherwise the
/// counts embedded in the GraphML node attributes.
nodality::FollowerMap resolve_followers(const std::string& roster_path,
                                        const nodality::GraphRecord& record) {
  if (!roster_path.empty()) return followers_from_roster(roster_path);
  nodality::FollowerMap out;
  for (const auto& [actor, attrs] : record.attributes)
    if (attrs.follower_count >= 0) out[actor] = attrs.follower_count;
  return out;
}

std::map<std::string, std::string> read_groups_csv(const std::string& path) {
  nodality::CsvTable table = nodality::read_csv_file(path);
  int actor_col = table.column("actor_id");
  int group_col = table.column("group");
  if (actor_col < 0 || group_col < 0)
    throw std::runtime_error(path + " must have actor_id and group columns");
  std::map<std::string, std::string> out;
  for (const auto& row : table.rows) out[row[actor_col]] = row[group_col];
  return out;
}

std::vector<nodality::MetricKind> parse_metric_list(const std::string& text) {
  std::vector<nodality::MetricKind> out;
  std::stringstream stream(text);
  std::string token;
  while (std::getline(stream, token, ',')) {
    if (token.empty()) continue;
    auto kind = nodality::metric_from_string(token);
    if (!kind) throw std::runtime_error("unknown metric: " + token);
    out.push_back(*kind);
  }
  if (out.empty()) throw std::runtime_error("no metrics given");
  return out;
}

TimeWindow derive_full_range(const std::vector<nodality::Event>& events, int window_days) {
  if (events.empty()) throw std::runtime_error("no events to derive a window range from");
  std::int64_t lo = events.front().ts;
  std::int64_t hi = events.front().ts;
  for (const nodality::Event& event : events) {
    lo = std::min(lo, event.ts);
    hi = std::max(hi, event.ts);
  }
  auto floor_day = [](std::int64_t t) {
    std::int64_t q = t / kSecondsPerDay;
    if (t % kSecondsPerDay != 0 && t < 0) --q;
    return q;
  };
  std::int64_t start = floor_day(lo) * kSecondsPerDay;
  std::int64_t days = floor_day(hi) - floor_day(lo) + 1;
  std::int64_t windows = days / window_days;
  if (windows == 0) throw std::runtime_error("events span less than one window");
  return TimeWindow{start, start + windows * window_days * kSecondsPerDay};
}

std::vector<TimeWindow> tile_windows(TimeWindow range, int window_days) {
  std::vector<TimeWindow> out;
  std::int64_t len = static_cast<std::int64_t>(window_days) * kSecondsPerDay;
  for (std::int64_t start = range.start; start + len <= range.end; start += len)
    out.push_back(TimeWindow{start, start + len});
  return out;
}

json search_report_json(const nodality::CombinationReport& report) {
  json j;
  json outcomes = json::array();
  for (const nodality::SubsetOutcome& outcome : report.outcomes) {
    json entry;
    json names = json::array();
    for (nodality::MetricKind kind : outcome.metrics) names.push_back(to_string(kind));
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
    for (nodality::MetricKind kind : *report.selected) names.push_back(to_string(kind));
    j["selected"] = names;
  } else {
    j["selected"] = nullptr;
  }
  return j;
}

struct GlobalFlags {
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
  std::string out_dir;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nodality: who can transmit information in a discourse network"};
  app.require_subcommand(1);

  GlobalFlags global;
  app.add_option("--seed", global.seed, "Seed for clustering and generation")->group("Global");
  app.add_option("--threads", global.threads, "Worker threads for parallel stages")
      ->group("Global");
  app.add_option("--out-dir", global.out_dir, "Output directory override")->group("Global");

  // ingest validate
  auto* ingest = app.add_subcommand("ingest", "Event and roster intake");
  ingest->require_subcommand(1);
  auto* validate = ingest->add_subcommand("validate", "Check an event log against a roster");
  struct {
    std::string events, roster, window_start, window_end;
  } validate_args;
  validate->add_option("--events", validate_args.events, "Event log (JSON lines)")->required();
  validate->add_option("--roster", validate_args.roster, "Roster CSV")->required();
  validate->add_option("--window-start", validate_args.window_start, "Study window start");
  validate->add_option("--window-end", validate_args.window_end, "Study window end");
  validate->callback([&]() {
    nodality::ParseOptions options;
    if (!validate_args.window_start.empty() || !validate_args.window_end.empty()) {
      if (validate_args.window_start.empty() || validate_args.window_end.empty())
        throw std::runtime_error("--window-start and --window-end must be given together");
      options.study_window =
          TimeWindow{parse_time_or_throw(validate_args.window_start, "--window-start"),
                     parse_time_or_throw(validate_args.window_end, "--window-end")};
    }
    nodality::EventLog log = nodality::read_events_file(validate_args.events, options);
    nodality::Roster roster = nodality::read_roster_file(validate_args.roster);
    std::size_t off_roster = nodality::filter_to_roster(log.events, roster);
    std::cout << "events kept: " << log.events.size() << "\n"
              << "off roster: " << off_roster << "\n"
              << "self interactions: " << log.self_interactions.size() << "\n"
              << "out of window: " << log.out_of_window << "\n"
              << "actors on roster: " << roster.size() << "\n"
              << "malformed lines: " << log.errors.size() << "\n";
    for (const nodality::ParseError& error : log.errors)
      std::cout << "  line " << error.line << ": " << error.message << "\n";
  });

  // weaklabel run
  auto* weaklabel = app.add_subcommand("weaklabel", "Rule-based topic labeling");
  weaklabel->require_subcommand(1);
  auto* wl_run = weaklabel->add_subcommand("run", "Label a text corpus");
  struct {
    std::string lfs, corpus, policy = "majority", gold, out;
  } wl_args;
  wl_run->add_option("--lfs", wl_args.lfs, "Labeling functions (JSON lines)")->required();
  wl_run->add_option("--corpus", wl_args.corpus, "Corpus CSV with text_id and text columns")
      ->required();
  wl_run->add_option("--policy", wl_args.policy, "majority, weighted, or multi");
  wl_run->add_option("--gold", wl_args.gold, "Gold labels CSV (text_id,label) for weighted");
  wl_run->add_option("--out", wl_args.out, "Output CSV; stdout when omitted");
  wl_run->callback([&]() {
    auto lfs = nodality::read_lfs_file(wl_args.lfs);
    nodality::CsvTable corpus = nodality::read_csv_file(wl_args.corpus);
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
    nodality::LabelMatrix matrix = nodality::apply_lfs(lfs, texts, global.threads);

    std::ostringstream out;
    nodality::write_csv_row(out, {"text_id", "label"});
    if (wl_args.policy == "multi") {
      auto labels = nodality::aggregate_multi(matrix);
      for (std::size_t i = 0; i < ids.size(); ++i) {
        std::string joined;
        for (std::size_t t = 0; t < labels[i].size(); ++t)
          joined += (t > 0 ? ";" : "") + labels[i][t];
        nodality::write_csv_row(out, {ids[i], joined});
      }
    } else {
      nodality::AggregatePolicy policy;
      if (wl_args.policy == "majority") {
        policy = nodality::AggregatePolicy::majority;
      } else if (wl_args.policy == "weighted") {
        policy = nodality::AggregatePolicy::weighted;
      } else {
        throw std::runtime_error("unknown policy: " + wl_args.policy);
      }
      std::vector<std::string> gold;
      if (!wl_args.gold.empty()) {
        nodality::CsvTable gold_table = nodality::read_csv_file(wl_args.gold);
        int gid = gold_table.column("text_id");
        int glabel = gold_table.column("label");
        if (gid < 0 || glabel < 0)
          throw std::runtime_error("gold file must have text_id and label columns");
        std::map<std::string, std::string> by_id;
        for (const auto& row : gold_table.rows) by_id[row[gid]] = row[glabel];
        for (const std::string& id : ids) {
          auto it = by_id.find(id);
          gold.push_back(it == by_id.end() ? std::string(nodality::kOtherClass) : it->second);
        }
      }
      auto labels =
          nodality::aggregate(matrix, policy, wl_args.gold.empty() ? nullptr : &gold);
      for (std::size_t i = 0; i < ids.size(); ++i)
        nodality::write_csv_row(out, {ids[i], labels[i] ? *labels[i] : ""});
    }
    emit(wl_args.out, out.str());
  });

  // graph build
  auto* graph = app.add_subcommand("graph", "Discourse graph construction");
  graph->require_subcommand(1);
  auto* gb = graph->add_subcommand("build", "Build one topic or null network window");
  struct {
    std::string events, topic, window_start, kind = "topic", out, roster;
    int window_days = 14;
  } gb_args;
  gb->add_option("--events", gb_args.events, "Event log (JSON lines)")->required();
  gb->add_option("--topic", gb_args.topic, "Topic id")->required();
  gb->add_option("--window-start", gb_args.window_start, "Window start (ISO-8601)")->required();
  gb->add_option("--window-days", gb_args.window_days, "Window length in days");
  gb->add_option("--kind", gb_args.kind, "topic or null");
  gb->add_option("--roster", gb_args.roster, "Roster CSV for node attributes");
  gb->add_option("--out", gb_args.out, "Output path (.graphml, or .dot/.gv)")->required();
  gb->callback([&]() {
    nodality::EventLog log = nodality::read_events_file(gb_args.events);
    std::int64_t start = parse_time_or_throw(gb_args.window_start, "--window-start");
    TimeWindow window{start, start + std::int64_t{gb_args.window_days} * kSecondsPerDay};
    nodality::GraphKind kind;
    if (gb_args.kind == "topic") {
      kind = nodality::GraphKind::topic;
    } else if (gb_args.kind == "null") {
      kind = nodality::GraphKind::null;
    } else {
      throw std::runtime_error("--kind must be topic or null");
    }
    nodality::DiscourseGraph built =
        nodality::build_network(log.events, gb_args.topic, window, kind);
    std::map<std::string, nodality::NodeAttributes> attrs;
    if (!gb_args.roster.empty()) {
      nodality::Roster roster = nodality::read_roster_file(gb_args.roster);
      for (const nodality::Actor& actor : roster.actors) {
        nodality::NodeAttributes a;
        a.kind = to_string(actor.kind);
        a.role = to_string(actor.role);
        a.party = actor.party;
        a.follower_count = actor.follower_count;
        attrs[actor.actor_id] = a;
      }
    }
    std::string extension = std::filesystem::path(gb_args.out).extension().string();
    if (extension == ".dot" || extension == ".gv")
      nodality::write_dot_file(gb_args.out, built, attrs);
    else
      nodality::write_graphml_file(gb_args.out, built, attrs);
    std::cout << "wrote " << gb_args.out << " (" << built.size() << " nodes, "
              << built.edges().size() << " edges)\n";
  });

  // centrality compute
  auto* centrality = app.add_subcommand("centrality", "Per-node centrality metrics");
  centrality->require_subcommand(1);
  auto* cc = centrality->add_subcommand("compute", "Evaluate one metric on a saved graph");
  struct {
    std::string graph, metric, followers, out;
  } cc_args;
  cc->add_option("--graph", cc_args.graph, "GraphML file")->required();
  cc->add_option("--metric", cc_args.metric, "Metric name")->required();
  cc->add_option("--followers", cc_args.followers, "Roster CSV for follower counts");
  cc->add_option("--out", cc_args.out, "Output CSV; stdout when omitted");
  cc->callback([&]() {
    nodality::GraphRecord record = nodality::read_graphml_file(cc_args.graph);
    auto kind = nodality::metric_from_string(cc_args.metric);
    if (!kind) throw std::runtime_error("unknown metric: " + cc_args.metric);
    nodality::FollowerMap followers = resolve_followers(cc_args.followers, record);
    nodality::MetricVector metric = nodality::compute(record.graph, *kind, followers);
    std::ostringstream out;
    nodality::write_csv_row(out, {"actor_id", "metric", "value", "graph_kind", "window_start"});
    for (const auto& [actor, value] : metric.values) {
      nodality::write_csv_row(out, {actor, to_string(metric.metric), format_double(value),
                                    to_string(metric.graph_kind),
                                    format_iso8601(metric.window.start)});
    }
    emit(cc_args.out, out.str());
  });

  // nodality score / search
  auto* nodality_cmd = app.add_subcommand("nodality", "Inherent and active nodality");
  nodality_cmd->require_subcommand(1);
  auto* ns = nodality_cmd->add_subcommand("score", "PCA scores and tiers for one topic");
  struct {
    std::string topic_graph, null_graph, metrics = "strength,degree,funnel_bandwidth";
    std::string followers, out;
  } ns_args;
  ns->add_option("--topic-graph", ns_args.topic_graph, "Topic-network GraphML")->required();
  ns->add_option("--null-graph", ns_args.null_graph, "Null-network GraphML")->required();
  ns->add_option("--metrics", ns_args.metrics, "Comma-separated metric names");
  ns->add_option("--followers", ns_args.followers, "Roster CSV for follower counts");
  ns->add_option("--out", ns_args.out, "Output CSV; stdout when omitted");
  ns->callback([&]() {
    nodality::GraphRecord topic_record = nodality::read_graphml_file(ns_args.topic_graph);
    nodality::GraphRecord null_record = nodality::read_graphml_file(ns_args.null_graph);
    auto kinds = parse_metric_list(ns_args.metrics);
    nodality::FollowerMap followers = resolve_followers(ns_args.followers, topic_record);
    for (const auto& [actor, attrs] : null_record.attributes)
      if (ns_args.followers.empty() && attrs.follower_count >= 0 && !followers.count(actor))
        followers[actor] = attrs.follower_count;
    nodality::NodalityMatrix matrix = nodality::metric_matrix(
        topic_record.graph, null_record.graph, kinds, followers, nullptr, global.threads);
    nodality::PcaResult result = nodality::pca(matrix);
    nodality::NodalityScores actor_scores = nodality::scores(result);
    nodality::ClusterOptions cluster_options;
    if (global.seed) cluster_options.seed = *global.seed;
    nodality::TierAssignment tiers = nodality::cluster(result, cluster_options);
    std::ostringstream out;
    nodality::write_csv_row(out, {"actor_id", "inherent", "active", "tier"});
    for (const auto& [actor, score] : actor_scores) {
      nodality::write_csv_row(out, {actor, format_double(score.inherent),
                                    format_double(score.active),
                                    to_string(tiers.tier_of.at(actor))});
    }
    emit(ns_args.out, out.str());
  });

  auto* nsearch = nodality_cmd->add_subcommand("search", "Metric combination search");
  struct {
    std::string topics, out;
    std::size_t min_size = 3;
    double eps = 0.01;
  } nsearch_args;
  nsearch->add_option("--topics", nsearch_args.topics,
                      "JSON config: topics -> topic_graph/null_graph paths")
      ->required();
  nsearch->add_option("--min-size", nsearch_args.min_size, "Smallest subset size");
  nsearch->add_option("--eps", nsearch_args.eps, "Loading magnitude threshold");
  nsearch->add_option("--out", nsearch_args.out, "Report JSON; stdout when omitted");
  nsearch->callback([&]() {
    std::ifstream in(nsearch_args.topics);
    if (!in) throw std::runtime_error("cannot open " + nsearch_args.topics);
    json config = json::parse(in, nullptr, false);
    if (config.is_discarded() || !config.contains("topics"))
      throw std::runtime_error(nsearch_args.topics + " must be JSON with a topics object");
    nodality::FollowerMap followers;
    if (config.contains("followers"))
      followers = followers_from_roster(config.at("followers").get<std::string>());
    std::map<std::string, nodality::NodalityMatrix> per_topic;
    std::vector<nodality::MetricKind> kinds(nodality::kAllMetrics.begin(),
                                            nodality::kAllMetrics.end());
    std::vector<std::string> universe;
    {
      std::set<std::string> actors;
      for (const auto& [topic, paths] : config.at("topics").items()) {
        for (const char* key : {"topic_graph", "null_graph"}) {
          auto record = nodality::read_graphml_file(paths.at(key).get<std::string>());
          for (const std::string& actor : record.graph.nodes()) actors.insert(actor);
          if (config.contains("followers")) continue;
          for (const auto& [actor, attrs] : record.attributes)
            if (attrs.follower_count >= 0 && !followers.count(actor))
              followers[actor] = attrs.follower_count;
        }
      }
      universe.assign(actors.begin(), actors.end());
    }
    for (const auto& [topic, paths] : config.at("topics").items()) {
      auto topic_record = nodality::read_graphml_file(paths.at("topic_graph").get<std::string>());
      auto null_record = nodality::read_graphml_file(paths.at("null_graph").get<std::string>());
      per_topic.emplace(topic,
                        nodality::metric_matrix(topic_record.graph, null_record.graph, kinds,
                                                followers, &universe, global.threads));
    }
    nodality::SearchOptions options;
    options.min_size = nsearch_args.min_size;
    options.eps = nsearch_args.eps;
    if (global.seed) options.cluster.seed = *global.seed;
    options.threads = global.threads;
    nodality::CombinationReport report = nodality::search_combinations(per_topic, options);
    emit(nsearch_args.out, search_report_json(report).dump(2) + "\n");
  });

  // influence table
  auto* influence = app.add_subcommand("influence", "Directed information flow");
  influence->require_subcommand(1);
  auto* it_cmd = influence->add_subcommand("table", "Per-group phi against the rest");
  struct {
    std::string events, groups, topic, window_start, window_end, out;
    int window_days = 14, lag = 1, bins = 2, bin_days = 1;
    bool pool = false;
  } it_args;
  it_cmd->add_option("--events", it_args.events, "Event log (JSON lines)")->required();
  it_cmd->add_option("--groups", it_args.groups, "Group CSV (actor_id,group)")->required();
  it_cmd->add_option("--topic", it_args.topic, "Topic id")->required();
  it_cmd->add_option("--window-days", it_args.window_days, "Window length in days");
  it_cmd->add_option("--window-start", it_args.window_start, "Range start (ISO-8601)");
  it_cmd->add_option("--window-end", it_args.window_end, "Range end (ISO-8601)");
  it_cmd->add_option("--lag", it_args.lag, "Transfer entropy history length");
  it_cmd->add_option("--bins", it_args.bins, "Quantile bins");
  it_cmd->add_option("--bin-days", it_args.bin_days, "Activity bin length in days");
  it_cmd->add_flag("--pool-windows", it_args.pool, "Pool symbol statistics across windows");
  it_cmd->add_option("--out", it_args.out, "Output CSV; stdout when omitted");
  it_cmd->callback([&]() {
    nodality::EventLog log = nodality::read_events_file(it_args.events);
    auto groups = read_groups_csv(it_args.groups);
    TimeWindow range;
    if (!it_args.window_start.empty() && !it_args.window_end.empty()) {
      range = TimeWindow{parse_time_or_throw(it_args.window_start, "--window-start"),
                         parse_time_or_throw(it_args.window_end, "--window-end")};
    } else if (it_args.window_start.empty() && it_args.window_end.empty()) {
      range = derive_full_range(log.events, it_args.window_days);
    } else {
      throw std::runtime_error("--window-start and --window-end must be given together");
    }
    nodality::InfluenceOptions options;
    options.lag = it_args.lag;
    options.bins = it_args.bins;
    options.bin_days = it_args.bin_days;
    options.pool_windows = it_args.pool;
    auto records = nodality::group_influence_table(
        log.events, groups, it_args.topic, tile_windows(range, it_args.window_days), options);
    std::ostringstream out;
    nodality::write_csv_row(out, {"group", "window_start", "phi", "te_xy", "te_yx", "h_x", "h_y"});
    for (const auto& record : records) {
      nodality::write_csv_row(
          out, {record.group, format_iso8601(record.window.start), format_double(record.phi),
                format_double(record.te_xy), format_double(record.te_yx),
                format_double(record.h_x), format_double(record.h_y)});
    }
    emit(it_args.out, out.str());
  });

  // regress fit
  auto* regress = app.add_subcommand("regress", "Nodality-influence regression");
  regress->require_subcommand(1);
  auto* rf = regress->add_subcommand("fit", "OLS on a prepared design table");
  struct {
    std::string design, aggregate = "mean", out;
    bool robust = false;
  } rf_args;
  rf->add_option("--design", rf_args.design, "Design CSV")->required();
  rf->add_option("--aggregate", rf_args.aggregate, "Aggregation recorded with the fit");
  rf->add_flag("--robust", rf_args.robust, "Heteroskedasticity-consistent errors");
  rf->add_option("--out", rf_args.out, "Output JSON; stdout when omitted");
  rf->callback([&]() {
    nodality::CsvTable table = nodality::read_csv_file(rf_args.design);
    int group_col = table.column("group");
    int topic_col = table.column("topic");
    int index_col = table.column("window_index");
    int phi_col = table.column("phi");
    int inherent_col = table.column("inherent");
    int active_col = table.column("active");
    int interaction_col = table.column("interaction");
    int time_col = table.column("time");
    if (phi_col < 0 || inherent_col < 0 || active_col < 0 || interaction_col < 0 ||
        time_col < 0)
      throw std::runtime_error(
          "design needs phi, inherent, active, interaction, and time columns");
    std::vector<nodality::DesignRow> rows;
    for (const auto& row : table.rows) {
      nodality::DesignRow r;
      if (group_col >= 0) r.group = row[group_col];
      if (topic_col >= 0) r.topic = row[topic_col];
      if (index_col >= 0) r.window_index = std::stoll(row[index_col]);
      r.phi = std::stod(row[phi_col]);
      r.inherent = std::stod(row[inherent_col]);
      r.active = std::stod(row[active_col]);
      r.interaction = std::stod(row[interaction_col]);
      r.time = std::stod(row[time_col]);
      rows.push_back(std::move(r));
    }
    nodality::RegressionResult fit = nodality::fit_ols(rows, rf_args.robust);
    json j;
    j["n"] = fit.n;
    j["r_squared"] = fit.r_squared;
    j["sigma"] = fit.sigma;
    j["robust"] = fit.robust;
    j["aggregate"] = rf_args.aggregate;
    json coefficients = json::array();
    for (const nodality::Coefficient& c : fit.coefficients) {
      coefficients.push_back({{"name", c.name},
                              {"estimate", c.estimate},
                              {"std_error", c.std_error},
                              {"t_stat", c.t_stat},
                              {"p_value", c.p_value}});
    }
    j["coefficients"] = coefficients;
    emit(rf_args.out, j.dump(2) + "\n");
  });

  // synth generate
  auto* synth = app.add_subcommand("synth", "Synthetic discourse data");
  synth->require_subcommand(1);
  auto* sg = synth->add_subcommand("generate", "Generate events, roster, and planted truth");
  struct {
    std::string config;
  } sg_args;
  sg->add_option("--config", sg_args.config, "Generator config JSON")->required();
  sg->callback([&]() {
    if (global.out_dir.empty()) throw std::runtime_error("synth generate needs --out-dir");
    nodality::SynthConfig config = nodality::read_synth_config_file(sg_args.config);
    if (global.seed) config.seed = *global.seed;
    nodality::SynthResult result = nodality::generate(config);
    std::filesystem::create_directories(global.out_dir);
    auto path = [&](const char* name) {
      return (std::filesystem::path(global.out_dir) / name).string();
    };
    nodality::write_events_file(path("events.jsonl"), result.events);
    nodality::write_roster_file(path("roster.csv"), result.roster);
    nodality::write_truth_file(path("truth.csv"), result.truth);
    std::cout << "wrote " << result.events.size() << " events for " << result.roster.size()
              << " actors to " << global.out_dir << "\n";
  });

  // pipeline run
  auto* pipeline = app.add_subcommand("pipeline", "Full analysis pipeline");
  pipeline->require_subcommand(1);
  auto* pr = pipeline->add_subcommand("run", "Run every stage from one config");
  struct {
    std::string config;
  } pr_args;
  pr->add_option("--config", pr_args.config, "Pipeline config JSON")->required();
  pr->callback([&]() {
    nodality::PipelineConfig config = nodality::read_pipeline_config_file(pr_args.config);
    if (!global.out_dir.empty()) config.out_dir = global.out_dir;
    if (global.seed) config.cluster.seed = *global.seed;
    if (global.threads > 1) config.threads = global.threads;
    nodality::PipelineResult result = nodality::run_pipeline(config);
    for (const nodality::StageInfo& stage : result.stages) {
      std::cout << "stage " << stage.name << ": " << (stage.cached ? "cached" : "ran") << " ("
                << stage.outputs.size() << " outputs)\n";
      for (const std::string& note : stage.notes) std::cout << "  note: " << note << "\n";
    }
    std::cout << "manifest: " << result.manifest_path << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& error) {
    return app.exit(error);
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  }
  return 0;
}
