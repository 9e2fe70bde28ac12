#include "nodality/graph.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <stdexcept>
#include <tuple>

namespace nodality {

std::string to_string(GraphKind kind) {
  return kind == GraphKind::topic ? "topic" : "null";
}

DiscourseGraph::DiscourseGraph(
    std::vector<std::tuple<std::string, std::string, std::int64_t>> weighted_edges,
    GraphKind kind, std::string topic, TimeWindow window)
    : kind_(kind), topic_(std::move(topic)), window_(window) {
  std::map<std::pair<std::string, std::string>, std::int64_t> merged;
  for (auto& [src, dst, w] : weighted_edges) {
    if (src == dst) throw std::invalid_argument("graph: self-loop on " + src);
    if (w <= 0) throw std::invalid_argument("graph: nonpositive weight on " + src + "->" + dst);
    merged[{src, dst}] += w;
    nodes_.push_back(src);
    nodes_.push_back(dst);
  }
  std::sort(nodes_.begin(), nodes_.end());
  nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());

  auto index = [&](const std::string& id) {
    return static_cast<std::int32_t>(
        std::lower_bound(nodes_.begin(), nodes_.end(), id) - nodes_.begin());
  };
  edges_.reserve(merged.size());
  for (const auto& [key, w] : merged)
    edges_.push_back({index(key.first), index(key.second), w});
  // merged iterates in (src, dst) string order == (src, dst) index order

  const std::size_t n = nodes_.size();
  out_offset_.assign(n + 1, 0);
  for (const GraphEdge& e : edges_) ++out_offset_[static_cast<std::size_t>(e.src) + 1];
  for (std::size_t i = 0; i < n; ++i) out_offset_[i + 1] += out_offset_[i];

  in_sorted_ = edges_;
  std::sort(in_sorted_.begin(), in_sorted_.end(), [](const GraphEdge& a, const GraphEdge& b) {
    return std::tie(a.dst, a.src) < std::tie(b.dst, b.src);
  });
  in_offset_.assign(n + 1, 0);
  for (const GraphEdge& e : in_sorted_) ++in_offset_[static_cast<std::size_t>(e.dst) + 1];
  for (std::size_t i = 0; i < n; ++i) in_offset_[i + 1] += in_offset_[i];
}

std::optional<std::size_t> DiscourseGraph::index_of(const std::string& actor_id) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), actor_id);
  if (it == nodes_.end() || *it != actor_id) return std::nullopt;
  return static_cast<std::size_t>(it - nodes_.begin());
}

std::span<const GraphEdge> DiscourseGraph::out_edges(std::size_t node) const {
  return {edges_.data() + out_offset_[node], out_offset_[node + 1] - out_offset_[node]};
}

std::span<const GraphEdge> DiscourseGraph::in_edges(std::size_t node) const {
  return {in_sorted_.data() + in_offset_[node], in_offset_[node + 1] - in_offset_[node]};
}

std::int64_t DiscourseGraph::out_strength(std::size_t node) const {
  std::int64_t s = 0;
  for (const GraphEdge& e : out_edges(node)) s += e.weight;
  return s;
}

std::int64_t DiscourseGraph::in_strength(std::size_t node) const {
  std::int64_t s = 0;
  for (const GraphEdge& e : in_edges(node)) s += e.weight;
  return s;
}

std::int64_t DiscourseGraph::total_weight() const {
  std::int64_t s = 0;
  for (const GraphEdge& e : edges_) s += e.weight;
  return s;
}

namespace {

std::int64_t kind_weight(const BuildOptions& options, InteractionKind kind) {
  switch (kind) {
    case InteractionKind::retweet: return options.retweet_weight;
    case InteractionKind::mention: return options.mention_weight;
    case InteractionKind::reply: return options.reply_weight;
  }
  return 1;
}

bool has_topic(const Event& e, const std::string& topic) {
  return std::find(e.topics.begin(), e.topics.end(), topic) != e.topics.end();
}

}  // namespace

DiscourseGraph build_network(const std::vector<Event>& events, const std::string& topic,
                             TimeWindow window, GraphKind kind, const BuildOptions& options) {
  if (window.empty()) throw std::invalid_argument("build_network: empty window");
  bool topic_known = false;
  for (const Event& e : events)
    if (has_topic(e, topic)) {
      topic_known = true;
      break;
    }
  if (!topic_known) throw std::invalid_argument("build_network: unknown topic \"" + topic + "\"");

  std::vector<std::tuple<std::string, std::string, std::int64_t>> weighted;
  for (const Event& e : events) {
    if (!window.contains(e.ts)) continue;
    const bool on_topic = has_topic(e, topic);
    if (kind == GraphKind::topic) {
      if (!on_topic) continue;
    } else {
      if (on_topic) continue;
      if (options.null_unlabeled_only && !e.topics.empty()) continue;
    }
    weighted.emplace_back(e.source, e.target, kind_weight(options, e.kind));
  }
  return DiscourseGraph(std::move(weighted), kind, topic, window);
}

SnapshotSeries snapshot_series(const std::vector<Event>& events, const std::string& topic,
                               TimeWindow range, int window_len_days,
                               const BuildOptions& options) {
  if (window_len_days < 1) throw std::invalid_argument("snapshot_series: window length < 1 day");
  const std::int64_t step = static_cast<std::int64_t>(window_len_days) * kSecondsPerDay;
  const std::int64_t count = range.length() / step;
  if (count < 1)
    throw std::invalid_argument("snapshot_series: study range shorter than one window");

  SnapshotSeries series;
  series.topic = topic;
  series.window_seconds = step;
  for (std::int64_t w = 0; w < count; ++w) {
    TimeWindow window{range.start + w * step, range.start + (w + 1) * step};
    series.snapshots.push_back({window,
                                build_network(events, topic, window, GraphKind::topic, options),
                                build_network(events, topic, window, GraphKind::null, options)});
  }
  return series;
}

DiscourseGraph giant_component(const DiscourseGraph& graph) {
  const std::size_t n = graph.size();
  if (n == 0) throw std::invalid_argument("giant_component: empty graph");

  // Union-find over node indices; edges connect regardless of direction.
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const GraphEdge& e : graph.edges()) {
    std::size_t a = find(static_cast<std::size_t>(e.src));
    std::size_t b = find(static_cast<std::size_t>(e.dst));
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }

  std::map<std::size_t, std::size_t> component_size;
  for (std::size_t i = 0; i < n; ++i) ++component_size[find(i)];
  // Roots are the smallest index of their component, and node ids are sorted,
  // so iterating roots in index order visits smallest ids first; keeping a
  // strictly-larger winner implements the lexicographic tie rule.
  std::size_t best_root = find(0);
  for (const auto& [root, size] : component_size)
    if (size > component_size[best_root]) best_root = root;

  std::vector<std::tuple<std::string, std::string, std::int64_t>> kept;
  for (const GraphEdge& e : graph.edges())
    if (find(static_cast<std::size_t>(e.src)) == best_root)
      kept.emplace_back(graph.node(static_cast<std::size_t>(e.src)),
                        graph.node(static_cast<std::size_t>(e.dst)), e.weight);
  return DiscourseGraph(std::move(kept), graph.kind(), graph.topic(), graph.window());
}

}  // namespace nodality
