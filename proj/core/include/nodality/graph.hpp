#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nodality/ingest.hpp"
#include "nodality/timeutil.hpp"

namespace nodality {

/// topic = interactions labeled with the topic under study;
/// null = everything else in the same window (the contrast network).
enum class GraphKind { topic, null };

std::string to_string(GraphKind kind);

struct GraphEdge {
  std::int32_t src = 0;  // author of the content
  std::int32_t dst = 0;  // the interactor
  std::int64_t weight = 0;

  bool operator==(const GraphEdge&) const = default;
};

/// Immutable weighted directed interaction graph. Nodes are the actors that
/// appear on at least one retained event; edge src->dst counts how often dst
/// interacted with src's content. No self-loops, weights >= 1.
class DiscourseGraph {
 public:
  DiscourseGraph() = default;

  /// Builds from (source id, target id, weight) triples; parallel edges are
  /// summed. Throws on self-loops and nonpositive weights.
  DiscourseGraph(std::vector<std::tuple<std::string, std::string, std::int64_t>> weighted_edges,
                 GraphKind kind, std::string topic, TimeWindow window);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::string& node(std::size_t index) const { return nodes_[index]; }
  std::optional<std::size_t> index_of(const std::string& actor_id) const;

  const std::vector<GraphEdge>& edges() const { return edges_; }
  std::span<const GraphEdge> out_edges(std::size_t node) const;
  std::span<const GraphEdge> in_edges(std::size_t node) const;  // sorted by dst

  std::int64_t out_strength(std::size_t node) const;
  std::int64_t in_strength(std::size_t node) const;
  std::size_t out_degree(std::size_t node) const { return out_edges(node).size(); }
  std::size_t in_degree(std::size_t node) const { return in_edges(node).size(); }
  std::int64_t total_weight() const;

  GraphKind kind() const { return kind_; }
  const std::string& topic() const { return topic_; }
  const TimeWindow& window() const { return window_; }

  bool operator==(const DiscourseGraph& other) const {
    return nodes_ == other.nodes_ && edges_ == other.edges_ && kind_ == other.kind_ &&
           topic_ == other.topic_ && window_ == other.window_;
  }

 private:
  std::vector<std::string> nodes_;      // sorted actor ids
  std::vector<GraphEdge> edges_;        // sorted by (src, dst)
  std::vector<std::size_t> out_offset_;  // CSR over edges_, size n+1
  std::vector<GraphEdge> in_sorted_;    // edges_ resorted by (dst, src)
  std::vector<std::size_t> in_offset_;
  GraphKind kind_ = GraphKind::topic;
  std::string topic_;
  TimeWindow window_;
};

struct BuildOptions {
  /// Contribution of one event to its edge weight, by interaction kind.
  std::int64_t retweet_weight = 1;
  std::int64_t mention_weight = 1;
  std::int64_t reply_weight = 1;
  /// When true the null network keeps only unlabeled events, dropping events
  /// labeled with other topics instead of treating them as complement.
  bool null_unlabeled_only = false;
};

/// Builds the topic or null network for one window. The topic must occur in
/// at least one of the supplied events (any window), otherwise it is
/// presumed to be a typo and rejected. Multi-labeled events count toward
/// every topic network they carry and toward no null network of those
/// topics.
DiscourseGraph build_network(const std::vector<Event>& events, const std::string& topic,
                             TimeWindow window, GraphKind kind,
                             const BuildOptions& options = {});

struct Snapshot {
  TimeWindow window;
  DiscourseGraph topic_graph;
  DiscourseGraph null_graph;
};

struct SnapshotSeries {
  std::string topic;
  std::int64_t window_seconds = 0;
  std::vector<Snapshot> snapshots;  // contiguous, equal length, in order
};

/// Tiles `range` into floor(len/window) windows from the start, dropping any
/// partial trailing window, and builds the topic/null pair for each. Throws
/// when the range is shorter than one window.
SnapshotSeries snapshot_series(const std::vector<Event>& events, const std::string& topic,
                               TimeWindow range, int window_len_days,
                               const BuildOptions& options = {});

/// Subgraph induced by the largest weakly connected component; equal-sized
/// components tie-break toward the one containing the smallest node id.
DiscourseGraph giant_component(const DiscourseGraph& graph);

}  // namespace nodality
