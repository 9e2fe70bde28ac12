#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nodality/graph.hpp"

namespace nodality {

enum class MetricKind {
  degree,
  betweenness,
  eigenvector,
  authority,
  hub,
  strength,
  funnel_bandwidth,
  amplification_bandwidth,
};

inline constexpr std::array<MetricKind, 8> kAllMetrics = {
    MetricKind::degree,       MetricKind::betweenness,
    MetricKind::eigenvector,  MetricKind::authority,
    MetricKind::hub,          MetricKind::strength,
    MetricKind::funnel_bandwidth, MetricKind::amplification_bandwidth,
};

std::string to_string(MetricKind kind);
std::optional<MetricKind> metric_from_string(const std::string& text);

using FollowerMap = std::map<std::string, std::int64_t>;

/// One metric evaluated on one graph.
struct MetricVector {
  MetricKind metric = MetricKind::degree;
  GraphKind graph_kind = GraphKind::topic;
  TimeWindow window;
  std::map<std::string, double> values;
};

/// Computes one per-node metric.
///
///   degree         (in-degree + out-degree, unweighted) / (n-1)
///   strength       weighted in-strength + out-strength
///   betweenness    directed shortest-path betweenness, edge distance 1/w,
///                  normalized by (n-1)(n-2); identically 0 for n < 3
///   eigenvector    dominant eigenvector of the adjacency, scores accumulate
///                  over out-edges: x_i proportional to sum_j w_ij x_j
///   authority/hub  mutually recursive scores on the weighted adjacency
///   funnel_bandwidth         f_i * in_strength(i) / mean in-strength
///   amplification_bandwidth  sum_j f_j * w_ij / mean out-strength
///
/// The three spectral metrics run on the adjacency perturbed by a uniform
/// 1e-6 on every entry, which makes the operator irreducible on graphs that
/// are not strongly connected; reported scores are for that operator.
///
/// Throws when the graph has fewer than 2 nodes, and for the two bandwidth
/// metrics when any node lacks a follower count.
MetricVector compute(const DiscourseGraph& graph, MetricKind kind,
                     const FollowerMap& followers = {});

/// Row-per-actor metric matrix over a topic/null graph pair: columns are
/// `kinds` on the topic graph followed by `kinds` on the null graph. Actors
/// absent from one graph score 0 in that side's columns. The row universe
/// defaults to the union of both node sets; pass `universe` to pin it (ids
/// must be sorted and cover both graphs).
struct NodalityMatrix {
  std::vector<std::string> actors;
  std::vector<MetricKind> kinds;
  std::string topic;
  TimeWindow window;
  Eigen::MatrixXd values;  // actors.size() x 2*kinds.size()
};

NodalityMatrix metric_matrix(const DiscourseGraph& topic_graph,
                             const DiscourseGraph& null_graph,
                             const std::vector<MetricKind>& kinds, const FollowerMap& followers,
                             const std::vector<std::string>* universe = nullptr,
                             std::size_t threads = 1);

}  // namespace nodality
