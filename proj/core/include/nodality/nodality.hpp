#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nodality/centrality.hpp"

namespace nodality {

/// Principal components of a z-scored metric matrix. Column c of `loadings`
/// is the (c+1)-th component's loading vector; `coordinates` holds each
/// actor's projection onto every component.
///
/// Sign convention: the first component is flipped so its loadings sum
/// positive, the second so the mean of its topic-side loadings is positive.
/// This pins "high PC1" to high overall centrality and "high PC2" to
/// topic-side centrality.
struct PcaResult {
  std::vector<std::string> actors;
  std::vector<std::string> column_labels;
  std::size_t topic_columns = 0;  // m: columns 0..m-1 are the topic side
  Eigen::VectorXd means;
  Eigen::VectorXd stdevs;       // sample standard deviation, n-1 divisor
  Eigen::VectorXd eigenvalues;  // non-increasing
  Eigen::MatrixXd loadings;     // 2m x 2m, orthonormal columns
  Eigen::MatrixXd coordinates;  // n x 2m
};

/// PCA via eigendecomposition of the correlation matrix (covariance of the
/// z-scored columns). Throws when n < 3 or when a column has zero variance
/// (the error names the column).
PcaResult pca(const NodalityMatrix& matrix);
PcaResult pca(const Eigen::MatrixXd& values, std::vector<std::string> actors,
              std::size_t topic_columns, std::vector<std::string> column_labels = {});

/// Sign-pattern check that certifies PC1 as inherent and PC2 as active
/// nodality: every e1 loading shares one sign, and e2's topic-side loadings
/// all oppose its null-side loadings. Any loading with magnitude below eps
/// has an ambiguous sign and fails the check. Invariant under global sign
/// flips of either vector.
bool eigenvector_test(const Eigen::VectorXd& e1, const Eigen::VectorXd& e2,
                      std::size_t metric_count, double eps = 0.01);
bool eigenvector_test(const PcaResult& result, double eps = 0.01);

struct NodalityScore {
  double inherent = 0.0;  // PC1 coordinate
  double active = 0.0;    // PC2 coordinate
};

using NodalityScores = std::map<std::string, NodalityScore>;

NodalityScores scores(const PcaResult& result);

enum class Tier { leader, funneler, receiver };

std::string to_string(Tier tier);

struct ClusterOptions {
  std::uint64_t seed = 42;
  int restarts = 100;
  int max_iterations = 300;
};

struct TierAssignment {
  std::map<std::string, Tier> tier_of;
  /// Centroids in (PC1, PC2), ordered leader, funneler, receiver, which is
  /// descending centroid PC1.
  std::array<std::array<double, 2>, 3> centroids{};
  double wcss = 0.0;
};

/// k-means (k = 3) on the (PC1, PC2) coordinates: k-means++ seeding, best of
/// `restarts` runs by within-cluster sum of squares. Throws when fewer than
/// 3 distinct points exist.
TierAssignment cluster(const PcaResult& result, const ClusterOptions& options = {});

struct SearchOptions {
  std::size_t min_size = 3;
  double eps = 0.01;
  ClusterOptions cluster;
  std::size_t threads = 1;
};

struct SubsetOutcome {
  std::vector<MetricKind> metrics;  // sorted by serialized name
  std::vector<std::pair<std::string, bool>> topic_pass;
  bool passed_all = false;
  std::size_t leader_intersection = 0;  // meaningful when passed_all
};

struct CombinationReport {
  std::vector<SubsetOutcome> outcomes;  // by subset size, then metric names
  std::optional<std::vector<MetricKind>> selected;
};

/// Evaluates every metric subset of size >= min_size on every topic: PCA,
/// the eigenvector test, and for subsets passing on all topics the size of
/// the cross-topic intersection of leader tiers. Selects the subset
/// maximizing that intersection; ties prefer fewer metrics, then
/// lexicographically smaller metric names. No subset passing anywhere is
/// reported, not thrown. Matrices must share actor universe and metric set.
CombinationReport search_combinations(const std::map<std::string, NodalityMatrix>& per_topic,
                                      const SearchOptions& options = {});

}  // namespace nodality
