#include "nodality/nodality.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <iterator>
#include <set>
#include <stdexcept>

#include "nodality/parallel.hpp"
#include "nodality/rng.hpp"

namespace nodality {

PcaResult pca(const Eigen::MatrixXd& values, std::vector<std::string> actors,
              std::size_t topic_columns, std::vector<std::string> column_labels) {
  const Eigen::Index n = values.rows();
  const Eigen::Index p = values.cols();
  if (static_cast<std::size_t>(n) != actors.size())
    throw std::invalid_argument("pca: row count differs from actor count");
  if (n < 3) throw std::invalid_argument("pca: needs at least 3 rows");
  if (column_labels.empty())
    for (Eigen::Index j = 0; j < p; ++j)
      column_labels.push_back("column " + std::to_string(j));

  PcaResult result;
  result.actors = std::move(actors);
  result.column_labels = std::move(column_labels);
  result.topic_columns = topic_columns;
  result.means = values.colwise().mean();

  result.stdevs.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    if (values.col(j).maxCoeff() == values.col(j).minCoeff())
      throw std::invalid_argument("pca: column " + result.column_labels[j] +
                                  " has zero variance");
    const double ss = (values.col(j).array() - result.means(j)).square().sum();
    result.stdevs(j) = std::sqrt(ss / static_cast<double>(n - 1));
  }

  Eigen::MatrixXd z = values.rowwise() - result.means.transpose();
  z.array().rowwise() /= result.stdevs.transpose().array();

  const Eigen::MatrixXd corr = z.transpose() * z / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(corr);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("pca: eigendecomposition failed");

  // Eigen reports ascending eigenvalues; reverse to non-increasing.
  result.eigenvalues = solver.eigenvalues().reverse();
  result.loadings = solver.eigenvectors().rowwise().reverse();

  if (result.loadings.col(0).sum() < 0.0) result.loadings.col(0) *= -1.0;
  if (p >= 2 && topic_columns > 0) {
    const double topic_mean =
        result.loadings.col(1).head(static_cast<Eigen::Index>(topic_columns)).mean();
    if (topic_mean < 0.0) result.loadings.col(1) *= -1.0;
  }

  result.coordinates = z * result.loadings;
  return result;
}

PcaResult pca(const NodalityMatrix& matrix) {
  std::vector<std::string> labels;
  for (const char* side : {"topic", "null"})
    for (MetricKind kind : matrix.kinds)
      labels.push_back(std::string(side) + ":" + to_string(kind));
  return pca(matrix.values, matrix.actors, matrix.kinds.size(), std::move(labels));
}

namespace {

// 0 when |v| < eps, else the sign.
int strict_sign(double v, double eps) {
  if (std::abs(v) < eps) return 0;
  return v > 0.0 ? 1 : -1;
}

bool uniform_sign(const Eigen::VectorXd& v, Eigen::Index begin, Eigen::Index end, double eps,
                  int& sign_out) {
  int sign = 0;
  for (Eigen::Index i = begin; i < end; ++i) {
    const int s = strict_sign(v(i), eps);
    if (s == 0) return false;
    if (sign == 0) sign = s;
    if (s != sign) return false;
  }
  sign_out = sign;
  return true;
}

}  // namespace

bool eigenvector_test(const Eigen::VectorXd& e1, const Eigen::VectorXd& e2,
                      std::size_t metric_count, double eps) {
  const auto m = static_cast<Eigen::Index>(metric_count);
  if (e1.size() != 2 * m || e2.size() != 2 * m)
    throw std::invalid_argument("eigenvector_test: vectors must have 2m entries");
  int s1 = 0;
  if (!uniform_sign(e1, 0, 2 * m, eps, s1)) return false;
  int topic_sign = 0, null_sign = 0;
  if (!uniform_sign(e2, 0, m, eps, topic_sign)) return false;
  if (!uniform_sign(e2, m, 2 * m, eps, null_sign)) return false;
  return topic_sign == -null_sign;
}

bool eigenvector_test(const PcaResult& result, double eps) {
  if (result.loadings.cols() < 2)
    throw std::invalid_argument("eigenvector_test: needs at least 2 components");
  return eigenvector_test(result.loadings.col(0), result.loadings.col(1),
                          result.topic_columns, eps);
}

NodalityScores scores(const PcaResult& result) {
  NodalityScores out;
  for (std::size_t i = 0; i < result.actors.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    out[result.actors[i]] = {result.coordinates(row, 0),
                             result.coordinates.cols() > 1 ? result.coordinates(row, 1) : 0.0};
  }
  return out;
}

std::string to_string(Tier tier) {
  switch (tier) {
    case Tier::leader: return "leader";
    case Tier::funneler: return "funneler";
    case Tier::receiver: return "receiver";
  }
  throw std::invalid_argument("bad Tier");
}

namespace {

struct Point {
  double x, y;
};

double sq_dist(const Point& a, const Point& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

struct KmeansRun {
  std::array<Point, 3> centroids;
  std::vector<int> assignment;
  double wcss = 0.0;
};

std::array<Point, 3> seed_plus_plus(const std::vector<Point>& points, Rng& rng) {
  std::array<Point, 3> centroids;
  centroids[0] = points[rng.uniform_index(points.size())];
  std::vector<double> d2(points.size());
  for (int c = 1; c < 3; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      double best = sq_dist(points[i], centroids[0]);
      for (int j = 1; j < c; ++j) best = std::min(best, sq_dist(points[i], centroids[j]));
      d2[i] = best;
      total += best;
    }
    if (total <= 0.0) {
      centroids[c] = points[rng.uniform_index(points.size())];
      continue;
    }
    double target = rng.next_double() * total;
    std::size_t pick = points.size() - 1;
    for (std::size_t i = 0; i < points.size(); ++i) {
      target -= d2[i];
      if (target <= 0.0) {
        pick = i;
        break;
      }
    }
    centroids[c] = points[pick];
  }
  return centroids;
}

KmeansRun lloyd(const std::vector<Point>& points, std::array<Point, 3> centroids,
                int max_iterations) {
  KmeansRun run;
  run.centroids = centroids;
  run.assignment.assign(points.size(), -1);

  for (int iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      int best = 0;
      double best_d = sq_dist(points[i], run.centroids[0]);
      for (int c = 1; c < 3; ++c) {
        const double d = sq_dist(points[i], run.centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (run.assignment[i] != best) {
        run.assignment[i] = best;
        changed = true;
      }
    }

    std::array<Point, 3> sums{};
    std::array<std::size_t, 3> counts{};
    for (std::size_t i = 0; i < points.size(); ++i) {
      sums[run.assignment[i]].x += points[i].x;
      sums[run.assignment[i]].y += points[i].y;
      ++counts[run.assignment[i]];
    }
    for (int c = 0; c < 3; ++c) {
      if (counts[c] == 0) {
        // Re-seed an emptied cluster at the point farthest from its current
        // centroid; deterministic, lowest index on ties.
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
          const double d = sq_dist(points[i], run.centroids[run.assignment[i]]);
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        run.centroids[c] = points[far];
        changed = true;
        continue;
      }
      run.centroids[c] = {sums[c].x / static_cast<double>(counts[c]),
                          sums[c].y / static_cast<double>(counts[c])};
    }
    if (!changed) break;
  }

  run.wcss = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    run.wcss += sq_dist(points[i], run.centroids[run.assignment[i]]);
  return run;
}

}  // namespace

TierAssignment cluster(const PcaResult& result, const ClusterOptions& options) {
  std::vector<Point> points;
  points.reserve(result.actors.size());
  for (Eigen::Index i = 0; i < result.coordinates.rows(); ++i)
    points.push_back({result.coordinates(i, 0),
                      result.coordinates.cols() > 1 ? result.coordinates(i, 1) : 0.0});

  std::set<std::pair<double, double>> distinct;
  for (const Point& p : points) distinct.insert({p.x, p.y});
  if (distinct.size() < 3)
    throw std::invalid_argument("cluster: fewer than 3 distinct points");

  Rng base(options.seed);
  KmeansRun best;
  bool have_best = false;
  for (int r = 0; r < std::max(1, options.restarts); ++r) {
    Rng rng = base.fork(static_cast<std::uint64_t>(r));
    KmeansRun run = lloyd(points, seed_plus_plus(points, rng), options.max_iterations);
    if (!have_best || run.wcss < best.wcss) {
      best = run;
      have_best = true;
    }
  }

  // Rank clusters by centroid PC1, descending: leader, funneler, receiver.
  std::array<int, 3> order = {0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return best.centroids[a].x > best.centroids[b].x;
  });
  std::array<Tier, 3> tier_of_cluster{};
  const Tier tiers[3] = {Tier::leader, Tier::funneler, Tier::receiver};
  for (int rank = 0; rank < 3; ++rank) tier_of_cluster[order[rank]] = tiers[rank];

  TierAssignment assignment;
  for (int rank = 0; rank < 3; ++rank)
    assignment.centroids[rank] = {best.centroids[order[rank]].x, best.centroids[order[rank]].y};
  for (std::size_t i = 0; i < result.actors.size(); ++i)
    assignment.tier_of[result.actors[i]] = tier_of_cluster[best.assignment[i]];
  assignment.wcss = best.wcss;
  return assignment;
}

namespace {

std::vector<std::vector<MetricKind>> enumerate_subsets(const std::vector<MetricKind>& kinds,
                                                       std::size_t min_size) {
  std::vector<std::vector<MetricKind>> subsets;
  const std::size_t m = kinds.size();
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) < min_size) continue;
    std::vector<MetricKind> subset;
    for (std::size_t j = 0; j < m; ++j)
      if (mask & (1u << j)) subset.push_back(kinds[j]);
    std::sort(subset.begin(), subset.end(), [](MetricKind a, MetricKind b) {
      return to_string(a) < to_string(b);
    });
    subsets.push_back(std::move(subset));
  }
  std::sort(subsets.begin(), subsets.end(),
            [](const std::vector<MetricKind>& a, const std::vector<MetricKind>& b) {
              if (a.size() != b.size()) return a.size() < b.size();
              for (std::size_t i = 0; i < a.size(); ++i) {
                const std::string an = to_string(a[i]), bn = to_string(b[i]);
                if (an != bn) return an < bn;
              }
              return false;
            });
  return subsets;
}

Eigen::MatrixXd subset_columns(const NodalityMatrix& matrix,
                               const std::vector<MetricKind>& subset) {
  const std::size_t m = matrix.kinds.size();
  std::vector<std::size_t> positions;
  for (MetricKind kind : subset) {
    auto it = std::find(matrix.kinds.begin(), matrix.kinds.end(), kind);
    if (it == matrix.kinds.end())
      throw std::invalid_argument("search: matrix lacks metric " + to_string(kind));
    positions.push_back(static_cast<std::size_t>(it - matrix.kinds.begin()));
  }
  Eigen::MatrixXd out(matrix.values.rows(), static_cast<Eigen::Index>(2 * subset.size()));
  for (std::size_t j = 0; j < positions.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) =
        matrix.values.col(static_cast<Eigen::Index>(positions[j]));
    out.col(static_cast<Eigen::Index>(subset.size() + j)) =
        matrix.values.col(static_cast<Eigen::Index>(m + positions[j]));
  }
  return out;
}

std::vector<std::string> subset_labels(const std::vector<MetricKind>& subset) {
  std::vector<std::string> labels;
  for (const char* side : {"topic", "null"})
    for (MetricKind kind : subset)
      labels.push_back(std::string(side) + ":" + to_string(kind));
  return labels;
}

}  // namespace

CombinationReport search_combinations(const std::map<std::string, NodalityMatrix>& per_topic,
                                      const SearchOptions& options) {
  if (per_topic.size() < 2)
    throw std::invalid_argument("search_combinations: needs at least 2 topics");
  const NodalityMatrix& first = per_topic.begin()->second;
  for (const auto& [topic, matrix] : per_topic) {
    if (matrix.actors != first.actors)
      throw std::invalid_argument("search_combinations: matrices for \"" + topic +
                                  "\" and \"" + per_topic.begin()->first +
                                  "\" cover different actors");
    if (matrix.kinds != first.kinds)
      throw std::invalid_argument("search_combinations: metric sets differ across topics");
  }
  if (options.min_size < 1 || options.min_size > first.kinds.size())
    throw std::invalid_argument("search_combinations: bad min_size");

  const auto subsets = enumerate_subsets(first.kinds, options.min_size);

  CombinationReport report;
  report.outcomes.resize(subsets.size());
  parallel_for(subsets.size(), options.threads, [&](std::size_t s) {
    SubsetOutcome& outcome = report.outcomes[s];
    outcome.metrics = subsets[s];
    outcome.passed_all = true;

    std::vector<std::set<std::string>> leader_sets;
    for (const auto& [topic, matrix] : per_topic) {
      bool pass = false;
      try {
        const PcaResult pc = pca(subset_columns(matrix, subsets[s]), matrix.actors,
                                 subsets[s].size(), subset_labels(subsets[s]));
        pass = eigenvector_test(pc, options.eps);
        if (pass && outcome.passed_all) {
          TierAssignment tiers = cluster(pc, options.cluster);
          std::set<std::string> leaders;
          for (const auto& [actor, tier] : tiers.tier_of)
            if (tier == Tier::leader) leaders.insert(actor);
          leader_sets.push_back(std::move(leaders));
        }
      } catch (const std::invalid_argument&) {
        pass = false;  // degenerate columns cannot certify the components
      }
      outcome.topic_pass.emplace_back(topic, pass);
      if (!pass) outcome.passed_all = false;
    }

    if (outcome.passed_all && !leader_sets.empty()) {
      std::set<std::string> inter = leader_sets[0];
      for (std::size_t i = 1; i < leader_sets.size(); ++i) {
        std::set<std::string> next;
        std::set_intersection(inter.begin(), inter.end(), leader_sets[i].begin(),
                              leader_sets[i].end(), std::inserter(next, next.begin()));
        inter = std::move(next);
      }
      outcome.leader_intersection = inter.size();
    }
  });

  const SubsetOutcome* best = nullptr;
  for (const SubsetOutcome& outcome : report.outcomes) {
    if (!outcome.passed_all) continue;
    if (!best || outcome.leader_intersection > best->leader_intersection) best = &outcome;
    // outcomes are ordered by (size, names), so on intersection ties the
    // earlier entry already wins both tie-break rules
  }
  if (best) report.selected = best->metrics;
  return report;
}

}  // namespace nodality
