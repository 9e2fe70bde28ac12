#include "nodality/centrality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "nodality/parallel.hpp"

namespace nodality {

namespace {

constexpr double kPerturbation = 1e-6;
constexpr double kConvergence = 1e-10;
constexpr int kMaxIterations = 10000;
constexpr double kPathTolerance = 1e-12;
constexpr double kResidualTolerance = 1e-9;
// Below this size the spectral metrics use the direct decomposition. Power
// iteration cannot certify its own result on non-normal spectra: an iterate
// can sit in a pseudo-eigenspace with a tiny residual yet far from the true
// eigenvector, and every such graph in practice is a small degenerate one.
constexpr std::size_t kDenseCutoff = 64;

}  // namespace

std::string to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::degree: return "degree";
    case MetricKind::betweenness: return "betweenness";
    case MetricKind::eigenvector: return "eigenvector";
    case MetricKind::authority: return "authority";
    case MetricKind::hub: return "hub";
    case MetricKind::strength: return "strength";
    case MetricKind::funnel_bandwidth: return "funnel_bandwidth";
    case MetricKind::amplification_bandwidth: return "amplification_bandwidth";
  }
  throw std::invalid_argument("bad MetricKind");
}

std::optional<MetricKind> metric_from_string(const std::string& text) {
  for (MetricKind kind : kAllMetrics)
    if (to_string(kind) == text) return kind;
  return std::nullopt;
}

namespace {

std::vector<double> degree_centrality(const DiscourseGraph& g) {
  const std::size_t n = g.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = static_cast<double>(g.in_degree(i) + g.out_degree(i)) /
             static_cast<double>(n - 1);
  return out;
}

std::vector<double> strength_centrality(const DiscourseGraph& g) {
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    out[i] = static_cast<double>(g.in_strength(i) + g.out_strength(i));
  return out;
}

// Brandes' accumulation over shortest paths, with Dijkstra on distances
// 1/w. Path-length ties are resolved within kPathTolerance.
std::vector<double> betweenness_centrality(const DiscourseGraph& g) {
  const std::size_t n = g.size();
  std::vector<double> score(n, 0.0);
  if (n < 3) return score;

  std::vector<double> dist(n);
  std::vector<double> sigma(n);
  std::vector<double> delta(n);
  std::vector<std::vector<std::size_t>> preds(n);
  std::vector<std::size_t> order;
  order.reserve(n);

  using QueueItem = std::pair<double, std::size_t>;
  for (std::size_t s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    for (auto& p : preds) p.clear();
    order.clear();

    dist[s] = 0.0;
    sigma[s] = 1.0;
    std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>> queue;
    queue.push({0.0, s});
    std::vector<bool> settled(n, false);
    while (!queue.empty()) {
      auto [d, v] = queue.top();
      queue.pop();
      if (settled[v]) continue;
      settled[v] = true;
      order.push_back(v);
      for (const GraphEdge& e : g.out_edges(v)) {
        const std::size_t w = static_cast<std::size_t>(e.dst);
        const double cand = d + 1.0 / static_cast<double>(e.weight);
        if (cand < dist[w] - kPathTolerance) {
          dist[w] = cand;
          sigma[w] = sigma[v];
          preds[w].assign(1, v);
          queue.push({cand, w});
        } else if (std::abs(cand - dist[w]) <= kPathTolerance) {
          sigma[w] += sigma[v];
          preds[w].push_back(v);
        }
      }
    }

    for (std::size_t i = order.size(); i-- > 0;) {
      const std::size_t w = order[i];
      for (std::size_t v : preds[w])
        delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      if (w != s) score[w] += delta[w];
    }
  }

  const double norm = static_cast<double>(n - 1) * static_cast<double>(n - 2);
  for (double& v : score) v /= norm;
  return score;
}

// y = (W + eps*J + shift*I) x, where J is the all-ones matrix. A diagonal
// shift leaves every eigenvector alone but pulls the Perron root strictly
// ahead of the other eigenvalue moduli, so the power iteration cannot get
// stuck oscillating on periodic graphs (a plain 2-cycle has eigenvalues
// +/-sqrt(w1*w2), tied in modulus until the shift separates them).
void apply_perturbed(const DiscourseGraph& g, const std::vector<double>& x,
                     std::vector<double>& y, bool transpose, double shift = 0.0) {
  double total = 0.0;
  for (double v : x) total += v;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = kPerturbation * total + shift * x[i];
  for (const GraphEdge& e : g.edges()) {
    const auto i = static_cast<std::size_t>(e.src);
    const auto j = static_cast<std::size_t>(e.dst);
    if (transpose)
      y[j] += static_cast<double>(e.weight) * x[i];
    else
      y[i] += static_cast<double>(e.weight) * x[j];
  }
}

Eigen::MatrixXd perturbed_adjacency(const DiscourseGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd w = Eigen::MatrixXd::Constant(n, n, kPerturbation);
  for (const GraphEdge& e : g.edges())
    w(static_cast<Eigen::Index>(e.src), static_cast<Eigen::Index>(e.dst)) +=
        static_cast<double>(e.weight);
  return w;
}

// Direct decomposition for graphs the iteration cannot settle inside the cap.
// The perturbed matrix is strictly positive, so the dominant eigenvector is
// the unique positive Perron vector either way; only the route differs.
std::vector<double> dominant_dense(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m);
  Eigen::Index best = 0;
  double best_mod = -1.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double mod = std::abs(solver.eigenvalues()(i));
    if (mod > best_mod) {
      best_mod = mod;
      best = i;
    }
  }
  Eigen::VectorXcd v = solver.eigenvectors().col(best);
  Eigen::Index anchor = 0;
  v.cwiseAbs().maxCoeff(&anchor);
  v /= v(anchor) / std::abs(v(anchor));
  Eigen::VectorXd real = v.real();
  if (real.sum() < 0) real = -real;
  real /= real.norm();
  return {real.data(), real.data() + real.size()};
}

std::vector<double> top_symmetric_dense(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  Eigen::VectorXd v = solver.eigenvectors().col(m.rows() - 1);
  if (v.sum() < 0) v = -v;
  v /= v.norm();
  return {v.data(), v.data() + v.size()};
}

void l2_normalize(std::vector<double>& x) {
  double norm = 0.0;
  for (double v : x) norm += v * v;
  norm = std::sqrt(norm);
  if (norm > 0.0)
    for (double& v : x) v /= norm;
}

double l2_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Relative eigen-residual ||y - (x.y) x|| / (x.y) for a unit iterate x and
// its image y. The step-change test alone can flatline far from the true
// eigenvector when the spectrum is nearly defective, so acceptance of the
// iterate rides on this instead.
double relative_residual(const std::vector<double>& x, const std::vector<double>& y) {
  double rho = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) rho += x[i] * y[i];
  double r = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    r += (y[i] - rho * x[i]) * (y[i] - rho * x[i]);
  return std::sqrt(r) / rho;
}

std::vector<double> eigenvector_centrality(const DiscourseGraph& g) {
  const std::size_t n = g.size();
  std::vector<double> x;
  if (n <= kDenseCutoff) {
    x = dominant_dense(perturbed_adjacency(g));
  } else {
    // Largest perturbed row sum, an upper bound on the spectral radius. The
    // diagonal shift leaves every eigenvector alone but pulls the Perron root
    // strictly ahead in modulus, so periodic graphs cannot stall the pass.
    double shift = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      shift = std::max(shift, static_cast<double>(g.out_strength(i)));
    shift += kPerturbation * static_cast<double>(n);
    x.assign(n, 1.0 / std::sqrt(static_cast<double>(n)));
    std::vector<double> next(n);
    for (int iter = 0; iter < kMaxIterations; ++iter) {
      apply_perturbed(g, x, next, /*transpose=*/false, shift);
      l2_normalize(next);
      const double change = l2_distance(x, next);
      x.swap(next);
      if (change < kConvergence) break;
    }
    apply_perturbed(g, x, next, /*transpose=*/false, shift);
    if (relative_residual(x, next) > kResidualTolerance)
      x = dominant_dense(perturbed_adjacency(g));
  }
  // Perron vector of a positive operator; flip if the route left it negative
  // (it cannot mix signs).
  double total = 0.0;
  for (double v : x) total += v;
  if (total < 0.0)
    for (double& v : x) v = -v;
  for (double& v : x) v = std::max(v, 0.0);
  return x;
}

// HITS. Authorities collect weight over in-edges, hubs over out-edges:
// a = W'^T h, h = W' a, both L2-normalized each round.
std::pair<std::vector<double>, std::vector<double>> hits_scores(const DiscourseGraph& g) {
  const std::size_t n = g.size();
  if (n <= kDenseCutoff) {
    const Eigen::MatrixXd w = perturbed_adjacency(g);
    auto auth = top_symmetric_dense(w.transpose() * w);
    auto hub = top_symmetric_dense(w * w.transpose());
    for (double& v : auth) v = std::max(v, 0.0);
    for (double& v : hub) v = std::max(v, 0.0);
    return {auth, hub};
  }
  std::vector<double> hub(n, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> auth(n), next_hub(n);
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    apply_perturbed(g, hub, auth, /*transpose=*/true);
    l2_normalize(auth);
    apply_perturbed(g, auth, next_hub, /*transpose=*/false);
    l2_normalize(next_hub);
    const double change = l2_distance(hub, next_hub);
    hub.swap(next_hub);
    if (change < kConvergence) break;
  }
  apply_perturbed(g, hub, auth, /*transpose=*/true);
  l2_normalize(auth);
  // Residual of the authority vector under W'^T W'; near-ties in the
  // symmetric spectrum leave the alternating pass stranded short of
  // tolerance, and there the direct route settles it.
  std::vector<double> image(n), back(n);
  apply_perturbed(g, auth, image, /*transpose=*/false);
  apply_perturbed(g, image, back, /*transpose=*/true);
  if (relative_residual(auth, back) > kResidualTolerance) {
    const Eigen::MatrixXd w = perturbed_adjacency(g);
    auth = top_symmetric_dense(w.transpose() * w);
    hub = top_symmetric_dense(w * w.transpose());
  }
  for (double& v : auth) v = std::max(v, 0.0);
  for (double& v : hub) v = std::max(v, 0.0);
  return {auth, hub};
}

std::vector<double> follower_values(const DiscourseGraph& g, const FollowerMap& followers) {
  std::vector<double> f(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto it = followers.find(g.node(i));
    if (it == followers.end())
      throw std::invalid_argument("centrality: no follower count for " + g.node(i));
    f[i] = static_cast<double>(it->second);
  }
  return f;
}

std::vector<double> funnel_bandwidth(const DiscourseGraph& g, const FollowerMap& followers) {
  const auto f = follower_values(g, followers);
  const double mean_in =
      static_cast<double>(g.total_weight()) / static_cast<double>(g.size());
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    out[i] = f[i] * static_cast<double>(g.in_strength(i)) / mean_in;
  return out;
}

std::vector<double> amplification_bandwidth(const DiscourseGraph& g,
                                            const FollowerMap& followers) {
  const auto f = follower_values(g, followers);
  const double mean_out =
      static_cast<double>(g.total_weight()) / static_cast<double>(g.size());
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    double s = 0.0;
    for (const GraphEdge& e : g.out_edges(i))
      s += f[static_cast<std::size_t>(e.dst)] * static_cast<double>(e.weight);
    out[i] = s / mean_out;
  }
  return out;
}

}  // namespace

MetricVector compute(const DiscourseGraph& graph, MetricKind kind,
                     const FollowerMap& followers) {
  if (graph.size() <= 1)
    throw std::invalid_argument("centrality: graph has fewer than 2 nodes");

  std::vector<double> values;
  switch (kind) {
    case MetricKind::degree: values = degree_centrality(graph); break;
    case MetricKind::betweenness: values = betweenness_centrality(graph); break;
    case MetricKind::eigenvector: values = eigenvector_centrality(graph); break;
    case MetricKind::authority: values = hits_scores(graph).first; break;
    case MetricKind::hub: values = hits_scores(graph).second; break;
    case MetricKind::strength: values = strength_centrality(graph); break;
    case MetricKind::funnel_bandwidth: values = funnel_bandwidth(graph, followers); break;
    case MetricKind::amplification_bandwidth:
      values = amplification_bandwidth(graph, followers);
      break;
  }

  MetricVector result;
  result.metric = kind;
  result.graph_kind = graph.kind();
  result.window = graph.window();
  for (std::size_t i = 0; i < graph.size(); ++i) result.values[graph.node(i)] = values[i];
  return result;
}

NodalityMatrix metric_matrix(const DiscourseGraph& topic_graph,
                             const DiscourseGraph& null_graph,
                             const std::vector<MetricKind>& kinds, const FollowerMap& followers,
                             const std::vector<std::string>* universe, std::size_t threads) {
  if (kinds.empty()) throw std::invalid_argument("metric_matrix: no metrics requested");

  NodalityMatrix matrix;
  matrix.kinds = kinds;
  matrix.topic = topic_graph.topic();
  matrix.window = topic_graph.window();
  if (universe) {
    matrix.actors = *universe;
    if (!std::is_sorted(matrix.actors.begin(), matrix.actors.end()))
      throw std::invalid_argument("metric_matrix: universe must be sorted");
    for (const auto* g : {&topic_graph, &null_graph})
      for (const std::string& id : g->nodes())
        if (!std::binary_search(matrix.actors.begin(), matrix.actors.end(), id))
          throw std::invalid_argument("metric_matrix: universe misses node " + id);
  } else {
    matrix.actors = topic_graph.nodes();
    matrix.actors.insert(matrix.actors.end(), null_graph.nodes().begin(),
                         null_graph.nodes().end());
    std::sort(matrix.actors.begin(), matrix.actors.end());
    matrix.actors.erase(std::unique(matrix.actors.begin(), matrix.actors.end()),
                        matrix.actors.end());
  }

  const std::size_t n = matrix.actors.size();
  const std::size_t m = kinds.size();
  matrix.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                        static_cast<Eigen::Index>(2 * m));

  // One task per (side, metric) column; isolated actors keep their zeros.
  parallel_for(2 * m, threads, [&](std::size_t task) {
    const bool topic_side = task < m;
    const DiscourseGraph& g = topic_side ? topic_graph : null_graph;
    if (g.size() <= 1) return;
    const MetricKind kind = kinds[task % m];
    const MetricVector v = compute(g, kind, followers);
    const auto col = static_cast<Eigen::Index>(task);
    for (const auto& [actor, value] : v.values) {
      auto it = std::lower_bound(matrix.actors.begin(), matrix.actors.end(), actor);
      matrix.values(static_cast<Eigen::Index>(it - matrix.actors.begin()), col) = value;
    }
  });
  return matrix;
}

}  // namespace nodality
