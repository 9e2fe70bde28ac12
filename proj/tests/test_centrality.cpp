#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "nodality/centrality.hpp"
#include "nodality/graph.hpp"
#include "oracles.hpp"

using namespace nodality;

namespace {

using Triple = std::tuple<std::string, std::string, std::int64_t>;

DiscourseGraph make_graph(std::vector<Triple> edges, GraphKind kind = GraphKind::topic) {
  return DiscourseGraph(std::move(edges), kind, "T", {0, kSecondsPerDay});
}

FollowerMap followers_for(const DiscourseGraph& g, std::int64_t base = 50) {
  FollowerMap f;
  std::int64_t i = 0;
  for (const auto& id : g.nodes()) f[id] = base + 13 * i++;
  return f;
}

DiscourseGraph random_graph(std::mt19937_64& rng, std::size_t n) {
  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::vector<Triple> edges;
  std::size_t wanted = n + rng() % (n + 1);
  while (edges.size() < wanted) {
    std::size_t s = rng() % n, t = rng() % n;
    if (s == t || !seen.insert({s, t}).second) continue;
    edges.emplace_back("n" + std::to_string(s), "n" + std::to_string(t),
                       static_cast<std::int64_t>(1 + rng() % 10));
  }
  return make_graph(std::move(edges));
}

double value_of(const MetricVector& v, const std::string& id) { return v.values.at(id); }

}  // namespace

TEST_CASE("bandwidth metrics on the one-edge graph") {
  DiscourseGraph g = make_graph({{"A", "B", 2}});
  FollowerMap f = {{"A", 100}, {"B", 10}};
  MetricVector nu = compute(g, MetricKind::funnel_bandwidth, f);
  CHECK(value_of(nu, "B") == 20.0);
  CHECK(value_of(nu, "A") == 0.0);
  MetricVector mu = compute(g, MetricKind::amplification_bandwidth, f);
  CHECK(value_of(mu, "A") == 20.0);
  CHECK(value_of(mu, "B") == 0.0);
}

TEST_CASE("funnel bandwidth is linear in the follower count") {
  DiscourseGraph g = make_graph({{"A", "B", 3}, {"C", "B", 1}, {"B", "A", 2}});
  FollowerMap f = followers_for(g);
  MetricVector base = compute(g, MetricKind::funnel_bandwidth, f);
  for (std::int64_t scale : {2, 7, 100}) {
    FollowerMap scaled = f;
    scaled["B"] *= scale;
    MetricVector bumped = compute(g, MetricKind::funnel_bandwidth, scaled);
    CHECK(value_of(bumped, "B") ==
          doctest::Approx(static_cast<double>(scale) * value_of(base, "B")).epsilon(1e-12));
    CHECK(value_of(bumped, "A") == value_of(base, "A"));
    CHECK(value_of(bumped, "C") == value_of(base, "C"));
  }
}

TEST_CASE("amplification bandwidth sums per-edge contributions") {
  DiscourseGraph g = make_graph({{"A", "B", 3}, {"A", "C", 2}, {"B", "C", 1}});
  FollowerMap f = {{"A", 7}, {"B", 40}, {"C", 90}};
  double mean_out = static_cast<double>(g.total_weight()) / static_cast<double>(g.size());
  MetricVector mu = compute(g, MetricKind::amplification_bandwidth, f);
  CHECK(value_of(mu, "A") == doctest::Approx((40.0 * 3 + 90.0 * 2) / mean_out).epsilon(1e-12));
  CHECK(value_of(mu, "B") == doctest::Approx(90.0 * 1 / mean_out).epsilon(1e-12));
  CHECK(value_of(mu, "C") == 0.0);
}

TEST_CASE("degree and strength follow their definitions") {
  DiscourseGraph g = make_graph({{"A", "B", 5}, {"A", "C", 1}, {"C", "A", 2}});
  MetricVector deg = compute(g, MetricKind::degree, {});
  CHECK(value_of(deg, "A") == doctest::Approx(3.0 / 2.0));
  CHECK(value_of(deg, "B") == doctest::Approx(1.0 / 2.0));
  CHECK(value_of(deg, "C") == doctest::Approx(2.0 / 2.0));
  MetricVector str = compute(g, MetricKind::strength, {});
  CHECK(value_of(str, "A") == 8.0);
  CHECK(value_of(str, "B") == 5.0);
  CHECK(value_of(str, "C") == 3.0);
  for (std::size_t i = 0; i < g.size(); ++i)
    CHECK(str.values.at(g.node(i)) ==
          static_cast<double>(g.in_strength(i) + g.out_strength(i)));
}

TEST_CASE("betweenness counts interior shortest-path positions") {
  // single chain: B sits on the one A-to-C path
  DiscourseGraph chain = make_graph({{"A", "B", 1}, {"B", "C", 1}});
  MetricVector b = compute(chain, MetricKind::betweenness, {});
  CHECK(value_of(b, "B") == doctest::Approx(0.5));
  CHECK(value_of(b, "A") == 0.0);
  CHECK(value_of(b, "C") == 0.0);
}

TEST_CASE("heavier edges are shorter") {
  // the two-hop route (1/10 + 1/10) beats the direct edge (1/1)
  DiscourseGraph g = make_graph({{"A", "B", 10}, {"B", "C", 10}, {"A", "C", 1}});
  MetricVector b = compute(g, MetricKind::betweenness, {});
  CHECK(value_of(b, "B") == doctest::Approx(0.5));
}

TEST_CASE("tied path lengths split the credit") {
  // A->B->C at 1/2 + 1/2 exactly ties the direct A->C at 1/1
  DiscourseGraph g = make_graph({{"A", "B", 2}, {"B", "C", 2}, {"A", "C", 1}});
  MetricVector b = compute(g, MetricKind::betweenness, {});
  CHECK(value_of(b, "B") == doctest::Approx(0.25));
}

TEST_CASE("two-node graphs have zero betweenness") {
  DiscourseGraph g = make_graph({{"A", "B", 1}, {"B", "A", 4}});
  MetricVector b = compute(g, MetricKind::betweenness, {});
  CHECK(value_of(b, "A") == 0.0);
  CHECK(value_of(b, "B") == 0.0);
}

TEST_CASE("symmetric two-cycle gives symmetric spectral scores") {
  DiscourseGraph g = make_graph({{"A", "B", 3}, {"B", "A", 3}});
  MetricVector auth = compute(g, MetricKind::authority, {});
  CHECK(value_of(auth, "A") == doctest::Approx(value_of(auth, "B")).epsilon(1e-9));
  MetricVector hub = compute(g, MetricKind::hub, {});
  CHECK(value_of(hub, "A") == doctest::Approx(value_of(hub, "B")).epsilon(1e-9));
  MetricVector eig = compute(g, MetricKind::eigenvector, {});
  CHECK(value_of(eig, "A") == doctest::Approx(value_of(eig, "B")).epsilon(1e-9));
  CHECK(value_of(eig, "A") == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("compute rejects degenerate inputs") {
  CHECK_THROWS_AS(compute(DiscourseGraph(), MetricKind::degree, {}), std::invalid_argument);
  DiscourseGraph g = make_graph({{"A", "B", 2}});
  CHECK_THROWS_AS(compute(g, MetricKind::funnel_bandwidth, {{"A", 5}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(compute(g, MetricKind::amplification_bandwidth, {}),
                  std::invalid_argument);
}

TEST_CASE("metric names round-trip") {
  for (MetricKind kind : kAllMetrics) {
    auto back = metric_from_string(to_string(kind));
    REQUIRE(back.has_value());
    CHECK(*back == kind);
  }
  CHECK(!metric_from_string("pagerank").has_value());
}

TEST_CASE("all metrics agree with the slow reference on random graphs") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    DiscourseGraph g = random_graph(rng, 4 + trial % 3);
    FollowerMap f = followers_for(g);
    for (MetricKind kind : kAllMetrics) {
      MetricVector got = compute(g, kind, f);
      std::map<std::string, double> want = oracles::metric(g, kind, f);
      double tol = (kind == MetricKind::eigenvector || kind == MetricKind::authority ||
                    kind == MetricKind::hub)
                       ? 1e-6
                       : 1e-9;
      for (const auto& [id, value] : want) {
        INFO(to_string(kind) << " at " << id << " trial " << trial);
        CHECK(std::abs(got.values.at(id) - value) <= tol);
      }
    }
  }
}

TEST_CASE("metrics are invariant under node relabeling") {
  std::mt19937_64 rng(7);
  DiscourseGraph g = random_graph(rng, 6);
  // reversed letters so the internal sorted order really changes
  std::map<std::string, std::string> rename;
  for (const auto& id : g.nodes())
    rename[id] = std::string(1, static_cast<char>('a' + g.size() - 1 - rename.size()));
  std::vector<Triple> renamed;
  for (const auto& e : g.edges())
    renamed.emplace_back(rename[g.node(e.src)], rename[g.node(e.dst)], e.weight);
  DiscourseGraph h = make_graph(std::move(renamed));

  FollowerMap fg = followers_for(g);
  FollowerMap fh;
  for (const auto& [id, count] : fg) fh[rename[id]] = count;

  for (MetricKind kind : kAllMetrics) {
    MetricVector vg = compute(g, kind, fg);
    MetricVector vh = compute(h, kind, fh);
    double tol = (kind == MetricKind::eigenvector || kind == MetricKind::authority ||
                  kind == MetricKind::hub)
                     ? 1e-6
                     : 1e-9;
    for (const auto& [id, value] : vg.values) {
      INFO(to_string(kind) << " at " << id);
      CHECK(std::abs(vh.values.at(rename[id]) - value) <= tol);
    }
  }
}

TEST_CASE("metric_matrix stacks per-side columns") {
  DiscourseGraph topic = make_graph({{"A", "B", 2}, {"B", "C", 1}});
  DiscourseGraph null_g =
      make_graph({{"C", "D", 3}, {"D", "C", 1}}, GraphKind::null);
  std::vector<MetricKind> kinds = {MetricKind::strength, MetricKind::degree};
  NodalityMatrix m = metric_matrix(topic, null_g, kinds, {});
  CHECK(m.actors == std::vector<std::string>{"A", "B", "C", "D"});
  CHECK(m.values.rows() == 4);
  CHECK(m.values.cols() == 4);

  MetricVector ts = compute(topic, MetricKind::strength, {});
  MetricVector td = compute(topic, MetricKind::degree, {});
  MetricVector ns = compute(null_g, MetricKind::strength, {});
  MetricVector nd = compute(null_g, MetricKind::degree, {});
  for (std::size_t i = 0; i < m.actors.size(); ++i) {
    const std::string& id = m.actors[i];
    auto cell = [&](const MetricVector& v) {
      auto it = v.values.find(id);
      return it == v.values.end() ? 0.0 : it->second;
    };
    CHECK(m.values(i, 0) == cell(ts));
    CHECK(m.values(i, 1) == cell(td));
    CHECK(m.values(i, 2) == cell(ns));
    CHECK(m.values(i, 3) == cell(nd));
  }

  // A and B never touch the null network
  auto row_a = std::find(m.actors.begin(), m.actors.end(), "A") - m.actors.begin();
  CHECK(m.values(row_a, 2) == 0.0);
  CHECK(m.values(row_a, 3) == 0.0);
}

TEST_CASE("metric_matrix honors an explicit universe") {
  DiscourseGraph topic = make_graph({{"A", "B", 2}});
  DiscourseGraph null_g = make_graph({{"A", "B", 1}}, GraphKind::null);
  std::vector<std::string> universe = {"A", "B", "Z"};
  NodalityMatrix m =
      metric_matrix(topic, null_g, {MetricKind::strength}, {}, &universe);
  CHECK(m.actors == universe);
  auto z = m.values.row(2);
  CHECK(z(0) == 0.0);
  CHECK(z(1) == 0.0);

  std::vector<std::string> unsorted = {"B", "A", "Z"};
  CHECK_THROWS_AS(metric_matrix(topic, null_g, {MetricKind::strength}, {}, &unsorted),
                  std::invalid_argument);
  std::vector<std::string> missing = {"A", "Z"};
  CHECK_THROWS_AS(metric_matrix(topic, null_g, {MetricKind::strength}, {}, &missing),
                  std::invalid_argument);
  CHECK_THROWS_AS(metric_matrix(topic, null_g, {}, {}), std::invalid_argument);
}

TEST_CASE("metric_matrix is deterministic across thread counts") {
  std::mt19937_64 rng(99);
  DiscourseGraph topic = random_graph(rng, 8);
  DiscourseGraph null_g = random_graph(rng, 8);
  FollowerMap f = followers_for(topic);
  for (const auto& id : null_g.nodes())
    if (!f.count(id)) f[id] = 500;
  std::vector<MetricKind> kinds(kAllMetrics.begin(), kAllMetrics.end());
  NodalityMatrix one = metric_matrix(topic, null_g, kinds, f, nullptr, 1);
  NodalityMatrix four = metric_matrix(topic, null_g, kinds, f, nullptr, 4);
  CHECK(one.actors == four.actors);
  CHECK((one.values - four.values).cwiseAbs().maxCoeff() == 0.0);
}
