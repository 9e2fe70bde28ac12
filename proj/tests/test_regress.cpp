#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "nodality/regress.hpp"

using namespace nodality;

namespace {

constexpr std::int64_t kDay = kSecondsPerDay;

std::vector<DesignRow> synthetic_rows(std::mt19937_64& rng, std::size_t n, double b_inh,
                                      double b_act, double b_int, double b_time,
                                      double intercept, double noise) {
  std::normal_distribution<double> gauss;
  std::vector<DesignRow> rows;
  for (std::size_t i = 0; i < n; ++i) {
    DesignRow r;
    r.group = "g" + std::to_string(i % 3);
    r.topic = "t";
    r.window_index = static_cast<std::int64_t>(i % 10);
    r.inherent = gauss(rng);
    r.active = gauss(rng);
    r.interaction = r.inherent * r.active;
    r.time = static_cast<double>(r.window_index);
    r.phi = intercept + b_inh * r.inherent + b_act * r.active + b_int * r.interaction +
            b_time * r.time + noise * gauss(rng);
    rows.push_back(r);
  }
  return rows;
}

const Coefficient& coef(const RegressionResult& fit, const std::string& name) {
  for (const auto& c : fit.coefficients)
    if (c.name == name) return c;
  throw std::runtime_error("no coefficient " + name);
}

}  // namespace

TEST_CASE("noise-free fits recover the planted coefficients exactly") {
  std::mt19937_64 rng(3);
  auto rows = synthetic_rows(rng, 80, 0.010, 0.008, -0.001, -0.002, 0.088, 0.0);
  RegressionResult fit = fit_ols(rows);
  REQUIRE(fit.coefficients.size() == 5);
  CHECK(fit.coefficients[0].name == "inherent");
  CHECK(fit.coefficients[1].name == "active");
  CHECK(fit.coefficients[2].name == "interaction");
  CHECK(fit.coefficients[3].name == "time");
  CHECK(fit.coefficients[4].name == "intercept");
  CHECK(std::abs(coef(fit, "inherent").estimate - 0.010) < 1e-9);
  CHECK(std::abs(coef(fit, "active").estimate - 0.008) < 1e-9);
  CHECK(std::abs(coef(fit, "interaction").estimate + 0.001) < 1e-9);
  CHECK(std::abs(coef(fit, "time").estimate + 0.002) < 1e-9);
  CHECK(std::abs(coef(fit, "intercept").estimate - 0.088) < 1e-9);
  CHECK(fit.n == 80);
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fit.sigma < 1e-9);
  CHECK(!fit.robust);
}

TEST_CASE("zero response gives zero coefficients and zero r-squared") {
  std::mt19937_64 rng(5);
  auto rows = synthetic_rows(rng, 40, 0, 0, 0, 0, 0, 0);
  for (auto& r : rows) r.phi = 0.0;
  RegressionResult fit = fit_ols(rows);
  for (const auto& c : fit.coefficients) CHECK(std::abs(c.estimate) < 1e-12);
  CHECK(fit.r_squared == 0.0);
}

TEST_CASE("residuals are orthogonal to every regressor") {
  std::mt19937_64 rng(7);
  auto rows = synthetic_rows(rng, 60, 0.4, -0.2, 0.1, 0.05, 1.0, 0.5);
  RegressionResult fit = fit_ols(rows);
  double b_inh = coef(fit, "inherent").estimate;
  double b_act = coef(fit, "active").estimate;
  double b_int = coef(fit, "interaction").estimate;
  double b_time = coef(fit, "time").estimate;
  double b0 = coef(fit, "intercept").estimate;

  double dot_inh = 0, dot_act = 0, dot_int = 0, dot_time = 0, dot_one = 0;
  for (const auto& r : rows) {
    double residual = r.phi - (b0 + b_inh * r.inherent + b_act * r.active +
                               b_int * r.interaction + b_time * r.time);
    dot_inh += residual * r.inherent;
    dot_act += residual * r.active;
    dot_int += residual * r.interaction;
    dot_time += residual * r.time;
    dot_one += residual;
  }
  CHECK(std::abs(dot_inh) < 1e-8);
  CHECK(std::abs(dot_act) < 1e-8);
  CHECK(std::abs(dot_int) < 1e-8);
  CHECK(std::abs(dot_time) < 1e-8);
  CHECK(std::abs(dot_one) < 1e-8);
}

TEST_CASE("row order does not change the fit") {
  std::mt19937_64 rng(11);
  auto rows = synthetic_rows(rng, 50, 0.3, 0.2, -0.1, 0.0, 0.5, 0.2);
  RegressionResult forward = fit_ols(rows);
  std::reverse(rows.begin(), rows.end());
  RegressionResult backward = fit_ols(rows);
  for (std::size_t i = 0; i < forward.coefficients.size(); ++i) {
    CHECK(std::abs(forward.coefficients[i].estimate - backward.coefficients[i].estimate) <
          1e-10);
    CHECK(std::abs(forward.coefficients[i].std_error - backward.coefficients[i].std_error) <
          1e-10);
  }
  CHECK(std::abs(forward.r_squared - backward.r_squared) < 1e-12);
}

TEST_CASE("a pure-intercept response is fit by the intercept alone") {
  std::mt19937_64 rng(13);
  auto rows = synthetic_rows(rng, 30, 0, 0, 0, 0, 0.42, 0.0);
  RegressionResult fit = fit_ols(rows);
  CHECK(std::abs(coef(fit, "intercept").estimate - 0.42) < 1e-10);
  for (const std::string name : {"inherent", "active", "interaction", "time"})
    CHECK(std::abs(coef(fit, name).estimate) < 1e-10);
}

TEST_CASE("rank-deficient designs are rejected by column name") {
  std::mt19937_64 rng(17);
  auto rows = synthetic_rows(rng, 40, 0.1, 0.1, 0, 0, 0, 0.1);
  for (auto& r : rows) {
    r.active = 2.0 * r.inherent;             // collinear pair
    r.interaction = r.inherent * r.active;   // keep the derived column honest
  }
  try {
    fit_ols(rows);
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& e) {
    std::string what = e.what();
    bool names_either = what.find("active") != std::string::npos ||
                        what.find("inherent") != std::string::npos;
    CHECK(names_either);
  }
}

TEST_CASE("too few rows is an error") {
  std::mt19937_64 rng(19);
  auto rows = synthetic_rows(rng, 5, 0.1, 0.1, 0, 0, 0, 0.1);
  CHECK_THROWS_AS(fit_ols(rows), std::invalid_argument);
  auto six = synthetic_rows(rng, 6, 0.1, 0.1, 0, 0, 0, 0.1);
  CHECK_NOTHROW(fit_ols(six));
}

TEST_CASE("classical standard errors match the closed form") {
  std::mt19937_64 rng(23);
  auto rows = synthetic_rows(rng, 120, 0.2, -0.3, 0.05, 0.01, 0.7, 0.3);
  RegressionResult fit = fit_ols(rows);

  const std::size_t n = rows.size();
  Eigen::MatrixXd x(n, 5);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = rows[i].inherent;
    x(i, 1) = rows[i].active;
    x(i, 2) = rows[i].interaction;
    x(i, 3) = rows[i].time;
    x(i, 4) = 1.0;
    y(i) = rows[i].phi;
  }
  Eigen::VectorXd beta = (x.transpose() * x).ldlt().solve(x.transpose() * y);
  Eigen::VectorXd residual = y - x * beta;
  double sigma2 = residual.squaredNorm() / static_cast<double>(n - 5);
  Eigen::MatrixXd cov = sigma2 * (x.transpose() * x).inverse();

  for (int j = 0; j < 5; ++j) {
    CHECK(std::abs(fit.coefficients[j].estimate - beta(j)) < 1e-9);
    CHECK(std::abs(fit.coefficients[j].std_error - std::sqrt(cov(j, j))) < 1e-9);
    double t = beta(j) / std::sqrt(cov(j, j));
    CHECK(std::abs(fit.coefficients[j].t_stat - t) < 1e-6);
    CHECK(fit.coefficients[j].p_value >= 0.0);
    CHECK(fit.coefficients[j].p_value <= 1.0);
  }
  CHECK(std::abs(fit.sigma - std::sqrt(sigma2)) < 1e-9);

  double sst = (y.array() - y.mean()).square().sum();
  CHECK(std::abs(fit.r_squared - (1.0 - residual.squaredNorm() / sst)) < 1e-12);
}

TEST_CASE("p-values are small for strong effects and large for absent ones") {
  std::mt19937_64 rng(29);
  auto rows = synthetic_rows(rng, 400, 0.5, 0.0, 0.0, 0.0, 0.2, 0.1);
  RegressionResult fit = fit_ols(rows);
  CHECK(coef(fit, "inherent").p_value < 1e-6);
  CHECK(coef(fit, "active").p_value > 0.001);
}

TEST_CASE("robust errors differ under heteroskedastic noise") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> gauss;
  std::vector<DesignRow> rows;
  for (std::size_t i = 0; i < 200; ++i) {
    DesignRow r;
    r.group = "g";
    r.topic = "t";
    r.window_index = static_cast<std::int64_t>(i % 10);
    r.inherent = gauss(rng);
    r.active = gauss(rng);
    r.interaction = r.inherent * r.active;
    r.time = static_cast<double>(r.window_index);
    // noise scale grows with the regressor: classical errors are wrong here
    r.phi = 0.3 * r.inherent + (0.05 + 0.8 * std::abs(r.inherent)) * gauss(rng);
    rows.push_back(r);
  }
  RegressionResult classical = fit_ols(rows, false);
  RegressionResult robust = fit_ols(rows, true);
  CHECK(robust.robust);
  CHECK(std::abs(coef(classical, "inherent").estimate - coef(robust, "inherent").estimate) <
        1e-12);
  CHECK(std::abs(coef(classical, "inherent").std_error -
                 coef(robust, "inherent").std_error) > 1e-4);
}

TEST_CASE("build_design joins influence rows with window scores") {
  // two groups, two windows, one topic; scores chosen for easy hand means
  std::map<std::string, std::string> groups = {
      {"a1", "A"}, {"a2", "A"}, {"a3", "A"}, {"b1", "B"}};
  std::vector<TimeWindow> windows = {{0, 14 * kDay}, {14 * kDay, 28 * kDay}};

  std::vector<InfluenceRecord> influence;
  for (std::size_t w = 0; w < windows.size(); ++w)
    for (const std::string g : {"A", "B"}) {
      InfluenceRecord r;
      r.group = g;
      r.topic = "t";
      r.window = windows[w];
      r.phi = 0.1 * static_cast<double>(w + 1) * (g == "A" ? 1.0 : -1.0);
      influence.push_back(r);
    }

  std::vector<WindowScores> snaps(2);
  snaps[0].window = windows[0];
  snaps[0].scores = {{"a1", {1.0, 4.0}}, {"a2", {2.0, 5.0}}, {"a3", {3.0, 6.0}},
                     {"b1", {10.0, -2.0}}};
  snaps[1].window = windows[1];
  snaps[1].scores = {{"a1", {2.0, 1.0}}, {"a2", {4.0, 3.0}}, {"a3", {6.0, 5.0}},
                     {"b1", {-1.0, -1.0}}};
  std::map<std::string, std::vector<WindowScores>> by_topic = {{"t", snaps}};

  auto rows = build_design(influence, by_topic, groups);
  REQUIRE(rows.size() == 4);

  auto row_of = [&](const std::string& g, std::int64_t w) -> const DesignRow& {
    for (const auto& r : rows)
      if (r.group == g && r.window_index == w) return r;
    throw std::runtime_error("row missing");
  };

  const DesignRow& a0 = row_of("A", 0);
  CHECK(a0.inherent == doctest::Approx(2.0));            // mean of 1,2,3
  CHECK(a0.active == doctest::Approx(5.0));              // mean of 4,5,6
  CHECK(a0.interaction == doctest::Approx((4.0 + 10.0 + 18.0) / 3.0));
  CHECK(a0.time == 0.0);
  CHECK(a0.phi == doctest::Approx(0.1));

  const DesignRow& a1 = row_of("A", 1);
  CHECK(a1.inherent == doctest::Approx(4.0));
  CHECK(a1.time == 1.0);

  const DesignRow& b0 = row_of("B", 0);
  CHECK(b0.inherent == doctest::Approx(10.0));  // single member: identity
  CHECK(b0.active == doctest::Approx(-2.0));
  CHECK(b0.interaction == doctest::Approx(-20.0));

  // sum aggregation scales the aggregates but not phi or time
  auto sums = build_design(influence, by_topic, groups, Aggregate::sum);
  const DesignRow* a0s = nullptr;
  for (const auto& r : sums)
    if (r.group == "A" && r.window_index == 0) a0s = &r;
  REQUIRE(a0s);
  CHECK(a0s->inherent == doctest::Approx(6.0));
  CHECK(a0s->active == doctest::Approx(15.0));
  CHECK(a0s->interaction == doctest::Approx(32.0));
  CHECK(a0s->phi == doctest::Approx(0.1));

  // a record whose window has no score snapshot is an error
  std::vector<InfluenceRecord> stray = influence;
  stray[0].window = {100 * kDay, 114 * kDay};
  CHECK_THROWS_AS(build_design(stray, by_topic, groups), std::invalid_argument);

  // unknown topic
  std::vector<InfluenceRecord> other = influence;
  other[0].topic = "u";
  CHECK_THROWS_AS(build_design(other, by_topic, groups), std::invalid_argument);

  // a group with no scored members cannot be aggregated
  std::map<std::string, std::string> empty_group = groups;
  empty_group["c1"] = "C";
  std::vector<InfluenceRecord> with_c = influence;
  InfluenceRecord rc;
  rc.group = "C";
  rc.topic = "t";
  rc.window = windows[0];
  with_c.push_back(rc);
  CHECK_THROWS_AS(build_design(with_c, by_topic, empty_group), std::invalid_argument);
}

TEST_CASE("build_design covers the full grid of groups, topics, and windows") {
  std::mt19937_64 rng(37);
  std::normal_distribution<double> gauss;
  std::vector<std::string> group_names = {"g1", "g2", "g3", "g4", "g5", "g6"};
  std::map<std::string, std::string> groups;
  for (const auto& g : group_names)
    for (int m = 0; m < 2; ++m) groups[g + "_m" + std::to_string(m)] = g;

  std::vector<TimeWindow> windows;
  for (int w = 0; w < 26; ++w) windows.push_back({w * 14 * kDay, (w + 1) * 14 * kDay});

  std::vector<InfluenceRecord> influence;
  std::map<std::string, std::vector<WindowScores>> by_topic;
  for (const std::string topic : {"t1"}) {
    auto& snaps = by_topic[topic];
    for (const auto& w : windows) {
      WindowScores ws;
      ws.window = w;
      for (const auto& [member, group] : groups)
        ws.scores[member] = {gauss(rng), gauss(rng)};
      snaps.push_back(ws);
      for (const auto& g : group_names) {
        InfluenceRecord r;
        r.group = g;
        r.topic = topic;
        r.window = w;
        r.phi = gauss(rng);
        influence.push_back(r);
      }
    }
  }
  auto rows = build_design(influence, by_topic, groups);
  CHECK(rows.size() == 6 * 26);
  for (const auto& r : rows) {
    CHECK(r.window_index >= 0);
    CHECK(r.window_index < 26);
    CHECK(r.time == static_cast<double>(r.window_index));
  }
}
