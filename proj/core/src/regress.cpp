#include "nodality/regress.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <stdexcept>

namespace nodality {

std::string to_string(Aggregate aggregate) {
  return aggregate == Aggregate::mean ? "mean" : "sum";
}

std::vector<DesignRow> build_design(
    const std::vector<InfluenceRecord>& influence,
    const std::map<std::string, std::vector<WindowScores>>& scores_by_topic,
    const std::map<std::string, std::string>& groups, Aggregate aggregate) {
  std::map<std::string, std::vector<std::string>> members_of;
  for (const auto& [actor, group] : groups) members_of[group].push_back(actor);

  std::vector<DesignRow> rows;
  rows.reserve(influence.size());
  for (const InfluenceRecord& record : influence) {
    auto topic_it = scores_by_topic.find(record.topic);
    if (topic_it == scores_by_topic.end())
      throw std::invalid_argument("build_design: no nodality scores for topic \"" +
                                  record.topic + "\"");
    const std::vector<WindowScores>& snapshots = topic_it->second;
    std::size_t index = snapshots.size();
    for (std::size_t i = 0; i < snapshots.size(); ++i)
      if (snapshots[i].window == record.window) {
        index = i;
        break;
      }
    if (index == snapshots.size())
      throw std::invalid_argument("build_design: no score snapshot for window starting " +
                                  format_iso8601(record.window.start) + " (topic \"" +
                                  record.topic + "\")");

    auto member_it = members_of.find(record.group);
    if (member_it == members_of.end() || member_it->second.empty())
      throw std::invalid_argument("build_design: group \"" + record.group + "\" is empty");

    const NodalityScores& scores = snapshots[index].scores;
    double inherent = 0.0, active = 0.0, interaction = 0.0;
    std::size_t counted = 0;
    for (const std::string& actor : member_it->second) {
      auto s = scores.find(actor);
      if (s == scores.end()) continue;
      inherent += s->second.inherent;
      active += s->second.active;
      interaction += s->second.inherent * s->second.active;
      ++counted;
    }
    if (counted == 0)
      throw std::invalid_argument("build_design: group \"" + record.group +
                                  "\" has no scored members in window starting " +
                                  format_iso8601(record.window.start));
    if (aggregate == Aggregate::mean) {
      inherent /= static_cast<double>(counted);
      active /= static_cast<double>(counted);
      interaction /= static_cast<double>(counted);
    }

    DesignRow row;
    row.group = record.group;
    row.topic = record.topic;
    row.window_index = static_cast<std::int64_t>(index);
    row.phi = record.phi;
    row.inherent = inherent;
    row.active = active;
    row.interaction = interaction;
    row.time = static_cast<double>(index);
    rows.push_back(std::move(row));
  }
  return rows;
}

RegressionResult fit_ols(const std::vector<DesignRow>& rows, bool robust_errors) {
  const std::size_t n = rows.size();
  constexpr std::size_t kParams = 5;
  static const char* kNames[kParams] = {"inherent", "active", "interaction", "time",
                                        "intercept"};
  if (n <= kParams)
    throw std::invalid_argument("fit_ols: needs more than " + std::to_string(kParams) +
                                " rows, got " + std::to_string(n));

  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), kParams);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    x(r, 0) = rows[i].inherent;
    x(r, 1) = rows[i].active;
    x(r, 2) = rows[i].interaction;
    x(r, 3) = rows[i].time;
    x(r, 4) = 1.0;
    y(r) = rows[i].phi;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < static_cast<Eigen::Index>(kParams)) {
    // The pivot permutation orders columns by decreasing contribution; the
    // trailing ones beyond the rank are the linearly dependent set.
    std::string dependent;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index i = qr.rank(); i < perm.size(); ++i) {
      if (!dependent.empty()) dependent += ", ";
      dependent += kNames[perm(i)];
    }
    throw std::invalid_argument("fit_ols: design is rank deficient; dependent columns: " +
                                dependent);
  }

  const Eigen::VectorXd beta = qr.solve(y);
  const Eigen::VectorXd residuals = y - x * beta;
  const double ssr = residuals.squaredNorm();
  const double dof = static_cast<double>(n - kParams);
  const double sigma2 = ssr / dof;

  const Eigen::MatrixXd xtx_inv = (x.transpose() * x).inverse();
  Eigen::MatrixXd cov;
  if (robust_errors) {
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(kParams, kParams);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      meat += residuals(i) * residuals(i) * x.row(i).transpose() * x.row(i);
    cov = xtx_inv * meat * xtx_inv * (static_cast<double>(n) / dof);
  } else {
    cov = sigma2 * xtx_inv;
  }

  const double mean_y = y.mean();
  const double sst = (y.array() - mean_y).square().sum();

  RegressionResult result;
  result.n = n;
  result.sigma = std::sqrt(sigma2);
  result.r_squared = sst > 0.0 ? 1.0 - ssr / sst : 0.0;
  result.robust = robust_errors;

  const boost::math::students_t dist(dof);
  for (std::size_t j = 0; j < kParams; ++j) {
    Coefficient c;
    c.name = kNames[j];
    c.estimate = beta(static_cast<Eigen::Index>(j));
    c.std_error = std::sqrt(std::max(cov(static_cast<Eigen::Index>(j),
                                         static_cast<Eigen::Index>(j)), 0.0));
    if (c.std_error > 0.0) {
      c.t_stat = c.estimate / c.std_error;
      c.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(c.t_stat)));
    } else {
      c.t_stat = 0.0;
      c.p_value = c.estimate == 0.0 ? 1.0 : 0.0;
    }
    result.coefficients.push_back(c);
  }
  return result;
}

}  // namespace nodality
