#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nodality/influence.hpp"
#include "nodality/nodality.hpp"

namespace nodality {

/// One regression observation: a (group, window, topic) cell with its
/// information-flow response and aggregated nodality predictors.
struct DesignRow {
  std::string group;
  std::string topic;
  std::int64_t window_index = 0;
  double phi = 0.0;
  double inherent = 0.0;     // aggregated member PC1
  double active = 0.0;       // aggregated member PC2
  double interaction = 0.0;  // aggregated member PC1*PC2
  double time = 0.0;         // window index as a real covariate
};

enum class Aggregate { mean, sum };

std::string to_string(Aggregate aggregate);

/// Per-window nodality scores for one topic.
struct WindowScores {
  TimeWindow window;
  NodalityScores scores;
};

/// Joins each influence record with its window's nodality scores, aggregated
/// over group members. Throws when a record's window has no matching score
/// snapshot for its topic, and when a group has no scored members.
std::vector<DesignRow> build_design(
    const std::vector<InfluenceRecord>& influence,
    const std::map<std::string, std::vector<WindowScores>>& scores_by_topic,
    const std::map<std::string, std::string>& groups, Aggregate aggregate = Aggregate::mean);

struct Coefficient {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  double t_stat = 0.0;
  double p_value = 1.0;  // two-sided
};

struct RegressionResult {
  std::vector<Coefficient> coefficients;  // inherent, active, interaction, time, intercept
  std::size_t n = 0;
  double r_squared = 0.0;
  double sigma = 0.0;  // residual standard error
  bool robust = false;
};

/// Ordinary least squares of phi on (inherent, active, interaction, time)
/// with an intercept. Standard errors are classical sigma^2 (X'X)^-1 by
/// default, or HC1 heteroskedasticity-robust when requested; p-values come
/// from the t distribution with N-5 degrees of freedom. Throws when N <= 5
/// or the design is rank deficient (names the dependent columns).
RegressionResult fit_ols(const std::vector<DesignRow>& rows, bool robust_errors = false);

}  // namespace nodality
