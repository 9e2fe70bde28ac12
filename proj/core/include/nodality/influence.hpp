#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nodality/graph.hpp"
#include "nodality/ingest.hpp"
#include "nodality/timeutil.hpp"

namespace nodality {

/// Interaction counts per time bin for some set of actors.
struct ActivitySeries {
  std::vector<double> counts;
  std::int64_t bin_seconds = kSecondsPerDay;
  TimeWindow window;
};

/// Original posts can be supplied alongside interactions when a richer
/// activity signal is available; by default activity counts only the
/// interactions an actor initiated (appearing as event target).
struct PostRecord {
  std::string actor;
  std::int64_t ts = 0;
  std::vector<std::string> topics;
};

/// Counts the topic-labeled events each bin in which a member of actor_set
/// is the initiator. An empty topic counts every event. Throws unless the
/// window spans at least 2 bins.
ActivitySeries activity_series(const std::vector<Event>& events,
                               const std::set<std::string>& actor_set, const std::string& topic,
                               TimeWindow window, int bin_days = 1,
                               const std::vector<PostRecord>* posts = nullptr);

/// Quantile discretization into `bins` symbols. Thresholds sit at the
/// sorted sample's positions floor((n-1)j/bins); a value's symbol is the
/// number of thresholds it strictly exceeds. Exact comparisons only, so the
/// result is invariant under strictly monotone transforms of the values.
std::vector<int> quantile_discretize(const std::vector<double>& values, int bins);

/// Plug-in Shannon entropy (bits) of a symbol sequence.
double entropy_symbols(const std::vector<int>& symbols);

/// Plug-in entropy of the quantile-discretized series. A constant series
/// discretizes to one symbol and scores 0.
double entropy(const ActivitySeries& series, int bins = 2);

/// Plug-in transfer entropy (bits) from x to y on already-discretized
/// series with history length k:
///
///   T = sum over (y_next, y_hist, x_hist) of
///       p(y_next, y_hist, x_hist) * log2[ p(y_next | y_hist, x_hist)
///                                         / p(y_next | y_hist) ]
///
/// estimated from the k-lag-aligned sample counts. Requires equal lengths
/// of at least k+2.
double transfer_entropy_symbols(const std::vector<int>& x, const std::vector<int>& y, int k);

double transfer_entropy(const ActivitySeries& x, const ActivitySeries& y, int k = 1,
                        int bins = 2);

struct InfluenceDetail {
  double phi = 0.0;
  double te_xy = 0.0;
  double te_yx = 0.0;
  double h_x = 0.0;
  double h_y = 0.0;
};

/// Net directed information flow, normalized per direction:
///
///   phi = T_{X->Y} / H_Y  -  T_{Y->X} / H_X
///
/// H_X and H_Y are the entropies of the lag-aligned samples (the last n-k
/// symbols), which makes each ratio at most 1 by construction, so phi lies
/// in [-1, 1]. A direction whose entropy is 0 contributes 0: a constant
/// series can neither absorb nor reveal information. Exactly antisymmetric
/// in its arguments.
InfluenceDetail share_of_influence_detail(const ActivitySeries& x, const ActivitySeries& y,
                                          int k = 1, int bins = 2);
double share_of_influence(const ActivitySeries& x, const ActivitySeries& y, int k = 1,
                          int bins = 2);

struct InfluenceRecord {
  std::string group;
  std::string topic;
  TimeWindow window;
  double phi = 0.0;
  double te_xy = 0.0;  // group -> rest
  double te_yx = 0.0;  // rest -> group
  double h_x = 0.0;    // group activity entropy
  double h_y = 0.0;    // rest activity entropy
};

struct InfluenceOptions {
  int lag = 1;
  int bins = 2;
  int bin_days = 1;
  /// Estimate symbol distributions over the concatenated series and report
  /// per-window values from window-restricted counts (each window's TE is
  /// then clamped to >= 0 and each ratio to <= 1). Default is fully
  /// per-window estimation, which is unbiased in form but noisy for short
  /// windows.
  bool pool_windows = false;
  /// Groups to report; empty means every group in the assignment.
  std::vector<std::string> groups;
};

/// phi of each group against the rest of the rostered population, per
/// window: X = the group's activity, Y = everyone else's, both restricted
/// to the topic. Throws when a requested group has no members.
std::vector<InfluenceRecord> group_influence_table(
    const std::vector<Event>& events, const std::map<std::string, std::string>& groups,
    const std::string& topic, const std::vector<TimeWindow>& windows,
    const InfluenceOptions& options = {}, const std::vector<PostRecord>* posts = nullptr);

std::vector<InfluenceRecord> group_influence_table(
    const std::vector<Event>& events, const std::map<std::string, std::string>& groups,
    const SnapshotSeries& series, const InfluenceOptions& options = {},
    const std::vector<PostRecord>* posts = nullptr);

}  // namespace nodality
