#include "nodality/influence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nodality {

ActivitySeries activity_series(const std::vector<Event>& events,
                               const std::set<std::string>& actor_set, const std::string& topic,
                               TimeWindow window, int bin_days,
                               const std::vector<PostRecord>* posts) {
  if (window.empty()) throw std::invalid_argument("activity_series: empty window");
  if (bin_days < 1) throw std::invalid_argument("activity_series: bin width < 1 day");
  const std::int64_t bin_seconds = static_cast<std::int64_t>(bin_days) * kSecondsPerDay;
  const std::int64_t bins = window.length() / bin_seconds;
  if (bins < 2) throw std::invalid_argument("activity_series: window spans fewer than 2 bins");

  ActivitySeries series;
  series.bin_seconds = bin_seconds;
  series.window = window;
  series.counts.assign(static_cast<std::size_t>(bins), 0.0);

  auto on_topic = [&](const std::vector<std::string>& topics) {
    return topic.empty() || std::find(topics.begin(), topics.end(), topic) != topics.end();
  };
  auto add = [&](std::int64_t ts) {
    const std::int64_t bin = (ts - window.start) / bin_seconds;
    if (ts >= window.start && bin < bins) series.counts[static_cast<std::size_t>(bin)] += 1.0;
  };

  // The initiator of an interaction is the event target (the actor who
  // retweeted/mentioned/replied), so activity counts target-side membership.
  for (const Event& e : events)
    if (on_topic(e.topics) && actor_set.count(e.target)) add(e.ts);
  if (posts)
    for (const PostRecord& p : *posts)
      if (on_topic(p.topics) && actor_set.count(p.actor)) add(p.ts);
  return series;
}

std::vector<int> quantile_discretize(const std::vector<double>& values, int bins) {
  if (bins < 2) throw std::invalid_argument("quantile_discretize: need at least 2 bins");
  if (values.empty()) return {};
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  std::vector<double> thresholds;
  for (int j = 1; j < bins; ++j)
    thresholds.push_back(sorted[(n - 1) * static_cast<std::size_t>(j) / static_cast<std::size_t>(bins)]);

  std::vector<int> symbols(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    int s = 0;
    for (double t : thresholds)
      if (values[i] > t) ++s;
    symbols[i] = s;
  }
  return symbols;
}

double entropy_symbols(const std::vector<int>& symbols) {
  if (symbols.empty()) return 0.0;
  std::map<int, std::int64_t> counts;
  for (int s : symbols) ++counts[s];
  const double n = static_cast<double>(symbols.size());
  double h = 0.0;
  for (const auto& [symbol, c] : counts) {
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

double entropy(const ActivitySeries& series, int bins) {
  if (series.counts.size() < 2) throw std::invalid_argument("entropy: series length < 2");
  return entropy_symbols(quantile_discretize(series.counts, bins));
}

namespace {

using Key = std::vector<int>;

// Count tables over the k-lag-aligned samples of a symbol pair.
struct TeTables {
  std::map<Key, std::int64_t> full;     // (y_next, y_hist, x_hist)
  std::map<Key, std::int64_t> hist;     // (y_hist, x_hist)
  std::map<Key, std::int64_t> y_joint;  // (y_next, y_hist)
  std::map<Key, std::int64_t> y_hist;   // (y_hist)
  std::size_t samples = 0;
};

struct SampleKeys {
  Key full, hist, y_joint, y_hist;
};

SampleKeys keys_at(const std::vector<int>& x, const std::vector<int>& y, int k,
                   std::size_t t) {
  SampleKeys keys;
  keys.y_hist.assign(y.begin() + static_cast<std::ptrdiff_t>(t) - k,
                     y.begin() + static_cast<std::ptrdiff_t>(t));
  keys.hist = keys.y_hist;
  keys.hist.insert(keys.hist.end(), x.begin() + static_cast<std::ptrdiff_t>(t) - k,
                   x.begin() + static_cast<std::ptrdiff_t>(t));
  keys.y_joint.push_back(y[t]);
  keys.y_joint.insert(keys.y_joint.end(), keys.y_hist.begin(), keys.y_hist.end());
  keys.full.push_back(y[t]);
  keys.full.insert(keys.full.end(), keys.hist.begin(), keys.hist.end());
  return keys;
}

TeTables build_tables(const std::vector<int>& x, const std::vector<int>& y, int k) {
  TeTables tables;
  for (std::size_t t = static_cast<std::size_t>(k); t < y.size(); ++t) {
    const SampleKeys keys = keys_at(x, y, k, t);
    ++tables.full[keys.full];
    ++tables.hist[keys.hist];
    ++tables.y_joint[keys.y_joint];
    ++tables.y_hist[keys.y_hist];
    ++tables.samples;
  }
  return tables;
}

void check_te_inputs(const std::vector<int>& x, const std::vector<int>& y, int k) {
  if (x.size() != y.size())
    throw std::invalid_argument("transfer_entropy: series lengths differ");
  if (k < 1) throw std::invalid_argument("transfer_entropy: lag must be >= 1");
  if (y.size() < static_cast<std::size_t>(k) + 2)
    throw std::invalid_argument("transfer_entropy: series too short for lag " +
                                std::to_string(k));
}

}  // namespace

double transfer_entropy_symbols(const std::vector<int>& x, const std::vector<int>& y, int k) {
  check_te_inputs(x, y, k);
  TeTables tables = build_tables(x, y, k);
  const double n = static_cast<double>(tables.samples);

  // T = sum p(y+, yh, xh) * log2[ c(y+,yh,xh) c(yh) / (c(yh,xh) c(y+,yh)) ]
  double te = 0.0;
  for (const auto& [key, c_full] : tables.full) {
    const Key y_joint(key.begin(), key.begin() + k + 1);
    const Key hist(key.begin() + 1, key.end());
    const Key y_hist(key.begin() + 1, key.begin() + 1 + k);
    const double ratio =
        static_cast<double>(c_full) * static_cast<double>(tables.y_hist.at(y_hist)) /
        (static_cast<double>(tables.hist.at(hist)) *
         static_cast<double>(tables.y_joint.at(y_joint)));
    te += static_cast<double>(c_full) / n * std::log2(ratio);
  }
  return std::max(te, 0.0);
}

double transfer_entropy(const ActivitySeries& x, const ActivitySeries& y, int k, int bins) {
  return transfer_entropy_symbols(quantile_discretize(x.counts, bins),
                                  quantile_discretize(y.counts, bins), k);
}

namespace {

// Entropy of the last n-k symbols, matching the sample set the transfer
// entropy is estimated on; this is what keeps each phi ratio within [0, 1].
double aligned_entropy(const std::vector<int>& symbols, int k) {
  return entropy_symbols(
      std::vector<int>(symbols.begin() + k, symbols.end()));
}

InfluenceDetail detail_from_symbols(const std::vector<int>& sx, const std::vector<int>& sy,
                                    int k) {
  InfluenceDetail d;
  d.te_xy = transfer_entropy_symbols(sx, sy, k);
  d.te_yx = transfer_entropy_symbols(sy, sx, k);
  d.h_x = aligned_entropy(sx, k);
  d.h_y = aligned_entropy(sy, k);
  // The plug-in estimate never exceeds the aligned entropy in exact
  // arithmetic; the clamp absorbs the last-bit rounding of the two sums.
  const double xy = d.h_y > 0.0 ? std::min(d.te_xy / d.h_y, 1.0) : 0.0;
  const double yx = d.h_x > 0.0 ? std::min(d.te_yx / d.h_x, 1.0) : 0.0;
  d.phi = xy - yx;
  return d;
}

}  // namespace

InfluenceDetail share_of_influence_detail(const ActivitySeries& x, const ActivitySeries& y,
                                          int k, int bins) {
  return detail_from_symbols(quantile_discretize(x.counts, bins),
                             quantile_discretize(y.counts, bins), k);
}

double share_of_influence(const ActivitySeries& x, const ActivitySeries& y, int k, int bins) {
  return share_of_influence_detail(x, y, k, bins).phi;
}

namespace {

std::vector<std::string> resolve_groups(const std::map<std::string, std::string>& assignment,
                                        const InfluenceOptions& options) {
  std::set<std::string> present;
  for (const auto& [actor, group] : assignment) present.insert(group);
  if (options.groups.empty()) return {present.begin(), present.end()};
  for (const std::string& g : options.groups)
    if (!present.count(g))
      throw std::invalid_argument("influence: group \"" + g + "\" has no rostered members");
  return options.groups;
}

std::pair<std::set<std::string>, std::set<std::string>> split_members(
    const std::map<std::string, std::string>& assignment, const std::string& group) {
  std::set<std::string> members, rest;
  for (const auto& [actor, g] : assignment)
    (g == group ? members : rest).insert(actor);
  return {std::move(members), std::move(rest)};
}

// Mean over the window's samples of the pointwise log ratio under the
// pooled tables, clamped to be nonnegative like the plug-in estimator.
double pooled_te(const TeTables& tables, const std::vector<int>& x, const std::vector<int>& y,
                 int k, std::size_t from, std::size_t to) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t t = std::max(from, static_cast<std::size_t>(k)); t < to; ++t) {
    const SampleKeys keys = keys_at(x, y, k, t);
    const double ratio =
        static_cast<double>(tables.full.at(keys.full)) *
        static_cast<double>(tables.y_hist.at(keys.y_hist)) /
        (static_cast<double>(tables.hist.at(keys.hist)) *
         static_cast<double>(tables.y_joint.at(keys.y_joint)));
    sum += std::log2(ratio);
    ++count;
  }
  if (count == 0) return 0.0;
  return std::max(sum / static_cast<double>(count), 0.0);
}

double window_entropy(const std::vector<int>& symbols, int k, std::size_t from,
                      std::size_t to) {
  const std::size_t lo = std::max(from, static_cast<std::size_t>(k));
  if (lo >= to) return 0.0;
  return entropy_symbols(std::vector<int>(symbols.begin() + static_cast<std::ptrdiff_t>(lo),
                                          symbols.begin() + static_cast<std::ptrdiff_t>(to)));
}

}  // namespace

std::vector<InfluenceRecord> group_influence_table(
    const std::vector<Event>& events, const std::map<std::string, std::string>& groups,
    const std::string& topic, const std::vector<TimeWindow>& windows,
    const InfluenceOptions& options, const std::vector<PostRecord>* posts) {
  if (windows.empty()) throw std::invalid_argument("influence: no windows");
  if (groups.empty()) throw std::invalid_argument("influence: empty group assignment");
  const std::vector<std::string> group_ids = resolve_groups(groups, options);

  std::vector<InfluenceRecord> records;

  if (!options.pool_windows) {
    for (const std::string& g : group_ids) {
      const auto [members, rest] = split_members(groups, g);
      for (const TimeWindow& w : windows) {
        const ActivitySeries x =
            activity_series(events, members, topic, w, options.bin_days, posts);
        const ActivitySeries y = activity_series(events, rest, topic, w, options.bin_days, posts);
        const InfluenceDetail d = share_of_influence_detail(x, y, options.lag, options.bins);
        records.push_back({g, topic, w, d.phi, d.te_xy, d.te_yx, d.h_x, d.h_y});
      }
    }
    return records;
  }

  // Pooled estimation needs one continuous series across the windows.
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (windows[i].length() != windows[0].length())
      throw std::invalid_argument("influence: pooled windows must have equal length");
    if (i > 0 && windows[i].start != windows[i - 1].end)
      throw std::invalid_argument("influence: pooled windows must be contiguous");
  }
  const TimeWindow span{windows.front().start, windows.back().end};
  const std::int64_t bin_seconds = static_cast<std::int64_t>(options.bin_days) * kSecondsPerDay;
  if (windows[0].length() % bin_seconds != 0)
    throw std::invalid_argument("influence: window length not a whole number of bins");
  const std::size_t bins_per_window =
      static_cast<std::size_t>(windows[0].length() / bin_seconds);

  for (const std::string& g : group_ids) {
    const auto [members, rest] = split_members(groups, g);
    const ActivitySeries x = activity_series(events, members, topic, span, options.bin_days, posts);
    const ActivitySeries y = activity_series(events, rest, topic, span, options.bin_days, posts);
    const std::vector<int> sx = quantile_discretize(x.counts, options.bins);
    const std::vector<int> sy = quantile_discretize(y.counts, options.bins);
    const TeTables xy = build_tables(sx, sy, options.lag);
    const TeTables yx = build_tables(sy, sx, options.lag);

    for (std::size_t wi = 0; wi < windows.size(); ++wi) {
      const std::size_t from = wi * bins_per_window;
      const std::size_t to = from + bins_per_window;
      InfluenceRecord r;
      r.group = g;
      r.topic = topic;
      r.window = windows[wi];
      r.te_xy = pooled_te(xy, sx, sy, options.lag, from, to);
      r.te_yx = pooled_te(yx, sy, sx, options.lag, from, to);
      r.h_x = window_entropy(sx, options.lag, from, to);
      r.h_y = window_entropy(sy, options.lag, from, to);
      const double ratio_xy = r.h_y > 0.0 ? std::min(r.te_xy / r.h_y, 1.0) : 0.0;
      const double ratio_yx = r.h_x > 0.0 ? std::min(r.te_yx / r.h_x, 1.0) : 0.0;
      r.phi = ratio_xy - ratio_yx;
      records.push_back(r);
    }
  }
  return records;
}

std::vector<InfluenceRecord> group_influence_table(
    const std::vector<Event>& events, const std::map<std::string, std::string>& groups,
    const SnapshotSeries& series, const InfluenceOptions& options,
    const std::vector<PostRecord>* posts) {
  std::vector<TimeWindow> windows;
  for (const Snapshot& s : series.snapshots) windows.push_back(s.window);
  return group_influence_table(events, groups, series.topic, windows, options, posts);
}

}  // namespace nodality
