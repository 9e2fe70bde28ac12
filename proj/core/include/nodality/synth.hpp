#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nodality/ingest.hpp"
#include "nodality/nodality.hpp"
#include "nodality/timeutil.hpp"

namespace nodality {

/// One block of generated actors sharing a planted tier and roster fields.
struct SynthGroupSpec {
  std::string name;
  std::size_t count = 0;
  Tier tier = Tier::receiver;
  ActorKind kind = ActorKind::mp;
  ActorRole role = ActorRole::government_backbench;
  std::string party;
  /// Scales the lognormal follower draw for this block.
  double follower_multiplier = 1.0;
};

/// Generator parameters. The activity model: each (tier, topic) carries a
/// binary day level; the leader level is a persistent Markov chain, the
/// funneler level copies yesterday's leader level with probability
/// `coupling`, and the receiver level copies yesterday's funneler level
/// likewise. Actors initiate interactions as Poisson counts whose rate is
/// multiplied by `burst_multiplier` on high-level days, and each
/// interaction's content author is drawn with probability proportional to
/// tier weight (and the specialist boost on the specialist's own topic).
struct SynthConfig {
  std::uint64_t seed = 1;
  std::int64_t start_ts = 1640995200;  // 2022-01-01T00:00:00Z
  int days = 120;
  std::vector<std::string> topics;
  std::vector<SynthGroupSpec> groups;

  double leader_weight = 10.0;
  double funneler_weight = 3.0;
  double receiver_weight = 1.0;

  double events_per_actor_day = 0.5;  // base initiation rate, split over topics
  double burst_multiplier = 4.0;      // high-level rate multiplier
  double level_persistence = 0.75;    // P(leader level repeats tomorrow)
  double coupling = 0.9;              // P(follower copies upstream level)

  double specialist_fraction = 0.2;  // per block, actors tied to one topic
  double specialist_boost = 2.0;     // attention and initiation boost there

  double follower_log_mean = 8.0;
  double follower_log_sigma = 0.5;
};

struct SynthTruth {
  std::string actor_id;
  std::string group;
  Tier tier = Tier::receiver;
  std::string specialist_topic;  // empty when not a specialist
};

struct SynthResult {
  std::vector<Event> events;
  Roster roster;
  std::vector<SynthTruth> truth;  // sorted by actor_id, matching the roster
  TimeWindow range;               // [start_ts, start_ts + days)
};

/// Deterministic under config.seed: equal configs produce byte-identical
/// event streams. Throws on invalid configs (empty topics or groups,
/// probabilities outside [0,1], nonpositive rates or weights).
SynthResult generate(const SynthConfig& config);

SynthConfig read_synth_config_file(const std::string& path);
void write_synth_config_file(const std::string& path, const SynthConfig& config);

void write_truth_file(const std::string& path, const std::vector<SynthTruth>& truth);
std::vector<SynthTruth> read_truth_file(const std::string& path);

}  // namespace nodality
