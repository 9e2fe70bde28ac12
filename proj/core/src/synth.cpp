#include "nodality/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

#include "json.hpp"
#include "nodality/csv.hpp"
#include "nodality/rng.hpp"

namespace nodality {

using json = nlohmann::json;

namespace {

void validate(const SynthConfig& c) {
  auto probability = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument(std::string("synth: ") + name + " must lie in [0, 1]");
  };
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw std::invalid_argument(std::string("synth: ") + name + " must be > 0");
  };
  if (c.topics.empty()) throw std::invalid_argument("synth: no topics");
  if (c.groups.empty()) throw std::invalid_argument("synth: no groups");
  if (c.days < 2) throw std::invalid_argument("synth: needs at least 2 days");
  for (const SynthGroupSpec& g : c.groups) {
    if (g.name.empty()) throw std::invalid_argument("synth: group with empty name");
    if (g.count == 0) throw std::invalid_argument("synth: group \"" + g.name + "\" is empty");
  }
  probability(c.level_persistence, "level_persistence");
  probability(c.coupling, "coupling");
  probability(c.specialist_fraction, "specialist_fraction");
  positive(c.events_per_actor_day, "events_per_actor_day");
  positive(c.burst_multiplier, "burst_multiplier");
  positive(c.leader_weight, "leader_weight");
  positive(c.funneler_weight, "funneler_weight");
  positive(c.receiver_weight, "receiver_weight");
  positive(c.specialist_boost, "specialist_boost");
  positive(c.follower_log_sigma, "follower_log_sigma");
}

double tier_weight(const SynthConfig& c, Tier tier) {
  switch (tier) {
    case Tier::leader: return c.leader_weight;
    case Tier::funneler: return c.funneler_weight;
    case Tier::receiver: return c.receiver_weight;
  }
  return 1.0;
}

struct ActorState {
  std::size_t roster_index = 0;
  Tier tier = Tier::receiver;
  int specialist_topic = -1;  // index into config.topics, -1 = none
};

}  // namespace

SynthResult generate(const SynthConfig& config) {
  validate(config);
  Rng rng(config.seed);

  SynthResult result;
  result.range = {config.start_ts,
                  config.start_ts + static_cast<std::int64_t>(config.days) * kSecondsPerDay};

  // Actors, follower counts, and specialist topics.
  std::vector<ActorState> actors;
  {
    Rng actor_rng = rng.fork(1);
    for (const SynthGroupSpec& spec : config.groups) {
      for (std::size_t i = 0; i < spec.count; ++i) {
        char id[64];
        std::snprintf(id, sizeof(id), "%s_%04zu", spec.name.c_str(), i);
        Actor actor;
        actor.actor_id = id;
        actor.display_name = id;
        actor.kind = spec.kind;
        actor.role = spec.role;
        actor.party = spec.party;
        actor.follower_count = static_cast<std::int64_t>(
            std::llround(actor_rng.lognormal(config.follower_log_mean,
                                             config.follower_log_sigma) *
                         spec.follower_multiplier));
        if (actor.follower_count < 1) actor.follower_count = 1;
        result.roster.actors.push_back(actor);

        SynthTruth truth;
        truth.actor_id = id;
        truth.group = spec.name;
        truth.tier = spec.tier;
        ActorState state;
        state.tier = spec.tier;
        if (actor_rng.bernoulli(config.specialist_fraction)) {
          state.specialist_topic =
              static_cast<int>(actor_rng.uniform_index(config.topics.size()));
          truth.specialist_topic = config.topics[static_cast<std::size_t>(state.specialist_topic)];
        }
        result.truth.push_back(truth);
        actors.push_back(state);
      }
    }
  }
  std::sort(result.roster.actors.begin(), result.roster.actors.end(),
            [](const Actor& a, const Actor& b) { return a.actor_id < b.actor_id; });
  std::sort(result.truth.begin(), result.truth.end(),
            [](const SynthTruth& a, const SynthTruth& b) { return a.actor_id < b.actor_id; });

  // Daily levels per (topic, tier): leaders follow a sticky Markov chain,
  // funnelers copy the leader level of the previous day, receivers copy the
  // funneler level of the previous day.
  const std::size_t n_topics = config.topics.size();
  const auto days = static_cast<std::size_t>(config.days);
  std::vector<std::vector<int>> leader_level(n_topics), funneler_level(n_topics),
      receiver_level(n_topics);
  {
    Rng level_rng = rng.fork(2);
    for (std::size_t topic = 0; topic < n_topics; ++topic) {
      auto& lead = leader_level[topic];
      auto& fun = funneler_level[topic];
      auto& recv = receiver_level[topic];
      lead.resize(days);
      fun.resize(days);
      recv.resize(days);
      for (std::size_t day = 0; day < days; ++day) {
        if (day == 0)
          lead[day] = level_rng.bernoulli(0.5) ? 1 : 0;
        else
          lead[day] = level_rng.bernoulli(config.level_persistence)
                          ? lead[day - 1]
                          : (level_rng.bernoulli(0.5) ? 1 : 0);
        fun[day] = (day > 0 && level_rng.bernoulli(config.coupling))
                       ? lead[day - 1]
                       : (level_rng.bernoulli(0.5) ? 1 : 0);
        recv[day] = (day > 0 && level_rng.bernoulli(config.coupling))
                        ? fun[day - 1]
                        : (level_rng.bernoulli(0.5) ? 1 : 0);
      }
    }
  }
  auto level_of = [&](Tier tier, std::size_t topic, std::size_t day) {
    switch (tier) {
      case Tier::leader: return leader_level[topic][day];
      case Tier::funneler: return funneler_level[topic][day];
      case Tier::receiver: return receiver_level[topic][day];
    }
    return 0;
  };

  // Attention weights: who authored the content an interaction lands on.
  // One table per topic; specialists weigh more on their own topic.
  std::vector<std::vector<double>> attention_cumulative(n_topics);
  const std::size_t n_actors = result.roster.actors.size();
  std::vector<std::size_t> state_of(n_actors);  // roster index -> actors[] index
  {
    // roster is sorted; map ids back to generation-order state
    std::map<std::string, std::size_t> position;
    std::size_t gen_index = 0;
    for (const SynthGroupSpec& spec : config.groups)
      for (std::size_t i = 0; i < spec.count; ++i) {
        char id[64];
        std::snprintf(id, sizeof(id), "%s_%04zu", spec.name.c_str(), i);
        position[id] = gen_index++;
      }
    for (std::size_t r = 0; r < n_actors; ++r)
      state_of[r] = position[result.roster.actors[r].actor_id];
  }
  for (std::size_t topic = 0; topic < n_topics; ++topic) {
    auto& cumulative = attention_cumulative[topic];
    cumulative.resize(n_actors);
    double total = 0.0;
    for (std::size_t r = 0; r < n_actors; ++r) {
      const ActorState& state = actors[state_of[r]];
      double w = tier_weight(config, state.tier);
      if (state.specialist_topic == static_cast<int>(topic)) w *= config.specialist_boost;
      total += w;
      cumulative[r] = total;
    }
  }

  // Events, day by day and topic by topic.
  const double base_rate = config.events_per_actor_day / static_cast<double>(n_topics);
  Rng event_rng = rng.fork(3);
  std::size_t event_counter = 0;
  static const InteractionKind kKinds[3] = {InteractionKind::retweet, InteractionKind::mention,
                                            InteractionKind::reply};
  for (std::size_t day = 0; day < days; ++day) {
    const std::int64_t day_start = config.start_ts + static_cast<std::int64_t>(day) * kSecondsPerDay;
    for (std::size_t topic = 0; topic < n_topics; ++topic) {
      const auto& cumulative = attention_cumulative[topic];
      const double total_attention = cumulative.back();
      for (std::size_t r = 0; r < n_actors; ++r) {
        const ActorState& state = actors[state_of[r]];
        double rate = base_rate;
        if (level_of(state.tier, topic, day)) rate *= config.burst_multiplier;
        if (state.specialist_topic == static_cast<int>(topic)) rate *= config.specialist_boost;
        const std::uint64_t count = event_rng.poisson(rate);
        for (std::uint64_t e = 0; e < count; ++e) {
          // author of the content this interaction lands on
          std::size_t source;
          do {
            const double pick = event_rng.next_double() * total_attention;
            source = static_cast<std::size_t>(
                std::lower_bound(cumulative.begin(), cumulative.end(), pick) -
                cumulative.begin());
            if (source >= n_actors) source = n_actors - 1;
          } while (source == r);

          Event event;
          char id[32];
          std::snprintf(id, sizeof(id), "e%08zu", event_counter++);
          event.event_id = id;
          event.source = result.roster.actors[source].actor_id;
          event.target = result.roster.actors[r].actor_id;
          event.kind = kKinds[event_rng.uniform_index(3)];
          event.ts = day_start + static_cast<std::int64_t>(event_rng.uniform_index(kSecondsPerDay));
          event.topics = {config.topics[topic]};
          result.events.push_back(std::move(event));
        }
      }
    }
  }
  return result;
}

namespace {

json group_to_json(const SynthGroupSpec& g) {
  json j;
  j["name"] = g.name;
  j["count"] = g.count;
  j["tier"] = to_string(g.tier);
  j["kind"] = to_string(g.kind);
  j["role"] = to_string(g.role);
  j["party"] = g.party;
  j["follower_multiplier"] = g.follower_multiplier;
  return j;
}

Tier tier_from_string(const std::string& text) {
  if (text == "leader") return Tier::leader;
  if (text == "funneler") return Tier::funneler;
  if (text == "receiver") return Tier::receiver;
  throw std::runtime_error("synth: unknown tier \"" + text + "\"");
}

SynthGroupSpec group_from_json(const json& j) {
  SynthGroupSpec g;
  g.name = j.at("name").get<std::string>();
  g.count = j.at("count").get<std::size_t>();
  g.tier = tier_from_string(j.at("tier").get<std::string>());
  if (j.contains("kind")) {
    auto kind = actor_kind_from_string(j.at("kind").get<std::string>());
    if (!kind) throw std::runtime_error("synth: unknown kind");
    g.kind = *kind;
  }
  if (j.contains("role")) {
    auto role = actor_role_from_string(j.at("role").get<std::string>());
    if (!role) throw std::runtime_error("synth: unknown role");
    g.role = *role;
  }
  if (j.contains("party")) g.party = j.at("party").get<std::string>();
  if (j.contains("follower_multiplier"))
    g.follower_multiplier = j.at("follower_multiplier").get<double>();
  return g;
}

}  // namespace

SynthConfig read_synth_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;

  SynthConfig c;
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("start")) {
    auto ts = parse_iso8601(j.at("start").get<std::string>());
    if (!ts) throw std::runtime_error("synth: bad start timestamp");
    c.start_ts = *ts;
  }
  if (j.contains("days")) c.days = j.at("days").get<int>();
  c.topics = j.at("topics").get<std::vector<std::string>>();
  for (const auto& g : j.at("groups")) c.groups.push_back(group_from_json(g));

  auto opt = [&](const char* name, double& slot) {
    if (j.contains(name)) slot = j.at(name).get<double>();
  };
  opt("leader_weight", c.leader_weight);
  opt("funneler_weight", c.funneler_weight);
  opt("receiver_weight", c.receiver_weight);
  opt("events_per_actor_day", c.events_per_actor_day);
  opt("burst_multiplier", c.burst_multiplier);
  opt("level_persistence", c.level_persistence);
  opt("coupling", c.coupling);
  opt("specialist_fraction", c.specialist_fraction);
  opt("specialist_boost", c.specialist_boost);
  opt("follower_log_mean", c.follower_log_mean);
  opt("follower_log_sigma", c.follower_log_sigma);
  return c;
}

void write_synth_config_file(const std::string& path, const SynthConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["start"] = format_iso8601(c.start_ts);
  j["days"] = c.days;
  j["topics"] = c.topics;
  j["groups"] = json::array();
  for (const SynthGroupSpec& g : c.groups) j["groups"].push_back(group_to_json(g));
  j["leader_weight"] = c.leader_weight;
  j["funneler_weight"] = c.funneler_weight;
  j["receiver_weight"] = c.receiver_weight;
  j["events_per_actor_day"] = c.events_per_actor_day;
  j["burst_multiplier"] = c.burst_multiplier;
  j["level_persistence"] = c.level_persistence;
  j["coupling"] = c.coupling;
  j["specialist_fraction"] = c.specialist_fraction;
  j["specialist_boost"] = c.specialist_boost;
  j["follower_log_mean"] = c.follower_log_mean;
  j["follower_log_sigma"] = c.follower_log_sigma;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

void write_truth_file(const std::string& path, const std::vector<SynthTruth>& truth) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_csv_row(out, {"actor_id", "group", "tier", "specialist_topic"});
  for (const SynthTruth& t : truth)
    write_csv_row(out, {t.actor_id, t.group, to_string(t.tier), t.specialist_topic});
}

std::vector<SynthTruth> read_truth_file(const std::string& path) {
  CsvTable table = read_csv_file(path);
  const int c_id = table.column("actor_id");
  const int c_group = table.column("group");
  const int c_tier = table.column("tier");
  const int c_specialist = table.column("specialist_topic");
  if (c_id < 0 || c_group < 0 || c_tier < 0 || c_specialist < 0)
    throw std::runtime_error("truth file: missing columns");
  std::vector<SynthTruth> truth;
  for (const auto& row : table.rows) {
    SynthTruth t;
    t.actor_id = row[c_id];
    t.group = row[c_group];
    t.tier = tier_from_string(row[c_tier]);
    t.specialist_topic = row[c_specialist];
    truth.push_back(std::move(t));
  }
  return truth;
}

}  // namespace nodality
