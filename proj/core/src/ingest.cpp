#include "nodality/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "nodality/csv.hpp"

namespace nodality {

using json = nlohmann::json;

std::string to_string(InteractionKind kind) {
  switch (kind) {
    case InteractionKind::retweet: return "retweet";
    case InteractionKind::mention: return "mention";
    case InteractionKind::reply: return "reply";
  }
  throw std::invalid_argument("bad InteractionKind");
}

std::optional<InteractionKind> interaction_kind_from_string(const std::string& text) {
  if (text == "retweet") return InteractionKind::retweet;
  if (text == "mention") return InteractionKind::mention;
  if (text == "reply") return InteractionKind::reply;
  return std::nullopt;
}

std::string to_string(ActorKind kind) {
  return kind == ActorKind::mp ? "mp" : "journalist";
}

std::string to_string(ActorRole role) {
  switch (role) {
    case ActorRole::cabinet: return "cabinet";
    case ActorRole::shadow_cabinet: return "shadow_cabinet";
    case ActorRole::government_backbench: return "government_backbench";
    case ActorRole::opposition_backbench: return "opposition_backbench";
    case ActorRole::journalist: return "journalist";
  }
  throw std::invalid_argument("bad ActorRole");
}

std::optional<ActorKind> actor_kind_from_string(const std::string& text) {
  if (text == "mp") return ActorKind::mp;
  if (text == "journalist") return ActorKind::journalist;
  return std::nullopt;
}

std::optional<ActorRole> actor_role_from_string(const std::string& text) {
  if (text == "cabinet") return ActorRole::cabinet;
  if (text == "shadow_cabinet") return ActorRole::shadow_cabinet;
  if (text == "government_backbench") return ActorRole::government_backbench;
  if (text == "opposition_backbench") return ActorRole::opposition_backbench;
  if (text == "journalist") return ActorRole::journalist;
  return std::nullopt;
}

namespace {

Event parse_event_json(const json& j) {
  Event e;
  e.event_id = j.at("event_id").get<std::string>();
  e.source = j.at("source").get<std::string>();
  e.target = j.at("target").get<std::string>();
  const auto kind_text = j.at("kind").get<std::string>();
  auto kind = interaction_kind_from_string(kind_text);
  if (!kind) throw std::runtime_error("unknown kind \"" + kind_text + "\"");
  e.kind = *kind;
  const auto ts_text = j.at("ts").get<std::string>();
  auto ts = parse_iso8601(ts_text);
  if (!ts) throw std::runtime_error("bad timestamp \"" + ts_text + "\"");
  e.ts = *ts;
  if (j.contains("topics")) {
    for (const auto& t : j.at("topics")) e.topics.push_back(t.get<std::string>());
    std::sort(e.topics.begin(), e.topics.end());
    e.topics.erase(std::unique(e.topics.begin(), e.topics.end()), e.topics.end());
  }
  if (j.contains("text_ref") && !j.at("text_ref").is_null())
    e.text_ref = j.at("text_ref").get<std::string>();
  if (e.event_id.empty()) throw std::runtime_error("empty event_id");
  if (e.source.empty() || e.target.empty()) throw std::runtime_error("empty actor id");
  return e;
}

}  // namespace

EventLog read_events(std::istream& in, const ParseOptions& options) {
  EventLog log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Event e;
    try {
      e = parse_event_json(json::parse(line));
    } catch (const std::exception& ex) {
      log.errors.push_back({line_no, ex.what()});
      continue;
    }
    if (e.source == e.target) {
      log.self_interactions.push_back(line_no);
      continue;
    }
    if (options.study_window && !options.study_window->contains(e.ts)) {
      ++log.out_of_window;
      continue;
    }
    log.events.push_back(std::move(e));
  }
  return log;
}

EventLog read_events_file(const std::string& path, const ParseOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_events(in, options);
}

void write_events(std::ostream& out, const std::vector<Event>& events) {
  for (const Event& e : events) {
    json j;
    j["event_id"] = e.event_id;
    j["source"] = e.source;
    j["target"] = e.target;
    j["kind"] = to_string(e.kind);
    j["ts"] = format_iso8601(e.ts);
    j["topics"] = e.topics;
    if (!e.text_ref.empty()) j["text_ref"] = e.text_ref;
    out << j.dump() << '\n';
  }
}

void write_events_file(const std::string& path, const std::vector<Event>& events) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_events(out, events);
}

const Actor* Roster::find(const std::string& actor_id) const {
  auto it = std::lower_bound(actors.begin(), actors.end(), actor_id,
                             [](const Actor& a, const std::string& id) { return a.actor_id < id; });
  if (it == actors.end() || it->actor_id != actor_id) return nullptr;
  return &*it;
}

Roster read_roster(std::istream& in) {
  CsvTable table = read_csv(in);
  const char* required[] = {"actor_id", "display_name", "kind",
                            "role",     "party",        "follower_count"};
  for (const char* name : required)
    if (table.column(name) < 0)
      throw std::runtime_error("roster: missing column \"" + std::string(name) + "\"");
  const int c_id = table.column("actor_id");
  const int c_name = table.column("display_name");
  const int c_kind = table.column("kind");
  const int c_role = table.column("role");
  const int c_party = table.column("party");
  const int c_followers = table.column("follower_count");

  Roster roster;
  for (const auto& row : table.rows) {
    Actor a;
    a.actor_id = row[c_id];
    a.display_name = row[c_name];
    auto kind = actor_kind_from_string(row[c_kind]);
    if (!kind) throw std::runtime_error("roster: unknown kind \"" + row[c_kind] + "\"");
    a.kind = *kind;
    auto role = actor_role_from_string(row[c_role]);
    if (!role) throw std::runtime_error("roster: unknown role \"" + row[c_role] + "\"");
    a.role = *role;
    a.party = row[c_party];
    try {
      a.follower_count = std::stoll(row[c_followers]);
    } catch (const std::exception&) {
      throw std::runtime_error("roster: bad follower_count \"" + row[c_followers] + "\"");
    }
    if (a.follower_count < 0)
      throw std::runtime_error("roster: negative follower_count for " + a.actor_id);
    const bool role_is_journalist = a.role == ActorRole::journalist;
    if (role_is_journalist != (a.kind == ActorKind::journalist))
      throw std::runtime_error("roster: role/kind mismatch for " + a.actor_id);
    if (a.actor_id.empty()) throw std::runtime_error("roster: empty actor_id");
    roster.actors.push_back(std::move(a));
  }
  std::sort(roster.actors.begin(), roster.actors.end(),
            [](const Actor& a, const Actor& b) { return a.actor_id < b.actor_id; });
  for (std::size_t i = 1; i < roster.actors.size(); ++i)
    if (roster.actors[i].actor_id == roster.actors[i - 1].actor_id)
      throw std::runtime_error("roster: duplicate actor_id \"" + roster.actors[i].actor_id + "\"");
  return roster;
}

Roster read_roster_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_roster(in);
}

void write_roster(std::ostream& out, const Roster& roster) {
  write_csv_row(out, {"actor_id", "display_name", "kind", "role", "party", "follower_count"});
  for (const Actor& a : roster.actors)
    write_csv_row(out, {a.actor_id, a.display_name, to_string(a.kind), to_string(a.role), a.party,
                        std::to_string(a.follower_count)});
}

void write_roster_file(const std::string& path, const Roster& roster) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_roster(out, roster);
}

std::size_t filter_to_roster(std::vector<Event>& events, const Roster& roster) {
  const std::size_t before = events.size();
  std::erase_if(events, [&](const Event& e) {
    return roster.find(e.source) == nullptr || roster.find(e.target) == nullptr;
  });
  return before - events.size();
}

std::map<std::string, std::string> assign_groups(const Roster& roster,
                                                 const GroupOptions& options) {
  if (roster.actors.empty()) throw std::invalid_argument("assign_groups: empty roster");
  if (!(options.decile > 0.0 && options.decile < 1.0))
    throw std::invalid_argument("assign_groups: decile must lie in (0, 1)");

  std::map<std::string, std::string> groups;
  std::vector<const Actor*> journalists;
  for (const Actor& a : roster.actors) {
    if (a.kind == ActorKind::journalist) {
      journalists.push_back(&a);
      continue;
    }
    switch (a.role) {
      case ActorRole::cabinet: groups[a.actor_id] = kGroupCabinet; break;
      case ActorRole::shadow_cabinet: groups[a.actor_id] = kGroupShadowCabinet; break;
      case ActorRole::government_backbench: groups[a.actor_id] = kGroupGovernmentBackbench; break;
      case ActorRole::opposition_backbench: groups[a.actor_id] = kGroupOppositionBackbench; break;
      case ActorRole::journalist:
        throw std::runtime_error("assign_groups: MP with journalist role: " + a.actor_id);
    }
  }

  if (journalists.empty()) {
    if (options.require_journalists)
      throw std::runtime_error("assign_groups: no journalists on the roster");
    return groups;
  }

  // Boundary count at rank ceil(decile * n) of the descending follower
  // order; every journalist at or above it is prominent, so ties at the
  // cut are kept and the result does not depend on roster order.
  std::vector<std::int64_t> counts;
  counts.reserve(journalists.size());
  for (const Actor* j : journalists) counts.push_back(j->follower_count);
  std::sort(counts.begin(), counts.end(), std::greater<>());
  std::size_t rank = static_cast<std::size_t>(
      std::ceil(options.decile * static_cast<double>(counts.size())));
  if (rank == 0) rank = 1;
  const std::int64_t threshold = counts[rank - 1];

  for (const Actor* j : journalists)
    groups[j->actor_id] =
        j->follower_count >= threshold ? kGroupProminentJournalist : kGroupOtherJournalist;
  return groups;
}

}  // namespace nodality
