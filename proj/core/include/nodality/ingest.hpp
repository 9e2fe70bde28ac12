#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nodality/timeutil.hpp"

namespace nodality {

/// How one actor engaged with another actor's content.
enum class InteractionKind { retweet, mention, reply };

std::string to_string(InteractionKind kind);
std::optional<InteractionKind> interaction_kind_from_string(const std::string& text);

/// One interaction record. `source` authored the content, `target` is the
/// actor who retweeted, mentioned, or replied to it. Edges in the discourse
/// graph therefore run source -> target.
struct Event {
  std::string event_id;
  std::string source;
  std::string target;
  InteractionKind kind = InteractionKind::reply;
  std::int64_t ts = 0;
  std::vector<std::string> topics;
  std::string text_ref;  // optional pointer into a text corpus

  bool operator==(const Event&) const = default;
};

struct ParseError {
  std::size_t line = 0;  // 1-based
  std::string message;
};

/// Result of reading an event stream. Malformed lines are reported, not
/// fatal; self-interactions and events outside the study window are dropped
/// but counted so callers can surface data-quality numbers.
struct EventLog {
  std::vector<Event> events;  // input order
  std::vector<ParseError> errors;
  std::vector<std::size_t> self_interactions;  // 1-based line numbers
  std::size_t out_of_window = 0;
};

struct ParseOptions {
  std::optional<TimeWindow> study_window;
};

/// Reads newline-delimited JSON events, one record per line.
EventLog read_events(std::istream& in, const ParseOptions& options = {});
EventLog read_events_file(const std::string& path, const ParseOptions& options = {});

void write_events(std::ostream& out, const std::vector<Event>& events);
void write_events_file(const std::string& path, const std::vector<Event>& events);

/// A participant in the discourse: a member of parliament or a journalist.
enum class ActorKind { mp, journalist };

/// Institutional position. Journalists always carry ActorRole::journalist;
/// MPs carry one of the four parliamentary roles.
enum class ActorRole {
  cabinet,
  shadow_cabinet,
  government_backbench,
  opposition_backbench,
  journalist,
};

std::string to_string(ActorKind kind);
std::string to_string(ActorRole role);
std::optional<ActorKind> actor_kind_from_string(const std::string& text);
std::optional<ActorRole> actor_role_from_string(const std::string& text);

struct Actor {
  std::string actor_id;
  std::string display_name;
  ActorKind kind = ActorKind::mp;
  ActorRole role = ActorRole::government_backbench;
  std::string party;  // optional
  std::int64_t follower_count = 0;

  bool operator==(const Actor&) const = default;
};

/// Roster keyed by actor id, sorted for binary search.
struct Roster {
  std::vector<Actor> actors;  // sorted by actor_id

  const Actor* find(const std::string& actor_id) const;
  std::size_t size() const { return actors.size(); }
};

/// Reads the roster table. Throws on duplicate actor ids, unknown kind or
/// role strings, negative follower counts, and role/kind mismatches.
Roster read_roster(std::istream& in);
Roster read_roster_file(const std::string& path);
void write_roster(std::ostream& out, const Roster& roster);
void write_roster_file(const std::string& path, const Roster& roster);

/// Removes events whose source or target is not on the roster. Returns the
/// number of events dropped.
std::size_t filter_to_roster(std::vector<Event>& events, const Roster& roster);

/// Group labels used by the influence tables.
inline constexpr const char* kGroupCabinet = "cabinet";
inline constexpr const char* kGroupShadowCabinet = "shadow_cabinet";
inline constexpr const char* kGroupGovernmentBackbench = "government_backbench";
inline constexpr const char* kGroupOppositionBackbench = "opposition_backbench";
inline constexpr const char* kGroupProminentJournalist = "prominent_journalist";
inline constexpr const char* kGroupOtherJournalist = "other_journalist";

struct GroupOptions {
  /// Fraction of journalists (by follower count, descending) classed as
  /// prominent. Everyone whose count ties the boundary value is included.
  double decile = 0.10;
  /// When true, a roster without journalists is an error instead of simply
  /// producing no journalist groups.
  bool require_journalists = false;
};

/// Maps every rostered actor to exactly one group: MPs by role, journalists
/// split at the follower-count quantile. Order-independent.
std::map<std::string, std::string> assign_groups(const Roster& roster,
                                                 const GroupOptions& options = {});

}  // namespace nodality
