#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "mb/error.hpp"
#include "mb/event.hpp"
#include "mb/graph.hpp"
#include "mb/time.hpp"

namespace mb {

inline constexpr std::array<std::string_view, 5> kTemplateNames = {
    "solo-task", "group-task", "group-task-readers", "before-after-event", "rome-trip",
};

using TemplateParams = std::map<std::string, std::string>;

namespace gen {

// std::mt19937_64's output sequence is fixed by the standard; distributions
// are not, so draws are derived from raw output to stay portable.
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}
  std::int64_t below(std::int64_t n) { return static_cast<std::int64_t>(rng_() % static_cast<std::uint64_t>(n)); }
  bool chance(int percent) { return below(100) < percent; }

 private:
  std::mt19937_64 rng_;
};

class ParamReader {
 public:
  explicit ParamReader(const TemplateParams& params) : params_(params) {}

  std::int64_t integer(const std::string& key, std::int64_t fallback, std::int64_t lo, std::int64_t hi) {
    used_.push_back(key);
    auto it = params_.find(key);
    if (it == params_.end()) return fallback;
    std::int64_t v = 0;
    const std::string& s = it->second;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
      throw Error(ErrorCode::BadParam, key + "='" + s + "' is not an integer");
    }
    if (v < lo || v > hi) {
      throw Error(ErrorCode::BadParam,
                  key + " must lie in [" + std::to_string(lo) + "," + std::to_string(hi) + "]");
    }
    return v;
  }

  void reject_unused() const {
    for (const auto& [k, v] : params_) {
      if (std::find(used_.begin(), used_.end(), k) == used_.end()) {
        throw Error(ErrorCode::BadParam, "unknown parameter '" + k + "'");
      }
    }
  }

 private:
  const TemplateParams& params_;
  std::vector<std::string> used_;
};

// Collects events, then orders them by time keeping insertion order on ties.
class Timeline {
 public:
  void add(Timestamp t, ThingId actor, EventKind kind, std::optional<ThingId> target,
           std::optional<ThingId> context = std::nullopt) {
    events_.push_back({t, std::move(actor), kind, std::move(target), std::move(context)});
  }
  void view(Timestamp t, const ThingId& who, const ThingId& what) { add(t, who, EventKind::View, what); }
  void touch(Timestamp t, const ThingId& who, EventKind kind, const ThingId& what) { add(t, who, kind, what); }
  void enter(Timestamp t, const ThingId& who, const ThingId& ctx) {
    add(t, who, EventKind::ContextSwitch, std::nullopt, ctx);
  }

  std::vector<Event> finish() {
    std::stable_sort(events_.begin(), events_.end(),
                     [](const Event& a, const Event& b) { return a.timestamp < b.timestamp; });
    return std::move(events_);
  }

 private:
  std::vector<Event> events_;
};

inline Timestamp at(Timestamp day0, std::int64_t day, int hour, std::int64_t minute = 0) {
  return day0 + day * kDay + std::chrono::hours{hour} + std::chrono::minutes{minute};
}

inline ThingOptions with_id(std::string id, std::optional<Timestamp> event_start = std::nullopt) {
  ThingOptions options;
  options.id = std::move(id);
  options.event_start = event_start;
  return options;
}

inline const ThingId& add(Graph& g, const char* id, const char* label, ThingType type) {
  return g.add_thing(label, type, with_id(id));
}

inline Scenario finish(std::string name, Graph graph, Timeline& timeline, Duration tail) {
  Scenario s;
  s.name = std::move(name);
  s.graph = std::move(graph);
  s.events = timeline.finish();
  s.horizon = s.events.empty() ? Timestamp{} : s.events.back().timestamp + tail;
  return s;
}

inline Scenario solo_task(std::uint64_t seed, ParamReader& params) {
  const auto days = params.integer("days", 10, 1, 365);
  params.reject_unused();
  Draw draw(seed);
  Graph g;
  add(g, "user:alice", "Alice", ThingType::User);
  add(g, "task:report", "Write project report", ThingType::Task);
  add(g, "project:mf", "Managed Forgetting", ThingType::Project);
  add(g, "person:bob", "Bob Miller", ThingType::Person);
  add(g, "doc:draft", "Report draft", ThingType::Document);
  g.add_relation("task:report", "project:mf", "partOf");
  g.add_relation("task:report", "user:alice", "assignedTo");
  g.add_relation("doc:draft", "task:report", "attachedTo");
  g.add_relation("person:bob", "project:mf", "involvedIn");

  const Timestamp day0 = parse_timestamp("2018-01-08T09:00:00Z");
  Timeline tl;
  for (std::int64_t d = 0; d < days; ++d) {
    tl.touch(at(day0, d, 0, draw.below(60)), "user:alice", EventKind::Modify, "task:report");
  }
  return finish("solo-task", std::move(g), tl, 12 * kHour);
}

inline Graph group_graph(std::int64_t users) {
  Graph g;
  for (std::int64_t u = 1; u <= users; ++u) {
    g.add_thing("User " + std::to_string(u), ThingType::User,
                with_id("user:" + std::to_string(u)));
  }
  add(g, "ctx:group", "Joint deliverable", ThingType::Context);
  add(g, "project:mf", "Managed Forgetting", ThingType::Project);
  add(g, "task:deliverable", "Prepare joint deliverable", ThingType::Task);
  add(g, "doc:draft", "Deliverable draft", ThingType::Document);
  add(g, "doc:notes", "Meeting notes", ThingType::Document);
  add(g, "email:kickoff", "Kick-off for the deliverable", ThingType::Email);
  g.add_relation("task:deliverable", "project:mf", "partOf");
  g.add_relation("doc:draft", "task:deliverable", "attachedTo");
  g.add_relation("doc:notes", "task:deliverable", "attachedTo");
  g.add_relation("email:kickoff", "task:deliverable", "about");
  for (const char* member : {"task:deliverable", "doc:draft", "doc:notes", "email:kickoff"}) {
    g.add_relation(member, "ctx:group", std::string(kMemberOfContext));
  }
  for (std::int64_t u = 1; u <= users; ++u) {
    g.add_relation("user:" + std::to_string(u), "project:mf", "memberOf");
  }
  return g;
}

inline Scenario group_task(std::uint64_t seed, ParamReader& params, bool with_readers) {
  const auto users = params.integer("users", with_readers ? 4 : 3, 2, 20);
  const auto readers = with_readers ? params.integer("readers", 2, 1, 19) : 0;
  const auto days = params.integer("days", 10, 1, 365);
  params.reject_unused();
  if (readers >= users) throw Error(ErrorCode::BadParam, "readers must be fewer than users");
  Draw draw(seed);
  Graph g = group_graph(users);

  const std::array<const char*, 3> work = {"task:deliverable", "doc:draft", "doc:notes"};
  const Timestamp day0 = parse_timestamp("2018-01-08T08:00:00Z");
  Timeline tl;
  tl.touch(at(day0, 0, 0), "user:1", EventKind::Create, "email:kickoff");
  for (std::int64_t u = 1; u <= users; ++u) {
    tl.enter(at(day0, 0, 0, u), "user:" + std::to_string(u), "ctx:group");
  }
  const std::int64_t active = users - readers;
  for (std::int64_t d = 0; d < days; ++d) {
    for (std::int64_t u = 1; u <= users; ++u) {
      const ThingId who = "user:" + std::to_string(u);
      const bool reader = u > active;
      if (!draw.chance(reader ? 50 : 75)) continue;
      const Timestamp t = at(day0, d, 1, draw.below(480));
      const ThingId what = work[static_cast<std::size_t>(draw.below(3))];
      if (reader) {
        tl.view(t, who, what);
        continue;
      }
      static constexpr std::array<EventKind, 3> kinds = {EventKind::Modify, EventKind::Annotate,
                                                         EventKind::View};
      tl.touch(t, who, kinds[static_cast<std::size_t>(draw.below(3))], what);
    }
  }
  return finish(with_readers ? "group-task-readers" : "group-task", std::move(g), tl, kDay);
}

inline Scenario before_after_event(std::uint64_t seed, ParamReader& params) {
  const auto before = params.integer("days_before", 5, 1, 60);
  const auto after = params.integer("days_after", 7, 1, 120);
  params.reject_unused();
  Draw draw(seed);
  const Timestamp day0 = parse_timestamp("2018-03-05T09:00:00Z");
  const Timestamp start = at(day0, before, 1);

  Graph g;
  add(g, "user:1", "User1", ThingType::User);
  add(g, "user:2", "User2", ThingType::User);
  g.add_thing("Project review meeting", ThingType::CalendarEvent,
              with_id("cal:review", start));
  add(g, "person:carol", "Carol Reviewer", ThingType::Person);
  add(g, "pres:slides", "Review slides", ThingType::Presentation);
  add(g, "task:prep", "Prepare project review", ThingType::Task);
  add(g, "email:invite", "Invitation: project review", ThingType::Email);
  add(g, "doc:other", "Unrelated working paper", ThingType::Document);
  g.add_relation("user:1", "cal:review", std::string(kAttendee));
  g.add_relation("user:2", "cal:review", std::string(kAttendee));
  g.add_relation("person:carol", "cal:review", std::string(kAttendee));
  g.add_relation("pres:slides", "cal:review", "attachedTo");
  g.add_relation("task:prep", "cal:review", "preparationFor");
  g.add_relation("email:invite", "cal:review", "about");

  Timeline tl;
  tl.view(at(day0, 0, 0, 5), "user:1", "email:invite");
  tl.view(at(day0, 0, 0, 20), "user:2", "email:invite");
  for (std::int64_t d = 0; d < before; ++d) {
    tl.touch(at(day0, d, 1, draw.below(300)), "user:1", EventKind::Modify, "pres:slides");
    tl.touch(at(day0, d, 2, draw.below(300)), "user:2", EventKind::Modify, "task:prep");
  }
  tl.view(start, "user:1", "cal:review");
  tl.view(start + std::chrono::minutes{2}, "user:2", "cal:review");
  tl.touch(start + 3 * kHour, "user:2", EventKind::Complete, "task:prep");
  tl.touch(start + 3 * kHour + std::chrono::minutes{5}, "user:1", EventKind::Complete, "cal:review");
  for (std::int64_t d = 1; d <= after; ++d) {
    tl.touch(at(day0, before + d, 0, draw.below(240)), "user:1", EventKind::Modify, "doc:other");
    if (draw.chance(50)) tl.view(at(day0, before + d, 5, draw.below(120)), "user:2", "doc:other");
  }
  return finish("before-after-event", std::move(g), tl, kDay);
}

inline Scenario rome_trip(std::uint64_t seed, ParamReader& params) {
  const auto mannheim_days = params.integer("mannheim_days", 30, 1, 365);
  params.reject_unused();
  Draw draw(seed);
  const Timestamp day0 = parse_timestamp("2018-06-18T09:00:00Z");
  const std::int64_t leave = 3;
  const std::int64_t back = leave + mannheim_days;

  Graph g;
  add(g, "user:1", "User1", ThingType::User);
  add(g, "user:2", "User2", ThingType::User);
  add(g, "ctx:rome", "Trip to Rome in July 2018", ThingType::Context);
  add(g, "ctx:mannheim", "Meeting in Mannheim", ThingType::Context);
  add(g, "ctx:mf", "Managed Forgetting project", ThingType::Context);
  add(g, "person:peter", "Peter Stainer", ThingType::Person);
  add(g, "place:mannheim", "Mannheim", ThingType::Generic);
  add(g, "web:db", "Deutsche Bahn", ThingType::WebPage);
  add(g, "email:hotel-question", "Which hotel should we stay at in Rome?", ThingType::Email);
  add(g, "email:hotel-answer", "Re: Which hotel should we stay at in Rome?", ThingType::Email);
  add(g, "doc:db-ticket", "DB ticket Mannheim - Rome", ThingType::Document);
  add(g, "web:hotel-a", "Hotel Roma Centro", ThingType::WebPage);
  add(g, "web:hotel-b", "Hotel Trastevere", ThingType::WebPage);
  add(g, "doc:agenda", "Agenda Mannheim meeting", ThingType::Document);
  g.add_thing("Mannheim meeting", ThingType::CalendarEvent,
              with_id("cal:mannheim", at(day0, back - 2, 1)));
  add(g, "project:mf", "Managed Forgetting", ThingType::Project);
  add(g, "doc:mf-plan", "Managed Forgetting work plan", ThingType::Document);

  const std::string member(kMemberOfContext);
  for (const char* m : {"person:peter", "place:mannheim", "web:db", "email:hotel-question",
                        "email:hotel-answer", "doc:db-ticket", "web:hotel-a", "web:hotel-b"}) {
    g.add_relation(m, "ctx:rome", member);
  }
  for (const char* m : {"person:peter", "place:mannheim", "web:db", "doc:agenda", "cal:mannheim"}) {
    g.add_relation(m, "ctx:mannheim", member);
  }
  for (const char* m : {"web:db", "project:mf", "doc:mf-plan"}) g.add_relation(m, "ctx:mf", member);
  g.add_relation("email:hotel-answer", "email:hotel-question", "replyTo");
  g.add_relation("email:hotel-question", "person:peter", "to");
  g.add_relation("email:hotel-question", "web:hotel-a", "mentions");
  g.add_relation("doc:db-ticket", "web:db", "bookedVia");
  g.add_relation("doc:agenda", "cal:mannheim", "attachedTo");
  g.add_relation("cal:mannheim", "place:mannheim", "location");
  for (const char* a : {"user:1", "user:2", "person:peter"}) {
    g.add_relation(a, "cal:mannheim", std::string(kAttendee));
  }
  g.add_relation("doc:mf-plan", "project:mf", "partOf");

  Timeline tl;
  // Planning the Rome trip.
  tl.enter(at(day0, 0, 0), "user:1", "ctx:rome");
  tl.view(at(day0, 0, 0, 10), "user:1", "person:peter");
  tl.touch(at(day0, 0, 0, 30), "user:1", EventKind::Create, "email:hotel-question");
  tl.enter(at(day0, 0, 1), "user:2", "ctx:mf");
  tl.view(at(day0, 0, 1, 15), "user:2", "web:db");
  tl.touch(at(day0, 0, 2), "user:2", EventKind::Modify, "doc:mf-plan");
  tl.view(at(day0, 1, 0, 5), "user:1", "email:hotel-answer");
  tl.view(at(day0, 1, 0, 40), "user:1", "web:db");
  tl.touch(at(day0, 1, 1), "user:1", EventKind::Create, "doc:db-ticket");
  tl.view(at(day0, 1, 2), "user:1", "web:hotel-a");
  tl.view(at(day0, 1, 2, 20), "user:1", "web:hotel-b");
  tl.view(at(day0, 1, 5), "user:1", "web:hotel-b");
  tl.view(at(day0, 1, 6), "user:1", "place:mannheim");
  tl.enter(at(day0, 1, 1, 30), "user:2", "ctx:mannheim");
  tl.view(at(day0, 1, 1, 45), "user:2", "web:db");
  tl.touch(at(day0, 2, 0), "user:1", EventKind::Modify, "doc:db-ticket");
  tl.view(at(day0, 2, 0, 30), "user:1", "web:hotel-a");
  tl.view(at(day0, 2, 3), "user:2", "web:db");

  // Planning a different meeting that shares Peter, Mannheim and Deutsche Bahn.
  tl.enter(at(day0, leave, 0), "user:1", "ctx:mannheim");
  for (std::int64_t d = leave; d < back; ++d) {
    tl.view(at(day0, d, 0, 5 + draw.below(50)), "user:1", "person:peter");
    tl.view(at(day0, d, 1, draw.below(60)), "user:1", "web:db");
    tl.view(at(day0, d, 2, draw.below(60)), "user:1", "place:mannheim");
    tl.touch(at(day0, d, 3, draw.below(60)), "user:1", EventKind::Modify, "doc:agenda");
    if ((d - leave) % 2 == 0) {
      tl.view(at(day0, d, 4, draw.below(60)), "user:2", "web:db");
      tl.touch(at(day0, d, 5, draw.below(60)), "user:2", EventKind::Annotate, "doc:agenda");
    }
  }

  // Back to Rome.
  tl.enter(at(day0, back, 0), "user:1", "ctx:rome");
  tl.view(at(day0, back, 1), "user:1", "web:hotel-a");
  return finish("rome-trip", std::move(g), tl, kDay);
}

}  // namespace gen

// Deterministic in (name, seed, params): identical calls yield identical
// scenarios, byte for byte once serialized.
inline Scenario generate_scenario(std::string_view name, std::uint64_t seed,
                                  const TemplateParams& params = {}) {
  gen::ParamReader reader(params);
  if (name == "solo-task") return gen::solo_task(seed, reader);
  if (name == "group-task") return gen::group_task(seed, reader, false);
  if (name == "group-task-readers") return gen::group_task(seed, reader, true);
  if (name == "before-after-event") return gen::before_after_event(seed, reader);
  if (name == "rome-trip") return gen::rome_trip(seed, reader);
  throw Error(ErrorCode::UnknownTemplate, std::string(name));
}

}  // namespace mb
