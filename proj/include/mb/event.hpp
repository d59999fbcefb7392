#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mb/graph.hpp"
#include "mb/time.hpp"

namespace mb {

enum class EventKind { View, Modify, Annotate, Create, Complete, ContextSwitch };

inline constexpr std::array<EventKind, 6> kAllEventKinds = {
    EventKind::View,   EventKind::Modify,   EventKind::Annotate,
    EventKind::Create, EventKind::Complete, EventKind::ContextSwitch,
};

inline std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::View: return "View";
    case EventKind::Modify: return "Modify";
    case EventKind::Annotate: return "Annotate";
    case EventKind::Create: return "Create";
    case EventKind::Complete: return "Complete";
    case EventKind::ContextSwitch: return "ContextSwitch";
  }
  return "View";
}

inline std::optional<EventKind> event_kind_from_string(std::string_view name) {
  for (EventKind k : kAllEventKinds) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

inline bool is_interaction(EventKind kind) { return kind != EventKind::ContextSwitch; }

struct Event {
  Timestamp timestamp;
  ThingId actor;
  EventKind kind = EventKind::View;
  std::optional<ThingId> target;
  std::optional<ThingId> context;

  friend bool operator==(const Event&, const Event&) = default;
};

struct Scenario {
  std::string name;
  Graph graph;
  std::vector<Event> events;
  Timestamp horizon;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

// Shape rules for a single event, independent of any graph.
inline std::optional<std::string> event_shape_violation(const Event& e) {
  if (e.timestamp.time_since_epoch().count() <= 0) return "timestamp must be positive";
  if (e.actor.empty()) return "missing actor";
  if (e.kind == EventKind::ContextSwitch) {
    if (!e.context) return "ContextSwitch requires a context";
    if (e.target) return "ContextSwitch must not carry a target";
  } else if (!e.target) {
    return std::string(to_string(e.kind)) + " requires a target";
  }
  return std::nullopt;
}

// Reference rules: returns the first id that does not resolve (or resolves
// to a thing of the wrong type), paired with a description.
inline std::optional<std::pair<std::string, std::string>> event_reference_violation(
    const Event& e, const Graph& g) {
  const Thing* actor = g.find(e.actor);
  if (!actor) return std::pair{e.actor, "actor does not resolve"};
  if (actor->type != ThingType::User) return std::pair{e.actor, "actor is not a User"};
  if (e.target) {
    const Thing* target = g.find(*e.target);
    if (!target) return std::pair{*e.target, "target does not resolve"};
    if (e.kind == EventKind::Complete && target->type != ThingType::Task &&
        target->type != ThingType::CalendarEvent) {
      return std::pair{*e.target, "Complete target must be a Task or CalendarEvent"};
    }
  }
  if (e.context) {
    const Thing* ctx = g.find(*e.context);
    if (!ctx) return std::pair{*e.context, "context does not resolve"};
    if (ctx->type != ThingType::Context) return std::pair{*e.context, "context is not a Context"};
  }
  return std::nullopt;
}

// Re-checks every scenario invariant; an empty result means valid.
inline std::vector<std::string> validate(const Scenario& s) {
  std::vector<std::string> out;
  for (const Thing* t : s.graph.things()) {
    if (t->literals.empty() || t->literals.front().empty()) {
      out.push_back("thing " + t->id + ": no label");
    }
    if (t->event_start.has_value() != (t->type == ThingType::CalendarEvent)) {
      out.push_back("thing " + t->id + ": event_start must be present exactly for CalendarEvent");
    }
  }
  for (const Relation& r : s.graph.relations()) {
    if (r.source == r.target) out.push_back("relation self-loop on " + r.source);
    if (!s.graph.contains(r.source) || !s.graph.contains(r.target)) {
      out.push_back("relation endpoint does not resolve: " + r.source + " -> " + r.target);
    }
  }
  for (std::size_t i = 0; i < s.events.size(); ++i) {
    const Event& e = s.events[i];
    const std::string at = "event " + std::to_string(i) + ": ";
    if (auto v = event_shape_violation(e)) out.push_back(at + *v);
    if (auto v = event_reference_violation(e, s.graph)) {
      out.push_back(at + v->second + " ('" + v->first + "')");
    }
    if (i > 0 && e.timestamp < s.events[i - 1].timestamp) {
      out.push_back(at + "timestamp earlier than the previous event");
    }
  }
  if (!s.events.empty() && s.horizon < s.events.back().timestamp) {
    out.push_back("horizon precedes the last event");
  }
  return out;
}

}  // namespace mb
