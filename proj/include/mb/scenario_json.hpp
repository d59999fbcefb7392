#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "mb/event.hpp"
#include "mb/graph_json.hpp"

namespace mb {

inline Json event_to_json(const Event& e) {
  Json j;
  j["t"] = format_timestamp(e.timestamp);
  j["actor"] = e.actor;
  j["kind"] = std::string(to_string(e.kind));
  if (e.target) j["target"] = *e.target;
  if (e.context) j["context"] = *e.context;
  return j;
}

inline Json scenario_to_json(const Scenario& s) {
  Json events = Json::array();
  for (const Event& e : s.events) events.push_back(event_to_json(e));
  Json j;
  j["name"] = s.name;
  j["horizon"] = format_timestamp(s.horizon);
  j["graph"] = graph_to_json(s.graph);
  j["events"] = std::move(events);
  return j;
}

inline std::string serialize_scenario(const Scenario& s) {
  return scenario_to_json(s).dump(2) + "\n";
}

inline Event event_from_json(const Json& j, std::size_t index) {
  using namespace detail;
  const std::string where = "events[" + std::to_string(index) + "]";
  if (!j.is_object()) malformed(where, "expected an object");
  reject_unknown_keys(j, {"t", "actor", "kind", "target", "context"}, where);
  Event e;
  e.timestamp = require_timestamp(j, "t", where);
  e.actor = require_string(j, "actor", where);
  const std::string kind = require_string(j, "kind", where);
  auto k = event_kind_from_string(kind);
  if (!k) malformed(where + ".kind", "unknown event kind '" + kind + "'");
  e.kind = *k;
  if (j.contains("target")) e.target = require_string(j, "target", where);
  if (j.contains("context")) e.context = require_string(j, "context", where);
  return e;
}

// Parses and fully validates a scenario document. Either returns a valid
// Scenario or throws; no partially built state escapes.
inline Scenario parse_scenario(std::string_view text) {
  using namespace detail;
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::MalformedDocument, e.what());
  }
  if (!doc.is_object()) malformed("scenario", "expected an object");
  reject_unknown_keys(doc, {"name", "horizon", "graph", "events"}, "scenario");
  Scenario s;
  s.name = require_string(doc, "name", "scenario");
  s.horizon = require_timestamp(doc, "horizon", "scenario");
  s.graph = graph_from_json(require_field(doc, "graph", "scenario"));
  const Json& events = require_field(doc, "events", "scenario");
  if (!events.is_array()) malformed("scenario.events", "expected an array");
  for (std::size_t i = 0; i < events.size(); ++i) {
    Event e = event_from_json(events[i], i);
    if (auto v = event_shape_violation(e)) {
      throw ScenarioError(ErrorCode::MalformedDocument, i, *v);
    }
    if (auto v = event_reference_violation(e, s.graph)) {
      throw ScenarioError(ErrorCode::UnknownReference, i,
                          v->second + " ('" + v->first + "')");
    }
    if (!s.events.empty() && e.timestamp < s.events.back().timestamp) {
      throw ScenarioError(ErrorCode::UnsortedEvents, i, "timestamp earlier than previous event");
    }
    s.events.push_back(std::move(e));
  }
  if (!s.events.empty() && s.horizon < s.events.back().timestamp) {
    malformed("scenario.horizon", "horizon precedes the last event");
  }
  return s;
}

}  // namespace mb
