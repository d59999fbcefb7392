#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "mb/engine.hpp"
#include "mb/graph_json.hpp"
#include "mb/params.hpp"

namespace mb {

// Engine state document, format "mb-state/1":
//
//   format          "mb-state/1"
//   graph           graph snapshot (things carry completion flags)
//   params          full parameter set
//   wall_time       ISO-8601 or null: the engine's present
//   rules_cursor    ISO-8601 or null: time rules fired up to here
//   active_contexts {user: context}
//   clocks          {idle_cap_seconds, users: {user: [[wall, activity_s], ...]}, group: [...]}
//   records         {local: [...], global: [...], group: [...]}, each entry
//                   {keys..., base, last_update, history, last_stimulation, frozen, frozen_at}
//   cursor          optional harness progress {scenario, events_applied}
inline constexpr std::string_view kStateFormat = "mb-state/1";

struct RunCursor {
  std::string scenario;
  std::size_t events_applied = 0;
  friend bool operator==(const RunCursor&, const RunCursor&) = default;
};

namespace detail {

inline Json optional_time(const std::optional<Timestamp>& t) {
  return t ? Json(format_timestamp(*t)) : Json(nullptr);
}

inline Json record_to_json(const BuoyancyRecord& r) {
  Json history = Json::array();
  for (auto t : r.stim_history) history.push_back(t.count());
  Json j;
  j["base"] = r.base;
  j["last_update"] = r.last_update.count();
  j["history"] = std::move(history);
  j["last_stimulation"] = r.last_stimulation ? Json(r.last_stimulation->count()) : Json(nullptr);
  j["frozen"] = r.frozen;
  j["frozen_at"] = r.frozen_at.count();
  return j;
}

inline Json track_to_json(const ActivityTrack& track) {
  Json out = Json::array();
  for (const auto& k : track.knots()) {
    out.push_back(Json::array({format_timestamp(k.wall), k.activity.count()}));
  }
  return out;
}

inline std::int64_t require_int(const Json& obj, const char* key, const std::string& where) {
  const Json& v = require_field(obj, key, where);
  if (!v.is_number_integer()) malformed(where + "." + key, "expected an integer");
  return v.get<std::int64_t>();
}

inline std::optional<Timestamp> optional_time_from(const Json& obj, const char* key,
                                                   const std::string& where) {
  const Json& v = require_field(obj, key, where);
  if (v.is_null()) return std::nullopt;
  if (!v.is_string()) malformed(where + "." + key, "expected a timestamp or null");
  return parse_timestamp(v.get<std::string>());
}

inline BuoyancyRecord record_from_json(const Json& j, const std::string& where) {
  BuoyancyRecord r;
  const Json& base = require_field(j, "base", where);
  if (!base.is_number()) malformed(where + ".base", "expected a number");
  r.base = base.get<double>();
  if (!(r.base >= 0.0 && r.base <= 1.0)) malformed(where + ".base", "outside [0,1]");
  r.last_update = ActivityTime{require_int(j, "last_update", where)};
  const Json& history = require_field(j, "history", where);
  if (!history.is_array()) malformed(where + ".history", "expected an array");
  for (const auto& h : history) {
    if (!h.is_number_integer()) malformed(where + ".history", "expected integers");
    r.stim_history.emplace_back(h.get<std::int64_t>());
  }
  const Json& last = require_field(j, "last_stimulation", where);
  if (!last.is_null()) {
    if (!last.is_number_integer()) malformed(where + ".last_stimulation", "expected an integer");
    r.last_stimulation = ActivityTime{last.get<std::int64_t>()};
  }
  const Json& frozen = require_field(j, "frozen", where);
  if (!frozen.is_boolean()) malformed(where + ".frozen", "expected a boolean");
  r.frozen = frozen.get<bool>();
  r.frozen_at = ActivityTime{require_int(j, "frozen_at", where)};
  return r;
}

inline ActivityTrack track_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) malformed(where, "expected an array of knots");
  std::vector<ActivityTrack::Knot> knots;
  for (const auto& k : j) {
    if (!k.is_array() || k.size() != 2 || !k[0].is_string() || !k[1].is_number_integer()) {
      malformed(where, "knot must be [timestamp, activity_seconds]");
    }
    knots.push_back({parse_timestamp(k[0].get<std::string>()), ActivityTime{k[1].get<std::int64_t>()}});
  }
  return ActivityTrack(std::move(knots));
}

}  // namespace detail

inline Json state_to_json(const Engine& engine, const std::optional<RunCursor>& cursor = std::nullopt) {
  using namespace detail;
  Json local = Json::array();
  for (const auto& [k, r] : engine.local_records()) {
    Json j{{"resource", k.resource}, {"user", k.user}, {"context", k.context}};
    j.update(record_to_json(r));
    local.push_back(std::move(j));
  }
  Json global = Json::array();
  for (const auto& [k, r] : engine.global_records()) {
    Json j{{"resource", k.resource}, {"user", k.user}};
    j.update(record_to_json(r));
    global.push_back(std::move(j));
  }
  Json group = Json::array();
  for (const auto& [k, r] : engine.group_records()) {
    Json j{{"resource", k}};
    j.update(record_to_json(r));
    group.push_back(std::move(j));
  }
  Json active = Json::object();
  for (const auto& [u, c] : engine.active_contexts()) active[u] = c;
  Json users = Json::object();
  for (const auto& [u, track] : engine.clock().users()) users[u] = track_to_json(track);

  Json doc;
  doc["format"] = std::string(kStateFormat);
  doc["graph"] = graph_to_json(engine.graph());
  doc["params"] = parameters_to_json(engine.params());
  doc["wall_time"] = optional_time(engine.wall_time());
  doc["rules_cursor"] = optional_time(engine.rules_cursor());
  doc["active_contexts"] = std::move(active);
  doc["clocks"] = Json{{"idle_cap_seconds", engine.clock().idle_cap().count()},
                       {"users", std::move(users)},
                       {"group", track_to_json(engine.clock().group())}};
  doc["records"] = Json{{"local", std::move(local)}, {"global", std::move(global)}, {"group", std::move(group)}};
  if (cursor) {
    doc["cursor"] = Json{{"scenario", cursor->scenario}, {"events_applied", cursor->events_applied}};
  }
  return doc;
}

inline std::string serialize_state(const Engine& engine,
                                   const std::optional<RunCursor>& cursor = std::nullopt) {
  return state_to_json(engine, cursor).dump(2) + "\n";
}

struct LoadedState {
  Engine engine;
  std::optional<RunCursor> cursor;
};

// Diagnostics name the offending section (e.g. "state.records.local[3].base").
inline LoadedState parse_state(std::string_view text) {
  using namespace detail;
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::MalformedDocument, std::string("state: ") + e.what());
  }
  if (!doc.is_object()) malformed("state", "expected an object");
  reject_unknown_keys(doc, {"format", "graph", "params", "wall_time", "rules_cursor",
                            "active_contexts", "clocks", "records", "cursor"},
                      "state");
  if (require_string(doc, "format", "state") != kStateFormat) {
    malformed("state.format", "unsupported format");
  }
  Graph graph = graph_from_json(require_field(doc, "graph", "state"), "state.graph");
  ParameterSet params = parameters_from_json(require_field(doc, "params", "state"));
  Engine engine(std::move(graph), params);

  const auto wall = optional_time_from(doc, "wall_time", "state");
  const auto cursor_time = optional_time_from(doc, "rules_cursor", "state");

  std::map<ThingId, ThingId> active;
  const Json& active_json = require_field(doc, "active_contexts", "state");
  if (!active_json.is_object()) malformed("state.active_contexts", "expected an object");
  for (auto it = active_json.begin(); it != active_json.end(); ++it) {
    if (!it.value().is_string()) malformed("state.active_contexts", "expected context ids");
    active[it.key()] = it.value().get<std::string>();
  }

  const Json& clocks = require_field(doc, "clocks", "state");
  if (require_int(clocks, "idle_cap_seconds", "state.clocks") != params.idle_cap.count()) {
    malformed("state.clocks.idle_cap_seconds", "disagrees with params");
  }
  std::map<ThingId, ActivityTrack> user_tracks;
  const Json& users = require_field(clocks, "users", "state.clocks");
  if (!users.is_object()) malformed("state.clocks.users", "expected an object");
  for (auto it = users.begin(); it != users.end(); ++it) {
    user_tracks[it.key()] = track_from_json(it.value(), "state.clocks.users." + it.key());
  }
  ActivityTrack group_track =
      track_from_json(require_field(clocks, "group", "state.clocks"), "state.clocks.group");

  const Json& records = require_field(doc, "records", "state");
  auto section = [&](const char* name) -> const Json& {
    const Json& s = require_field(records, name, "state.records");
    if (!s.is_array()) malformed(std::string("state.records.") + name, "expected an array");
    return s;
  };
  std::map<LocalKey, BuoyancyRecord> local;
  const Json& local_json = section("local");
  for (std::size_t i = 0; i < local_json.size(); ++i) {
    const std::string at = "state.records.local[" + std::to_string(i) + "]";
    LocalKey key{require_string(local_json[i], "user", at), require_string(local_json[i], "context", at),
                 require_string(local_json[i], "resource", at)};
    local[key] = record_from_json(local_json[i], at);
  }
  std::map<GlobalKey, BuoyancyRecord> global;
  const Json& global_json = section("global");
  for (std::size_t i = 0; i < global_json.size(); ++i) {
    const std::string at = "state.records.global[" + std::to_string(i) + "]";
    GlobalKey key{require_string(global_json[i], "resource", at), require_string(global_json[i], "user", at)};
    global[key] = record_from_json(global_json[i], at);
  }
  std::map<ThingId, BuoyancyRecord> group;
  const Json& group_json = section("group");
  for (std::size_t i = 0; i < group_json.size(); ++i) {
    const std::string at = "state.records.group[" + std::to_string(i) + "]";
    group[require_string(group_json[i], "resource", at)] = record_from_json(group_json[i], at);
  }

  auto require_known = [&](const ThingId& id, const std::string& where) {
    if (!engine.graph().contains(id)) {
      throw Error(ErrorCode::UnknownReference, where + ": unknown id '" + id + "'");
    }
  };
  for (const auto& [k, r] : local) {
    require_known(k.resource, "state.records.local");
    require_known(k.user, "state.records.local");
    require_known(k.context, "state.records.local");
  }
  for (const auto& [k, r] : global) {
    require_known(k.resource, "state.records.global");
    require_known(k.user, "state.records.global");
  }
  for (const auto& [k, r] : group) require_known(k, "state.records.group");
  for (const auto& [u, c] : active) {
    require_known(u, "state.active_contexts");
    require_known(c, "state.active_contexts");
  }

  engine.restore(std::move(local), std::move(global), std::move(group), std::move(active),
                 std::move(user_tracks), std::move(group_track), wall, cursor_time);
  if (auto problems = engine.check_invariants(); !problems.empty()) {
    malformed("state.records", problems.front());
  }

  std::optional<RunCursor> cursor;
  if (auto it = doc.find("cursor"); it != doc.end()) {
    RunCursor c;
    c.scenario = require_string(*it, "scenario", "state.cursor");
    c.events_applied = static_cast<std::size_t>(require_int(*it, "events_applied", "state.cursor"));
    cursor = std::move(c);
  }
  return {std::move(engine), std::move(cursor)};
}

}  // namespace mb
