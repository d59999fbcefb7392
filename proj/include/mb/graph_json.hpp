#pragma once

#include <string>

#include <json.hpp>

#include "mb/graph.hpp"

namespace mb {

using Json = nlohmann::ordered_json;

namespace detail {

[[noreturn]] inline void malformed(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::MalformedDocument, where + ": " + what);
}

inline const Json& require_field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) malformed(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) malformed(where, std::string("missing field '") + key + "'");
  return *it;
}

inline std::string require_string(const Json& obj, const char* key, const std::string& where) {
  const Json& v = require_field(obj, key, where);
  if (!v.is_string()) malformed(where + "." + key, "expected a string");
  return v.get<std::string>();
}

inline Timestamp require_timestamp(const Json& obj, const char* key, const std::string& where) {
  return parse_timestamp(require_string(obj, key, where));
}

inline void reject_unknown_keys(const Json& obj, std::initializer_list<const char*> allowed,
                                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || it.key() == k;
    if (!ok) malformed(where, "unknown key '" + it.key() + "'");
  }
}

}  // namespace detail

inline Json thing_to_json(const Thing& t) {
  Json j;
  j["id"] = t.id;
  j["type"] = std::string(to_string(t.type));
  j["literals"] = t.literals;
  if (t.completed) j["completed"] = *t.completed;
  if (t.completed_at) j["completed_at"] = format_timestamp(*t.completed_at);
  if (t.event_start) j["event_start"] = format_timestamp(*t.event_start);
  return j;
}

inline Json graph_to_json(const Graph& g) {
  Json things = Json::array();
  for (const Thing* t : g.things()) things.push_back(thing_to_json(*t));
  Json relations = Json::array();
  for (const Relation& r : g.relations()) {
    relations.push_back(Json{{"source", r.source}, {"target", r.target}, {"label", r.label}});
  }
  return Json{{"things", std::move(things)}, {"relations", std::move(relations)}};
}

inline Thing thing_from_json(const Json& j, const std::string& where) {
  using namespace detail;
  if (!j.is_object()) malformed(where, "expected an object");
  reject_unknown_keys(j, {"id", "type", "literals", "completed", "completed_at", "event_start"},
                      where);
  Thing t;
  t.id = require_string(j, "id", where);
  const std::string type_name = require_string(j, "type", where);
  auto type = thing_type_from_string(type_name);
  if (!type) malformed(where + ".type", "unknown thing type '" + type_name + "'");
  t.type = *type;
  const Json& lits = require_field(j, "literals", where);
  if (!lits.is_array()) malformed(where + ".literals", "expected an array");
  for (const auto& l : lits) {
    if (!l.is_string()) malformed(where + ".literals", "expected strings");
    t.literals.push_back(l.get<std::string>());
  }
  if (auto it = j.find("completed"); it != j.end()) {
    if (!it->is_boolean()) malformed(where + ".completed", "expected a boolean");
    t.completed = it->get<bool>();
  }
  if (j.contains("completed_at")) t.completed_at = require_timestamp(j, "completed_at", where);
  if (j.contains("event_start")) t.event_start = require_timestamp(j, "event_start", where);
  return t;
}

// Builds a graph from a snapshot document. Structural problems surface as
// MalformedDocument; dangling relation endpoints as UnknownReference.
inline Graph graph_from_json(const Json& j, const std::string& where = "graph") {
  using namespace detail;
  if (!j.is_object()) malformed(where, "expected an object");
  reject_unknown_keys(j, {"things", "relations"}, where);
  const Json& things = require_field(j, "things", where);
  const Json& relations = require_field(j, "relations", where);
  if (!things.is_array()) malformed(where + ".things", "expected an array");
  if (!relations.is_array()) malformed(where + ".relations", "expected an array");
  Graph g;
  for (std::size_t i = 0; i < things.size(); ++i) {
    const std::string at = where + ".things[" + std::to_string(i) + "]";
    try {
      g.insert(thing_from_json(things[i], at));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::MalformedDocument) throw;
      malformed(at, e.what());
    }
  }
  for (std::size_t i = 0; i < relations.size(); ++i) {
    const std::string at = where + ".relations[" + std::to_string(i) + "]";
    const Json& r = relations[i];
    if (!r.is_object()) malformed(at, "expected an object");
    reject_unknown_keys(r, {"source", "target", "label"}, at);
    const std::string source = require_string(r, "source", at);
    const std::string target = require_string(r, "target", at);
    const std::string label = require_string(r, "label", at);
    for (const auto* id : {&source, &target}) {
      if (!g.contains(*id)) {
        throw Error(ErrorCode::UnknownReference, at + ": missing id '" + *id + "'");
      }
    }
    try {
      g.add_relation(source, target, label);
    } catch (const Error& e) {
      malformed(at, e.what());
    }
  }
  return g;
}

}  // namespace mb
