#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mb/error.hpp"
#include "mb/time.hpp"

namespace mb {

enum class ThingType {
  Email,
  Person,
  Task,
  CalendarEvent,
  Document,
  Presentation,
  Project,
  Topic,
  WebPage,
  Context,
  User,
  Generic,
};

inline constexpr std::array<ThingType, 12> kAllThingTypes = {
    ThingType::Email,   ThingType::Person,  ThingType::Task,     ThingType::CalendarEvent,
    ThingType::Document, ThingType::Presentation, ThingType::Project, ThingType::Topic,
    ThingType::WebPage, ThingType::Context, ThingType::User,     ThingType::Generic,
};

inline std::string_view to_string(ThingType type) {
  switch (type) {
    case ThingType::Email: return "Email";
    case ThingType::Person: return "Person";
    case ThingType::Task: return "Task";
    case ThingType::CalendarEvent: return "CalendarEvent";
    case ThingType::Document: return "Document";
    case ThingType::Presentation: return "Presentation";
    case ThingType::Project: return "Project";
    case ThingType::Topic: return "Topic";
    case ThingType::WebPage: return "WebPage";
    case ThingType::Context: return "Context";
    case ThingType::User: return "User";
    case ThingType::Generic: return "Generic";
  }
  return "Generic";
}

inline std::optional<ThingType> thing_type_from_string(std::string_view name) {
  for (ThingType t : kAllThingTypes) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

using ThingId = std::string;

inline constexpr std::string_view kMemberOfContext = "memberOfContext";
inline constexpr std::string_view kAttendee = "attendee";

struct Thing {
  ThingId id;
  ThingType type = ThingType::Generic;
  std::vector<std::string> literals;
  std::optional<bool> completed;
  std::optional<Timestamp> completed_at;
  std::optional<Timestamp> event_start;

  bool is_completed() const { return completed.value_or(false); }

  friend bool operator==(const Thing&, const Thing&) = default;
};

struct Relation {
  ThingId source;
  ThingId target;
  std::string label;

  friend auto operator<=>(const Relation&, const Relation&) = default;
  friend bool operator==(const Relation&, const Relation&) = default;
};

// Extra attributes accepted by Graph::add_thing beyond label and type.
struct ThingOptions {
  std::optional<ThingId> id;
  std::vector<std::string> extra_literals;
  std::optional<Timestamp> event_start;
};

// The semantic graph: things keyed by id plus undirected-for-traversal typed
// relations. Iteration order of things() is insertion order; all set-valued
// queries return id-sorted results.
class Graph {
 public:
  const ThingId& add_thing(std::string label, ThingType type, ThingOptions options = {}) {
    Thing thing;
    thing.type = type;
    thing.literals.push_back(std::move(label));
    for (auto& lit : options.extra_literals) {
      if (std::find(thing.literals.begin(), thing.literals.end(), lit) == thing.literals.end()) {
        thing.literals.push_back(std::move(lit));
      }
    }
    thing.event_start = options.event_start;
    if (options.id) {
      thing.id = std::move(*options.id);
    } else {
      std::size_t n = order_.size() + 1;
      do {
        thing.id = "thing:" + std::to_string(n++);
      } while (things_.count(thing.id) != 0);
    }
    return insert(std::move(thing));
  }

  // Inserts a fully specified thing (snapshot loading).
  const ThingId& insert(Thing thing) {
    if (thing.id.empty()) throw Error(ErrorCode::InvalidThing, "empty thing id");
    if (things_.count(thing.id) != 0) throw Error(ErrorCode::DuplicateThing, thing.id);
    if (thing.literals.empty() || thing.literals.front().empty()) {
      throw Error(ErrorCode::InvalidThing, thing.id + " has no label");
    }
    if (thing.event_start.has_value() != (thing.type == ThingType::CalendarEvent)) {
      throw Error(ErrorCode::InvalidThing,
                  thing.id + ": event_start must be present exactly for CalendarEvent");
    }
    if ((thing.completed || thing.completed_at) && thing.type != ThingType::Task &&
        thing.type != ThingType::CalendarEvent) {
      throw Error(ErrorCode::InvalidThing, thing.id + ": only tasks and events complete");
    }
    auto [it, inserted] = things_.emplace(thing.id, std::move(thing));
    order_.push_back(it->first);
    adjacency_[it->first];
    return it->first;
  }

  const Relation& add_relation(const ThingId& source, const ThingId& target, std::string label) {
    require(source);
    require(target);
    if (source == target) {
      throw Error(ErrorCode::InvalidRelation, "self-loop on " + source);
    }
    Relation rel{source, target, std::move(label)};
    auto [it, inserted] = relation_set_.insert(rel);
    if (!inserted) return *it;
    relations_.push_back(rel);
    adjacency_[source].push_back({target, it->label});
    adjacency_[target].push_back({source, it->label});
    return *it;
  }

  bool contains(const ThingId& id) const { return things_.count(id) != 0; }

  const Thing& thing(const ThingId& id) const {
    auto it = things_.find(id);
    if (it == things_.end()) throw Error(ErrorCode::UnknownThing, id);
    return it->second;
  }

  const Thing* find(const ThingId& id) const {
    auto it = things_.find(id);
    return it == things_.end() ? nullptr : &it->second;
  }

  void mark_completed(const ThingId& id, Timestamp when) {
    auto it = things_.find(id);
    if (it == things_.end()) throw Error(ErrorCode::UnknownThing, id);
    if (it->second.type != ThingType::Task && it->second.type != ThingType::CalendarEvent) {
      throw Error(ErrorCode::InvalidThing, id + ": only tasks and events complete");
    }
    it->second.completed = true;
    it->second.completed_at = when;
  }

  std::size_t degree(const ThingId& id) const {
    require(id);
    return adjacency_.at(id).size();
  }

  // All (neighbor, label) pairs one relation away, direction-agnostic.
  std::set<std::pair<ThingId, std::string>> neighbors(const ThingId& id) const {
    require(id);
    std::set<std::pair<ThingId, std::string>> out;
    for (const auto& adj : adjacency_.at(id)) out.emplace(adj.other, adj.label);
    return out;
  }

  // Distinct neighbor ids, sorted.
  std::vector<ThingId> neighbor_ids(const ThingId& id) const {
    require(id);
    std::vector<ThingId> out;
    for (const auto& adj : adjacency_.at(id)) out.push_back(adj.other);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  // Number of relations joining a and b (any label, either direction).
  std::size_t relations_between(const ThingId& a, const ThingId& b) const {
    require(a);
    std::size_t n = 0;
    for (const auto& adj : adjacency_.at(a)) n += adj.other == b ? 1 : 0;
    return n;
  }

  // Case-insensitive substring match over every literal; empty keyword
  // matches nothing.
  std::set<ThingId> match_literal(std::string_view keyword) const {
    std::set<ThingId> out;
    if (keyword.empty()) return out;
    const std::string needle = lowercase(keyword);
    for (const auto& [id, thing] : things_) {
      for (const auto& lit : thing.literals) {
        if (lowercase(lit).find(needle) != std::string::npos) {
          out.insert(id);
          break;
        }
      }
    }
    return out;
  }

  std::set<ThingId> context_members(const ThingId& context) const {
    const Thing& ctx = thing(context);
    if (ctx.type != ThingType::Context) throw Error(ErrorCode::NotAContext, context);
    std::set<ThingId> out;
    for (const auto& adj : adjacency_.at(context)) {
      if (adj.label == kMemberOfContext) out.insert(adj.other);
    }
    return out;
  }

  std::vector<ThingId> ids_of_type(ThingType type) const {
    std::vector<ThingId> out;
    for (const auto& [id, thing] : things_) {
      if (thing.type == type) out.push_back(id);
    }
    return out;
  }

  // Things in insertion order.
  std::vector<const Thing*> things() const {
    std::vector<const Thing*> out;
    out.reserve(order_.size());
    for (const auto& id : order_) out.push_back(&things_.at(id));
    return out;
  }

  // Relations in insertion order.
  const std::vector<Relation>& relations() const { return relations_; }

  std::size_t size() const { return things_.size(); }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.order_ == b.order_ && a.things_ == b.things_ && a.relations_ == b.relations_;
  }

 private:
  struct Adjacent {
    ThingId other;
    std::string label;
  };

  void require(const ThingId& id) const {
    if (things_.count(id) == 0) throw Error(ErrorCode::UnknownThing, id);
  }

  static std::string lowercase(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
  }

  std::map<ThingId, Thing> things_;
  std::vector<ThingId> order_;
  std::vector<Relation> relations_;
  std::set<Relation> relation_set_;
  std::map<ThingId, std::vector<Adjacent>> adjacency_;
};

}  // namespace mb
