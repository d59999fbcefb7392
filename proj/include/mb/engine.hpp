#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "mb/activity_clock.hpp"
#include "mb/buoyancy.hpp"
#include "mb/error.hpp"
#include "mb/event.hpp"
#include "mb/graph.hpp"
#include "mb/params.hpp"
#include "mb/time.hpp"

namespace mb {

// (user, context, resource): ordered so one user's records in one context
// form a contiguous range.
struct LocalKey {
  ThingId user;
  ThingId context;
  ThingId resource;
  friend auto operator<=>(const LocalKey&, const LocalKey&) = default;
  friend bool operator==(const LocalKey&, const LocalKey&) = default;
};

struct GlobalKey {
  ThingId resource;
  ThingId user;
  friend auto operator<=>(const GlobalKey&, const GlobalKey&) = default;
  friend bool operator==(const GlobalKey&, const GlobalKey&) = default;
};

// Which record families one stimulation (or one spread) lands on.
struct StimulusScope {
  std::optional<ThingId> user;     // (resource, user) global records
  std::optional<ThingId> context;  // (resource, user, context) local records; needs user
  bool group = false;              // resource-keyed group records
};

// Full MB state plus the single-writer operations that advance it. Every
// const member is a pure function of (state, now) and never mutates, so
// concurrent readers are safe between writes.
class Engine {
 public:
  explicit Engine(Graph graph, ParameterSet params = default_parameters())
      : graph_(std::move(graph)), params_(std::move(params)), clock_(params_.idle_cap) {
    check_parameters(params_);
  }

  const Graph& graph() const { return graph_; }
  const ParameterSet& params() const { return params_; }
  const ActivityClock& clock() const { return clock_; }
  const std::map<LocalKey, BuoyancyRecord>& local_records() const { return local_; }
  const std::map<GlobalKey, BuoyancyRecord>& global_records() const { return global_; }
  const std::map<ThingId, BuoyancyRecord>& group_records() const { return group_; }
  const std::map<ThingId, ThingId>& active_contexts() const { return active_; }
  std::optional<Timestamp> wall_time() const { return wall_time_; }
  std::optional<Timestamp> rules_cursor() const { return rules_cursor_; }

  std::optional<ThingId> active_context(const ThingId& user) const {
    auto it = active_.find(user);
    if (it == active_.end()) return std::nullopt;
    return it->second;
  }

  // ---- writer operations -------------------------------------------------

  void apply(const Event& event) {
    if (auto v = event_shape_violation(event)) throw Error(ErrorCode::MalformedDocument, *v);
    if (auto v = event_reference_violation(event, graph_)) {
      throw Error(ErrorCode::UnknownReference, v->second + " ('" + v->first + "')");
    }
    require_not_before(event.timestamp);
    advance_to(event.timestamp);
    clock_.record_event(event.actor, event.timestamp);

    if (event.kind == EventKind::ContextSwitch) {
      switch_context_at(event.actor, *event.context, event.timestamp);
      return;
    }
    if (event.context && active_context(event.actor) != event.context) {
      switch_context_at(event.actor, *event.context, event.timestamp);
    }
    StimulusScope scope;
    scope.user = event.actor;
    scope.context = active_context(event.actor);
    scope.group = true;
    const double weight = params_.weight(event.kind);
    if (weight > 0.0) spread_at(*event.target, weight, scope, event.timestamp);
    if (event.kind == EventKind::Complete) graph_.mark_completed(*event.target, event.timestamp);
  }

  // Fires every time rule due in (cursor, upto] in chronological order, then
  // moves the engine's present to `upto`.
  void advance_to(Timestamp upto) {
    require_not_before(upto);
    std::vector<std::pair<Timestamp, ThingId>> due;
    const auto lead_days = params_.lead_window / kDay;
    for (const ThingId& id : graph_.ids_of_type(ThingType::CalendarEvent)) {
      const Timestamp start = *graph_.thing(id).event_start;
      for (std::int64_t k = 1; k <= lead_days; ++k) {
        const Timestamp tick = start - k * kDay;
        if ((!rules_cursor_ || tick > *rules_cursor_) && tick <= upto) due.emplace_back(tick, id);
      }
    }
    std::sort(due.begin(), due.end());
    for (const auto& [when, event] : due) {
      wall_time_ = when;
      fire_upcoming_event(event, when);
    }
    rules_cursor_ = upto;
    wall_time_ = upto;
  }

  // Stimulates `source` with `weight`, then propagates breadth-first: a child
  // reached through `parent` gets weight * rho / (1 + log2(branching)), where
  // branching counts the parent's relations other than those leading back to
  // its own predecessor. Each thing is stimulated at most once per call.
  void spread(const ThingId& source, double weight, const StimulusScope& scope, Timestamp now) {
    graph_.thing(source);
    if (!(weight > 0.0 && weight <= 1.0)) {
      throw Error(ErrorCode::InvalidWeight, "spread weight must lie in (0,1]");
    }
    if (scope.context && (!scope.user || active_context(*scope.user) != scope.context)) {
      throw Error(ErrorCode::FrozenRecord, "local stimulation outside the user's active context");
    }
    advance_to(now);
    spread_at(source, weight, scope, now);
  }

  // Freezes the user's previous context, thaws `context` without charging
  // decay for the frozen interval, and stimulates the context thing.
  void switch_context(const ThingId& user, const ThingId& context, Timestamp now) {
    const Thing& ctx = graph_.thing(context);
    if (ctx.type != ThingType::Context) throw Error(ErrorCode::NotAContext, context);
    graph_.thing(user);
    advance_to(now);
    switch_context_at(user, context, now);
  }

  // ---- pure reads --------------------------------------------------------

  double local_mb(const ThingId& resource, const ThingId& user, const ThingId& context,
                  Timestamp now) const {
    const Thing& thing = require_reference(resource);
    require_reference(user);
    const Thing& ctx = require_reference(context);
    if (ctx.type != ThingType::Context) throw Error(ErrorCode::NotAContext, context);
    require_not_before(now);
    auto it = local_.find({user, context, resource});
    if (it == local_.end()) return 0.0;
    return current_value(it->second, params_, decay_profile(params_, thing),
                         clock_.user_time(user, now));
  }

  double global_mb(const ThingId& resource, const ThingId& user, Timestamp now) const {
    const Thing& thing = require_reference(resource);
    require_reference(user);
    require_not_before(now);
    auto it = global_.find({resource, user});
    if (it == global_.end()) return 0.0;
    return current_value(it->second, params_, decay_profile(params_, thing),
                         clock_.user_time(user, now));
  }

  double group_mb(const ThingId& resource, Timestamp now) const {
    const Thing& thing = graph_.thing(resource);
    require_not_before(now);
    auto it = group_.find(resource);
    if (it == group_.end()) return 0.0;
    return current_value(it->second, params_, decay_profile(params_, thing),
                         clock_.group_time(now));
  }

  // Structural invariants of the state; empty when healthy.
  std::vector<std::string> check_invariants() const {
    std::vector<std::string> out;
    auto check_record = [&](const BuoyancyRecord& r, const std::string& what) {
      if (!(r.base >= 0.0 && r.base <= 1.0)) out.push_back(what + ": base outside [0,1]");
      for (auto t : r.stim_history) {
        if (t > r.last_update && !r.frozen) out.push_back(what + ": history after last_update");
      }
    };
    for (const auto& [k, r] : local_) {
      const std::string what = "local(" + k.resource + "," + k.user + "," + k.context + ")";
      check_record(r, what);
      const bool active = active_context(k.user) == k.context;
      if (r.frozen == active) out.push_back(what + ": frozen flag disagrees with active context");
    }
    for (const auto& [k, r] : global_) {
      check_record(r, "global(" + k.resource + "," + k.user + ")");
      if (r.frozen) out.push_back("global record frozen");
    }
    for (const auto& [k, r] : group_) {
      check_record(r, "group(" + k + ")");
      if (r.frozen) out.push_back("group record frozen");
    }
    return out;
  }

  // Restores a previously captured state (see state_json.hpp).
  void restore(std::map<LocalKey, BuoyancyRecord> local, std::map<GlobalKey, BuoyancyRecord> global,
               std::map<ThingId, BuoyancyRecord> group, std::map<ThingId, ThingId> active,
               std::map<ThingId, ActivityTrack> user_tracks, ActivityTrack group_track,
               std::optional<Timestamp> wall_time, std::optional<Timestamp> rules_cursor) {
    local_ = std::move(local);
    global_ = std::move(global);
    group_ = std::move(group);
    active_ = std::move(active);
    clock_.restore(std::move(user_tracks), std::move(group_track));
    wall_time_ = wall_time;
    rules_cursor_ = rules_cursor;
  }

  friend bool operator==(const Engine& a, const Engine& b) {
    return a.graph_ == b.graph_ && a.params_ == b.params_ && a.clock_ == b.clock_ &&
           a.local_ == b.local_ && a.global_ == b.global_ && a.group_ == b.group_ &&
           a.active_ == b.active_ && a.wall_time_ == b.wall_time_ &&
           a.rules_cursor_ == b.rules_cursor_;
  }

 private:
  void spread_at(const ThingId& source, double weight, const StimulusScope& scope, Timestamp now) {
    stimulate_scope(source, weight, scope, now);
    struct Frontier {
      ThingId id;
      std::optional<ThingId> parent;
      double weight;
    };
    std::set<ThingId> visited{source};
    std::vector<Frontier> frontier{{source, std::nullopt, weight}};
    for (int depth = 1; depth <= params_.spread.max_depth && !frontier.empty(); ++depth) {
      std::vector<Frontier> next;
      for (const Frontier& node : frontier) {
        const double child_weight = propagated_weight(node.id, node.parent, node.weight);
        if (child_weight < params_.spread.cutoff) continue;
        for (const ThingId& child : graph_.neighbor_ids(node.id)) {
          if (!visited.insert(child).second) continue;
          stimulate_scope(child, child_weight, scope, now);
          next.push_back({child, node.id, child_weight});
        }
      }
      frontier = std::move(next);
    }
  }

  void switch_context_at(const ThingId& user, const ThingId& context, Timestamp now) {
    const auto previous = active_context(user);
    if (previous != context) {
      const ActivityTime act = clock_.user_time(user, now);
      if (previous) {
        for (auto it = local_range_begin(user, *previous);
             it != local_.end() && it->first.user == user && it->first.context == *previous;
             ++it) {
          const DecayProfile profile = decay_profile(params_, graph_.thing(it->first.resource));
          it->second = refresh(std::move(it->second), params_, profile, act);
          it->second.frozen = true;
          it->second.frozen_at = act;
        }
      }
      for (auto it = local_range_begin(user, context);
           it != local_.end() && it->first.user == user && it->first.context == context; ++it) {
        BuoyancyRecord& rec = it->second;
        if (!rec.frozen) continue;
        const Duration paused = act - rec.frozen_at;
        rec.last_update += paused;
        for (auto& t : rec.stim_history) t += paused;
        if (rec.last_stimulation) *rec.last_stimulation += paused;
        rec.frozen = false;
        rec.frozen_at = ActivityTime{0};
      }
      active_[user] = context;
    }
    if (params_.system_weight > 0.0) {
      StimulusScope scope;
      scope.user = user;
      scope.group = true;
      stimulate_scope(context, params_.system_weight, scope, now);
    }
  }

  const Thing& require_reference(const ThingId& id) const {
    const Thing* t = graph_.find(id);
    if (!t) throw Error(ErrorCode::UnknownReference, id);
    return *t;
  }

  void require_not_before(Timestamp t) const {
    if (wall_time_ && t < *wall_time_) {
      throw Error(ErrorCode::ClockRegression,
                  format_timestamp(t) + " precedes " + format_timestamp(*wall_time_));
    }
  }

  std::map<LocalKey, BuoyancyRecord>::iterator local_range_begin(const ThingId& user,
                                                                 const ThingId& context) {
    return local_.lower_bound(LocalKey{user, context, ThingId{}});
  }

  double propagated_weight(const ThingId& node, const std::optional<ThingId>& parent,
                           double weight) const {
    std::size_t branching = graph_.degree(node);
    if (parent) branching -= graph_.relations_between(node, *parent);
    if (branching == 0) return 0.0;
    return weight * params_.spread.rho / (1.0 + std::log2(static_cast<double>(branching)));
  }

  void stimulate_scope(const ThingId& thing_id, double weight, const StimulusScope& scope,
                       Timestamp now) {
    const DecayProfile profile = decay_profile(params_, graph_.thing(thing_id));
    if (scope.user) {
      const ActivityTime act = clock_.user_time(*scope.user, now);
      auto& rec = record_for(global_, GlobalKey{thing_id, *scope.user}, act);
      rec = stimulate(std::move(rec), params_, profile, weight, act);
      if (scope.context) {
        auto& local = record_for(local_, LocalKey{*scope.user, *scope.context, thing_id}, act);
        local = stimulate(std::move(local), params_, profile, weight, act);
      }
    }
    if (scope.group) {
      const ActivityTime act = clock_.group_time(now);
      auto& rec = record_for(group_, thing_id, act);
      rec = stimulate(std::move(rec), params_, profile, weight, act);
    }
  }

  template <typename Map, typename Key>
  static BuoyancyRecord& record_for(Map& map, const Key& key, ActivityTime now) {
    auto [it, inserted] = map.try_emplace(key);
    if (inserted) it->second.last_update = now;
    return it->second;
  }

  void fire_upcoming_event(const ThingId& event, Timestamp when) {
    if (params_.system_weight <= 0.0) return;
    StimulusScope group_scope;
    group_scope.group = true;
    spread_at(event, params_.system_weight, group_scope, when);
    std::set<ThingId> attendees;
    for (const auto& [other, label] : graph_.neighbors(event)) {
      if (label == kAttendee && graph_.thing(other).type == ThingType::User) attendees.insert(other);
    }
    for (const ThingId& user : attendees) {
      StimulusScope scope;
      scope.user = user;
      spread_at(event, params_.system_weight, scope, when);
    }
  }

  Graph graph_;
  ParameterSet params_;
  ActivityClock clock_;
  std::map<LocalKey, BuoyancyRecord> local_;
  std::map<GlobalKey, BuoyancyRecord> global_;
  std::map<ThingId, BuoyancyRecord> group_;
  std::map<ThingId, ThingId> active_;
  std::optional<Timestamp> wall_time_;
  std::optional<Timestamp> rules_cursor_;
};

}  // namespace mb
