#pragma once

// Brute-force reference: walks wall time one second at a time, advances every
// activity counter by hand and decays every live record by the per-second
// ratio of the decay curve. Shares only data types with the engine.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "mb/event.hpp"
#include "mb/graph.hpp"
#include "mb/params.hpp"
#include "mb/time.hpp"

namespace oracle {

using mb::ThingId;

struct Counter {
  std::optional<std::int64_t> last_event;  // wall seconds
  std::int64_t value = 0;
  bool moving = false;

  bool advances(std::int64_t s, std::int64_t cap) const {
    return last_event && *last_event <= s && s + 1 - *last_event <= cap;
  }
};

struct Rec {
  const Counter* source = nullptr;
  double tau_seconds = 0.0;
  double alpha = 0.0;
  bool completed = false;
  long double value = 0.0L;
  std::int64_t clock = 0;  // the record's own activity seconds
  std::int64_t age = 0;    // seconds since the last fold
  std::size_t count = 0;   // history size at the last fold
  std::vector<std::int64_t> history;
  std::optional<std::int64_t> last_stim;
  bool frozen = false;
  bool boosted = false;
};

struct Result {
  std::map<std::tuple<ThingId, ThingId, ThingId>, double> local;  // (user, context, resource)
  std::map<std::pair<ThingId, ThingId>, double> global;            // (resource, user)
  std::map<ThingId, double> group;
};

class Stepped {
 public:
  Stepped(const mb::Scenario& s, const mb::ParameterSet& p) : s_(s), p_(p) {
    for (const mb::Thing* t : s.graph.things()) {
      adj_[t->id];
      type_[t->id] = t->type;
      if (t->is_completed()) completed_.insert(t->id);
    }
    for (const mb::Relation& r : s.graph.relations()) {
      adj_[r.source].push_back({r.target, r.label});
      adj_[r.target].push_back({r.source, r.label});
    }
    cap_ = p.idle_cap.count();
  }

  Result run() {
    std::vector<std::pair<std::int64_t, ThingId>> ticks;
    const std::int64_t lead = p_.lead_window.count() / 86400;
    for (const mb::Thing* t : s_.graph.things()) {
      if (t->type != mb::ThingType::CalendarEvent) continue;
      const std::int64_t start = secs(*t->event_start);
      for (std::int64_t k = 1; k <= lead; ++k) ticks.emplace_back(start - k * 86400, t->id);
    }
    std::sort(ticks.begin(), ticks.end());

    const std::int64_t horizon = secs(s_.horizon);
    std::int64_t first = horizon;
    if (!s_.events.empty()) first = std::min(first, secs(s_.events.front().timestamp));
    if (!ticks.empty()) first = std::min(first, ticks.front().first);

    std::size_t next_tick = 0, next_event = 0;
    for (std::int64_t t = first;; ++t) {
      if (t > first) step(t - 1);
      while (next_tick < ticks.size() && ticks[next_tick].first <= t) {
        if (ticks[next_tick].first == t) fire_tick(ticks[next_tick].second);
        ++next_tick;
      }
      while (next_event < s_.events.size() && secs(s_.events[next_event].timestamp) == t) {
        apply(s_.events[next_event++], t);
      }
      if (t >= horizon) break;
    }

    Result out;
    for (const auto& [k, r] : local_) out.local[k] = static_cast<double>(r.value);
    for (const auto& [k, r] : global_) out.global[k] = static_cast<double>(r.value);
    for (const auto& [k, r] : group_) out.group[k] = static_cast<double>(r.value);
    return out;
  }

 private:
  struct Edge {
    ThingId other;
    std::string label;
  };

  static std::int64_t secs(mb::Timestamp t) { return t.time_since_epoch().count(); }

  double tau_eff(const Rec& r) const {
    return r.tau_seconds * (1.0 + p_.frequency_coefficient * static_cast<double>(r.count));
  }

  double alpha(const Rec& r, bool boosted) const { return r.alpha * (boosted ? p_.completion_boost : 1.0); }

  long double curve(const Rec& r, std::int64_t age, bool boosted) const {
    return std::pow(1.0L + static_cast<long double>(age) / tau_eff(r), -alpha(r, boosted));
  }

  bool boost_due(const Rec& r) const {
    if (!r.completed) return false;
    return !r.last_stim || r.clock - *r.last_stim >= p_.completion_quiet.count();
  }

  // One second of decay: d(age) / d(age - 1) = (1 + 1 / (tau + age - 1))^(-alpha).
  void tick_record(Rec& r) {
    r.clock += 1;
    r.age += 1;
    const double span = tau_eff(r) + static_cast<double>(r.age - 1);
    r.value *= std::exp(-alpha(r, r.boosted) * std::log1p(1.0 / span));
    if (r.completed) reboost(r);
  }

  void reboost(Rec& r) {
    const bool want = boost_due(r);
    if (want == r.boosted) return;
    r.value *= curve(r, r.age, want) / curve(r, r.age, r.boosted);
    r.boosted = want;
  }

  void fold(Rec& r) {
    r.age = 0;
    const std::int64_t cut = r.clock - p_.recency_window.count();
    std::erase_if(r.history, [&](std::int64_t h) { return h <= cut; });
    r.count = r.history.size();
  }

  Rec& record(Rec& r, const ThingId& thing, const Counter& source) {
    if (r.source) return r;
    const mb::DecayRow row = p_.row(type_.at(thing));
    r.source = &source;
    r.tau_seconds = row.tau_days * 86400.0;
    r.alpha = row.alpha;
    r.completed = completed_.count(thing) > 0;
    live_.push_back(&r);
    return r;
  }

  void stim(Rec& r, double weight) {
    fold(r);
    long double ramp = 1.0L;
    if (r.last_stim) {
      ramp = std::min<long double>(1.0L, static_cast<long double>(r.clock - *r.last_stim) /
                                             static_cast<long double>(p_.refractory.count()));
    }
    r.value += (1.0L - r.value) * p_.gain * weight * ramp;
    r.history.push_back(r.clock);
    r.count = r.history.size();
    r.last_stim = r.clock;
    r.boosted = boost_due(r);
  }

  void step(std::int64_t s) {
    for (auto& [u, c] : users_) c.moving = c.advances(s, cap_);
    group_clock_.moving = group_clock_.advances(s, cap_);
    for (auto& [u, c] : users_) c.value += c.moving ? 1 : 0;
    group_clock_.value += group_clock_.moving ? 1 : 0;
    for (Rec* r : live_) {
      if (!r->frozen && r->source->moving) tick_record(*r);
    }
  }

  void touch(const ThingId& thing, double weight, const std::optional<ThingId>& user,
             const std::optional<ThingId>& ctx, bool group) {
    if (user) {
      const Counter& clock = users_[*user];
      stim(record(global_[{thing, *user}], thing, clock), weight);
      if (ctx) stim(record(local_[{*user, *ctx, thing}], thing, clock), weight);
    }
    if (group) stim(record(group_[thing], thing, group_clock_), weight);
  }

  void spread(const ThingId& source, double weight, const std::optional<ThingId>& user,
              const std::optional<ThingId>& ctx, bool group) {
    touch(source, weight, user, ctx, group);
    std::set<ThingId> seen{source};
    struct Node {
      ThingId id;
      std::optional<ThingId> from;
      double w;
    };
    std::vector<Node> layer{{source, std::nullopt, weight}};
    for (int depth = 0; depth < p_.spread.max_depth && !layer.empty(); ++depth) {
      std::vector<Node> next;
      for (const Node& n : layer) {
        std::size_t fan = 0;
        std::set<ThingId> kids;
        for (const Edge& e : adj_.at(n.id)) {
          kids.insert(e.other);
          if (!n.from || e.other != *n.from) ++fan;
        }
        if (fan == 0) continue;
        const double w = n.w * p_.spread.rho / (1.0 + std::log2(static_cast<double>(fan)));
        if (w < p_.spread.cutoff) continue;
        for (const ThingId& k : kids) {
          if (!seen.insert(k).second) continue;
          touch(k, w, user, ctx, group);
          next.push_back({k, n.id, w});
        }
      }
      layer = std::move(next);
    }
  }

  void fire_tick(const ThingId& event) {
    if (p_.system_weight <= 0.0) return;
    spread(event, p_.system_weight, std::nullopt, std::nullopt, true);
    std::set<ThingId> attendees;
    for (const Edge& e : adj_.at(event)) {
      if (e.label == mb::kAttendee && type_.at(e.other) == mb::ThingType::User) attendees.insert(e.other);
    }
    for (const ThingId& u : attendees) spread(event, p_.system_weight, u, std::nullopt, false);
  }

  void enter(const ThingId& user, const ThingId& ctx) {
    auto prev = active_.find(user);
    if (prev == active_.end() || prev->second != ctx) {
      for (auto& [k, r] : local_) {
        if (std::get<0>(k) != user) continue;
        if (prev != active_.end() && std::get<1>(k) == prev->second) {
          fold(r);
          r.frozen = true;
        } else if (std::get<1>(k) == ctx && r.frozen) {
          r.frozen = false;
          reboost(r);
        }
      }
      active_[user] = ctx;
    }
    if (p_.system_weight > 0.0) touch(ctx, p_.system_weight, user, std::nullopt, true);
  }

  void apply(const mb::Event& e, std::int64_t t) {
    users_[e.actor].last_event = t;
    group_clock_.last_event = t;
    if (e.kind == mb::EventKind::ContextSwitch) {
      enter(e.actor, *e.context);
      return;
    }
    auto it = active_.find(e.actor);
    if (e.context && (it == active_.end() || it->second != *e.context)) enter(e.actor, *e.context);
    it = active_.find(e.actor);
    std::optional<ThingId> ctx;
    if (it != active_.end()) ctx = it->second;
    const double w = p_.weight(e.kind);
    if (w > 0.0) spread(*e.target, w, e.actor, ctx, true);
    if (e.kind == mb::EventKind::Complete) {
      completed_.insert(*e.target);
      auto mark = [this](Rec& r) {
        r.completed = true;
        if (!r.frozen) reboost(r);
      };
      for (auto& [k, r] : local_) {
        if (std::get<2>(k) == *e.target) mark(r);
      }
      for (auto& [k, r] : global_) {
        if (k.first == *e.target) mark(r);
      }
      if (auto g = group_.find(*e.target); g != group_.end()) mark(g->second);
    }
  }

  const mb::Scenario& s_;
  const mb::ParameterSet& p_;
  std::int64_t cap_ = 0;
  std::map<ThingId, std::vector<Edge>> adj_;
  std::map<ThingId, mb::ThingType> type_;
  std::set<ThingId> completed_;
  std::map<ThingId, Counter> users_;
  Counter group_clock_;
  std::map<ThingId, ThingId> active_;
  std::map<std::tuple<ThingId, ThingId, ThingId>, Rec> local_;
  std::map<std::pair<ThingId, ThingId>, Rec> global_;
  std::map<ThingId, Rec> group_;
  std::vector<Rec*> live_;
};

inline Result run(const mb::Scenario& s, const mb::ParameterSet& p) { return Stepped(s, p).run(); }

}  // namespace oracle
