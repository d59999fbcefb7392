#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <vector>

#include "mb/error.hpp"
#include "mb/graph.hpp"
#include "mb/time.hpp"

namespace mb {

// One activity axis. Between consecutive events activity time advances with
// wall time until the gap reaches the idle cap, then stalls. Before the first
// event the axis stands still at zero.
class ActivityTrack {
 public:
  struct Knot {
    Timestamp wall;
    ActivityTime activity;
    friend bool operator==(const Knot&, const Knot&) = default;
  };

  ActivityTrack() = default;
  explicit ActivityTrack(std::vector<Knot> knots) : knots_(std::move(knots)) {}

  void record_event(Timestamp t, Duration idle_cap) {
    if (knots_.empty()) {
      knots_.push_back({t, ActivityTime{0}});
      return;
    }
    if (t < knots_.back().wall) throw Error(ErrorCode::ClockRegression, "event before last event");
    knots_.push_back({t, at(t, idle_cap)});
  }

  ActivityTime at(Timestamp t, Duration idle_cap) const {
    if (knots_.empty() || t < knots_.front().wall) return ActivityTime{0};
    auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                               [](Timestamp v, const Knot& k) { return v < k.wall; });
    const Knot& k = *std::prev(it);
    return k.activity + std::min<Duration>(t - k.wall, idle_cap);
  }

  std::optional<Timestamp> last_event() const {
    if (knots_.empty()) return std::nullopt;
    return knots_.back().wall;
  }

  const std::vector<Knot>& knots() const { return knots_; }

  friend bool operator==(const ActivityTrack&, const ActivityTrack&) = default;

 private:
  std::vector<Knot> knots_;
};

// Per-user activity tracks plus the group track fed by every user's events.
class ActivityClock {
 public:
  explicit ActivityClock(Duration idle_cap = 48 * kHour) : idle_cap_(idle_cap) {}

  void record_event(const ThingId& user, Timestamp t) {
    users_[user].record_event(t, idle_cap_);
    group_.record_event(t, idle_cap_);
  }

  ActivityTime user_time(const ThingId& user, Timestamp t) const {
    auto it = users_.find(user);
    return it == users_.end() ? ActivityTime{0} : it->second.at(t, idle_cap_);
  }

  ActivityTime group_time(Timestamp t) const { return group_.at(t, idle_cap_); }

  // Activity time the user accrued over [t0, t1].
  Duration activity_elapsed(const ThingId& user, Timestamp t0, Timestamp t1) const {
    if (t1 < t0) throw Error(ErrorCode::InvalidInterval, "t0 > t1");
    return user_time(user, t1) - user_time(user, t0);
  }

  Duration idle_cap() const { return idle_cap_; }
  const std::map<ThingId, ActivityTrack>& users() const { return users_; }
  const ActivityTrack& group() const { return group_; }

  void restore(std::map<ThingId, ActivityTrack> users, ActivityTrack group) {
    users_ = std::move(users);
    group_ = std::move(group);
  }

  friend bool operator==(const ActivityClock&, const ActivityClock&) = default;

 private:
  Duration idle_cap_;
  std::map<ThingId, ActivityTrack> users_;
  ActivityTrack group_;
};

}  // namespace mb
