#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "mb/error.hpp"
#include "mb/params.hpp"
#include "mb/time.hpp"

namespace mb {

// Static/dynamic split of one MB value. `base` is the value as of
// `last_update` (activity time); the current value is derived on demand by
// applying decay for the activity time elapsed since then.
struct BuoyancyRecord {
  double base = 0.0;
  ActivityTime last_update{0};
  // Stimulation instants inside the recency window, ascending.
  std::vector<ActivityTime> stim_history;
  std::optional<ActivityTime> last_stimulation;
  // Local records only: a frozen record neither decays nor accepts stimuli.
  bool frozen = false;
  ActivityTime frozen_at{0};

  friend bool operator==(const BuoyancyRecord&, const BuoyancyRecord&) = default;
};

// What decay needs to know about the thing a record belongs to.
struct DecayProfile {
  DecayRow row;
  bool completed = false;
};

inline DecayProfile decay_profile(const ParameterSet& p, const Thing& thing) {
  return {p.row(thing.type), thing.is_completed()};
}

// (1 + elapsed / tau_eff)^(-alpha) with tau_eff = tau * (1 + kappa * recent_count).
inline double decay_factor(const DecayRow& row, Duration elapsed, std::size_t recent_count,
                           double frequency_coefficient) {
  if (elapsed < Duration::zero()) {
    throw Error(ErrorCode::InvalidDuration, "negative elapsed time");
  }
  const double tau_eff =
      row.tau_days * (1.0 + frequency_coefficient * static_cast<double>(recent_count));
  return std::pow(1.0 + to_days(elapsed) / tau_eff, -row.alpha);
}

inline double decay_factor(const ParameterSet& p, const DecayRow& row, Duration elapsed,
                           std::size_t recent_count) {
  return decay_factor(row, elapsed, recent_count, p.frequency_coefficient);
}

// Finished items that went quiet decay with a steeper exponent.
inline DecayRow effective_row(const ParameterSet& p, const DecayProfile& profile,
                              const BuoyancyRecord& record, ActivityTime now) {
  DecayRow row = profile.row;
  if (profile.completed &&
      (!record.last_stimulation || now - *record.last_stimulation >= p.completion_quiet)) {
    row.alpha *= p.completion_boost;
  }
  return row;
}

// Current value without touching the record. Frozen records report their base.
inline double current_value(const BuoyancyRecord& record, const ParameterSet& p,
                            const DecayProfile& profile, ActivityTime now) {
  if (record.frozen) return record.base;
  if (now < record.last_update) {
    throw Error(ErrorCode::ClockRegression, "query precedes the record's last update");
  }
  const DecayRow row = effective_row(p, profile, record, now);
  return record.base * decay_factor(p, row, now - record.last_update, record.stim_history.size());
}

// Folds the decay accrued up to `now` into base and prunes the history to
// the recency window (entries strictly newer than now - W survive).
inline BuoyancyRecord refresh(BuoyancyRecord record, const ParameterSet& p,
                              const DecayProfile& profile, ActivityTime now) {
  if (record.frozen) throw Error(ErrorCode::FrozenRecord, "refresh of a frozen record");
  if (now < record.last_update) {
    throw Error(ErrorCode::ClockRegression, "refresh earlier than last update");
  }
  record.base = current_value(record, p, profile, now);
  record.last_update = now;
  const ActivityTime horizon = now - p.recency_window;
  std::erase_if(record.stim_history, [&](ActivityTime t) { return t <= horizon; });
  return record;
}

// Raises base by a fraction of the remaining headroom:
// base += (1 - base) * gain * weight * ramp, where ramp grows linearly from 0
// to 1 over the refractory period since the previous stimulation.
inline BuoyancyRecord stimulate(BuoyancyRecord record, const ParameterSet& p,
                                const DecayProfile& profile, double weight, ActivityTime now) {
  if (record.frozen) throw Error(ErrorCode::FrozenRecord, "stimulation of a frozen record");
  if (!(weight >= 0.0 && weight <= 1.0)) {
    throw Error(ErrorCode::InvalidWeight, "weight must lie in [0,1]");
  }
  record = refresh(std::move(record), p, profile, now);
  if (weight == 0.0) return record;
  double ramp = 1.0;
  if (record.last_stimulation) {
    const auto since = now - *record.last_stimulation;
    ramp = std::min(1.0, static_cast<double>(since.count()) /
                             static_cast<double>(p.refractory.count()));
  }
  record.base += (1.0 - record.base) * p.gain * weight * ramp;
  record.base = std::clamp(record.base, 0.0, 1.0);
  record.stim_history.push_back(now);
  record.last_stimulation = now;
  return record;
}

}  // namespace mb
