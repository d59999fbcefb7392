#pragma once

#include <array>
#include <cmath>
#include <string>

#include <json.hpp>

#include "mb/error.hpp"
#include "mb/event.hpp"
#include "mb/graph.hpp"
#include "mb/graph_json.hpp"
#include "mb/time.hpp"

namespace mb {

// Per-type decay shape: d(elapsed) = (1 + elapsed / tau_eff)^(-alpha).
struct DecayRow {
  double tau_days = 7.0;
  double alpha = 1.0;

  friend bool operator==(const DecayRow&, const DecayRow&) = default;
};

struct SpreadParams {
  double rho = 0.5;
  int max_depth = 2;
  double cutoff = 0.01;

  friend bool operator==(const SpreadParams&, const SpreadParams&) = default;
};

struct ParameterSet {
  std::array<DecayRow, kAllThingTypes.size()> rows{};
  double gain = 0.5;
  std::array<double, kAllEventKinds.size()> event_weights{};
  Duration refractory = kHour;
  Duration idle_cap = 48 * kHour;
  SpreadParams spread;
  Duration recency_window = 14 * kDay;
  double frequency_coefficient = 0.5;
  double completion_boost = 1.5;
  Duration completion_quiet = 7 * kDay;
  Duration lead_window = 3 * kDay;
  double system_weight = 0.3;

  const DecayRow& row(ThingType t) const { return rows[static_cast<std::size_t>(t)]; }
  DecayRow& row(ThingType t) { return rows[static_cast<std::size_t>(t)]; }
  double weight(EventKind k) const { return event_weights[static_cast<std::size_t>(k)]; }
  double& weight(EventKind k) { return event_weights[static_cast<std::size_t>(k)]; }

  friend bool operator==(const ParameterSet&, const ParameterSet&) = default;
};

inline ParameterSet default_parameters() {
  ParameterSet p;
  p.row(ThingType::Generic) = {7.0, 1.0};
  p.row(ThingType::Email) = {2.0, 1.2};
  p.row(ThingType::Person) = {30.0, 0.6};
  p.row(ThingType::User) = {30.0, 0.6};
  p.row(ThingType::Document) = {14.0, 0.8};
  p.row(ThingType::Presentation) = {14.0, 0.8};
  p.row(ThingType::Task) = {7.0, 1.0};
  p.row(ThingType::CalendarEvent) = {7.0, 1.0};
  p.row(ThingType::Project) = {60.0, 0.5};
  p.row(ThingType::Context) = {30.0, 0.7};
  p.row(ThingType::WebPage) = {7.0, 1.0};
  p.row(ThingType::Topic) = {30.0, 0.7};
  p.weight(EventKind::Create) = 1.0;
  p.weight(EventKind::Modify) = 0.9;
  p.weight(EventKind::Annotate) = 0.8;
  p.weight(EventKind::View) = 0.7;
  p.weight(EventKind::Complete) = 0.6;
  p.weight(EventKind::ContextSwitch) = 0.0;
  return p;
}

inline void check_parameters(const ParameterSet& p) {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidParameter, what); };
  auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  auto open_unit = [](double x) { return x > 0.0 && x < 1.0; };
  if (!(p.gain > 0.0 && p.gain <= 1.0)) bad("gain must lie in (0,1]");
  for (ThingType t : kAllThingTypes) {
    const DecayRow& r = p.row(t);
    if (!(r.tau_days > 0.0) || !std::isfinite(r.tau_days)) {
      bad(std::string(to_string(t)) + ".tau_days must be > 0");
    }
    if (!(r.alpha > 0.0) || !std::isfinite(r.alpha)) {
      bad(std::string(to_string(t)) + ".alpha must be > 0");
    }
  }
  for (EventKind k : kAllEventKinds) {
    if (!in_unit(p.weight(k))) bad(std::string(to_string(k)) + " weight must lie in [0,1]");
  }
  if (!in_unit(p.system_weight)) bad("system_weight must lie in [0,1]");
  if (!open_unit(p.spread.rho)) bad("spread.rho must lie in (0,1)");
  if (!open_unit(p.spread.cutoff)) bad("spread.cutoff must lie in (0,1)");
  if (p.spread.max_depth < 1) bad("spread.max_depth must be >= 1");
  if (p.refractory <= Duration::zero()) bad("refractory must be positive");
  if (p.idle_cap <= Duration::zero()) bad("idle_cap must be positive");
  if (p.recency_window <= Duration::zero()) bad("recency_window must be positive");
  if (p.completion_quiet < Duration::zero()) bad("completion_quiet must be >= 0");
  if (p.lead_window < Duration::zero()) bad("lead_window must be >= 0");
  if (!(p.frequency_coefficient >= 0.0) || !std::isfinite(p.frequency_coefficient)) {
    bad("frequency_coefficient must be >= 0");
  }
  if (!(p.completion_boost > 0.0) || !std::isfinite(p.completion_boost)) {
    bad("completion_boost must be > 0");
  }
}

inline Json parameters_to_json(const ParameterSet& p) {
  Json types = Json::object();
  for (ThingType t : kAllThingTypes) {
    types[std::string(to_string(t))] = Json{{"tau_days", p.row(t).tau_days}, {"alpha", p.row(t).alpha}};
  }
  Json weights = Json::object();
  for (EventKind k : kAllEventKinds) {
    if (is_interaction(k)) weights[std::string(to_string(k))] = p.weight(k);
  }
  Json j;
  j["types"] = std::move(types);
  j["gain"] = p.gain;
  j["event_weights"] = std::move(weights);
  j["refractory_seconds"] = p.refractory.count();
  j["idle_cap_seconds"] = p.idle_cap.count();
  j["spread"] = Json{{"rho", p.spread.rho}, {"max_depth", p.spread.max_depth}, {"cutoff", p.spread.cutoff}};
  j["recency_window_days"] = to_days(p.recency_window);
  j["frequency_coefficient"] = p.frequency_coefficient;
  j["completion_boost"] = p.completion_boost;
  j["completion_quiet_days"] = to_days(p.completion_quiet);
  j["lead_window_days"] = to_days(p.lead_window);
  j["system_weight"] = p.system_weight;
  return j;
}

// Overlays a (possibly partial) parameter document onto `base`. Unknown keys
// at any level are rejected.
inline ParameterSet parameters_from_json(const Json& j, ParameterSet base = default_parameters()) {
  using detail::malformed;
  auto number = [](const Json& v, const std::string& where) {
    if (!v.is_number()) malformed(where, "expected a number");
    return v.get<double>();
  };
  auto integer = [](const Json& v, const std::string& where) {
    if (!v.is_number_integer()) malformed(where, "expected an integer");
    return v.get<std::int64_t>();
  };
  if (!j.is_object()) malformed("params", "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const Json& v = it.value();
    const std::string where = "params." + key;
    if (key == "types") {
      if (!v.is_object()) malformed(where, "expected an object");
      for (auto t = v.begin(); t != v.end(); ++t) {
        auto type = thing_type_from_string(t.key());
        if (!type) malformed(where, "unknown thing type '" + t.key() + "'");
        if (!t.value().is_object()) malformed(where + "." + t.key(), "expected an object");
        for (auto f = t.value().begin(); f != t.value().end(); ++f) {
          const std::string fw = where + "." + t.key() + "." + f.key();
          if (f.key() == "tau_days") {
            base.row(*type).tau_days = number(f.value(), fw);
          } else if (f.key() == "alpha") {
            base.row(*type).alpha = number(f.value(), fw);
          } else {
            malformed(where + "." + t.key(), "unknown key '" + f.key() + "'");
          }
        }
      }
    } else if (key == "gain") {
      base.gain = number(v, where);
    } else if (key == "event_weights") {
      if (!v.is_object()) malformed(where, "expected an object");
      for (auto w = v.begin(); w != v.end(); ++w) {
        auto kind = event_kind_from_string(w.key());
        if (!kind || !is_interaction(*kind)) malformed(where, "unknown event kind '" + w.key() + "'");
        base.weight(*kind) = number(w.value(), where + "." + w.key());
      }
    } else if (key == "refractory_seconds") {
      base.refractory = Duration{integer(v, where)};
    } else if (key == "idle_cap_seconds") {
      base.idle_cap = Duration{integer(v, where)};
    } else if (key == "spread") {
      if (!v.is_object()) malformed(where, "expected an object");
      for (auto f = v.begin(); f != v.end(); ++f) {
        const std::string fw = where + "." + f.key();
        if (f.key() == "rho") {
          base.spread.rho = number(f.value(), fw);
        } else if (f.key() == "max_depth") {
          base.spread.max_depth = static_cast<int>(integer(f.value(), fw));
        } else if (f.key() == "cutoff") {
          base.spread.cutoff = number(f.value(), fw);
        } else {
          malformed(where, "unknown key '" + f.key() + "'");
        }
      }
    } else if (key == "recency_window_days") {
      base.recency_window = days_to_duration(number(v, where));
    } else if (key == "frequency_coefficient") {
      base.frequency_coefficient = number(v, where);
    } else if (key == "completion_boost") {
      base.completion_boost = number(v, where);
    } else if (key == "completion_quiet_days") {
      base.completion_quiet = days_to_duration(number(v, where));
    } else if (key == "lead_window_days") {
      base.lead_window = days_to_duration(number(v, where));
    } else if (key == "system_weight") {
      base.system_weight = number(v, where);
    } else {
      malformed("params", "unknown key '" + key + "'");
    }
  }
  check_parameters(base);
  return base;
}

}  // namespace mb
