#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "mb/engine.hpp"
#include "mb/event.hpp"
#include "mb/params.hpp"

namespace mb {

struct Hit {
  ThingId id;
  double mb = 0.0;
  friend bool operator==(const Hit&, const Hit&) = default;
};

struct SearchResult {
  std::vector<Hit> hits;  // descending MB, ties by id
  double coverage = 1.0;
  std::size_t hidden_count = 0;
  friend bool operator==(const SearchResult&, const SearchResult&) = default;
};

namespace detail {

inline void rank_descending(std::vector<Hit>& hits) {
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    if (a.mb != b.mb) return a.mb > b.mb;
    return a.id < b.id;
  });
}

inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace detail

// Threshold hiding over literal matches, scored by the user's global MB.
// Coverage is the visible share of the matches; with no matches nothing is
// hidden and coverage is 1.
inline SearchResult forgetful_search(const Engine& engine, std::string_view keyword,
                                     double threshold, const ThingId& user, Timestamp now) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidThreshold, "threshold must lie in [0,1]");
  }
  SearchResult result;
  for (const ThingId& id : engine.graph().match_literal(keyword)) {
    const double mb = engine.global_mb(id, user, now);
    if (mb >= threshold) {
      result.hits.push_back({id, mb});
    } else {
      ++result.hidden_count;
    }
  }
  detail::rank_descending(result.hits);
  const std::size_t total = result.hits.size() + result.hidden_count;
  result.coverage = result.hidden_count == 0
                        ? 1.0
                        : static_cast<double>(result.hits.size()) / static_cast<double>(total);
  return result;
}

// Context members ranked by the user's local MB in that context.
inline std::vector<Hit> context_listing(const Engine& engine, const ThingId& context,
                                        const ThingId& user, Timestamp now) {
  std::vector<Hit> out;
  for (const ThingId& id : engine.graph().context_members(context)) {
    out.push_back({id, engine.local_mb(id, user, context, now)});
  }
  detail::rank_descending(out);
  return out;
}

struct LocalEntry {
  ThingId user;
  ThingId context;
  double mb = 0.0;
  friend bool operator==(const LocalEntry&, const LocalEntry&) = default;
};

struct MBReport {
  ThingId resource;
  double group = 0.0;
  std::vector<std::pair<ThingId, double>> global;  // per user, id order
  std::vector<LocalEntry> local;                   // per (user, context), id order
  friend bool operator==(const MBReport&, const MBReport&) = default;
};

// Every record family for one resource; users and contexts are all things of
// those types, absent records read as 0.
inline MBReport mb_report(const Engine& engine, const ThingId& resource, Timestamp now) {
  const Graph& g = engine.graph();
  g.thing(resource);
  MBReport report;
  report.resource = resource;
  report.group = engine.group_mb(resource, now);
  const auto users = g.ids_of_type(ThingType::User);
  const auto contexts = g.ids_of_type(ThingType::Context);
  for (const ThingId& u : users) report.global.emplace_back(u, engine.global_mb(resource, u, now));
  for (const ThingId& u : users) {
    for (const ThingId& c : contexts) {
      report.local.push_back({u, c, engine.local_mb(resource, u, c, now)});
    }
  }
  return report;
}

struct TimelinePoint {
  Timestamp t;
  double mb = 0.0;
  friend bool operator==(const TimelinePoint&, const TimelinePoint&) = default;
};

// Replays the scenario on a private engine and samples the user's global MB
// at t_start + k * step for k = 0 .. floor((t_end - t_start) / step). Events
// stamped exactly at a sample instant are applied before sampling.
inline std::vector<TimelinePoint> timeline(const Scenario& scenario, const ParameterSet& params,
                                           const ThingId& resource, const ThingId& user,
                                           Timestamp t_start, Timestamp t_end, Duration step) {
  if (t_end < t_start) throw Error(ErrorCode::InvalidInterval, "t_start > t_end");
  if (step <= Duration::zero()) throw Error(ErrorCode::InvalidInterval, "step must be positive");
  scenario.graph.thing(resource);
  scenario.graph.thing(user);
  Engine engine(scenario.graph, params);
  std::vector<TimelinePoint> out;
  const auto samples = (t_end - t_start) / step + 1;
  out.reserve(static_cast<std::size_t>(samples));
  std::size_t next = 0;
  for (std::int64_t k = 0; k < samples; ++k) {
    const Timestamp t = t_start + k * step;
    while (next < scenario.events.size() && scenario.events[next].timestamp <= t) {
      engine.apply(scenario.events[next++]);
    }
    if (!engine.wall_time() || *engine.wall_time() <= t) engine.advance_to(t);
    out.push_back({t, engine.global_mb(resource, user, t)});
  }
  return out;
}

inline std::string timeline_csv(const std::vector<TimelinePoint>& series) {
  std::string out = "timestamp,mb\n";
  for (const auto& p : series) {
    out += format_timestamp(p.t) + "," + detail::fixed6(p.mb) + "\n";
  }
  return out;
}

inline std::string search_csv(const SearchResult& r) {
  std::string out = "rank,id,mb\n";
  for (std::size_t i = 0; i < r.hits.size(); ++i) {
    out += std::to_string(i + 1) + "," + r.hits[i].id + "," + detail::fixed6(r.hits[i].mb) + "\n";
  }
  out += "# coverage=" + detail::fixed6(r.coverage) + " hidden=" + std::to_string(r.hidden_count) + "\n";
  return out;
}

}  // namespace mb
