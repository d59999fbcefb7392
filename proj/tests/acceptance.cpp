// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "mb/mb.hpp"
#include "oracle/stepped_oracle.hpp"
#include "support/random_world.hpp"

namespace fs = std::filesystem;
using namespace mb;
using Clock = std::chrono::steady_clock;

namespace {

struct Check {
  std::string failure;
  std::string note;
  void expect(bool ok, const std::string& what) {
    if (!ok && failure.empty()) failure = what;
  }
  explicit operator bool() const { return failure.empty(); }
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const std::vector<std::string>& bundled() {
  static const std::vector<std::string> names(kTemplateNames.begin(), kTemplateNames.end());
  return names;
}

Scenario load_bundled(const std::string& name) {
  return load_scenario(fs::path(MB_SCENARIO_DIR) / (name + ".json"));
}

Timestamp ts(const char* s) { return parse_timestamp(s); }

Event ev(Timestamp t, const ThingId& actor, EventKind kind, std::optional<ThingId> target,
         std::optional<ThingId> context = std::nullopt) {
  return Event{t, actor, kind, std::move(target), std::move(context)};
}

// A user, one watched thing with no relations, and an unrelated thing the
// user keeps touching so their activity clock never stalls.
struct Solo {
  Graph graph;
  Solo(ThingType watched = ThingType::Generic) {
    graph.add_thing("User", ThingType::User, [] { ThingOptions o; o.id = "user:u"; return o; }());
    graph.add_thing("Watched", watched, [] { ThingOptions o; o.id = "x"; return o; }());
    graph.add_thing("Heartbeat", ThingType::Generic, [] { ThingOptions o; o.id = "hb"; return o; }());
  }
};

Check ac1_normalization() {
  Check c;
  const auto t0 = Clock::now();
  for (std::uint64_t seed = 1; seed <= 10000 && c; ++seed) {
    testing_support::RandomWorld world(seed);
    const Scenario s = world.scenario();
    Engine engine(s.graph);
    auto inspect = [&](Timestamp now) {
      for (double v : testing_support::all_values(engine, now)) {
        c.expect(v >= 0.0 && v <= 1.0, "seed " + std::to_string(seed) + ": MB " + num(v));
      }
      c.expect(engine.check_invariants().empty(), "seed " + std::to_string(seed) + ": invariant broken");
    };
    for (const Event& e : s.events) {
      engine.apply(e);
      inspect(e.timestamp);
    }
    engine.advance_to(s.horizon);
    inspect(s.horizon);
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 60.0, "took " + num(secs) + " s");
  return c;
}

Check ac2_stepped_oracle() {
  Check c;
  const auto t0 = Clock::now();
  const ParameterSet p = default_parameters();
  double overall = 0.0;
  for (const auto& name : bundled()) {
    const Scenario s = load_bundled(name);
    const Engine engine = run_scenario(s, p, {}).engine;
    const Timestamp h = s.horizon;
    const oracle::Result ref = oracle::run(s, p);
    c.expect(ref.local.size() == engine.local_records().size() &&
                 ref.global.size() == engine.global_records().size() &&
                 ref.group.size() == engine.group_records().size(),
             name + ": record sets differ");
    double worst = 0.0;
    for (const auto& [k, v] : ref.local) {
      const auto& [u, ctx, r] = k;
      worst = std::max(worst, std::abs(engine.local_mb(r, u, ctx, h) - v));
    }
    for (const auto& [k, v] : ref.global) {
      worst = std::max(worst, std::abs(engine.global_mb(k.first, k.second, h) - v));
    }
    for (const auto& [k, v] : ref.group) worst = std::max(worst, std::abs(engine.group_mb(k, h) - v));
    c.expect(worst <= 1e-9, name + ": max deviation " + num(worst));
    overall = std::max(overall, worst);
  }
  c.note = "max deviation " + num(overall);
  const double secs = seconds_since(t0);
  c.expect(secs < 120.0, "took " + num(secs) + " s");
  return c;
}

Check ac3_single_access() {
  Check c;
  Solo w;
  Scenario s{"single-view", w.graph, {}, {}};
  const Timestamp start = ts("2018-01-01T09:00:00Z");
  s.events.push_back(ev(start, "user:u", EventKind::View, "x"));
  for (int d = 1; d <= 60; ++d) s.events.push_back(ev(start + d * kDay, "user:u", EventKind::View, "hb"));
  s.horizon = s.events.back().timestamp;
  const auto series = timeline(s, default_parameters(), "x", "user:u", start, s.horizon, kHour);
  c.expect(series.front().mb == 0.35, "jump is " + num(series.front().mb));
  for (std::size_t i = 1; i < series.size(); ++i) {
    c.expect(series[i].mb < series[i - 1].mb, "not strictly decreasing at sample " + std::to_string(i));
  }
  for (const auto& pt : series) c.expect(pt.mb < 1.0, "reached 1.0");
  return c;
}

double after_views(Duration spacing) {
  Solo w;
  Engine e(w.graph);
  const Timestamp start = ts("2018-01-01T09:00:00Z");
  for (int i = 0; i < 10; ++i) e.apply(ev(start + i * spacing, "user:u", EventKind::View, "x"));
  return e.global_mb("x", "user:u", start + 9 * spacing);
}

Check ac4_quick_succession() {
  Check c;
  const double minute = after_views(std::chrono::minutes{1});
  const double day = after_views(kDay);
  c.expect(minute < day, "minute spacing " + num(minute) + " not below daily " + num(day));
  c.expect(std::abs(minute - 0.38323441384841894) <= 1e-12, "minute spacing " + num(minute));
  c.expect(std::abs(day - 0.93758022008089803) <= 1e-12, "daily spacing " + num(day));
  return c;
}

Check ac5_saturation() {
  Check c;
  Solo w;
  Engine e(w.graph);
  const Timestamp start = ts("2018-01-01T09:00:00Z");
  std::vector<double> envelope;
  for (int i = 0; i < 200; ++i) {
    const Timestamp t = start + i * kDay;
    e.apply(ev(t, "user:u", EventKind::View, "x"));
    envelope.push_back(e.global_mb("x", "user:u", t));
  }
  c.expect(envelope[29] >= 0.9, "after 30 views " + num(envelope[29]));
  c.expect(std::abs(envelope[29] - 0.968439935315486) <= 1e-12, "after 30 views " + num(envelope[29]));
  for (std::size_t i = 1; i < envelope.size(); ++i) {
    c.expect(envelope[i] >= envelope[i - 1], "envelope dips at view " + std::to_string(i + 1));
  }
  // Fixed point of b = d * b + (1 - d * b) * g * w, d the one-day factor at a full window of 14 stimuli.
  const ParameterSet p = default_parameters();
  const double d = decay_factor(p, p.row(ThingType::Generic), kDay, 14);
  const double gw = p.gain * p.weight(EventKind::View);
  const double fixed = gw / (1.0 - (1.0 - gw) * d);
  c.expect(std::abs(fixed - 0.96844660194174781) <= 1e-12, "analytic fixed point " + num(fixed));
  c.expect(std::abs(envelope.back() - fixed) <= 1e-6,
           "envelope limit " + num(envelope.back()) + " vs " + num(fixed));
  c.note = "30 views " + num(envelope[29]) + ", limit " + num(envelope.back()) + ", analytic " + num(fixed);
  return c;
}

Check ac6_long_tail() {
  Check c;
  const ParameterSet p = default_parameters();
  for (ThingType t : kAllThingTypes) {
    for (std::size_t n : {0u, 1u, 14u}) {
      auto at = [&](int days) { return decay_factor(p, p.row(t), days * kDay, n); };
      const double early = at(0) - at(1);
      const double late = at(29) - at(30);
      c.expect(early > late && late > 0.0, std::string(to_string(t)) + " n=" + std::to_string(n));
    }
  }
  return c;
}

Check ac7_type_heuristic() {
  Check c;
  const ParameterSet p = default_parameters();
  BuoyancyRecord r;
  r.base = 0.8;
  const ActivityTime later = 7 * kDay;
  const double email = current_value(r, p, {p.row(ThingType::Email), false}, later);
  const double person = current_value(r, p, {p.row(ThingType::Person), false}, later);
  c.expect(email < person, "email " + num(email) + " person " + num(person));
  c.expect(std::abs(email - 0.13159366132876565) <= 1e-12, "email " + num(email));
  c.expect(std::abs(person - 0.70541015167965604) <= 1e-12, "person " + num(person));
  return c;
}

Check ac8_golden_thread() {
  Check c;
  const Scenario s = load_bundled("rome-trip");
  Engine e(s.graph);
  std::optional<Timestamp> left, returned;
  std::vector<double> before, after;
  std::vector<Hit> listing_before, listing_after;
  auto snapshot = [&](Timestamp now, std::vector<double>& out, std::vector<Hit>& listing) {
    for (const auto& [k, r] : e.local_records()) {
      if (k.user == "user:1" && k.context == "ctx:rome") out.push_back(e.local_mb(k.resource, k.user, k.context, now));
    }
    listing = context_listing(e, "ctx:rome", "user:1", now);
  };
  for (const Event& event : s.events) {
    const bool leaving = event.actor == "user:1" && event.kind == EventKind::ContextSwitch &&
                         event.context == "ctx:mannheim";
    const bool back = left && !returned && event.actor == "user:1" && event.context == "ctx:rome";
    if (back) {
      e.advance_to(event.timestamp);
      returned = event.timestamp;
      snapshot(event.timestamp, after, listing_after);
    }
    e.apply(event);
    if (leaving) {
      left = event.timestamp;
      snapshot(event.timestamp, before, listing_before);
    }
  }
  c.expect(left && returned, "scenario lacks the Mannheim phase");
  if (!c) return c;
  c.expect(*returned - *left >= 30 * kDay, "Mannheim phase shorter than 30 days");
  c.expect(!before.empty(), "no Rome-trip local records");
  c.expect(listing_before.size() == 8, "expected 8 Rome-trip members, got " + std::to_string(listing_before.size()));
  c.expect(before == after, "Rome-trip local MB changed");
  c.expect(listing_before == listing_after, "Rome-trip listing changed");
  return c;
}

Check ac9_idle_cap() {
  Check c;
  Solo w;
  Engine e(w.graph);
  const Timestamp t0 = ts("2018-01-01T09:00:00Z");
  e.apply(ev(t0, "user:u", EventKind::View, "x"));
  const Timestamp back = t0 + 21 * kDay;
  e.apply(ev(back, "user:u", EventKind::View, "hb"));
  const ParameterSet p = default_parameters();
  const double clamp = 0.35 * decay_factor(p, p.row(ThingType::Generic), p.idle_cap, 1);
  const double got = e.global_mb("x", "user:u", back);
  c.expect(std::abs(got - clamp) <= 1e-12, "after gap " + num(got) + " vs " + num(clamp));
  c.expect(std::abs(got - 0.29399999999999998) <= 1e-12, "clamp oracle " + num(got));
  c.expect(e.clock().activity_elapsed("user:u", t0, back) == 48 * kHour, "gap not clamped to 48h");
  return c;
}

// Hub with `spokes` leaves; the first leaf continues into a chain l1 - m - far.
Graph star(int spokes) {
  Graph g;
  auto add = [&](const std::string& id, ThingType t = ThingType::Generic) {
    ThingOptions o;
    o.id = id;
    g.add_thing(id, t, o);
  };
  add("user:u", ThingType::User);
  add("hub");
  for (int i = 1; i <= spokes; ++i) {
    add("l" + std::to_string(i));
    g.add_relation("hub", "l" + std::to_string(i), "related");
  }
  add("m");
  add("far");
  g.add_relation("l1", "m", "related");
  g.add_relation("m", "far", "related");
  return g;
}

Check ac10_spreading() {
  Check c;
  const Timestamp t = ts("2018-01-01T09:00:00Z");
  StimulusScope scope;
  scope.user = "user:u";
  auto base_of = [](const Engine& e, const ThingId& id) -> std::optional<double> {
    auto it = e.global_records().find(GlobalKey{id, "user:u"});
    if (it == e.global_records().end()) return std::nullopt;
    return it->second.base;
  };
  double previous = 1.0;
  for (int k = 1; k <= 8; ++k) {
    Engine e(star(k));
    e.spread("hub", 0.7, scope, t);
    const double w1 = 0.7 * 0.5 / (1.0 + std::log2(static_cast<double>(k)));
    const double w2 = w1 * 0.5;
    for (int i = 1; i <= k; ++i) {
      const auto b = base_of(e, "l" + std::to_string(i));
      c.expect(b && std::abs(*b - 0.5 * w1) <= 1e-12, "k=" + std::to_string(k) + " spoke " + std::to_string(i));
    }
    const auto m = base_of(e, "m");
    c.expect(m && std::abs(*m - 0.5 * w2) <= 1e-12, "k=" + std::to_string(k) + " depth-2 node");
    c.expect(!base_of(e, "far"), "k=" + std::to_string(k) + " depth-3 node changed");
    if (!c) break;
    const double delivered = *base_of(e, "l1") / 0.5;
    c.expect(delivered <= previous, "delivered weight grew with hub degree " + std::to_string(k));
    previous = delivered;
    if (k == 1) c.expect(std::abs(*base_of(e, "l1") - 0.175) <= 1e-12, "degree-1 case");
  }
  // From a leaf: the hub receives 0.35 and the chain beyond stays within depth 2.
  Engine e(star(1));
  e.spread("m", 0.7, scope, t);
  const auto far = base_of(e, "far");
  const auto l1 = base_of(e, "l1");
  const auto hub = base_of(e, "hub");
  c.expect(far && l1 && hub, "leaf spread missed a node");
  if (c) {
    // m has degree 2: 0.7 * 0.5 / 2 = 0.175 to each side; l1 passes on 0.175 * 0.5.
    c.expect(std::abs(*far - 0.5 * 0.175) <= 1e-12, "far " + num(*far));
    c.expect(std::abs(*l1 - 0.5 * 0.175) <= 1e-12, "l1 " + num(*l1));
    c.expect(std::abs(*hub - 0.5 * 0.0875) <= 1e-12, "hub " + num(*hub));
  }
  return c;
}

Check ac11_coverage() {
  Check c;
  for (std::uint64_t seed = 1; seed <= 1000 && c; ++seed) {
    testing_support::RandomWorld world(seed * 7919);
    const Scenario s = world.scenario();
    Engine e(s.graph);
    for (const Event& event : s.events) e.apply(event);
    e.advance_to(s.horizon);
    const auto users = s.graph.ids_of_type(ThingType::User);
    const ThingId& user = world.pick(users);
    for (const std::string keyword : {"e", "a", "rome", "plan"}) {
      double a = std::uniform_real_distribution<double>(0.0, 1.0)(world.rng());
      double b = world.coin(0.2) ? a : std::uniform_real_distribution<double>(0.0, 1.0)(world.rng());
      if (a > b) std::swap(a, b);
      const SearchResult low = forgetful_search(e, keyword, a, user, s.horizon);
      const SearchResult high = forgetful_search(e, keyword, b, user, s.horizon);
      const std::string where = "seed " + std::to_string(seed) + " '" + keyword + "'";
      std::set<ThingId> low_ids;
      for (const Hit& h : low.hits) low_ids.insert(h.id);
      for (const Hit& h : high.hits) c.expect(low_ids.count(h.id) == 1, where + ": hits not nested");
      const auto matches = s.graph.match_literal(keyword).size();
      for (const SearchResult* r : {&low, &high}) {
        c.expect(r->hits.size() + r->hidden_count == matches, where + ": counts do not add up");
        const double expected = r->hidden_count == 0 ? 1.0
                                                     : static_cast<double>(r->hits.size()) /
                                                           static_cast<double>(matches);
        c.expect(r->coverage == expected, where + ": coverage " + num(r->coverage));
      }
      c.expect(high.coverage <= low.coverage, where + ": coverage rose with threshold");
    }
  }
  return c;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + MB_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

Check ac12_determinism() {
  Check c;
  const ParameterSet p = default_parameters();
  const fs::path tmp = fs::temp_directory_path() / ("mb-acceptance-" + std::to_string(::getpid()));
  for (const auto& name : bundled()) {
    const Scenario s = load_bundled(name);
    const auto watch = default_watch(s.graph);
    const RunOutcome one = run_scenario(s, p, watch);
    const RunOutcome two = run_scenario(s, p, watch);
    c.expect(render_report(one.report) == render_report(two.report) &&
                 tables_csv(one.report) == tables_csv(two.report) &&
                 serialize_state(one.engine) == serialize_state(two.engine),
             name + ": repeated runs differ");

    const std::size_t n = s.events.size();
    for (std::size_t cut : {std::size_t{0}, n / 3, n / 2, n - 1, n}) {
      Engine head(s.graph, p);
      for (std::size_t i = 0; i < cut; ++i) head.apply(s.events[i]);
      const LoadedState loaded = parse_state(serialize_state(head, RunCursor{s.name, cut}));
      c.expect(loaded.cursor && loaded.cursor->events_applied == cut, name + ": cursor lost");
      const RunOutcome resumed = run_scenario(s, loaded.engine, watch, cut);
      c.expect(resumed.engine == one.engine, name + ": resumed state differs at cut " + std::to_string(cut));
      c.expect(serialize_state(resumed.engine) == serialize_state(one.engine),
               name + ": resumed snapshot bytes differ at cut " + std::to_string(cut));
      c.expect(resumed.report.final == one.report.final, name + ": resumed final table differs");
      const std::vector<EventTables> tail(one.report.events.begin() + static_cast<std::ptrdiff_t>(cut),
                                          one.report.events.end());
      c.expect(resumed.report.events == tail, name + ": resumed event tables differ");
    }

    const std::string scen = (fs::path(MB_SCENARIO_DIR) / (name + ".json")).string();
    const fs::path a = tmp / name / "a", b = tmp / name / "b";
    c.expect(run_cli("run \"" + scen + "\" --out \"" + a.string() + "\" --save-state \"" +
                     (a / "state.json").string() + "\"") == 0 &&
                 run_cli("run \"" + scen + "\" --out \"" + b.string() + "\" --save-state \"" +
                         (b / "state.json").string() + "\"") == 0,
             name + ": CLI run failed");
    for (const char* f : {"report.txt", "tables.csv", "final.csv", "state.json"}) {
      c.expect(fs::exists(a / f) && read_file(a / f) == read_file(b / f), name + ": CLI output " + f + " differs");
    }
  }
  std::error_code ec;
  fs::remove_all(tmp, ec);
  return c;
}

}  // namespace

// An optional argument restricts the run to criteria whose name contains it.
int main(int argc, char** argv) {
  const std::string only = argc > 1 ? argv[1] : "";
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria = {
      {"AC1 normalization fuzz", ac1_normalization},
      {"AC2 lazy vs stepped oracle", ac2_stepped_oracle},
      {"AC3 single access shape", ac3_single_access},
      {"AC4 quick succession", ac4_quick_succession},
      {"AC5 saturation", ac5_saturation},
      {"AC6 long tail", ac6_long_tail},
      {"AC7 type heuristic", ac7_type_heuristic},
      {"AC8 golden thread", ac8_golden_thread},
      {"AC9 idle cap", ac9_idle_cap},
      {"AC10 spreading", ac10_spreading},
      {"AC11 coverage monotonicity", ac11_coverage},
      {"AC12 determinism and persistence", ac12_determinism},
  };
  int failed = 0, ran = 0;
  for (const auto& [name, run] : criteria) {
    if (name.find(only) == std::string::npos) continue;
    ++ran;
    const auto t0 = Clock::now();
    Check result;
    try {
      result = run();
    } catch (const std::exception& e) {
      result.failure = std::string("exception: ") + e.what();
    }
    const double secs = seconds_since(t0);
    if (result) {
      std::printf("[PASS] %s (%.2f s)%s\n", name.c_str(), secs,
                  result.note.empty() ? "" : ("  " + result.note).c_str());
    } else {
      ++failed;
      std::printf("[FAIL] %s (%.2f s): %s\n", name.c_str(), secs, result.failure.c_str());
    }
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
