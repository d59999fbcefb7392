// mb: command-line front end for scenario runs, timelines, snapshots and
// scenario generation.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mb/mb.hpp"

namespace {

namespace fs = std::filesystem;

constexpr const char* kExitCodes =
    "Exit codes:\n"
    "  0  success\n"
    "  1  internal error\n"
    "  2  usage error\n"
    "  3  input file not found or unreadable\n"
    "  4  malformed or invalid input (scenario, params, state, template)\n"
    "  5  engine error (clock regression, unknown thing, frozen record, ...)\n"
    "  6  output could not be written\n";

mb::ParameterSet resolve_params(const std::string& explicit_path) {
  if (!explicit_path.empty()) return mb::load_parameters(explicit_path);
  if (const char* env = std::getenv("MB_PARAMS"); env != nullptr && *env != '\0') {
    return mb::load_parameters(env);
  }
  return mb::default_parameters();
}

void emit_run(const mb::RunOutcome& outcome, const std::string& out_dir,
              const std::string& state_out, const std::optional<mb::RunCursor>& cursor) {
  std::vector<std::pair<std::string, std::string>> files;
  if (!out_dir.empty()) {
    files = {{"report.txt", mb::render_report(outcome.report)},
             {"tables.csv", mb::tables_csv(outcome.report)},
             {"final.csv", mb::final_csv(outcome.report)}};
    mb::write_files_atomically(out_dir, files);
    std::cout << "scenario: " << outcome.report.scenario << "\n"
              << "events: " << outcome.report.events.size() << "\n"
              << "final @ " << mb::format_timestamp(outcome.report.final.at) << "\n"
              << mb::final_csv(outcome.report);
  } else {
    std::cout << mb::render_report(outcome.report);
  }
  if (!state_out.empty()) {
    mb::write_file_atomically(state_out, mb::serialize_state(outcome.engine, cursor));
  }
}

std::vector<mb::ThingId> resolve_watch(const mb::Graph& g, const std::vector<std::string>& watch) {
  if (watch.empty()) return mb::default_watch(g);
  for (const auto& id : watch) g.thing(id);
  return watch;
}

int run_command(const std::string& scenario_path, const std::string& params_path,
                const std::vector<std::string>& watch, const std::string& out_dir,
                const std::string& state_out) {
  const mb::Scenario scenario = mb::load_scenario(scenario_path);
  const mb::ParameterSet params = resolve_params(params_path);
  const auto watched = resolve_watch(scenario.graph, watch);
  const auto outcome = mb::run_scenario(scenario, params, watched);
  emit_run(outcome, out_dir, state_out,
           mb::RunCursor{scenario.name, scenario.events.size()});
  return 0;
}

int timeline_command(const std::string& scenario_path, const std::string& params_path,
                     const std::string& resource, const std::string& user, const std::string& step,
                     const std::string& from, const std::string& to, const std::string& out) {
  const mb::Scenario scenario = mb::load_scenario(scenario_path);
  const mb::ParameterSet params = resolve_params(params_path);
  scenario.graph.thing(resource);
  scenario.graph.thing(user);
  const mb::Duration step_len = mb::parse_duration(step);
  std::vector<mb::TimelinePoint> series;
  std::optional<mb::Timestamp> t0, t1;
  if (!from.empty()) t0 = mb::parse_timestamp(from);
  if (!to.empty()) t1 = mb::parse_timestamp(to);
  if (!scenario.events.empty()) {
    if (!t0) t0 = scenario.events.front().timestamp;
    if (!t1) t1 = scenario.horizon;
  }
  if (t0 && t1 && *t0 <= *t1) {
    series = mb::timeline(scenario, params, resource, user, *t0, *t1, step_len);
  } else if (step_len <= mb::Duration::zero()) {
    throw mb::Error(mb::ErrorCode::InvalidInterval, "step must be positive");
  }
  const std::string csv = mb::timeline_csv(series);
  if (out.empty()) {
    std::cout << csv;
  } else {
    mb::write_file_atomically(out, csv);
  }
  return 0;
}

int search_command(const std::string& scenario_path, const std::string& params_path,
                   const std::string& keyword, const std::string& user, double threshold,
                   const std::string& at, const std::string& out) {
  const mb::Scenario scenario = mb::load_scenario(scenario_path);
  const mb::ParameterSet params = resolve_params(params_path);
  const mb::Timestamp when = at.empty() ? scenario.horizon : mb::parse_timestamp(at);
  mb::Engine engine(scenario.graph, params);
  for (const auto& e : scenario.events) {
    if (e.timestamp > when) break;
    engine.apply(e);
  }
  engine.advance_to(std::max(when, engine.wall_time().value_or(when)));
  const auto result = mb::forgetful_search(engine, keyword, threshold, user, when);
  const std::string csv = mb::search_csv(result);
  if (out.empty()) {
    std::cout << csv;
  } else {
    mb::write_file_atomically(out, csv);
  }
  return 0;
}

int snapshot_save(const std::string& state_path, const std::string& scenario_path,
                  const std::string& params_path, std::optional<std::size_t> events,
                  const std::string& until) {
  const mb::ParameterSet params = resolve_params(params_path);
  if (scenario_path.empty()) {
    mb::Engine empty(mb::Graph{}, params);
    mb::write_file_atomically(state_path, mb::serialize_state(empty));
    return 0;
  }
  const mb::Scenario scenario = mb::load_scenario(scenario_path);
  std::size_t n = events.value_or(scenario.events.size());
  if (n > scenario.events.size()) {
    throw mb::Error(mb::ErrorCode::BadParam, "--events exceeds the scenario's event count");
  }
  if (!until.empty()) {
    const mb::Timestamp limit = mb::parse_timestamp(until);
    std::size_t k = 0;
    while (k < n && scenario.events[k].timestamp <= limit) ++k;
    n = k;
  }
  mb::Engine engine(scenario.graph, params);
  for (std::size_t i = 0; i < n; ++i) engine.apply(scenario.events[i]);
  mb::write_file_atomically(state_path, mb::serialize_state(engine, mb::RunCursor{scenario.name, n}));
  std::cout << "saved " << scenario.name << " after " << n << " events to " << state_path << "\n";
  return 0;
}

int snapshot_load(const std::string& state_path, const std::string& scenario_path,
                  const std::vector<std::string>& watch, const std::string& out_dir,
                  const std::string& state_out) {
  mb::LoadedState loaded = mb::parse_state(mb::read_file(state_path));
  if (scenario_path.empty()) {
    const mb::Engine& e = loaded.engine;
    std::cout << "state: " << state_path << "\n"
              << "things: " << e.graph().size() << "\n"
              << "local records: " << e.local_records().size() << "\n"
              << "global records: " << e.global_records().size() << "\n"
              << "group records: " << e.group_records().size() << "\n"
              << "wall time: " << (e.wall_time() ? mb::format_timestamp(*e.wall_time()) : "none")
              << "\n";
    if (loaded.cursor) {
      std::cout << "cursor: " << loaded.cursor->scenario << " @ " << loaded.cursor->events_applied
                << "\n";
    }
    return 0;
  }
  const mb::Scenario scenario = mb::load_scenario(scenario_path);
  if (!loaded.cursor || loaded.cursor->scenario != scenario.name) {
    throw mb::Error(mb::ErrorCode::MalformedDocument,
                    "state.cursor: snapshot was not taken from scenario '" + scenario.name + "'");
  }
  if (loaded.cursor->events_applied > scenario.events.size()) {
    throw mb::Error(mb::ErrorCode::MalformedDocument, "state.cursor.events_applied: out of range");
  }
  const auto watched = resolve_watch(loaded.engine.graph(), watch);
  const auto outcome =
      mb::run_scenario(scenario, std::move(loaded.engine), watched, loaded.cursor->events_applied);
  emit_run(outcome, out_dir, state_out, mb::RunCursor{scenario.name, scenario.events.size()});
  return 0;
}

int gen_command(const std::string& name, std::uint64_t seed, const std::vector<std::string>& raw,
                const std::string& out) {
  mb::TemplateParams params;
  for (const auto& kv : raw) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw mb::Error(mb::ErrorCode::BadParam, "expected key=value, got '" + kv + "'");
    }
    params[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  const std::string text = mb::serialize_scenario(mb::generate_scenario(name, seed, params));
  if (out.empty()) {
    std::cout << text;
  } else {
    mb::write_file_atomically(out, text);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mb - memory buoyancy engine"};
  app.footer(kExitCodes);
  app.require_subcommand(1);

  std::string params_path;

  auto* run = app.add_subcommand("run", "Run a scenario and report MB before/after every event");
  std::string run_scenario;
  std::vector<std::string> run_watch;
  std::string run_out, run_state;
  run->add_option("scenario", run_scenario, "Scenario file")->required();
  run->add_option("--params", params_path, "Parameter file (default: $MB_PARAMS or built-ins)");
  run->add_option("--watch", run_watch, "Comma-separated thing ids to tabulate")->delimiter(',');
  run->add_option("--out", run_out, "Directory for report.txt, tables.csv and final.csv");
  run->add_option("--save-state", run_state, "Write the final engine state here");

  auto* tl = app.add_subcommand("timeline", "Sample a user's global MB for one resource");
  std::string tl_scenario, tl_resource, tl_user, tl_step = "1d", tl_from, tl_to, tl_out;
  tl->add_option("scenario", tl_scenario, "Scenario file")->required();
  tl->add_option("--params", params_path, "Parameter file");
  tl->add_option("--resource", tl_resource, "Thing id")->required();
  tl->add_option("--user", tl_user, "User id")->required();
  tl->add_option("--step", tl_step, "Sampling step, e.g. 1d, 6h, 30m");
  tl->add_option("--from", tl_from, "First sample (default: first event)");
  tl->add_option("--to", tl_to, "Last sample bound (default: horizon)");
  tl->add_option("--out", tl_out, "CSV output path (default: stdout)");

  auto* search = app.add_subcommand("search", "Threshold-filtered search with coverage");
  std::string s_scenario, s_keyword, s_user, s_at, s_out;
  double s_threshold = 0.0;
  search->add_option("scenario", s_scenario, "Scenario file")->required();
  search->add_option("--params", params_path, "Parameter file");
  search->add_option("--keyword", s_keyword, "Keyword")->required();
  search->add_option("--user", s_user, "User id")->required();
  search->add_option("--threshold", s_threshold, "MB threshold in [0,1]");
  search->add_option("--at", s_at, "Query time (default: horizon)");
  search->add_option("--out", s_out, "CSV output path (default: stdout)");

  auto* snap = app.add_subcommand("snapshot", "Save or load engine state");
  std::string snap_action, snap_path, snap_scenario, snap_until, snap_out, snap_state;
  std::optional<std::size_t> snap_events;
  std::vector<std::string> snap_watch;
  snap->add_option("action", snap_action, "save | load")
      ->required()
      ->check(CLI::IsMember({"save", "load"}));
  snap->add_option("state", snap_path, "State file")->required();
  snap->add_option("--params", params_path, "Parameter file (save)");
  snap->add_option("--scenario", snap_scenario,
                   "save: scenario to replay; load: scenario to continue");
  snap->add_option("--events", snap_events, "save: number of events to apply");
  snap->add_option("--until", snap_until, "save: apply events up to this time");
  snap->add_option("--watch", snap_watch, "load: ids to tabulate")->delimiter(',');
  snap->add_option("--out", snap_out, "load: output directory for the continued run");
  snap->add_option("--save-state", snap_state, "load: write the final state here");

  auto* gen = app.add_subcommand("gen", "Generate a scenario from a template");
  std::string g_template, g_out;
  std::uint64_t g_seed = 1;
  std::vector<std::string> g_params;
  gen->add_option("--template", g_template, "solo-task | group-task | group-task-readers | "
                                            "before-after-event | rome-trip")
      ->required();
  gen->add_option("--seed", g_seed, "Seed");
  gen->add_option("--param", g_params, "Template parameter key=value (repeatable)");
  gen->add_option("--out", g_out, "Output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(mb::ExitCode::Usage);
  }

  try {
    if (*run) return run_command(run_scenario, params_path, run_watch, run_out, run_state);
    if (*tl) {
      return timeline_command(tl_scenario, params_path, tl_resource, tl_user, tl_step, tl_from,
                              tl_to, tl_out);
    }
    if (*search) {
      return search_command(s_scenario, params_path, s_keyword, s_user, s_threshold, s_at, s_out);
    }
    if (*snap) {
      if (snap_action == "save") {
        return snapshot_save(snap_path, snap_scenario, params_path, snap_events, snap_until);
      }
      return snapshot_load(snap_path, snap_scenario, snap_watch, snap_out, snap_state);
    }
    if (*gen) return gen_command(g_template, g_seed, g_params, g_out);
  } catch (const mb::FileError& e) {
    std::cerr << "mb: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const mb::Error& e) {
    std::cerr << "mb: " << e.what() << "\n";
    return static_cast<int>(mb::exit_code_for(e.code()));
  } catch (const std::exception& e) {
    std::cerr << "mb: internal error: " << e.what() << "\n";
    return static_cast<int>(mb::ExitCode::Internal);
  }
  return static_cast<int>(mb::ExitCode::Usage);
}
