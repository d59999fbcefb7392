#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mb/engine.hpp"
#include "mb/query.hpp"
#include "mb/scenario_json.hpp"
#include "mb/state_json.hpp"

namespace mb {

// Process exit codes used by the `mb` tool.
enum class ExitCode : int {
  Ok = 0,
  Internal = 1,
  Usage = 2,
  FileNotFound = 3,
  InvalidInput = 4,
  EngineFailure = 5,
  WriteFailure = 6,
};

inline ExitCode exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedDocument:
    case ErrorCode::UnknownReference:
    case ErrorCode::UnsortedEvents:
    case ErrorCode::UnknownTemplate:
    case ErrorCode::BadParam:
    case ErrorCode::InvalidParameter:
    case ErrorCode::InvalidDuration:
    case ErrorCode::InvalidThreshold:
    case ErrorCode::DuplicateThing:
    case ErrorCode::InvalidThing:
    case ErrorCode::InvalidRelation:
      return ExitCode::InvalidInput;
    case ErrorCode::UnknownThing:
    case ErrorCode::NotAContext:
    case ErrorCode::InvalidInterval:
    case ErrorCode::ClockRegression:
    case ErrorCode::FrozenRecord:
    case ErrorCode::InvalidWeight:
      return ExitCode::EngineFailure;
  }
  return ExitCode::Internal;
}

class FileError : public std::runtime_error {
 public:
  FileError(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError(ExitCode::FileNotFound, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes every file under a temporary name first and renames them into place
// only once all writes succeeded; on failure no target file is created.
inline void write_files_atomically(const std::filesystem::path& dir,
                                   const std::vector<std::pair<std::string, std::string>>& files) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!dir.empty()) fs::create_directories(dir, ec);
  if (ec) throw FileError(ExitCode::WriteFailure, "cannot create '" + dir.string() + "'");
  std::vector<std::pair<fs::path, fs::path>> staged;
  auto cleanup = [&] {
    for (const auto& [tmp, final_path] : staged) fs::remove(tmp, ec);
  };
  for (const auto& [name, content] : files) {
    const fs::path final_path = dir / name;
    const fs::path tmp = dir / ("." + fs::path(name).filename().string() + ".tmp");
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    staged.emplace_back(tmp, final_path);
    if (!(out << content) || !out.flush()) {
      cleanup();
      throw FileError(ExitCode::WriteFailure, "cannot write '" + final_path.string() + "'");
    }
  }
  // Existing targets are set aside first so a failed move can be undone.
  std::vector<std::pair<fs::path, fs::path>> moved, saved;
  auto rollback = [&] {
    for (const auto& [tmp, final_path] : moved) fs::remove(final_path, ec);
    for (const auto& [backup, final_path] : saved) fs::rename(backup, final_path, ec);
    cleanup();
  };
  for (const auto& [tmp, final_path] : staged) {
    if (fs::exists(final_path, ec) && !fs::is_directory(final_path, ec)) {
      const fs::path backup = tmp.string() + ".old";
      fs::rename(final_path, backup, ec);
      if (ec) {
        rollback();
        throw FileError(ExitCode::WriteFailure, "cannot replace '" + final_path.string() + "'");
      }
      saved.emplace_back(backup, final_path);
    }
    fs::rename(tmp, final_path, ec);
    if (ec) {
      rollback();
      throw FileError(ExitCode::WriteFailure, "cannot move '" + final_path.string() + "' into place");
    }
    moved.emplace_back(tmp, final_path);
  }
  for (const auto& [backup, final_path] : saved) fs::remove(backup, ec);
}

inline void write_file_atomically(const std::filesystem::path& path, const std::string& content) {
  write_files_atomically(path.parent_path(), {{path.filename().string(), content}});
}

// ---- run reports ---------------------------------------------------------

struct MBTable {
  Timestamp at;
  std::vector<std::pair<ThingId, std::vector<double>>> rows;  // watched id -> column values
  friend bool operator==(const MBTable&, const MBTable&) = default;
};

struct EventTables {
  std::size_t index = 0;
  Event event;
  MBTable before;
  MBTable after;
  friend bool operator==(const EventTables&, const EventTables&) = default;
};

struct RunReport {
  std::string scenario;
  std::vector<std::string> columns;
  std::vector<EventTables> events;
  MBTable final;
  friend bool operator==(const RunReport&, const RunReport&) = default;
};

// Columns: group, global:<user> per user, local:<user>@<context> per pair.
inline std::vector<std::string> report_columns(const Graph& g) {
  std::vector<std::string> cols{"group"};
  const auto users = g.ids_of_type(ThingType::User);
  const auto contexts = g.ids_of_type(ThingType::Context);
  for (const auto& u : users) cols.push_back("global:" + u);
  for (const auto& u : users) {
    for (const auto& c : contexts) cols.push_back("local:" + u + "@" + c);
  }
  return cols;
}

inline MBTable mb_table(const Engine& engine, const std::vector<ThingId>& watch, Timestamp now) {
  MBTable table{now, {}};
  for (const ThingId& id : watch) {
    const MBReport r = mb_report(engine, id, now);
    std::vector<double> values{r.group};
    for (const auto& [u, v] : r.global) values.push_back(v);
    for (const auto& l : r.local) values.push_back(l.mb);
    table.rows.emplace_back(id, std::move(values));
  }
  return table;
}

inline std::vector<ThingId> default_watch(const Graph& g) {
  std::vector<ThingId> out;
  for (const Thing* t : g.things()) out.push_back(t->id);
  return out;
}

struct RunOutcome {
  RunReport report;
  Engine engine;
};

// Applies scenario.events[first_event, end) to `engine`, recording a
// before/after table per event, then advances to the horizon.
inline RunOutcome run_scenario(const Scenario& scenario, Engine engine,
                               const std::vector<ThingId>& watch, std::size_t first_event = 0) {
  for (const ThingId& id : watch) engine.graph().thing(id);
  RunReport report;
  report.scenario = scenario.name;
  report.columns = report_columns(engine.graph());
  for (std::size_t i = first_event; i < scenario.events.size(); ++i) {
    const Event& e = scenario.events[i];
    engine.advance_to(e.timestamp);
    EventTables tables;
    tables.index = i;
    tables.event = e;
    tables.before = mb_table(engine, watch, e.timestamp);
    engine.apply(e);
    tables.after = mb_table(engine, watch, e.timestamp);
    report.events.push_back(std::move(tables));
  }
  engine.advance_to(std::max(scenario.horizon, engine.wall_time().value_or(scenario.horizon)));
  report.final = mb_table(engine, watch, *engine.wall_time());
  return {std::move(report), std::move(engine)};
}

inline RunOutcome run_scenario(const Scenario& scenario, const ParameterSet& params,
                               const std::vector<ThingId>& watch) {
  return run_scenario(scenario, Engine(scenario.graph, params), watch);
}

namespace detail {

inline std::string describe(const Event& e) {
  std::string s = format_timestamp(e.timestamp) + " " + e.actor + " " + std::string(to_string(e.kind));
  if (e.target) s += " " + *e.target;
  if (e.context) s += " context=" + *e.context;
  return s;
}

inline std::string render_table(const std::vector<std::string>& columns, const MBTable& table) {
  std::size_t id_width = 2;
  for (const auto& [id, v] : table.rows) id_width = std::max(id_width, id.size());
  std::string out = "    " + std::string("id") + std::string(id_width - 2 + 2, ' ');
  for (std::size_t c = 0; c < columns.size(); ++c) {
    out += (c ? "  " : "") + columns[c];
  }
  out += "\n";
  for (const auto& [id, values] : table.rows) {
    out += "    " + id + std::string(id_width - id.size() + 2, ' ');
    for (std::size_t c = 0; c < values.size(); ++c) {
      std::string cell = fixed6(values[c]);
      if (cell.size() < columns[c].size()) cell.insert(0, columns[c].size() - cell.size(), ' ');
      out += (c ? "  " : "") + cell;
    }
    out += "\n";
  }
  return out;
}

inline std::string csv_row(const std::vector<double>& values) {
  std::string out;
  for (double v : values) out += "," + fixed6(v);
  return out;
}

}  // namespace detail

inline std::string render_report(const RunReport& report) {
  std::string out = "scenario: " + report.scenario + "\n";
  out += "events: " + std::to_string(report.events.size()) + "\n";
  for (const auto& ev : report.events) {
    out += "\n#" + std::to_string(ev.index) + " " + detail::describe(ev.event) + "\n";
    out += "  before\n" + detail::render_table(report.columns, ev.before);
    out += "  after\n" + detail::render_table(report.columns, ev.after);
  }
  out += "\nfinal @ " + format_timestamp(report.final.at) + "\n";
  out += detail::render_table(report.columns, report.final);
  return out;
}

inline std::string tables_csv(const RunReport& report) {
  std::string out = "event,phase,timestamp,id";
  for (const auto& c : report.columns) out += "," + c;
  out += "\n";
  for (const auto& ev : report.events) {
    for (const auto* phase : {&ev.before, &ev.after}) {
      const char* name = phase == &ev.before ? "before" : "after";
      for (const auto& [id, values] : phase->rows) {
        out += std::to_string(ev.index) + "," + name + "," + format_timestamp(phase->at) + "," + id +
               detail::csv_row(values) + "\n";
      }
    }
  }
  return out;
}

inline std::string final_csv(const RunReport& report) {
  std::string out = "id";
  for (const auto& c : report.columns) out += "," + c;
  out += "\n";
  for (const auto& [id, values] : report.final.rows) out += id + detail::csv_row(values) + "\n";
  return out;
}

inline ParameterSet load_parameters(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::MalformedDocument, path.string() + ": " + e.what());
  }
  return parameters_from_json(doc);
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_file(path));
}

}  // namespace mb
