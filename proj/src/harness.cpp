#include "stefan/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace stefan {

namespace fs = std::filesystem;

namespace {

std::ofstream open_for_write(const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

void finish_write(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw IoError("failed writing " + path.string());
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_field(std::string_view text, const fs::path& path, std::size_t line_no) {
    if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
    if (text == "inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw IoError(path.string() + ":" + std::to_string(line_no) + ": malformed number '" +
                      std::string(text) + "'");
    }
    return value;
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(std::move(line));
    }
    return lines;
}

nlohmann::json finite_or_null(double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

double min_of(const std::vector<TraceRecord>& trace, double TraceRecord::*field) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : trace) m = std::min(m, r.*field);
    return m;
}

double max_of(const std::vector<TraceRecord>& trace, double TraceRecord::*field) {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& r : trace) m = std::max(m, r.*field);
    return m;
}

std::string cell_name(std::size_t index, const std::map<std::string, std::string>& settings) {
    std::string name = "cell_" + std::to_string(index);
    for (const auto& [k, v] : settings) name += "_" + k + "=" + v;
    for (char& c : name) {
        const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '=' || c == '-';
        if (!ok) c = '_';
    }
    return name;
}

std::string csv_escape(const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) return text;
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += "\"\"";
        else if (c == '\n') out += ' ';
        else out += c;
    }
    return out + "\"";
}

}  // namespace

// ---------------------------------------------------------------------------------------------
// CSV I/O

void write_trace_csv(const fs::path& path, const std::vector<TraceRecord>& trace) {
    auto out = open_for_write(path);
    for (std::size_t i = 0; i < kTraceColumns.size(); ++i) out << (i ? "," : "") << kTraceColumns[i];
    out << '\n';
    for (const auto& r : trace) {
        const double values[] = {r.t, r.s, r.qc, r.U_applied, r.U_star, r.h1, r.h2, r.h3,
                                 r.h_min, r.sdot, r.V, r.Vh, r.Vbar, r.Phi};
        for (double v : values) out << format_double(v) << ',';
        out << (r.event_flag ? 1 : 0) << '\n';
    }
    finish_write(out, path);
}

std::vector<TraceRecord> read_trace_csv(const fs::path& path) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw IoError(path.string() + ": missing header");
    const auto header = split(lines.front(), ',');
    if (header.size() != kTraceColumns.size() ||
        !std::equal(header.begin(), header.end(), kTraceColumns.begin())) {
        throw IoError(path.string() + ": unexpected trace header");
    }
    std::vector<TraceRecord> trace;
    trace.reserve(lines.size() - 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = split(lines[i], ',');
        if (f.size() != kTraceColumns.size()) {
            throw IoError(path.string() + ":" + std::to_string(i + 1) + ": wrong column count");
        }
        double v[15];
        for (std::size_t c = 0; c < 15; ++c) v[c] = parse_field(f[c], path, i + 1);
        trace.push_back(TraceRecord{v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9],
                                    v[10], v[11], v[12], v[13], v[14] != 0.0});
    }
    return trace;
}

void write_events_csv(const fs::path& path, const EventLog& events) {
    auto out = open_for_write(path);
    out << "t_j,U_held,side,gap_to_prev\n";
    for (std::size_t i = 0; i < events.size(); ++i) {
        out << format_double(events[i].t_j) << ',' << format_double(events[i].U_held) << ','
            << to_string(events[i].side) << ',';
        if (i > 0) out << format_double(events[i].t_j - events[i - 1].t_j);
        out << '\n';
    }
    finish_write(out, path);
}

EventLog read_events_csv(const fs::path& path) {
    const auto lines = read_lines(path);
    if (lines.empty() || lines.front() != "t_j,U_held,side,gap_to_prev") {
        throw IoError(path.string() + ": unexpected events header");
    }
    EventLog log;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = split(lines[i], ',');
        if (f.size() != 4) throw IoError(path.string() + ":" + std::to_string(i + 1) + ": wrong column count");
        try {
            log.push_back(EventEntry{parse_field(f[0], path, i + 1), parse_field(f[1], path, i + 1),
                                     trigger_side_from_string(f[2])});
        } catch (const std::invalid_argument& e) {
            throw IoError(path.string() + ":" + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return log;
}

void write_diagnostics_csv(const fs::path& path, const std::vector<TraceRecord>& trace,
                           const LyapunovConstants& consts) {
    auto out = open_for_write(path);
    out << "t,V,Vh,Vbar,Phi,sdot,bound_rhs\n";
    for (const auto& r : trace) {
        out << format_double(r.t) << ',' << format_double(r.V) << ',' << format_double(r.Vh) << ','
            << format_double(r.Vbar) << ',' << format_double(r.Phi) << ',' << format_double(r.sdot)
            << ',' << format_double(vbar_bound_rhs(consts, r.sdot, r.Vbar)) << '\n';
    }
    finish_write(out, path);
}

std::string summary_json(const RunSummary& s) {
    nlohmann::ordered_json j;
    j["mode"] = s.mode;
    j["event_count"] = s.event_count;
    j["step_count"] = s.step_count;
    j["min_gap"] = finite_or_null(s.min_gap);
    j["tau"] = s.tau;
    j["dt"] = s.dt;
    j["t_end"] = s.t_end;
    j["final_s"] = s.final_s;
    j["final_s_error"] = s.final_s_error;
    j["min_h1"] = finite_or_null(s.min_h1);
    j["min_h2"] = finite_or_null(s.min_h2);
    j["min_h3"] = finite_or_null(s.min_h3);
    j["min_h"] = finite_or_null(s.min_h);
    j["max_s"] = finite_or_null(s.max_s);
    j["min_sdot"] = finite_or_null(s.min_sdot);
    j["Phi_ratio"] = s.Phi_ratio;
    j["energy_defect"] = s.energy_defect;
    j["converged"] = s.converged;
    j["safe_set_pass"] = s.safe_set_pass;
    j["dwell_pass"] = s.dwell_pass;
    j["wall_time"] = s.wall_time;
    nlohmann::ordered_json m;
    m["steps"] = s.stepwise.steps;
    m["min_h1"] = finite_or_null(s.stepwise.min_h1);
    m["min_h2"] = finite_or_null(s.stepwise.min_h2);
    m["min_h3"] = finite_or_null(s.stepwise.min_h3);
    m["min_h"] = finite_or_null(s.stepwise.min_h);
    m["min_sdot"] = finite_or_null(s.stepwise.min_sdot);
    m["min_ds"] = finite_or_null(s.stepwise.min_ds);
    m["min_s"] = finite_or_null(s.stepwise.min_s);
    m["max_s"] = finite_or_null(s.stepwise.max_s);
    m["max_qc"] = s.stepwise.max_qc;
    j["stepwise"] = m;
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------------------------
// Runs

RunSummary summarize(const ScenarioConfig& cfg, const RunResult& result, ControlMode mode) {
    RunSummary s;
    const auto& trace = result.trace;
    s.mode = mode == ControlMode::etc ? "etc" : "continuous";
    s.step_count = result.steps;
    s.dt = result.dt;
    s.tau = min_dwell_time(cfg.gains).tau;
    if (mode == ControlMode::etc) {
        const auto zeno = zeno_audit(result.events, cfg.gains, result.dt);
        s.event_count = static_cast<long>(result.events.size());
        s.min_gap = zeno.min_gap;
        s.dwell_pass = zeno.pass;
    } else {
        s.event_count = result.update_count;
        s.min_gap = result.update_count > 1 ? result.dt : std::numeric_limits<double>::infinity();
        s.dwell_pass = true;
    }
    if (!trace.empty()) {
        s.t_end = trace.back().t;
        s.final_s = trace.back().s;
        s.final_s_error = std::abs(trace.back().s - cfg.setpoint.s_r);
        s.min_h1 = min_of(trace, &TraceRecord::h1);
        s.min_h2 = min_of(trace, &TraceRecord::h2);
        s.min_h3 = min_of(trace, &TraceRecord::h3);
        s.min_h = min_of(trace, &TraceRecord::h_min);
        s.max_s = max_of(trace, &TraceRecord::s);
        s.min_sdot = min_of(trace, &TraceRecord::sdot);
        s.Phi_ratio = trace.front().Phi > 0.0 ? trace.back().Phi / trace.front().Phi : 0.0;
        s.energy_defect = energy_balance_defect(trace);
        s.safe_set_pass = safe_set_check(trace, cfg.s0, cfg.setpoint.s_r, safe_set_tolerance(trace)).pass;
    }
    s.converged = result.converged;
    s.stepwise = result.monitor;
    return s;
}

RunSummary run_scenario(const ScenarioConfig& cfg, const fs::path& out_dir, ControlMode mode) {
    require_valid(cfg);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());

    const auto start = std::chrono::steady_clock::now();
    const RunResult result =
        run(cfg, mode == ControlMode::etc ? make_etc_callback(cfg.gains) : make_continuous_callback(cfg.gains));
    RunSummary summary = summarize(cfg, result, mode);
    summary.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const double eps = cfg.resolved_epsilon();
    write_trace_csv(out_dir / "trace.csv", result.trace);
    write_events_csv(out_dir / "events.csv", result.events);
    write_diagnostics_csv(out_dir / "diagnostics.csv", result.trace,
                          make_lyapunov_constants(cfg.plant, cfg.setpoint, cfg.gains, eps));
    {
        const auto path = out_dir / "config.cfg";
        auto out = open_for_write(path);
        out << to_config_text(cfg);
        finish_write(out, path);
    }
    {
        const auto path = out_dir / "summary.json";
        auto out = open_for_write(path);
        out << summary_json(summary);
        finish_write(out, path);
    }
    return summary;
}

RunSummary run_scenario(const fs::path& config_path, const fs::path& out_dir) {
    return run_scenario(load_config(config_path), out_dir, ControlMode::etc);
}

RunSummary run_baseline_continuous(const fs::path& config_path, const fs::path& out_dir) {
    return run_scenario(load_config(config_path), out_dir, ControlMode::continuous);
}

// ---------------------------------------------------------------------------------------------
// Sweeps

ParameterGrid parse_grid(std::string_view spec) {
    ParameterGrid grid;
    for (auto entry : split(spec, ';')) {
        const auto first = entry.find_first_not_of(" \t");
        if (first == std::string_view::npos) continue;
        entry = entry.substr(first, entry.find_last_not_of(" \t") - first + 1);
        const auto eq = entry.find('=');
        if (eq == std::string_view::npos) throw ConfigError("grid entry '" + std::string(entry) + "' lacks '='");
        std::string key(entry.substr(0, eq));
        key.erase(key.find_last_not_of(" \t") + 1);
        std::vector<std::string> values;
        for (auto v : split(entry.substr(eq + 1), ',')) {
            const auto a = v.find_first_not_of(" \t");
            if (a == std::string_view::npos) continue;
            values.emplace_back(v.substr(a, v.find_last_not_of(" \t") - a + 1));
        }
        if (key.empty() || values.empty()) throw ConfigError("grid entry '" + std::string(entry) + "' is empty");
        for (const auto& [k, _] : grid) {
            if (k == key) throw ConfigError("grid key '" + key + "' given twice");
        }
        grid.emplace_back(std::move(key), std::move(values));
    }
    return grid;
}

std::vector<SweepCell> sweep(const ScenarioConfig& base, const ParameterGrid& grid, const fs::path& out_dir,
                             unsigned jobs) {
    // Cartesian product in row-major order over the grid entries.
    std::vector<SweepCell> cells(1);
    for (const auto& [key, values] : grid) {
        std::vector<SweepCell> next;
        for (const auto& cell : cells) {
            for (const auto& v : values) {
                SweepCell c = cell;
                c.settings[key] = v;
                next.push_back(std::move(c));
            }
        }
        cells = std::move(next);
    }
    for (std::size_t i = 0; i < cells.size(); ++i) cells[i].name = cell_name(i, cells[i].settings);

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());

    std::atomic<std::size_t> next_index{0};
    auto worker = [&] {
        for (std::size_t i = next_index++; i < cells.size(); i = next_index++) {
            SweepCell& cell = cells[i];
            try {
                ScenarioConfig cfg = base;
                for (const auto& [k, v] : cell.settings) apply_setting(cfg, k, v);
                cell.summary = run_scenario(cfg, out_dir / cell.name, ControlMode::etc);
            } catch (const ConfigError& e) {
                cell.error_kind = "ConfigError";
                cell.error = e.what();
            } catch (const SolverError& e) {
                cell.error_kind = "SolverError";
                cell.error = e.what();
            } catch (const IoError& e) {
                cell.error_kind = "IoError";
                cell.error = e.what();
            } catch (const std::exception& e) {
                cell.error_kind = "Error";
                cell.error = e.what();
            }
        }
    };
    const unsigned n_threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(cells.size())));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
        worker();
    }

    const auto path = out_dir / "sweep_summary.csv";
    auto out = open_for_write(path);
    out << "cell";
    for (const auto& [key, _] : grid) out << ',' << key;
    out << ",status,error_kind,error,event_count,step_count,min_gap,tau,dt,final_s,final_s_error,"
           "min_h1,min_h2,min_h3,min_h,Phi_ratio,energy_defect,safe_set_pass,dwell_pass,wall_time\n";
    for (const auto& cell : cells) {
        out << cell.name;
        for (const auto& [key, _] : grid) out << ',' << csv_escape(cell.settings.at(key));
        if (cell.summary) {
            const auto& s = *cell.summary;
            out << ",ok,,," << s.event_count << ',' << s.step_count << ',' << format_double(s.min_gap) << ','
                << format_double(s.tau) << ',' << format_double(s.dt) << ',' << format_double(s.final_s) << ','
                << format_double(s.final_s_error) << ',' << format_double(s.min_h1) << ','
                << format_double(s.min_h2) << ',' << format_double(s.min_h3) << ',' << format_double(s.min_h)
                << ',' << format_double(s.Phi_ratio) << ',' << format_double(s.energy_defect) << ','
                << (s.safe_set_pass ? 1 : 0) << ',' << (s.dwell_pass ? 1 : 0) << ','
                << format_double(s.wall_time) << '\n';
        } else {
            out << ",error," << cell.error_kind << ',' << csv_escape(cell.error) << std::string(16, ',') << '\n';
        }
    }
    finish_write(out, path);
    return cells;
}

// ---------------------------------------------------------------------------------------------
// Audit

bool AuditResult::pass() const {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

AuditResult audit_directory(const fs::path& run_dir) {
    AuditResult result;
    auto add = [&](std::string name, bool pass, std::string detail) {
        result.checks.push_back({std::move(name), pass, std::move(detail)});
    };
    auto fmt = [](double v) {
        std::ostringstream os;
        os.precision(6);
        os << v;
        return os.str();
    };

    for (const char* name : {"config.cfg", "trace.csv", "events.csv", "summary.json"}) {
        if (!fs::is_regular_file(run_dir / name)) throw IoError("missing " + (run_dir / name).string());
    }
    const ScenarioConfig cfg = load_config(run_dir / "config.cfg");
    const auto trace = read_trace_csv(run_dir / "trace.csv");
    const auto events = read_events_csv(run_dir / "events.csv");
    nlohmann::json summary;
    {
        std::ifstream in(run_dir / "summary.json");
        if (!in) throw IoError("cannot read " + (run_dir / "summary.json").string());
        try {
            in >> summary;
        } catch (const nlohmann::json::exception& e) {
            throw IoError("malformed summary.json: " + std::string(e.what()));
        }
    }
    const std::string mode = summary.value("mode", "etc");
    if (trace.empty()) {
        add("trace", false, "trace.csv has no rows");
        return result;
    }

    const double tol = safe_set_tolerance(trace);
    const auto safe = safe_set_check(trace, cfg.s0, cfg.setpoint.s_r, tol);
    add("safe_set", safe.pass,
        safe.pass ? "all records inside the safe set (tol " + fmt(tol) + ")"
                  : "violation of " + safe.what + " = " + fmt(safe.value) + " at row " +
                        std::to_string(*safe.first_violation));

    if (mode == "etc") {
        const auto zeno = zeno_audit(events, cfg.gains, cfg.resolved_dt());
        std::string detail = std::to_string(zeno.event_count) + " events, min gap " + fmt(zeno.min_gap) +
                             " s, tau " + fmt(zeno.tau) + " s";
        if (zeno.offending) {
            detail += ", offending events " + std::to_string(zeno.offending->first) + " and " +
                      std::to_string(zeno.offending->second);
        }
        add("dwell_time", zeno.pass, detail);
    }

    const double defect = energy_balance_defect(trace);
    const double defect_bound = std::max(1e-3 * std::abs(trace.front().h1), 1e-12);
    add("energy_balance", defect <= defect_bound,
        "max defect " + fmt(defect) + " (bound " + fmt(defect_bound) + ")");

    const auto consts = make_lyapunov_constants(cfg.plant, cfg.setpoint, cfg.gains, cfg.resolved_epsilon());
    const auto decay = decay_report(trace, consts);
    add("decay", decay.vacuous || decay.slope < 0.0,
        decay.vacuous ? "vacuous (Phi identically zero)"
                      : "envelope slope " + fmt(decay.slope) + " 1/s, Phi ratio " + fmt(decay.phi_ratio) +
                            ", Vbar inequality held on " + std::to_string(decay.steps_satisfied) + "/" +
                            std::to_string(decay.steps_checked) + " intervals");

    // The stored summary must be recomputable from the stored CSVs.
    std::vector<std::string> mismatches;
    auto same = [](double a, double b) { return a == b || std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); };
    auto compare = [&](const char* key, double recomputed) {
        if (!summary.contains(key) || summary[key].is_null()) {
            if (std::isfinite(recomputed)) mismatches.emplace_back(key);
            return;
        }
        if (!same(summary[key].get<double>(), recomputed)) mismatches.emplace_back(key);
    };
    compare("min_h1", min_of(trace, &TraceRecord::h1));
    compare("min_h2", min_of(trace, &TraceRecord::h2));
    compare("min_h3", min_of(trace, &TraceRecord::h3));
    compare("min_h", min_of(trace, &TraceRecord::h_min));
    compare("final_s", trace.back().s);
    compare("final_s_error", std::abs(trace.back().s - cfg.setpoint.s_r));
    compare("Phi_ratio", trace.front().Phi > 0.0 ? trace.back().Phi / trace.front().Phi : 0.0);
    compare("energy_defect", defect);
    if (mode == "etc") compare("event_count", static_cast<double>(events.size()));
    add("summary_consistency", mismatches.empty(),
        mismatches.empty() ? "summary.json matches the CSVs"
                           : "mismatched fields: " + [&] {
                                 std::string s;
                                 for (const auto& m : mismatches) s += (s.empty() ? "" : ", ") + m;
                                 return s;
                             }());
    return result;
}

}  // namespace stefan
