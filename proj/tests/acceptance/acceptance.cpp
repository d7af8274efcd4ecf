// Acceptance checks: one PASS/FAIL line per criterion. Exit status is non-zero if any fails.
//
// Runs the zinc scenario (delta2 = 0.3 and 0.7), the every-step baseline, a long-horizon run
// and a grid/step refinement pair through the same harness the CLI uses, then re-reads the
// written CSVs so that the checks see exactly what is stored on disk.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "../oracles.hpp"
#include "stefan/harness.hpp"

using namespace stefan;
namespace fs = std::filesystem;

namespace {

struct StoredRun {
    ScenarioConfig cfg;
    RunSummary summary;
    std::vector<TraceRecord> trace;
    EventLog events;
};

std::string fmt(double v, int precision = 4) {
    std::ostringstream os;
    os.precision(precision);
    os << v;
    return os.str();
}

StoredRun execute(const ScenarioConfig& cfg, const fs::path& dir, ControlMode mode = ControlMode::etc) {
    std::printf("  running %s ...\n", dir.filename().string().c_str());
    std::fflush(stdout);
    StoredRun r;
    r.cfg = cfg;
    r.summary = run_scenario(cfg, dir, mode);
    r.trace = read_trace_csv(dir / "trace.csv");
    r.events = read_events_csv(dir / "events.csv");
    std::printf("    %ld steps, %zu rows, %ld updates, t_end %.6g s, wall %.1f s\n", r.summary.step_count,
                r.trace.size(), r.summary.event_count, r.summary.t_end, r.summary.wall_time);
    return r;
}

ScenarioConfig config_file(const char* name) { return load_config(fs::path(STEFAN_CONFIG_DIR) / name); }

struct Verdict {
    bool pass{true};
    std::vector<std::string> notes;
    void require(bool ok, const std::string& what) {
        pass = pass && ok;
        notes.push_back(std::string(ok ? "" : "[failed] ") + what);
    }
    void report(const std::string& what) { notes.push_back(what); }
};

int failures = 0;

void print(int number, const char* title, const Verdict& v) {
    std::printf("criterion %d (%s): %s\n", number, title, v.pass ? "PASS" : "FAIL");
    for (const auto& n : v.notes) std::printf("    %s\n", n.c_str());
    std::fflush(stdout);
    if (!v.pass) ++failures;
}

// --- criterion 1 -------------------------------------------------------------------------------

void safety(Verdict& v, const StoredRun& r, const std::string& label) {
    const auto& m = r.summary.stepwise;
    const double scale = std::max(std::abs(r.trace.front().h1), m.max_qc);
    const double tol = 1e-9 * scale;
    const double s_r = r.cfg.setpoint.s_r;
    v.require(m.min_h1 >= -tol && m.min_h2 >= -tol && m.min_h3 >= -tol && m.min_h >= -tol,
              label + ": min over " + std::to_string(m.steps) + " steps of h1, h2, h3, h = " + fmt(m.min_h1) +
                  ", " + fmt(m.min_h2) + ", " + fmt(m.min_h3) + ", " + fmt(m.min_h) + " (tolerance -" +
                  fmt(tol) + ")");
    v.require(m.min_sdot >= -1e-9, label + ": min ds/dt = " + fmt(m.min_sdot) + " m/s (>= -1e-9)");
    v.require(m.min_ds >= -1e-9 * r.summary.dt,
              label + ": min step increment of s = " + fmt(m.min_ds) + " m");
    v.require(m.max_s <= s_r + 1e-9, label + ": max s = " + fmt(m.max_s, 12) + " m (<= s_r + 1e-9)");
    const auto stored = safe_set_check(r.trace, r.cfg.s0, s_r, tol);
    v.require(stored.pass, label + ": stored trace inside the safe set" +
                               (stored.pass ? "" : " (first violation: " + stored.what + ")"));
}

// --- criterion 4 -------------------------------------------------------------------------------

void closed_form(Verdict& v, const StoredRun& r, const std::string& label) {
    const auto& g = r.cfg.gains;
    double hscale = 0.0;
    for (const auto& row : r.trace) hscale = std::max({hscale, std::abs(row.h2), std::abs(row.h3)});
    const double mscale = std::max(g.mu1(), g.c2) * hscale;

    // Event rows are always recorded; pair each logged event with its row.
    std::vector<std::size_t> event_rows;
    std::size_t e = 0;
    for (std::size_t i = 0; i < r.trace.size() && e < r.events.size(); ++i) {
        if (r.trace[i].event_flag && r.trace[i].t == r.events[e].t_j) {
            event_rows.push_back(i);
            ++e;
        }
    }
    v.require(event_rows.size() == r.events.size(),
              label + ": " + std::to_string(event_rows.size()) + "/" + std::to_string(r.events.size()) +
                  " events located in the trace");

    double worst_h = 0.0, min_m = std::numeric_limits<double>::infinity();
    std::size_t interior = 0, detect_ok = 0, detect_checked = 0;
    double worst_detection = 0.0;
    for (std::size_t j = 0; j < event_rows.size(); ++j) {
        const auto& row_j = r.trace[event_rows[j]];
        const EtcState etc{row_j.t, r.events[j].U_held, row_j.h2, row_j.h3, static_cast<long>(j + 1)};
        const std::size_t end = j + 1 < event_rows.size() ? event_rows[j + 1] : r.trace.size();
        for (std::size_t i = event_rows[j] + 1; i < end; ++i) {
            const auto cf = h23_closed_form(etc, g, r.trace[i].t);
            worst_h = std::max({worst_h, std::abs(cf.h2 - r.trace[i].h2) / hscale,
                                std::abs(cf.h3 - r.trace[i].h3) / hscale});
            const auto m = m_functions(etc, g, r.trace[i].t);
            min_m = std::min({min_m, m.m1 / mscale, m.m2 / mscale});
            ++interior;
        }
        if (j + 1 < event_rows.size()) {
            // At the next event the firing side's m has just crossed zero: it is negative, and
            // one base step earlier it was not, up to the equivalence tolerance.
            const double t_next = r.trace[event_rows[j + 1]].t;
            const bool upper = r.events[j + 1].side == TriggerSide::upper;
            auto side_m = [&](double t) {
                const auto m = m_functions(etc, g, t);
                return upper ? m.m1 : m.m2;
            };
            const double at = side_m(t_next);
            const double before = side_m(t_next - r.summary.dt);
            const double slack = std::abs(at - before) + 1e-8 * mscale;
            ++detect_checked;
            if (at <= 1e-8 * mscale && at >= -slack && before >= -1e-8 * mscale) ++detect_ok;
            worst_detection = std::max(worst_detection, std::abs(at) / mscale);
        }
    }
    v.require(worst_h <= 1e-8, label + ": max relative (h2, h3) deviation from the closed form over " +
                                   std::to_string(interior) + " inter-event rows = " + fmt(worst_h));
    v.require(min_m > 0.0, label + ": min m1, m2 / scale strictly inside intervals = " + fmt(min_m));
    v.require(detect_ok == detect_checked,
              label + ": firing side within one step of its zero crossing at " + std::to_string(detect_ok) +
                  "/" + std::to_string(detect_checked) + " events (max |m|/scale at the event " +
                  fmt(worst_detection) + ")");
}

// --- criterion 6 -------------------------------------------------------------------------------

struct RoundtripStats {
    double worst{0.0};
    double worst_coarse{0.0};
    bool boundary_exact{true};
};

RoundtripStats roundtrip(const PlantParams& p, double c1, std::mt19937_64& rng) {
    const auto bp = make_backstepping(p, c1, default_epsilon(p, c1));
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::uniform_real_distribution<double> length(0.05, 0.3);
    RoundtripStats stats;
    for (int k = 0; k < 50; ++k) {
        // Smooth profile with h(s) = 0, as at the melting interface.
        const double s = length(rng), X = 0.3 * coef(rng), b = coef(rng);
        double a[4];
        for (int m = 0; m < 4; ++m) a[m] = coef(rng) / (m + 1);
        auto profile = [&](double x) {
            double h = b * (1.0 - x / s) * (1.0 - x / s);
            for (int m = 0; m < 4; ++m) h += a[m] * std::sin((m + 1) * M_PI * (s - x) / (2.0 * s));
            return h;
        };
        auto error = [&](std::size_t N) {
            std::vector<double> h(N);
            for (std::size_t i = 0; i < N; ++i) h[i] = profile(s * static_cast<double>(i) / static_cast<double>(N - 1));
            h.back() = 0.0;
            const auto w = forward_transform(h, s, X, bp, p);
            if (w.back() != bp.epsilon * X) stats.boundary_exact = false;
            const auto back = inverse_transform(w, s, X, bp, p);
            double err = 0.0, scale = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                err = std::max(err, std::abs(back[i] - h[i]));
                scale = std::max(scale, std::abs(h[i]));
            }
            return err / scale;
        };
        stats.worst = std::max(stats.worst, error(400));
        stats.worst_coarse = std::max(stats.worst_coarse, error(200));
    }
    return stats;
}

// --- criterion 9 -------------------------------------------------------------------------------

double trajectory_distance(const std::vector<TraceRecord>& coarse, const std::vector<TraceRecord>& fine,
                           std::size_t& matched) {
    std::map<double, double> fine_s;
    for (const auto& r : fine) fine_s.emplace(r.t, r.s);
    double worst = 0.0;
    matched = 0;
    for (const auto& r : coarse) {
        const auto it = fine_s.find(r.t);
        if (it == fine_s.end()) continue;
        worst = std::max(worst, std::abs(it->second - r.s));
        ++matched;
    }
    return worst;
}

}  // namespace

int main(int argc, char** argv) {
    fs::path workdir = fs::temp_directory_path() / "stefan_acceptance";
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--workdir") workdir = argv[i + 1];
    }
    fs::remove_all(workdir);
    fs::create_directories(workdir);
    const auto start = std::chrono::steady_clock::now();

    std::printf("simulations (output under %s):\n", workdir.string().c_str());
    const auto zinc03 = execute(config_file("zinc.cfg"), workdir / "zinc_delta2_0.3");
    const auto zinc07 = execute(config_file("zinc_delta2_07.cfg"), workdir / "zinc_delta2_0.7");
    const auto nondim = execute(config_file("nondimensional.cfg"), workdir / "nondimensional");
    const auto baseline = execute(config_file("zinc.cfg"), workdir / "zinc_baseline", ControlMode::continuous);
    const auto longrun = execute(config_file("zinc_long.cfg"), workdir / "zinc_long");

    // Refinement pair over the full transient: (N, dt) and (2N, dt/2), rows on a common time grid.
    auto coarse_cfg = config_file("zinc.cfg");
    coarse_cfg.stop_at_convergence = false;
    coarse_cfg.t_final = 3300.0;
    const double dt = coarse_cfg.resolved_dt();
    coarse_cfg.solver.dt = dt;
    coarse_cfg.record_every = 500;
    auto fine_cfg = coarse_cfg;
    fine_cfg.solver.N = 2 * coarse_cfg.solver.N;
    fine_cfg.solver.dt = dt / 2.0;
    fine_cfg.record_every = 2 * coarse_cfg.record_every;
    const auto coarse = execute(coarse_cfg, workdir / "refine_N200");
    const auto fine = execute(fine_cfg, workdir / "refine_N400");
    std::printf("\n");

    const std::vector<std::pair<const StoredRun*, std::string>> etc_runs{
        {&zinc03, "zinc delta2 = 0.3"}, {&zinc07, "zinc delta2 = 0.7"}, {&nondim, "nondimensional"}};

    {
        Verdict v;
        for (const auto& [r, label] : etc_runs) safety(v, *r, label);
        for (const auto* r : {&zinc03, &zinc07}) {
            v.require(r->summary.wall_time < 60.0,
                      "zinc delta2 = " + fmt(r->cfg.gains.delta2) + " at N = 200 ran in " +
                          fmt(r->summary.wall_time, 3) + " s (< 60 s)");
        }
        print(1, "safety invariance", v);
    }
    {
        Verdict v;
        for (const auto* r : {&zinc03, &zinc07, &longrun}) {
            const double band = 0.02 * (r->cfg.setpoint.s_r - r->cfg.s0);
            v.require(r->summary.final_s_error <= band,
                      "delta2 = " + fmt(r->cfg.gains.delta2) + ", t_end = " + fmt(r->summary.t_end, 6) +
                          " s: |s - s_r| = " + fmt(r->summary.final_s_error) + " m (<= " + fmt(band) + ")");
            v.require(r->summary.stepwise.max_s <= r->cfg.setpoint.s_r,
                      "  s <= s_r at every step (max s = " + fmt(r->summary.stepwise.max_s, 12) + ")");
        }
        print(2, "nonovershooting convergence", v);
    }
    {
        Verdict v;
        for (const auto& [r, label] : etc_runs) {
            const auto z = zeno_audit(r->events, r->cfg.gains, r->summary.dt);
            v.require(z.pass, label + ": " + std::to_string(z.event_count) + " events, min gap " +
                                  fmt(z.min_gap, 8) + " s >= tau - dt = " + fmt(z.tau - r->summary.dt, 8) + " s");
        }
        std::mt19937_64 rng(20240611);
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            const auto g = oracle::random_gains(rng);
            const auto closed = min_dwell_time(g);
            const auto ref = oracle::dwell_time_by_bisection(g);
            worst = std::max(worst, std::abs(closed.tau - ref.tau) / ref.tau);
        }
        v.require(worst <= 1e-9, "closed-form tau vs bisection over 100 random gains: max relative error " +
                                     fmt(worst));
        print(3, "minimum dwell time", v);
    }
    {
        Verdict v;
        for (const auto& [r, label] : etc_runs) closed_form(v, *r, label);
        print(4, "closed-form subsystem equivalence", v);
    }
    {
        Verdict v;
        const double sigma0 = std::abs(coarse.trace.front().h1);
        const double d_coarse = energy_balance_defect(coarse.trace);
        const double d_fine = energy_balance_defect(fine.trace);
        v.require(d_coarse <= 1e-3 * sigma0, "N = 200: max defect " + fmt(d_coarse) + " (bound 1e-3 |sigma(0)| = " +
                                                 fmt(1e-3 * sigma0) + ")");
        v.require(d_fine <= 1e-3 * sigma0, "N = 400, dt/2: max defect " + fmt(d_fine));
        v.require(d_fine < d_coarse, "defect decreases under refinement: " + fmt(d_coarse) + " -> " + fmt(d_fine) +
                                         " (relative to sigma(0): " + fmt(d_coarse / sigma0) + " -> " +
                                         fmt(d_fine / sigma0) + ")");
        print(5, "energy balance", v);
    }
    {
        Verdict v;
        std::mt19937_64 rng(7);
        const PlantParams zinc{kZincPreset.alpha, kZincPreset.beta, kZincPreset.k, 0.35, kZincPreset.T_m};
        const PlantParams unit{1.0, 1.0, 1.0, 0.35, 0.0};
        for (const auto& [p, c1, label] : {std::tuple{zinc, 3.2e-3, "zinc"}, std::tuple{unit, 3.2, "nondimensional"}}) {
            const auto st = roundtrip(p, c1, rng);
            v.require(st.worst <= 1e-6, std::string(label) + ": max relative roundtrip error at N = 400 over 50 profiles " +
                                            fmt(st.worst));
            const double order = std::log2(st.worst_coarse / st.worst);
            v.require(order >= 1.8, std::string(label) + ": observed order N = 200 -> 400: " + fmt(order, 3));
            v.require(st.boundary_exact, std::string(label) + ": w(s) = eps X exactly on every profile");
        }
        print(6, "backstepping roundtrip", v);
    }
    {
        Verdict v;
        const auto& c = longrun.cfg;
        const auto consts = make_lyapunov_constants(c.plant, c.setpoint, c.gains, c.resolved_epsilon());
        const auto d = decay_report(longrun.trace, consts);
        v.require(d.phi_ratio <= 1e-2, "t_final = " + fmt(longrun.summary.t_end, 6) +
                                           " s: Phi(t_final)/Phi(0) = " + fmt(d.phi_ratio) + " (<= 1e-2)");
        v.require(d.slope < 0.0, "log-linear envelope slope " + fmt(d.slope) + " 1/s (fitted M " + fmt(d.fitted_M) +
                                     ", envelope M " + fmt(d.envelope_M) + ")");
        v.report("discrete Vbar inequality held on " + std::to_string(d.steps_satisfied) + "/" +
                 std::to_string(d.steps_checked) + " record intervals (max violation " + fmt(d.max_violation) +
                 "; report only)");
        print(7, "exponential decay", v);
    }
    {
        Verdict v;
        const double events = static_cast<double>(zinc03.summary.event_count);
        const double updates = static_cast<double>(baseline.summary.event_count);
        v.require(events <= 0.1 * updates, "ETC events " + fmt(events, 10) + " vs continuous updates " +
                                                fmt(updates, 10) + " (ratio " + fmt(events / updates) + ", <= 0.1)");
        v.report("delta2 = 0.7: " + std::to_string(zinc07.summary.event_count) + " events");
        print(8, "event efficiency", v);
    }
    {
        Verdict v;
        std::size_t matched = 0;
        const double dist = trajectory_distance(coarse.trace, fine.trace, matched);
        const double band = 0.01 * (coarse_cfg.setpoint.s_r - coarse_cfg.s0);
        v.require(matched >= 100, std::to_string(matched) + " common sample times");
        v.require(dist <= band, "sup |s_N200 - s_N400| = " + fmt(dist) + " m (<= " + fmt(band) + ")");
        print(9, "refinement stability", v);
    }

    std::printf("\n%d of 9 criteria failed; total wall time %.0f s\n", failures,
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    return failures == 0 ? 0 : 1;
}
