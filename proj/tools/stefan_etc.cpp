// Command-line front end: run, baseline, sweep and audit.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "stefan/harness.hpp"

namespace {

enum ExitCode : int { kOk = 0, kAuditFailed = 1, kConfigError = 2, kSolverError = 3, kIoError = 4 };

void print_summary(const stefan::RunSummary& s) {
    std::printf("mode            %s\n", s.mode.c_str());
    std::printf("events          %ld (steps %ld, dt %.6g s)\n", s.event_count, s.step_count, s.dt);
    std::printf("min gap / tau   %.6g s / %.6g s\n", s.min_gap, s.tau);
    std::printf("t_end           %.6g s%s\n", s.t_end, s.converged ? " (converged)" : "");
    std::printf("final s         %.9g m (|s - s_r| = %.3g m)\n", s.final_s, s.final_s_error);
    std::printf("min h1 h2 h3 h  %.3g %.3g %.3g %.3g\n", s.min_h1, s.min_h2, s.min_h3, s.min_h);
    std::printf("Phi ratio       %.3g\n", s.Phi_ratio);
    std::printf("energy defect   %.3g\n", s.energy_defect);
    std::printf("safe set        %s\n", s.safe_set_pass ? "pass" : "FAIL");
    std::printf("dwell time      %s\n", s.dwell_pass ? "pass" : "FAIL");
    std::printf("wall time       %.2f s\n", s.wall_time);
}

bool print_audit(const stefan::AuditResult& result) {
    for (const auto& c : result.checks) {
        std::printf("%-20s %s  %s\n", c.name.c_str(), c.pass ? "PASS" : "FAIL", c.detail.c_str());
    }
    return result.pass();
}

template <typename F>
int guarded(F&& body) {
    try {
        return body();
    } catch (const stefan::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const stefan::SolverError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return kSolverError;
    } catch (const stefan::IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kIoError;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Event-triggered safe boundary control of the one-phase Stefan problem"};
    app.require_subcommand(1);

    std::string config, out, grid, trace_dir;
    unsigned jobs = 1;

    auto* run = app.add_subcommand("run", "Closed-loop run with the event-triggered controller");
    run->add_option("--config", config, "Scenario config file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out, "Output directory")->required();

    auto* baseline = app.add_subcommand("baseline", "Closed-loop run with every-step nominal control");
    baseline->add_option("--config", config, "Scenario config file")->required()->check(CLI::ExistingFile);
    baseline->add_option("--out", out, "Output directory")->required();

    auto* sweep = app.add_subcommand("sweep", "Parameter sweep over a grid of config overrides");
    sweep->add_option("--config", config, "Base scenario config file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--grid", grid, "Grid spec, e.g. 'delta2=0.3,0.7;N=100,200'")->required();
    sweep->add_option("--out", out, "Output directory")->required();
    sweep->add_option("--jobs", jobs, "Parallel runs (0 = hardware concurrency)");

    auto* audit = app.add_subcommand("audit", "Re-check a stored run directory");
    audit->add_option("--trace", trace_dir, "Run directory")->required()->check(CLI::ExistingDirectory);

    CLI11_PARSE(app, argc, argv);

    if (run->parsed() || baseline->parsed()) {
        return guarded([&] {
            const auto s = run->parsed() ? stefan::run_scenario(config, out)
                                         : stefan::run_baseline_continuous(config, out);
            print_summary(s);
            std::printf("\n");
            return print_audit(stefan::audit_directory(out)) ? kOk : kAuditFailed;
        });
    }
    if (sweep->parsed()) {
        return guarded([&] {
            if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
            const auto cells = stefan::sweep(stefan::load_config(config), stefan::parse_grid(grid), out, jobs);
            bool all_ok = true;
            for (const auto& c : cells) {
                if (c.summary) {
                    const bool ok = stefan::audit_directory(std::filesystem::path(out) / c.name).pass();
                    all_ok = all_ok && ok;
                    std::printf("%-40s events %-6ld final_s %.6g %s\n", c.name.c_str(), c.summary->event_count,
                                c.summary->final_s, ok ? "ok" : "AUDIT FAIL");
                } else {
                    all_ok = false;
                    std::printf("%-40s %s: %s\n", c.name.c_str(), c.error_kind.c_str(), c.error.c_str());
                }
            }
            return all_ok ? kOk : kAuditFailed;
        });
    }
    return guarded([&] {
        return print_audit(stefan::audit_directory(trace_dir)) ? kOk : kAuditFailed;
    });
}
