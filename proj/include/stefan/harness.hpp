#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stefan/config.hpp"
#include "stefan/simulation.hpp"

namespace stefan {

struct RunSummary {
    std::string mode;  ///< "etc" or "continuous"
    long event_count{0};
    long step_count{0};
    double min_gap{0.0};
    double tau{0.0};
    double dt{0.0};
    double t_end{0.0};
    double final_s{0.0};
    double final_s_error{0.0};
    double min_h1{0.0};
    double min_h2{0.0};
    double min_h3{0.0};
    double min_h{0.0};
    double max_s{0.0};
    double min_sdot{0.0};
    double Phi_ratio{0.0};
    double energy_defect{0.0};
    bool converged{false};
    bool safe_set_pass{false};
    bool dwell_pass{false};
    double wall_time{0.0};
    StepwiseMonitor stepwise{};
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ControlMode { etc, continuous };

/// Runs one scenario and writes trace.csv, events.csv, diagnostics.csv, summary.json and the
/// resolved config.cfg into `out_dir`.
RunSummary run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir,
                        ControlMode mode = ControlMode::etc);
RunSummary run_scenario(const std::filesystem::path& config_path, const std::filesystem::path& out_dir);
RunSummary run_baseline_continuous(const std::filesystem::path& config_path,
                                   const std::filesystem::path& out_dir);

/// Summary fields computed from the recorded rows, the event log and the stepwise monitor.
RunSummary summarize(const ScenarioConfig& cfg, const RunResult& result, ControlMode mode);

/// Grid spec: `key=v1,v2;key2=v3` over any config key (c1, delta2, N, dt, ...). Empty spec
/// gives a single point.
using ParameterGrid = std::vector<std::pair<std::string, std::vector<std::string>>>;
ParameterGrid parse_grid(std::string_view spec);

struct SweepCell {
    std::string name;
    std::map<std::string, std::string> settings;
    std::optional<RunSummary> summary;
    std::string error_kind;  ///< ConfigError / SolverError / IoError, empty on success
    std::string error;
};

/// One subdirectory per grid point plus sweep_summary.csv. Per-cell errors are recorded.
std::vector<SweepCell> sweep(const ScenarioConfig& base, const ParameterGrid& grid,
                             const std::filesystem::path& out_dir, unsigned jobs = 1);

struct AuditResult {
    struct Check {
        std::string name;
        bool pass{false};
        std::string detail;
    };
    std::vector<Check> checks;
    bool pass() const;
};

/// Re-runs safe-set, dwell, energy-balance and decay checks on a run directory.
AuditResult audit_directory(const std::filesystem::path& run_dir);

// CSV I/O, full round-trip precision.
void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRecord>& trace);
std::vector<TraceRecord> read_trace_csv(const std::filesystem::path& path);
void write_events_csv(const std::filesystem::path& path, const EventLog& events);
EventLog read_events_csv(const std::filesystem::path& path);
void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<TraceRecord>& trace,
                           const LyapunovConstants& consts);
std::string summary_json(const RunSummary& summary);

}  // namespace stefan
