#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "stefan/cbf.hpp"
#include "stefan/config.hpp"
#include "stefan/controller.hpp"
#include "stefan/diagnostics.hpp"
#include "stefan/solver.hpp"
#include "stefan/trace.hpp"

namespace stefan {

/// What the controller returns before each base step. `event` marks a control update.
/// Updates with a side other than `none` are logged in the event list and force a trace row;
/// the every-step baseline reports side `none`, so its updates are only counted.
struct ControlDecision {
    double U{0.0};
    double U_star{0.0};
    bool event{false};
    TriggerSide side{TriggerSide::none};
};

using ControlCallback = std::function<ControlDecision(const StefanState&, const CbfSnapshot&)>;

/// Running extrema over every base step, not only recorded rows.
struct StepwiseMonitor {
    long steps{0};
    double min_h1{std::numeric_limits<double>::infinity()};
    double min_h2{std::numeric_limits<double>::infinity()};
    double min_h3{std::numeric_limits<double>::infinity()};
    double min_h{std::numeric_limits<double>::infinity()};
    double min_sdot{std::numeric_limits<double>::infinity()};
    double min_ds{std::numeric_limits<double>::infinity()};  ///< min of s(t_{n+1}) - s(t_n)
    double min_s{std::numeric_limits<double>::infinity()};
    double max_s{-std::numeric_limits<double>::infinity()};
    double max_qc{0.0};
};

struct RunResult {
    std::vector<TraceRecord> trace;
    EventLog events;
    StepwiseMonitor monitor;
    StefanState final_state;
    long steps{0};
    long update_count{0};  ///< every control update, logged or not
    double dt{0.0};
    bool converged{false};
};

/// Event-triggered callback backed by an EtcController.
ControlCallback make_etc_callback(const ControllerGains& gains);

/// Every-step nominal control U = U*(t).
ControlCallback make_continuous_callback(const ControllerGains& gains);

/// Closed-loop simulation. The controller is consulted before every base step; rows are kept
/// every `record_every` steps, at every event and at the final time. Stops at t_final or, when
/// enabled, once |s - s_r| < 0.02 (s_r - s0). Solver errors propagate with their time.
RunResult run(const ScenarioConfig& cfg, const ControlCallback& controller);

/// Physical-space samples T - T_m of a state.
std::vector<double> excess_temperature(const StefanState& state, const PlantParams& params);

}  // namespace stefan
