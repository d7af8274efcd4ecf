#include "stefan/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace stefan {

ControlCallback make_etc_callback(const ControllerGains& gains) {
    auto controller = std::make_shared<EtcController>(gains);
    return [controller](const StefanState&, const CbfSnapshot& snap) {
        const EtcDecision d = controller->update(snap);
        return ControlDecision{d.U, nominal_control(snap, controller->gains()), d.fired, d.side};
    };
}

ControlCallback make_continuous_callback(const ControllerGains& gains) {
    return [gains](const StefanState&, const CbfSnapshot& snap) {
        const double u = nominal_control(snap, gains);
        return ControlDecision{u, u, true, TriggerSide::none};
    };
}

std::vector<double> excess_temperature(const StefanState& state, const PlantParams& params) {
    std::vector<double> h(state.theta.size());
    std::transform(state.theta.begin(), state.theta.end(), h.begin(),
                   [&](double T) { return T - params.T_m; });
    return h;
}

namespace {

struct Recorder {
    const ScenarioConfig& cfg;
    BacksteppingParams bp;
    LyapunovConstants consts;
    double epsilon;

    TraceRecord make(const StefanState& state, const CbfSnapshot& snap, double sdot, double U,
                     double U_star, bool event) const {
        TraceRecord r;
        r.t = state.t;
        r.s = state.s;
        r.qc = state.qc;
        r.U_applied = U;
        r.U_star = U_star;
        r.h1 = snap.h1;
        r.h2 = snap.h2;
        r.h3 = snap.h3;
        r.h_min = snap.h_min;
        r.sdot = sdot;
        const double X = state.s - cfg.setpoint.s_r;
        const auto w = forward_transform(excess_temperature(state, cfg.plant), state.s, X, bp, cfg.plant);
        r.V = lyapunov_V(w, state.s, X, cfg.plant, epsilon);
        r.Vh = lyapunov_Vh(snap.h1, snap.h3, consts);
        r.Vbar = lyapunov_Vbar(r.V, r.Vh, consts);
        r.Phi = norm_Phi(state, cfg.plant, cfg.setpoint);
        r.event_flag = event;
        return r;
    }
};

void observe(StepwiseMonitor& m, const CbfSnapshot& snap, const StefanState& state, double sdot) {
    m.min_h1 = std::min(m.min_h1, snap.h1);
    m.min_h2 = std::min(m.min_h2, snap.h2);
    m.min_h3 = std::min(m.min_h3, snap.h3);
    m.min_h = std::min(m.min_h, snap.h_min);
    m.min_sdot = std::min(m.min_sdot, sdot);
    m.min_s = std::min(m.min_s, state.s);
    m.max_s = std::max(m.max_s, state.s);
    m.max_qc = std::max(m.max_qc, std::abs(state.qc));
}

}  // namespace

RunResult run(const ScenarioConfig& cfg, const ControlCallback& controller) {
    require_valid(cfg);

    const double epsilon = cfg.resolved_epsilon();
    const Recorder recorder{cfg, make_backstepping(cfg.plant, cfg.gains.c1, epsilon),
                            make_lyapunov_constants(cfg.plant, cfg.setpoint, cfg.gains, epsilon),
                            epsilon};

    RunResult result;
    result.dt = cfg.resolved_dt();
    const double dt = result.dt;
    const double t_final = cfg.resolved_t_final();
    const long stride = cfg.resolved_record_every();
    const double band = 0.02 * (cfg.setpoint.s_r - cfg.s0);

    StefanState state = initial_state(cfg.initial_condition());
    double U_held = 0.0;
    long n = 0;
    while (true) {
        const CbfSnapshot snap = snapshot(state, cfg.plant, cfg.setpoint, cfg.gains);
        const double sdot = interface_velocity(state, cfg.plant, cfg.solver);
        observe(result.monitor, snap, state, sdot);

        const double remaining = t_final - state.t;
        const bool done = remaining <= 1e-9 * dt;
        const bool converged = cfg.stop_at_convergence && std::abs(state.s - cfg.setpoint.s_r) < band;
        if (done || converged) {
            result.trace.push_back(recorder.make(state, snap, sdot, U_held,
                                                 nominal_control(snap, cfg.gains), false));
            result.converged = converged;
            break;
        }

        const ControlDecision decision = controller(state, snap);
        U_held = decision.U;
        if (decision.event) {
            ++result.update_count;
            if (decision.side != TriggerSide::none) {
                result.events.push_back(EventEntry{state.t, decision.U, decision.side});
            }
        }
        const bool logged_event = decision.event && decision.side != TriggerSide::none;
        if (n % stride == 0 || logged_event) {
            result.trace.push_back(recorder.make(state, snap, sdot, decision.U, decision.U_star,
                                                 decision.event));
        }

        const double h = std::min(dt, remaining);
        const double s_before = state.s;
        step_in_place(state, decision.U, h, cfg.plant, cfg.solver);
        ++n;
        // Time stamps as multiples of dt avoid drift from repeated addition.
        state.t = h < dt ? t_final : static_cast<double>(n) * dt;
        result.monitor.min_ds = std::min(result.monitor.min_ds, state.s - s_before);
    }
    result.monitor.steps = n;
    result.steps = n;
    result.final_state = std::move(state);
    return result;
}

}  // namespace stefan
