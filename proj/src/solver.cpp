#include "stefan/solver.hpp"

#include <algorithm>
#include <cmath>

namespace stefan {

namespace {

// One-sided dT/dy at y = 1 (T(1) = T_m).
double interface_gradient(const std::vector<double>& theta, double T_m, double dy, int order) {
    const std::size_t n = theta.size();
    const double u1 = theta[n - 1] - T_m;
    const double u2 = theta[n - 2] - T_m;
    if (order == 1) return (u1 - u2) / dy;
    const double u3 = theta[n - 3] - T_m;
    return (3.0 * u1 - 4.0 * u2 + u3) / (2.0 * dy);
}

double grid_spacing(std::size_t n) { return 1.0 / static_cast<double>(n - 1); }

}  // namespace

std::vector<std::string> SolverSettings::violations() const {
    std::vector<std::string> out;
    if (N < 8) out.emplace_back("N must be >= 8");
    if (!(dt >= 0.0) || !std::isfinite(dt)) out.emplace_back("dt must be > 0");
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) out.emplace_back("cfl_safety must lie in (0, 1]");
    if (flux_stencil_order != 1 && flux_stencil_order != 2)
        out.emplace_back("flux_stencil_order must be 1 or 2");
    return out;
}

SolverError::SolverError(Kind kind, double time, const std::string& what)
    : std::runtime_error(what + " at t = " + std::to_string(time)), kind_(kind), time_(time) {}

double interface_velocity(const StefanState& state, const PlantParams& params,
                          const SolverSettings& settings) {
    const double dy = grid_spacing(state.theta.size());
    const double grad = interface_gradient(state.theta, params.T_m, dy, settings.flux_stencil_order);
    return -(params.beta / state.s) * grad;
}

double max_stable_step(const StefanState& state, const PlantParams& params,
                       const SolverSettings& settings) {
    const double dy = grid_spacing(state.theta.size());
    return settings.cfl_safety * state.s * state.s * dy * dy / (2.0 * params.alpha);
}

double default_time_step(double s0, const PlantParams& params, const SolverSettings& settings) {
    const double dy = grid_spacing(settings.N);
    return settings.cfl_safety * s0 * s0 * dy * dy / (2.0 * params.alpha);
}

StefanState step(const StefanState& state, double U, double dt, const PlantParams& params,
                 const SolverSettings& settings) {
    StefanState next = state;
    step_in_place(next, U, dt, params, settings);
    return next;
}

void step_in_place(StefanState& next, double U, double dt, const PlantParams& params,
                   const SolverSettings& settings) {
    if (dt <= 0.0) return;
    const StefanState& state = next;
    const double t_start = next.t;

    const std::size_t n = state.theta.size();
    const double dy = grid_spacing(n);
    const double s_min = 1e-6 * params.L;
    const double T_m = params.T_m;

    const double h_max = max_stable_step(state, params, settings);
    // A relative slack keeps dt == h_max (the default step) from splitting on round-off.
    const long substeps = std::max(1L, static_cast<long>(std::ceil(dt / h_max * (1.0 - 1e-12))));
    const double h = dt / static_cast<double>(substeps);

    std::vector<double>& theta = next.theta;
    for (long k = 0; k < substeps; ++k) {
        const double s = next.s;
        const double grad = interface_gradient(theta, T_m, dy, settings.flux_stencil_order);
        const double sdot = -(params.beta / s) * grad;
        const double s_new = s + h * sdot;
        if (!(s_new > s_min) || !std::isfinite(s_new)) {
            throw SolverError(SolverError::Kind::stability_violation, t_start + k * h,
                              "interface fell below s_min");
        }

        // Finite-volume update of Z = s u, u = T - T_m, on the half cell at y = 0 and the
        // interior cells. The boundary heat input uses the exact substep mean of q_c.
        const double q_mean = next.qc + 0.5 * U * h;
        const double diff = params.alpha / (s * dy);
        const double flux_right_boundary = (params.alpha / s) * grad;  // = -(alpha/beta) sdot
        double flux_left = -params.alpha * q_mean / params.k;
        double u_old = theta[0] - T_m;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double u_next_old = theta[i + 1] - T_m;
            double flux_right;
            if (i + 2 == n) {
                flux_right = flux_right_boundary;
            } else {
                const double y_face = (static_cast<double>(i) + 0.5) * dy;
                flux_right = diff * (u_next_old - u_old) + y_face * sdot * 0.5 * (u_old + u_next_old);
            }
            const double weight = (i == 0) ? 2.0 / dy : 1.0 / dy;
            const double z_new = s * u_old + h * weight * (flux_right - flux_left);
            theta[i] = T_m + z_new / s_new;
            flux_left = flux_right;
            u_old = u_next_old;
        }
        theta[n - 1] = T_m;

        next.s = s_new;
        next.qc += U * h;
    }
    next.t = t_start + dt;

    double checksum = next.s + next.qc;
    for (double v : theta) checksum += v;
    if (!std::isfinite(checksum)) {
        throw SolverError(SolverError::Kind::non_finite_state, next.t, "non-finite state");
    }
}

}  // namespace stefan
