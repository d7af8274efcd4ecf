#include "stefan/cbf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stefan/controller.hpp"

namespace stefan {

CbfSnapshot snapshot_from(double t, double sigma, double qc, double h_min, double c1) {
    return CbfSnapshot{t, sigma, qc, -qc + c1 * sigma, h_min};
}

CbfSnapshot snapshot(const StefanState& state, const PlantParams& params, const Setpoint& sp,
                     const ControllerGains& gains) {
    double h_min = std::numeric_limits<double>::infinity();
    for (double T : state.theta) h_min = std::min(h_min, T - params.T_m);
    if (state.theta.empty()) h_min = 0.0;
    return snapshot_from(state.t, sigma(state, params, sp), state.qc, h_min, gains.c1);
}

double h1_ode_residual(std::span<const TraceRecord> trace, double c1) {
    if (trace.size() < 3) throw std::invalid_argument("h1_ode_residual: need at least three records");
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < trace.size(); ++i) {
        const double ha = trace[i].t - trace[i - 1].t;
        const double hb = trace[i + 1].t - trace[i].t;
        if (!(ha > 0.0) || !(hb > 0.0)) continue;
        const double deriv = -hb / (ha * (ha + hb)) * trace[i - 1].h1 +
                             (hb - ha) / (ha * hb) * trace[i].h1 +
                             ha / (hb * (ha + hb)) * trace[i + 1].h1;
        worst = std::max(worst, std::abs(deriv - (-c1 * trace[i].h1 + trace[i].h3)));
    }
    return worst;
}

SafeSetReport safe_set_check(std::span<const TraceRecord> trace, double s0, double s_r, double tol,
                             double s_tol) {
    SafeSetReport report;
    auto fail = [&](std::size_t i, const char* what, double value) {
        report.pass = false;
        report.first_violation = i;
        report.what = what;
        report.value = value;
    };
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const auto& r = trace[i];
        if (!(r.h1 >= -tol)) { fail(i, "h1", r.h1); break; }
        if (!(r.h2 >= -tol)) { fail(i, "h2", r.h2); break; }
        if (!(r.h3 >= -tol)) { fail(i, "h3", r.h3); break; }
        if (!(r.h_min >= -tol)) { fail(i, "h_min", r.h_min); break; }
        if (!(r.s >= s0 - s_tol)) { fail(i, "s below s0", r.s); break; }
        if (!(r.s <= s_r + s_tol)) { fail(i, "s above s_r", r.s); break; }
    }
    return report;
}

double safe_set_tolerance(std::span<const TraceRecord> trace) {
    if (trace.empty()) return 0.0;
    double scale = std::abs(trace.front().h1);
    for (const auto& r : trace) scale = std::max(scale, std::abs(r.qc));
    return 1e-9 * scale;
}

}  // namespace stefan
