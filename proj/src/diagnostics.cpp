#include "stefan/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stefan {

double BacksteppingParams::psi(double x) const {
    return std::exp(lambda_bar * x) * (p1 * std::sin(omega * x) + epsilon * std::cos(omega * x));
}

double epsilon_upper_bound(const PlantParams& params, double c1) {
    return 2.0 * std::sqrt(params.alpha * c1) / params.beta;
}

double default_epsilon(const PlantParams& params, double c1) {
    return std::sqrt(params.alpha * c1) / params.beta;
}

BacksteppingParams make_backstepping(const PlantParams& params, double c1, double epsilon) {
    const double upper = epsilon_upper_bound(params, c1);
    if (!(epsilon > 0.0 && epsilon < upper)) {
        throw ConfigError("epsilon = " + std::to_string(epsilon) + " outside (0, " +
                          std::to_string(upper) + ")");
    }
    const double a = params.alpha;
    const double b = params.beta;
    const double eb = epsilon * b;
    BacksteppingParams bp;
    bp.epsilon = epsilon;
    bp.c1 = c1;
    bp.beta = b;
    bp.lambda_bar = eb / (2.0 * a);
    bp.omega = std::sqrt((4.0 * a * c1 - eb * eb) / (4.0 * a * a));
    bp.p1 = -(2.0 * a * c1 - eb * eb) / (2.0 * a * b * bp.omega);
    return bp;
}

LyapunovConstants make_lyapunov_constants(const PlantParams& params, const Setpoint& sp,
                                          const ControllerGains& gains, double epsilon) {
    const double a_ = params.alpha;
    const double b_ = params.beta;
    const double c = gains.c1;
    const double sr = sp.s_r;
    LyapunovConstants out;
    out.a = (2.0 * b_ * epsilon / a_) *
            std::max(1.0, a_ * c * c * sr / (2.0 * b_ * b_ * b_ * epsilon * epsilon * epsilon));
    out.b = 0.125 * std::min(a_ / (sr * sr), c);
    out.q = 2.0 * gains.c1 * gains.mu1();
    out.p = 8.0 * sr / (gains.c2 * params.k * params.k * (1.0 - gains.delta2));
    out.b_bar = std::min(out.b, 2.0 * sr / (params.k * params.k));
    return out;
}

namespace {

// Weight of sample k among m + 1 equally spaced samples (unit spacing): the end-corrected
// trapezoid rule with weights 3/8, 7/6, 23/24, 1, ..., 1, 23/24, 7/6, 3/8 (fourth order) once
// there are at least six samples, Simpson-type rules for three to five, trapezoid for two.
// The single-interval case is handled by the caller when a third sample is available.
double quadrature_weight(std::size_t k, std::size_t m) {
    const std::size_t e = std::min(k, m - k);  // distance to the nearer end
    switch (m) {
        case 0: return 0.0;
        case 1: return 0.5;
        case 2: return e == 0 ? 1.0 / 3.0 : 4.0 / 3.0;
        case 3: return e == 0 ? 3.0 / 8.0 : 9.0 / 8.0;
        case 4: return e == 0 ? 1.0 / 3.0 : (e == 1 ? 4.0 / 3.0 : 2.0 / 3.0);
        default: {
            constexpr double ends[3] = {3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0};
            return e < 3 ? ends[e] : 1.0;
        }
    }
}

// w_i = v_i - (beta/alpha) int_{x_i}^{s} K(x_i - y) v(y) dy - K(x_i - s) X on a uniform grid.
// K(x_i - x_j) depends only on j - i, so the kernel is sampled once.
template <typename Kernel>
std::vector<double> volterra_transform(std::span<const double> v, double s, double X, double beta,
                                       double alpha, Kernel&& kernel) {
    const std::size_t n = v.size();
    std::vector<double> out(n, 0.0);
    if (n == 0) return out;
    const double dx = n > 1 ? s / static_cast<double>(n - 1) : 0.0;
    const double gain = beta / alpha;
    std::vector<double> K(n);
    for (std::size_t d = 0; d < n; ++d) K[d] = kernel(-static_cast<double>(d) * dx);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t m = n - 1 - i;  // intervals between x_i and s
        double integral = 0.0;
        if (m == 1 && i > 0) {
            // Single interval: quadratic through x_{i-1}, x_i, x_{i+1}, integrated over [x_i, x_{i+1}].
            integral = (-kernel(dx) * v[i - 1] + 8.0 * K[0] * v[i] + 5.0 * K[1] * v[i + 1]) / 12.0;
        } else if (m <= 6) {
            for (std::size_t j = i; j < n; ++j) integral += quadrature_weight(j - i, m) * K[j - i] * v[j];
        } else {
            for (std::size_t j = i + 3; j + 3 < n; ++j) integral += K[j - i] * v[j];
            for (std::size_t k = 0; k < 3; ++k) {
                integral += quadrature_weight(k, m) * (K[k] * v[i + k] + K[m - k] * v[n - 1 - k]);
            }
        }
        out[i] = v[i] - gain * dx * integral - K[m] * X;
    }
    return out;
}

double l2_squared(std::span<const double> v, double length) {
    std::vector<double> sq(v.size());
    std::transform(v.begin(), v.end(), sq.begin(), [](double a) { return a * a; });
    return trapezoid(sq, length);
}

}  // namespace

std::vector<double> forward_transform(std::span<const double> h, double s, double X,
                                      const BacksteppingParams& bp, const PlantParams& params) {
    return volterra_transform(h, s, X, params.beta, params.alpha,
                              [&](double x) { return bp.phi(x); });
}

std::vector<double> forward_transform(const StefanState& state, const Setpoint& sp,
                                      const BacksteppingParams& bp, const PlantParams& params) {
    std::vector<double> h(state.theta.size());
    std::transform(state.theta.begin(), state.theta.end(), h.begin(),
                   [&](double T) { return T - params.T_m; });
    return forward_transform(h, state.s, state.s - sp.s_r, bp, params);
}

std::vector<double> inverse_transform(std::span<const double> w, double s, double X,
                                      const BacksteppingParams& bp, const PlantParams& params) {
    return volterra_transform(w, s, X, params.beta, params.alpha,
                              [&](double x) { return bp.psi(x); });
}

double lyapunov_V(std::span<const double> w, double s, double X, const PlantParams& params,
                  double epsilon) {
    return l2_squared(w, s) / (2.0 * params.alpha) + epsilon * X * X / (2.0 * params.beta);
}

double lyapunov_Vh(double h1, double h3, const LyapunovConstants& consts) {
    return 0.5 * h3 * h3 + 0.5 * consts.q * h1 * h1;
}

double lyapunov_Vbar(double V, double Vh, const LyapunovConstants& consts) {
    return V + consts.p * Vh;
}

double norm_Phi(const StefanState& state, const PlantParams& params, const Setpoint& sp) {
    std::vector<double> h(state.theta.size());
    std::transform(state.theta.begin(), state.theta.end(), h.begin(),
                   [&](double T) { return T - params.T_m; });
    const double X = state.s - sp.s_r;
    return l2_squared(h, state.s) + X * X + state.qc * state.qc;
}

DecayReport decay_report(std::span<const TraceRecord> trace, const LyapunovConstants& consts) {
    DecayReport report;
    if (trace.empty()) {
        report.vacuous = true;
        return report;
    }

    // (i) discrete Vbar inequality between consecutive records.
    double vbar_scale = 0.0;
    for (const auto& r : trace) vbar_scale = std::max(vbar_scale, std::abs(r.Vbar));
    for (std::size_t i = 0; i + 1 < trace.size(); ++i) {
        const double dt = trace[i + 1].t - trace[i].t;
        if (!(dt > 0.0)) continue;
        const double lhs = (trace[i + 1].Vbar - trace[i].Vbar) / dt;
        const double rhs = vbar_bound_rhs(consts, trace[i].sdot, trace[i].Vbar);
        const double slack = 1e-12 * vbar_scale / dt;
        ++report.steps_checked;
        if (lhs <= rhs + slack) ++report.steps_satisfied;
        report.max_violation = std::max(report.max_violation, lhs - rhs);
    }

    const double phi0 = trace.front().Phi;
    report.phi_ratio = phi0 > 0.0 ? trace.back().Phi / phi0 : 0.0;
    const bool all_zero = std::all_of(trace.begin(), trace.end(), [](const TraceRecord& r) { return r.Phi == 0.0; });
    if (all_zero || !(phi0 > 0.0)) {
        report.vacuous = true;
        return report;
    }

    // (ii) least-squares fit of log of the running upper envelope max_{t' >= t} Phi(t').
    std::vector<double> envelope(trace.size());
    double running = 0.0;
    for (std::size_t i = trace.size(); i-- > 0;) {
        running = std::max(running, trace[i].Phi);
        envelope[i] = running;
    }
    double n = 0.0, st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (!(envelope[i] > 0.0)) continue;
        const double t = trace[i].t;
        const double y = std::log(envelope[i]);
        n += 1.0;
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    const double denom = n * stt - st * st;
    if (n < 2.0 || !(denom > 0.0)) {
        report.vacuous = true;
        return report;
    }
    report.slope = (n * sty - st * sy) / denom;
    const double intercept = (sy - report.slope * st) / n;
    report.fitted_rate = -report.slope;
    report.fitted_M = std::exp(intercept) / phi0;

    // (iii) envelope check with the fitted rate.
    std::size_t under = 0;
    for (const auto& r : trace) {
        const double model = phi0 * std::exp(report.slope * r.t);
        report.envelope_M = std::max(report.envelope_M, r.Phi / model);
        if (r.Phi <= report.fitted_M * model * (1.0 + 1e-12)) ++under;
    }
    report.envelope_fraction = static_cast<double>(under) / static_cast<double>(trace.size());
    return report;
}

}  // namespace stefan
