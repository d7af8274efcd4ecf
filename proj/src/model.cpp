#include "stefan/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stefan/controller.hpp"
#include "stefan/trace.hpp"

namespace stefan {

std::vector<double> make_profile(ProfileKind kind, double amplitude, double T_m, std::size_t N) {
    std::vector<double> out(N, T_m);
    if (N < 2) return out;
    const double dy = 1.0 / static_cast<double>(N - 1);
    for (std::size_t i = 0; i < N; ++i) {
        const double y = static_cast<double>(i) * dy;
        out[i] = kind == ProfileKind::linear ? T_m + amplitude * (1.0 - y) : T_m + amplitude;
    }
    return out;
}

StefanState initial_state(const InitialCondition& ic) {
    return StefanState{0.0, ic.s0, ic.qc0, ic.T0};
}

double trapezoid(std::span<const double> samples, double length) {
    const std::size_t n = samples.size();
    if (n < 2) return 0.0;
    double acc = 0.5 * (samples.front() + samples.back());
    for (std::size_t i = 1; i + 1 < n; ++i) acc += samples[i];
    return acc * length / static_cast<double>(n - 1);
}

double sigma(const StefanState& state, const PlantParams& params, const Setpoint& sp) {
    const std::size_t n = state.theta.size();
    double acc = 0.0;
    if (n >= 2) {
        acc = 0.5 * ((state.theta.front() - params.T_m) + (state.theta.back() - params.T_m));
        for (std::size_t i = 1; i + 1 < n; ++i) acc += state.theta[i] - params.T_m;
        acc *= state.s / static_cast<double>(n - 1);
    }
    return -((params.k / params.alpha) * acc + (params.k / params.beta) * (state.s - sp.s_r));
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

std::vector<AssumptionViolation> validate_config(const PlantParams& params,
                                                 const InitialCondition& ic,
                                                 const Setpoint& sp,
                                                 const ControllerGains& gains) {
    std::vector<AssumptionViolation> out;
    auto positive = [&](const char* name, double v) {
        if (!(v > 0.0) || !std::isfinite(v))
            out.push_back({std::string("plant parameter ") + name, v, 0.0, "must be > 0"});
    };
    positive("alpha", params.alpha);
    positive("beta", params.beta);
    positive("k", params.k);
    positive("L", params.L);
    if (!out.empty()) return out;

    if (!(ic.s0 > 0.0) || !(ic.s0 < params.L)) {
        out.push_back({"Assumption 1", ic.s0, params.L,
                       "interface must satisfy 0 < s0 < L (s0 = " + fmt(ic.s0) + ", L = " +
                           fmt(params.L) + ")"});
    }
    if (ic.T0.size() < 2) {
        out.push_back({"Assumption 1", static_cast<double>(ic.T0.size()), 2.0,
                       "initial profile needs at least two samples"});
    } else {
        const auto lowest = *std::min_element(ic.T0.begin(), ic.T0.end());
        if (lowest < params.T_m) {
            out.push_back({"Assumption 1", lowest, params.T_m, "T0 must stay >= T_m"});
        }
        if (ic.T0.back() != params.T_m) {
            out.push_back({"Assumption 1", ic.T0.back(), params.T_m, "T0(s0) must equal T_m"});
        }
    }
    if (!(ic.qc0 >= 0.0)) {
        out.push_back({"Assumption 2", ic.qc0, 0.0, "initial heat flux must be >= 0"});
    }

    if (ic.T0.size() >= 2 && ic.s0 > 0.0) {
        std::vector<double> excess(ic.T0.size());
        std::transform(ic.T0.begin(), ic.T0.end(), excess.begin(),
                       [&](double T) { return T - params.T_m; });
        const double reach = ic.s0 + (params.beta / params.alpha) * trapezoid(excess, ic.s0);
        if (!(reach <= sp.s_r)) {
            out.push_back({"Assumption 3", reach, sp.s_r,
                           "s0 + (beta/alpha) int (T0 - T_m) must not exceed s_r"});
        }
    }
    if (!(sp.s_r < params.L)) {
        out.push_back({"Assumption 3", sp.s_r, params.L, "setpoint must satisfy s_r < L"});
    }

    for (const auto& name : gains.violations()) {
        out.push_back({"controller gains", 0.0, 0.0, name});
    }

    if (ic.T0.size() >= 2 && gains.c1 > 0.0) {
        const StefanState s0{0.0, ic.s0, ic.qc0, ic.T0};
        const double sig0 = sigma(s0, params, sp);
        // c1 >= qc0 / sigma(0), written without the division so qc0 = sigma(0) = 0 passes.
        if (!(gains.c1 * sig0 >= ic.qc0)) {
            out.push_back({"gain condition", gains.c1, sig0 > 0.0 ? ic.qc0 / sig0 : INFINITY,
                           "c1 must be >= qc0 / sigma(0)"});
        }
    }
    return out;
}

double energy_balance_defect(std::span<const TraceRecord> trace) {
    if (trace.empty()) throw std::invalid_argument("energy_balance_defect: empty trace");
    const double sigma0 = trace.front().h1;
    double integral = 0.0;
    double worst = 0.0;
    for (std::size_t i = 1; i < trace.size(); ++i) {
        integral += 0.5 * (trace[i].qc + trace[i - 1].qc) * (trace[i].t - trace[i - 1].t);
        worst = std::max(worst, std::abs(trace[i].h1 - sigma0 + integral));
    }
    return worst;
}

}  // namespace stefan
