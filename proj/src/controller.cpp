#include "stefan/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stefan {

double ControllerGains::mu1() const { return std::min(delta1 * c1, (1.0 - delta2) * c2); }
double ControllerGains::cbar1() const { return (1.0 + delta1) * c1; }
double ControllerGains::cbar2() const { return (1.0 + delta2) * c2; }

std::vector<std::string> ControllerGains::violations() const {
    std::vector<std::string> out;
    if (!(c1 > 0.0) || !std::isfinite(c1)) out.emplace_back("c1 must be > 0");
    if (!(c2 > 0.0) || !std::isfinite(c2)) out.emplace_back("c2 must be > 0");
    if (!(delta1 >= 0.0) || !std::isfinite(delta1)) out.emplace_back("delta1 must be >= 0");
    if (!(delta2 > 0.0 && delta2 < 1.0)) out.emplace_back("delta2 must lie in (0, 1)");
    return out;
}

std::string_view to_string(TriggerSide side) {
    switch (side) {
        case TriggerSide::none: return "none";
        case TriggerSide::lower: return "lower";
        case TriggerSide::upper: return "upper";
        case TriggerSide::initial: return "initial";
    }
    return "none";
}

TriggerSide trigger_side_from_string(std::string_view text) {
    if (text == "lower") return TriggerSide::lower;
    if (text == "upper") return TriggerSide::upper;
    if (text == "initial") return TriggerSide::initial;
    if (text == "none") return TriggerSide::none;
    throw std::invalid_argument("unknown trigger side '" + std::string(text) + "'");
}

double nominal_control(const CbfSnapshot& snap, const ControllerGains& gains) {
    return -gains.c1 * snap.h2 + gains.c2 * snap.h3;
}

double nominal_control_plant_form(double qc, double sigma, const ControllerGains& gains) {
    return -(gains.c1 + gains.c2) * qc + gains.c1 * gains.c2 * sigma;
}

TriggerSide trigger_fired(const CbfSnapshot& snap, const EtcState& etc, const ControllerGains& gains) {
    const double u_tilde = nominal_control(snap, gains) - etc.U_held;
    const double slack3 = gains.delta2 * gains.c2 * snap.h3;
    if (-slack3 > u_tilde) return TriggerSide::lower;
    if (u_tilde > gains.mu1() * snap.h2 + slack3) return TriggerSide::upper;
    return TriggerSide::none;
}

TriggerSide trigger_fired_safety_only(const CbfSnapshot& snap, const EtcState& etc,
                                      const ControllerGains& gains) {
    const double u_tilde = nominal_control(snap, gains) - etc.U_held;
    if (-gains.delta2 * gains.c2 * snap.h3 > u_tilde) return TriggerSide::lower;
    if (u_tilde > gains.delta1 * gains.c1 * snap.h2 + gains.c2 * snap.h3) return TriggerSide::upper;
    return TriggerSide::none;
}

EtcDecision etc_update(const CbfSnapshot& snap, const EtcState& etc, const ControllerGains& gains) {
    TriggerSide side = TriggerSide::initial;
    if (etc.event_count > 0) {
        if (snap.t < etc.t_j) {
            throw NonMonotoneTime("controller consulted at t = " + std::to_string(snap.t) +
                                  " before the last event at t = " + std::to_string(etc.t_j));
        }
        side = snap.t == etc.t_j ? TriggerSide::none : trigger_fired(snap, etc, gains);
        if (side == TriggerSide::none) return EtcDecision{etc.U_held, etc, false, side};
    }
    EtcState next{snap.t, nominal_control(snap, gains), snap.h2, snap.h3, etc.event_count + 1};
    return EtcDecision{next.U_held, next, true, side};
}

H23 h23_closed_form(const EtcState& etc, const ControllerGains& gains, double t) {
    const double d = t - etc.t_j;
    const double u = etc.U_held;
    return H23{etc.h2_at_event + u * d,
               etc.h3_at_event - u * d - gains.c1 * (etc.h2_at_event * d + 0.5 * u * d * d)};
}

MValues m_functions(const EtcState& etc, const ControllerGains& gains, double t) {
    const double d = t - etc.t_j;
    const double c1 = gains.c1;
    const double c2 = gains.c2;
    const double d2 = gains.delta2;
    const double mu1 = gains.mu1();
    const double cb2 = gains.cbar2();
    const double h2 = etc.h2_at_event;
    const double h3 = etc.h3_at_event;

    const double m1 = -(1.0 - d2) * c1 * c2 * 0.5 * (c1 * h2 - c2 * h3) * d * d -
                      (c1 * (mu1 + c1) * h2 - c2 * (mu1 + c1 + c2 * (1.0 - d2)) * h3) * d +
                      mu1 * h2 + d2 * c2 * h3;
    const double m2 = c1 * cb2 * (c1 * h2 - c2 * h3) * 0.5 * d * d +
                      (c1 * c1 * h2 - (c1 + cb2) * c2 * h3) * d + d2 * c2 * h3;
    return MValues{m1, m2};
}

MValues m_lower_bound_factors(const ControllerGains& gains, double elapsed) {
    const double d = elapsed;
    const double c1 = gains.c1;
    const double c2 = gains.c2;
    const double d2 = gains.delta2;
    const double mu1 = gains.mu1();
    const double cb2 = gains.cbar2();
    const double p1 = -(1.0 - d2) * c1 * c1 * c2 * 0.5 * d * d - c1 * (mu1 + c1) * d + mu1;
    const double p2 = -c1 * cb2 * 0.5 * d * d - (c1 + cb2) * d + d2;
    return MValues{p1, p2};
}

namespace {

// Positive root of -a x^2 - b x + c = 0 for a, b > 0, c >= 0, in the cancellation-free form.
double positive_root(double a, double b, double c) {
    return 2.0 * c / (b + std::sqrt(b * b + 4.0 * a * c));
}

}  // namespace

DwellTime min_dwell_time(const ControllerGains& gains) {
    const double c1 = gains.c1;
    const double c2 = gains.c2;
    const double d2 = gains.delta2;
    const double mu1 = gains.mu1();
    const double cb2 = gains.cbar2();
    const double tau1 = positive_root(0.5 * (1.0 - d2) * c1 * c1 * c2, c1 * (mu1 + c1), mu1);
    const double tau2 = positive_root(0.5 * c1 * cb2, c1 + cb2, d2);
    return DwellTime{std::min(tau1, tau2), tau1, tau2};
}

ZenoReport zeno_audit(const EventLog& log, const ControllerGains& gains, double dt) {
    ZenoReport report;
    report.tau = min_dwell_time(gains).tau;
    report.event_count = static_cast<long>(log.size());
    report.min_gap = std::numeric_limits<double>::infinity();
    if (log.size() < 2) return report;

    // Relative round-off allowance on the time stamps themselves.
    const double bound = report.tau - dt - 1e-12 * std::max(1.0, log.back().t_j);
    double sum = 0.0;
    for (std::size_t i = 1; i < log.size(); ++i) {
        const double gap = log[i].t_j - log[i - 1].t_j;
        sum += gap;
        if (gap < report.min_gap) report.min_gap = gap;
        if ((gap < bound || !(gap > 0.0)) && !report.offending) {
            report.pass = false;
            report.offending = std::make_pair(i - 1, i);
        }
    }
    report.mean_gap = sum / static_cast<double>(log.size() - 1);
    return report;
}

EtcDecision EtcController::update(const CbfSnapshot& snap) {
    EtcDecision d = etc_update(snap, state_, gains_);
    state_ = d.state;
    if (d.fired) log_.push_back(EventEntry{snap.t, d.U, d.side});
    return d;
}

}  // namespace stefan
