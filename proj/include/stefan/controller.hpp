#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "stefan/cbf.hpp"

namespace stefan {

/// Feedback gains and trigger slack. Derived quantities are computed on construction.
struct ControllerGains {
    double c1{3.2e-3};
    double c2{5.0e-3};
    double delta1{10.0};
    double delta2{0.3};

    double mu1() const;    ///< min{delta1 c1, (1 - delta2) c2}
    double cbar1() const;  ///< (1 + delta1) c1
    double cbar2() const;  ///< (1 + delta2) c2

    /// Names of violated invariants (c1 > 0, c2 > 0, delta1 >= 0, 0 < delta2 < 1).
    std::vector<std::string> violations() const;
};

enum class TriggerSide { none, lower, upper, initial };

std::string_view to_string(TriggerSide side);
TriggerSide trigger_side_from_string(std::string_view text);

/// ZOH controller memory between events.
struct EtcState {
    double t_j{0.0};
    double U_held{0.0};
    double h2_at_event{0.0};
    double h3_at_event{0.0};
    long event_count{0};
};

struct EventEntry {
    double t_j{0.0};
    double U_held{0.0};
    TriggerSide side{TriggerSide::initial};
};

using EventLog = std::vector<EventEntry>;

class NonMonotoneTime : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// U* = -c1 h2 + c2 h3.
double nominal_control(const CbfSnapshot& snap, const ControllerGains& gains);

/// U* = -(c1 + c2) q_c + c1 c2 sigma; the same law written in plant variables.
double nominal_control_plant_form(double qc, double sigma, const ControllerGains& gains);

/// Combined safety/stability mechanism: lower when -delta2 c2 h3 > U~, upper when
/// U~ > mu1 h2 + delta2 c2 h3, with U~ = U*(t) - U*(t_j). Lower wins when both hold.
TriggerSide trigger_fired(const CbfSnapshot& snap, const EtcState& etc, const ControllerGains& gains);

/// Safety-only mechanism (upper bound delta1 c1 h2 + c2 h3). Not used by the shipped controller.
TriggerSide trigger_fired_safety_only(const CbfSnapshot& snap, const EtcState& etc,
                                      const ControllerGains& gains);

struct EtcDecision {
    double U{0.0};
    EtcState state;
    bool fired{false};
    TriggerSide side{TriggerSide::none};
};

/// One ZOH update. The first call (event_count == 0) always generates the initial event.
/// Throws NonMonotoneTime if snap.t precedes the last event.
EtcDecision etc_update(const CbfSnapshot& snap, const EtcState& etc, const ControllerGains& gains);

struct H23 {
    double h2{0.0};
    double h3{0.0};
};

/// Exact (h2, h3) at time t under the held input U*(t_j).
H23 h23_closed_form(const EtcState& etc, const ControllerGains& gains, double t);

struct MValues {
    double m1{0.0};
    double m2{0.0};
};

/// Explicit quadratics for m1 = mu1 h2 + delta2 c2 h3 - U~ and m2 = U~ + delta2 c2 h3.
MValues m_functions(const EtcState& etc, const ControllerGains& gains, double t);

/// The bracketed quadratics P1, P2 with m1 >= h2(t_j) P1(dt) and m2 >= c2 h3(t_j) P2(dt).
MValues m_lower_bound_factors(const ControllerGains& gains, double elapsed);

struct DwellTime {
    double tau{0.0};
    double tau1{0.0};
    double tau2{0.0};
};

DwellTime min_dwell_time(const ControllerGains& gains);

struct ZenoReport {
    bool pass{true};
    long event_count{0};
    double min_gap{0.0};
    double mean_gap{0.0};
    double tau{0.0};
    std::optional<std::pair<std::size_t, std::size_t>> offending;  ///< indices into the log
};

/// Every inter-event gap must be at least tau - dt.
ZenoReport zeno_audit(const EventLog& log, const ControllerGains& gains, double dt);

/// Stateful event-triggered controller used by the simulation loop.
class EtcController {
public:
    explicit EtcController(ControllerGains gains) : gains_(gains) {}

    EtcDecision update(const CbfSnapshot& snap);

    const EtcState& state() const { return state_; }
    const EventLog& log() const { return log_; }
    const ControllerGains& gains() const { return gains_; }

private:
    ControllerGains gains_;
    EtcState state_{};
    EventLog log_;
};

}  // namespace stefan
