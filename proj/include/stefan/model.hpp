#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace stefan {

struct TraceRecord;
struct ControllerGains;

/// Physical constants of the one-phase Stefan plant (SI units).
struct PlantParams {
    double alpha{1.0};  ///< thermal diffusivity [m^2/s]
    double beta{1.0};   ///< Stefan coefficient multiplying the interface gradient [m^2/(s K)]
    double k{1.0};      ///< thermal conductivity [W/(m K)]
    double L{0.35};     ///< material length [m]
    double T_m{0.0};    ///< melting temperature [degC]
};

/// Initial data. `T0` holds samples on the normalized grid y = x/s0 in [0, 1].
struct InitialCondition {
    double s0{0.05};
    std::vector<double> T0;
    double qc0{0.0};
};

struct Setpoint {
    double s_r{0.30};
};

/// Plant state on the boundary-immobilized grid y = x/s(t), y_i = i/(N-1).
struct StefanState {
    double t{0.0};
    double s{0.0};
    double qc{0.0};
    std::vector<double> theta;

    std::size_t size() const { return theta.size(); }
};

/// One failed assumption from validate_config().
struct AssumptionViolation {
    std::string name;
    double actual{0.0};
    double bound{0.0};
    std::string detail;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ProfileKind { linear, flat };

/// Samples T_m + amplitude*(1 - y) (linear) or T_m + amplitude (flat) on N points.
std::vector<double> make_profile(ProfileKind kind, double amplitude, double T_m, std::size_t N);

StefanState initial_state(const InitialCondition& ic);

/// Composite trapezoid of samples on a uniform grid over [0, length].
double trapezoid(std::span<const double> samples, double length);

/// Energy functional sigma = -[(k/alpha) int_0^s (T - T_m) dx + (k/beta)(s - s_r)].
double sigma(const StefanState& state, const PlantParams& params, const Setpoint& sp);

/// Assumptions 1-3 of the plant, gain positivity, and the gain condition c1*sigma(0) >= qc0.
/// Returns an empty list when the configuration is admissible.
std::vector<AssumptionViolation> validate_config(const PlantParams& params,
                                                 const InitialCondition& ic,
                                                 const Setpoint& sp,
                                                 const ControllerGains& gains);

/// max_t |sigma(t) - sigma(0) + int_0^t q_c|, time integral by trapezoid over the records.
/// Throws std::invalid_argument on an empty trace.
double energy_balance_defect(std::span<const TraceRecord> trace);

}  // namespace stefan
