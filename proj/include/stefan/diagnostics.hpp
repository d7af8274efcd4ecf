#pragma once

#include <span>
#include <vector>

#include "stefan/controller.hpp"
#include "stefan/model.hpp"
#include "stefan/trace.hpp"

namespace stefan {

/// Kernel data for the backstepping pair
///   phi(x) = c1 x / beta - eps,
///   psi(x) = exp(lambda_bar x) (p1 sin(omega x) + eps cos(omega x)).
struct BacksteppingParams {
    double epsilon{0.0};
    double c1{0.0};
    double beta{0.0};
    double lambda_bar{0.0};
    double omega{0.0};
    double p1{0.0};

    double phi(double x) const { return c1 * x / beta - epsilon; }
    double psi(double x) const;
};

/// Upper end of the admissible epsilon interval, 2 sqrt(alpha c1) / beta.
double epsilon_upper_bound(const PlantParams& params, double c1);

/// Midpoint default sqrt(alpha c1) / beta.
double default_epsilon(const PlantParams& params, double c1);

/// Throws ConfigError unless 0 < epsilon < 2 sqrt(alpha c1)/beta.
BacksteppingParams make_backstepping(const PlantParams& params, double c1, double epsilon);

struct LyapunovConstants {
    double a{0.0};
    double b{0.0};
    double q{0.0};
    double p{0.0};
    double b_bar{0.0};
};

/// a and b use c1 for the target-system gain c.
LyapunovConstants make_lyapunov_constants(const PlantParams& params, const Setpoint& sp,
                                          const ControllerGains& gains, double epsilon);

/// w(x) = h(x) - (beta/alpha) int_x^s phi(x - y) h(y) dy - phi(x - s) X on the grid x_i = s y_i.
/// `h` holds T - T_m samples.
std::vector<double> forward_transform(std::span<const double> h, double s, double X,
                                      const BacksteppingParams& bp, const PlantParams& params);

std::vector<double> forward_transform(const StefanState& state, const Setpoint& sp,
                                      const BacksteppingParams& bp, const PlantParams& params);

/// h(x) = w(x) - (beta/alpha) int_x^s psi(x - y) w(y) dy - psi(x - s) X.
std::vector<double> inverse_transform(std::span<const double> w, double s, double X,
                                      const BacksteppingParams& bp, const PlantParams& params);

/// V = ||w||^2 / (2 alpha) + eps X^2 / (2 beta).
double lyapunov_V(std::span<const double> w, double s, double X, const PlantParams& params,
                  double epsilon);

/// V_h = h3^2 / 2 + q h1^2 / 2.
double lyapunov_Vh(double h1, double h3, const LyapunovConstants& consts);

/// Vbar = V + p V_h.
double lyapunov_Vbar(double V, double Vh, const LyapunovConstants& consts);

/// Phi = ||T - T_m||^2 + (s - s_r)^2 + q_c^2.
double norm_Phi(const StefanState& state, const PlantParams& params, const Setpoint& sp);

struct DecayReport {
    std::size_t steps_checked{0};
    std::size_t steps_satisfied{0};  ///< dVbar/dt <= (-b_bar + a sdot) Vbar + slack
    double max_violation{0.0};
    double slope{0.0};          ///< least-squares slope of log(envelope of Phi) vs t
    double fitted_rate{0.0};    ///< -slope
    double fitted_M{0.0};       ///< intercept of the fit, relative to Phi(0)
    double envelope_M{0.0};     ///< smallest M with Phi(t) <= M Phi(0) exp(-rate t) at every record
    double envelope_fraction{1.0};  ///< fraction of records under the intercept-fitted envelope
    double phi_ratio{0.0};      ///< Phi(t_final) / Phi(0)
    bool vacuous{false};        ///< Phi identically zero
};

DecayReport decay_report(std::span<const TraceRecord> trace, const LyapunovConstants& consts);

/// Right-hand side (-b_bar + a sdot) Vbar of the Vbar differential inequality.
inline double vbar_bound_rhs(const LyapunovConstants& c, double sdot, double Vbar) {
    return (-c.b_bar + c.a * sdot) * Vbar;
}

}  // namespace stefan
