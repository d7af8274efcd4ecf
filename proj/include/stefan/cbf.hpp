#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "stefan/model.hpp"
#include "stefan/trace.hpp"

namespace stefan {

struct ControllerGains;

/// Barrier values at one instant.
struct CbfSnapshot {
    double t{0.0};
    double h1{0.0};     ///< sigma
    double h2{0.0};     ///< q_c
    double h3{0.0};     ///< -q_c + c1 sigma
    double h_min{0.0};  ///< min over grid nodes of T - T_m
};

CbfSnapshot snapshot(const StefanState& state, const PlantParams& params, const Setpoint& sp,
                     const ControllerGains& gains);

/// Builds a snapshot from already-known sigma; h3 is formed the same way as in snapshot().
CbfSnapshot snapshot_from(double t, double sigma, double qc, double h_min, double c1);

/// Max |dh1/dt - (-c1 h1 + h3)| using three-point (non-uniform) central differences.
/// Throws std::invalid_argument for fewer than three records.
double h1_ode_residual(std::span<const TraceRecord> trace, double c1);

struct SafeSetReport {
    bool pass{true};
    std::optional<std::size_t> first_violation;
    std::string what;
    double value{0.0};
};

/// h1, h2, h3, h_min >= -tol and s0 - s_tol <= s <= s_r + s_tol at every record.
SafeSetReport safe_set_check(std::span<const TraceRecord> trace, double s0, double s_r, double tol,
                             double s_tol = 1e-9);

/// Relative tolerance 1e-9 * max(|sigma(0)|, max |q_c|) used for safe-set checks.
double safe_set_tolerance(std::span<const TraceRecord> trace);

}  // namespace stefan
