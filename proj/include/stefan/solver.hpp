#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "stefan/model.hpp"

namespace stefan {

struct SolverSettings {
    std::size_t N{200};
    double dt{0.0};  ///< base step; 0 selects the CFL default for the initial state
    double cfl_safety{0.6};
    int flux_stencil_order{2};

    /// Names of violated invariants (N >= 8, dt >= 0, cfl_safety in (0,1], order 1 or 2).
    std::vector<std::string> violations() const;
};

class SolverError : public std::runtime_error {
public:
    enum class Kind { stability_violation, non_finite_state };

    SolverError(Kind kind, double time, const std::string& what);

    Kind kind() const { return kind_; }
    double time() const { return time_; }

private:
    Kind kind_;
    double time_;
};

/// Largest explicit step allowed for the state: cfl_safety * s^2 dy^2 / (2 alpha).
double max_stable_step(const StefanState& state, const PlantParams& params,
                       const SolverSettings& settings);

/// Default base step cfl_safety * s0^2 dy^2 / (2 alpha).
double default_time_step(double s0, const PlantParams& params, const SolverSettings& settings);

/// Interface velocity -(beta/s) dT/dy at y = 1 with a one-sided stencil of the configured order.
double interface_velocity(const StefanState& state, const PlantParams& params,
                          const SolverSettings& settings);

/// Advances the plant by `dt` under constant actuator input U (q_c' = U). The step is
/// split into equal substeps no longer than max_stable_step().
StefanState step(const StefanState& state, double U, double dt, const PlantParams& params,
                 const SolverSettings& settings);

/// Same as step(), updating `state` without copying the profile. On error the state is left
/// at the last completed substep.
void step_in_place(StefanState& state, double U, double dt, const PlantParams& params,
                   const SolverSettings& settings);

}  // namespace stefan
