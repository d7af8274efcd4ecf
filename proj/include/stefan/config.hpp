#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stefan/controller.hpp"
#include "stefan/model.hpp"
#include "stefan/solver.hpp"

namespace stefan {

struct MaterialPreset {
    double alpha;
    double beta;
    double k;
    double T_m;
};

/// Zinc: rho = 6570 kg/m^3, latent heat 111961 J/kg, cp = 389.5 J/(kg K), k = 116 W/(m K),
/// melting point 420 degC; alpha = k/(rho cp), beta = k/(rho dH).
inline constexpr MaterialPreset kZincPreset{116.0 / (6570.0 * 389.5), 116.0 / (6570.0 * 111961.0),
                                            116.0, 420.0};
inline constexpr MaterialPreset kNondimensionalPreset{1.0, 1.0, 1.0, 0.0};

/// Built-in presets: "zinc" and "nondimensional" (alpha = beta = k = 1, T_m = 0).
std::optional<MaterialPreset> material_preset(std::string_view name);

/// Everything one closed-loop run needs, as loaded from a `key = value` file.
struct ScenarioConfig {
    std::string material_preset{"zinc"};
    PlantParams plant{kZincPreset.alpha, kZincPreset.beta, kZincPreset.k, 0.35, kZincPreset.T_m};
    double s0{0.05};
    Setpoint setpoint{};
    double qc0{0.0};
    ProfileKind T0_profile{ProfileKind::linear};
    double T0_amplitude{1.0};
    SolverSettings solver{};
    std::optional<double> t_final;  ///< hard cap; unset selects 25 / c1
    bool stop_at_convergence{true};
    long record_every{0};           ///< 0 selects a stride giving roughly 20000 rows
    ControllerGains gains{};
    std::optional<double> epsilon;  ///< unset selects sqrt(alpha c1) / beta

    InitialCondition initial_condition() const;
    double resolved_dt() const;
    double resolved_t_final() const;
    double resolved_epsilon() const;
    long resolved_record_every() const;
};

/// Parses the flat config format. Unknown keys and malformed values throw ConfigError.
/// `material_preset` is applied first, so explicit alpha/beta/k/T_m lines override it.
ScenarioConfig parse_config(std::string_view text);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Applies one `key = value` override on top of an existing config.
void apply_setting(ScenarioConfig& cfg, std::string_view key, std::string_view value);

/// Resolved configuration as config text (all defaults made explicit).
std::string to_config_text(const ScenarioConfig& cfg);

/// Every assumption/invariant violation, including solver and epsilon checks.
std::vector<AssumptionViolation> validate(const ScenarioConfig& cfg);

/// Throws ConfigError listing every violation.
void require_valid(const ScenarioConfig& cfg);

/// Shortest round-trip decimal representation.
std::string format_double(double value);

}  // namespace stefan
