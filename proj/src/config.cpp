#include "stefan/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "stefan/diagnostics.hpp"

namespace stefan {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view text) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw ConfigError("config key '" + std::string(key) + "': expected a finite number, got '" +
                          std::string(text) + "'");
    }
    return value;
}

long parse_integer(std::string_view key, std::string_view text) {
    long value = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError("config key '" + std::string(key) + "': expected an integer, got '" +
                          std::string(text) + "'");
    }
    return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw ConfigError("config key '" + std::string(key) + "': expected true/false, got '" +
                      std::string(text) + "'");
}

void apply_preset(ScenarioConfig& cfg, std::string_view name) {
    const auto preset = material_preset(name);
    if (!preset) throw ConfigError("unknown material_preset '" + std::string(name) + "'");
    cfg.material_preset = std::string(name);
    cfg.plant.alpha = preset->alpha;
    cfg.plant.beta = preset->beta;
    cfg.plant.k = preset->k;
    cfg.plant.T_m = preset->T_m;
}

}  // namespace

std::optional<MaterialPreset> material_preset(std::string_view name) {
    if (name == "zinc") return kZincPreset;
    if (name == "nondimensional") return kNondimensionalPreset;
    return std::nullopt;
}

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ec == std::errc() ? ptr : buf);
}

InitialCondition ScenarioConfig::initial_condition() const {
    return InitialCondition{s0, make_profile(T0_profile, T0_amplitude, plant.T_m, solver.N), qc0};
}

double ScenarioConfig::resolved_dt() const {
    return solver.dt > 0.0 ? solver.dt : default_time_step(s0, plant, solver);
}

double ScenarioConfig::resolved_t_final() const { return t_final ? *t_final : 25.0 / gains.c1; }

double ScenarioConfig::resolved_epsilon() const {
    return epsilon ? *epsilon : default_epsilon(plant, gains.c1);
}

long ScenarioConfig::resolved_record_every() const {
    if (record_every > 0) return record_every;
    const double steps = resolved_t_final() / resolved_dt();
    return std::max(1L, static_cast<long>(std::ceil(steps / 20000.0)));
}

void apply_setting(ScenarioConfig& cfg, std::string_view key, std::string_view raw) {
    const std::string_view value = trim(raw);
    if (key == "material_preset") apply_preset(cfg, value);
    else if (key == "alpha") cfg.plant.alpha = parse_double(key, value);
    else if (key == "beta") cfg.plant.beta = parse_double(key, value);
    else if (key == "k") cfg.plant.k = parse_double(key, value);
    else if (key == "L") cfg.plant.L = parse_double(key, value);
    else if (key == "T_m") cfg.plant.T_m = parse_double(key, value);
    else if (key == "s0") cfg.s0 = parse_double(key, value);
    else if (key == "s_r") cfg.setpoint.s_r = parse_double(key, value);
    else if (key == "qc0") cfg.qc0 = parse_double(key, value);
    else if (key == "T0_profile") {
        if (value == "linear") cfg.T0_profile = ProfileKind::linear;
        else if (value == "flat") cfg.T0_profile = ProfileKind::flat;
        else throw ConfigError("T0_profile must be 'linear' or 'flat', got '" + std::string(value) + "'");
    }
    else if (key == "T0_amplitude") cfg.T0_amplitude = parse_double(key, value);
    else if (key == "N") {
        const long n = parse_integer(key, value);
        if (n < 0) throw ConfigError("N must be non-negative");
        cfg.solver.N = static_cast<std::size_t>(n);
    }
    else if (key == "dt") {
        const double dt = parse_double(key, value);
        if (!(dt > 0.0)) throw ConfigError("dt must be > 0 (omit the key for the CFL default)");
        cfg.solver.dt = dt;
    }
    else if (key == "cfl_safety") cfg.solver.cfl_safety = parse_double(key, value);
    else if (key == "flux_stencil_order") cfg.solver.flux_stencil_order = static_cast<int>(parse_integer(key, value));
    else if (key == "t_final") cfg.t_final = parse_double(key, value);
    else if (key == "stop_at_convergence") cfg.stop_at_convergence = parse_bool(key, value);
    else if (key == "record_every") cfg.record_every = parse_integer(key, value);
    else if (key == "c1") cfg.gains.c1 = parse_double(key, value);
    else if (key == "c2") cfg.gains.c2 = parse_double(key, value);
    else if (key == "delta1") cfg.gains.delta1 = parse_double(key, value);
    else if (key == "delta2") cfg.gains.delta2 = parse_double(key, value);
    else if (key == "epsilon") cfg.epsilon = parse_double(key, value);
    else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

ScenarioConfig parse_config(std::string_view text) {
    std::vector<std::pair<std::string, std::string>> entries;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view(line);
        if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = trim(view);
        if (view.empty()) continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const auto key = trim(view.substr(0, eq));
        const auto value = trim(view.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key or value");
        }
        for (const auto& e : entries) {
            if (e.first == key) throw ConfigError("config key '" + std::string(key) + "' given twice");
        }
        entries.emplace_back(std::string(key), std::string(value));
    }

    ScenarioConfig cfg;
    for (const auto& [key, value] : entries) {
        if (key == "material_preset") apply_setting(cfg, key, value);
    }
    for (const auto& [key, value] : entries) {
        if (key != "material_preset") apply_setting(cfg, key, value);
    }
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string to_config_text(const ScenarioConfig& cfg) {
    std::ostringstream out;
    auto line = [&](const char* key, const std::string& value) { out << key << " = " << value << '\n'; };
    line("material_preset", cfg.material_preset);
    line("alpha", format_double(cfg.plant.alpha));
    line("beta", format_double(cfg.plant.beta));
    line("k", format_double(cfg.plant.k));
    line("L", format_double(cfg.plant.L));
    line("T_m", format_double(cfg.plant.T_m));
    line("s0", format_double(cfg.s0));
    line("s_r", format_double(cfg.setpoint.s_r));
    line("qc0", format_double(cfg.qc0));
    line("T0_profile", cfg.T0_profile == ProfileKind::linear ? "linear" : "flat");
    line("T0_amplitude", format_double(cfg.T0_amplitude));
    line("N", std::to_string(cfg.solver.N));
    line("dt", format_double(cfg.resolved_dt()));
    line("cfl_safety", format_double(cfg.solver.cfl_safety));
    line("flux_stencil_order", std::to_string(cfg.solver.flux_stencil_order));
    line("t_final", format_double(cfg.resolved_t_final()));
    line("stop_at_convergence", cfg.stop_at_convergence ? "true" : "false");
    line("record_every", std::to_string(cfg.resolved_record_every()));
    line("c1", format_double(cfg.gains.c1));
    line("c2", format_double(cfg.gains.c2));
    line("delta1", format_double(cfg.gains.delta1));
    line("delta2", format_double(cfg.gains.delta2));
    line("epsilon", format_double(cfg.resolved_epsilon()));
    return out.str();
}

std::vector<AssumptionViolation> validate(const ScenarioConfig& cfg) {
    std::vector<AssumptionViolation> out;
    for (const auto& v : cfg.solver.violations()) out.push_back({"solver settings", 0.0, 0.0, v});
    if (cfg.t_final && !(*cfg.t_final >= 0.0)) {
        out.push_back({"t_final", *cfg.t_final, 0.0, "t_final must be >= 0"});
    }
    if (cfg.record_every < 0) {
        out.push_back({"record_every", static_cast<double>(cfg.record_every), 0.0, "must be >= 0"});
    }
    if (!out.empty()) return out;

    const auto model = validate_config(cfg.plant, cfg.initial_condition(), cfg.setpoint, cfg.gains);
    out.insert(out.end(), model.begin(), model.end());
    if (cfg.gains.violations().empty() && cfg.plant.alpha > 0.0 && cfg.plant.beta > 0.0) {
        const double eps = cfg.resolved_epsilon();
        const double upper = epsilon_upper_bound(cfg.plant, cfg.gains.c1);
        if (!(eps > 0.0 && eps < upper)) {
            out.push_back({"epsilon range", eps, upper, "epsilon must satisfy 0 < epsilon < 2 sqrt(alpha c1)/beta"});
        }
    }
    return out;
}

void require_valid(const ScenarioConfig& cfg) {
    const auto violations = validate(cfg);
    if (violations.empty()) return;
    std::ostringstream msg;
    msg << "invalid configuration:";
    for (const auto& v : violations) {
        msg << "\n  " << v.name << ": " << v.detail;
        if (v.actual != 0.0 || v.bound != 0.0) {
            msg << " (actual " << format_double(v.actual) << ", bound " << format_double(v.bound) << ")";
        }
    }
    throw ConfigError(msg.str());
}

}  // namespace stefan
