// config.hpp — key = value run configuration, presets and typed lookups

#pragma once

#include "berrytherm/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace berrytherm::cli {

struct ConfigError : DomainError {
    std::string key;
    ConfigError(const std::string& key, const std::string& what) : DomainError(what), key(key) {}
};

struct KeyInfo {
    std::string name;
    std::string help;
};

// Every key the commands understand. Unknown keys are rejected.
inline const std::vector<KeyInfo>& known_keys() {
    static const std::vector<KeyInfo> keys = {
        {"preset", "named parameter set (fig3-*, fig5-*, fig6-*)"},
        {"Omega_a", "field mode frequency, rad/s"},
        {"Omega_b", "detector gap, rad/s"},
        {"lambda", "coupling, rad/s"},
        {"gap", "shorthand: Omega_a = gap, Omega_b = gap + detuning"},
        {"detuning", "Omega_b - Omega_a when gap is used (default: lambda)"},
        {"omega_a", "diagonal parameter omega_a, rad/s (alternative to Omega_*)"},
        {"omega_b", "diagonal parameter omega_b, rad/s"},
        {"v", "diagonal squeeze parameter v"},
        {"t_hot", "hot reference temperature, K"},
        {"t_cold_min", "lower end of the cold sweep, K"},
        {"t_cold_max", "upper end of the cold sweep, K"},
        {"t_cold", "cold temperature for the sensitivity sweep, K"},
        {"relerr_end", "signed end of the hot-temperature relative error sweep"},
        {"accel_min", "lower end of the acceleration sweep, m/s^2"},
        {"accel_max", "upper end of the acceleration sweep, m/s^2"},
        {"points", "number of sweep points"},
        {"temperature", "initial field temperature for adiabaticity, K"},
        {"cycles", "number of field cycles to evolve"},
        {"step_fraction", "integration step as a fraction of one cycle"},
        {"route", "evolution route: automatic, fock or quadrature"},
        {"n_field", "field cutoff"},
        {"n_det", "detector cutoff"},
        {"loop_points", "points on the discrete Berry loop"},
        {"refinement", "single or richardson"},
        {"variant", "eigenstate phase formula: corrected or printed"},
        {"grid", "certification grid: full or quick"},
        {"format", "csv or json"},
        {"out", "output path (default stdout)"},
    };
    return keys;
}

inline bool is_known_key(std::string_view k) {
    for (const auto& info : known_keys())
        if (info.name == k) return true;
    return false;
}

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

class RunConfig {
public:
    void set(const std::string& key, const std::string& value) {
        if (!is_known_key(key)) throw ConfigError(key, "config: unknown key '" + key + "'");
        values_[key] = value;
    }

    // Values from `other` win.
    void merge(const RunConfig& other) {
        for (const auto& [k, v] : other.values_) values_[k] = v;
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::optional<std::string> raw(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) return std::nullopt;
        return it->second;
    }

    std::string text(const std::string& key, const std::string& fallback) const {
        return raw(key).value_or(fallback);
    }

    double number(const std::string& key) const {
        auto r = raw(key);
        if (!r) throw ConfigError(key, "config: missing required key '" + key + "'");
        return parse_number(key, *r);
    }

    double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

    double positive(const std::string& key) const { return check_positive(key, number(key)); }
    double positive(const std::string& key, double fallback) const {
        return check_positive(key, number(key, fallback));
    }

    int integer(const std::string& key, int fallback, int min_value) const {
        if (!has(key)) return fallback;
        const double x = number(key);
        if (x != std::floor(x) || x < min_value || x > 1e9)
            throw ConfigError(key, "config: '" + key + "' must be an integer >= " + std::to_string(min_value));
        return int(x);
    }

    std::string choice(const std::string& key, const std::string& fallback,
                       const std::vector<std::string>& allowed) const {
        const std::string v = text(key, fallback);
        for (const auto& a : allowed)
            if (a == v) return v;
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        throw ConfigError(key, "config: '" + key + "' must be one of " + list + " (got '" + v + "')");
    }

    const std::map<std::string, std::string>& values() const { return values_; }

    static double parse_number(const std::string& key, const std::string& s) {
        const std::string t = trim(s);
        double x = 0.0;
        const char* end = t.data() + t.size();
        auto [ptr, ec] = std::from_chars(t.data(), end, x);
        if (t.empty() || ec != std::errc() || ptr != end || !std::isfinite(x))
            throw ConfigError(key, "config: '" + key + "' is not a finite number: '" + s + "'");
        return x;
    }

private:
    static double check_positive(const std::string& key, double x) {
        if (!(x > 0.0)) throw ConfigError(key, "config: '" + key + "' must be positive");
        return x;
    }

    std::map<std::string, std::string> values_;
};

// Lines are `key = value`; `#` starts a comment.
inline RunConfig parse_config_text(std::string_view text) {
    RunConfig cfg;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            const std::string key = t.substr(0, t.find_first_of(" \t"));
            throw ConfigError(key, "config line " + std::to_string(lineno) + ": expected 'key = value' for '" + key + "'");
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) throw ConfigError("", "config line " + std::to_string(lineno) + ": empty key");
        if (value.empty())
            throw ConfigError(key, "config line " + std::to_string(lineno) + ": empty value for '" + key + "'");
        if (!is_known_key(key))
            throw ConfigError(key, "config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        cfg.set(key, value);
    }
    return cfg;
}

inline RunConfig load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config", "config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

// ---------- presets ----------

struct Preset {
    std::string name;
    std::string description;
    std::vector<std::pair<std::string, std::string>> values;
};

inline const std::vector<Preset>& presets() {
    static const std::vector<Preset> list = {
        {"fig3-mhz", "thermometer, gap 1e6 rad/s, T_h = 1 mK",
         {{"gap", "1e6"}, {"lambda", "7539.822368615503"}, {"t_hot", "1e-3"}, {"t_cold_min", "1e-6"},
          {"t_cold_max", "1e-3"}, {"t_cold", "1e-5"}}},
        {"fig3-10mhz", "thermometer, gap 1e7 rad/s, T_h = 10 mK",
         {{"gap", "1e7"}, {"lambda", "7539.822368615503"}, {"t_hot", "1e-2"}, {"t_cold_min", "1e-5"},
          {"t_cold_max", "1e-2"}, {"t_cold", "1e-4"}}},
        {"fig3-100mhz", "thermometer, gap 1e8 rad/s, T_h = 100 mK",
         {{"gap", "1e8"}, {"lambda", "7539.822368615503"}, {"t_hot", "1e-1"}, {"t_cold_min", "1e-4"},
          {"t_cold_max", "1e-1"}, {"t_cold", "1e-3"}}},
        {"fig3-ghz", "thermometer, gap 1e9 rad/s, T_h = 1 K",
         {{"gap", "1e9"}, {"lambda", "7539.822368615503"}, {"t_hot", "1"}, {"t_cold_min", "1e-3"},
          {"t_cold_max", "1"}, {"t_cold", "1e-2"}}},
        {"fig5-1", "Unruh detector, gap 2e9 rad/s, lambda = 2 pi 34 rad/s",
         {{"gap", "2e9"}, {"lambda", "213.62830044410595"}, {"accel_min", "1e16"}, {"accel_max", "1e18"}}},
        {"fig5-2", "Unruh detector, gap 2e9 rad/s, lambda = 2 pi 100 rad/s",
         {{"gap", "2e9"}, {"lambda", "628.3185307179587"}, {"accel_min", "1e16"}, {"accel_max", "1e18"}}},
        {"fig5-3", "Unruh detector, gap 2e9 rad/s, lambda = 2 pi 250 rad/s",
         {{"gap", "2e9"}, {"lambda", "1570.7963267948967"}, {"accel_min", "1e16"}, {"accel_max", "1e18"}}},
        {"fig6-ghz", "adiabaticity, gap 1e9 rad/s, vacuum field",
         {{"gap", "1e9"}, {"lambda", "7539.822368615503"}, {"temperature", "0"}, {"cycles", "5"}}},
        {"fig6-mhz", "adiabaticity, gap 1e6 rad/s, field at 1 mK",
         {{"gap", "1e6"}, {"lambda", "7539.822368615503"}, {"temperature", "1e-3"}, {"cycles", "5"}}},
    };
    return list;
}

inline const Preset& find_preset(const std::string& name) {
    for (const auto& p : presets())
        if (p.name == name) return p;
    std::string list;
    for (const auto& p : presets()) list += (list.empty() ? "" : ", ") + p.name;
    throw ConfigError("preset", "config: unknown preset '" + name + "' (available: " + list + ")");
}

// preset < config file < flags
inline RunConfig resolve_config(const RunConfig& file, const RunConfig& flags) {
    RunConfig layered = file;
    layered.merge(flags);
    RunConfig out;
    if (auto name = layered.raw("preset")) {
        for (const auto& [k, v] : find_preset(*name).values) out.set(k, v);
    }
    out.merge(layered);
    return out;
}

}  // namespace berrytherm::cli
