#pragma once

#include <cctype>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "rai/constants.hpp"
#include "rai/ensemble.hpp"
#include "rai/fringe.hpp"
#include "rai/sequence.hpp"

namespace rai {

using Json = nlohmann::json;

/// Configuration error carrying the offending key path.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

inline Json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return j;
}

namespace detail {

inline const Json& require_key(const Json& j, const std::string& key, const std::string& scope) {
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError("missing required key '" + scope + key + "'");
    return *it;
}

template <typename T>
T get_as(const Json& j, const std::string& key, const std::string& scope) {
    try {
        return require_key(j, key, scope).get<T>();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("key '" + scope + key + "' has the wrong type");
    }
}

template <typename T>
T get_or(const Json& j, const std::string& key, const std::string& scope, T fallback) {
    if (!j.contains(key)) return fallback;
    return get_as<T>(j, key, scope);
}

} // namespace detail

/// Parse a phase given either as a number (radians) or as a string multiple
/// of pi: "pi", "-pi", "3 pi", "3/8 pi", "0.5 pi".
inline double parse_phase(const Json& v, const std::string& where) {
    if (v.is_number()) return v.get<double>();
    if (!v.is_string())
        throw ConfigError("key '" + where + "' must be a number (radians) or a \"a/b pi\" string");
    std::string s = v.get<std::string>();
    auto strip = [](std::string& t) {
        while (!t.empty() && std::isspace(static_cast<unsigned char>(t.front()))) t.erase(t.begin());
        while (!t.empty() && std::isspace(static_cast<unsigned char>(t.back()))) t.pop_back();
    };
    strip(s);
    bool has_pi = false;
    if (s.size() >= 2 && (s.substr(s.size() - 2) == "pi" || s.substr(s.size() - 2) == "Pi" ||
                          s.substr(s.size() - 2) == "PI")) {
        has_pi = true;
        s.erase(s.size() - 2);
        strip(s);
    }
    const auto parse_number = [&](std::string t) {
        strip(t);
        std::size_t pos = 0;
        double value = 0.0;
        try {
            value = std::stod(t, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos == 0 || pos != t.size())
            throw ConfigError("key '" + where + "': cannot parse phase value '" + v.get<std::string>() + "'");
        return value;
    };
    double factor = 1.0;
    if (s == "-") {
        factor = -1.0;
        if (!has_pi) throw ConfigError("key '" + where + "': empty phase value");
    } else if (s == "+" || s.empty()) {
        if (!has_pi) throw ConfigError("key '" + where + "': empty phase value");
    } else {
        const auto slash = s.find('/');
        if (slash == std::string::npos) {
            factor = parse_number(s);
        } else {
            const double num = parse_number(s.substr(0, slash));
            const double den = parse_number(s.substr(slash + 1));
            if (den == 0.0) throw ConfigError("key '" + where + "': zero denominator in phase value");
            factor = num / den;
        }
    }
    return has_pi ? factor * std::numbers::pi : factor;
}

/// Parse the sequence block: {base_phases, loops, pi_duration_ns,
/// deadtime_ns, [beamsplitter_duration_ns], [quantize_bits],
/// [signal {delta_phi, freq_hz, theta0}]}.
inline SequenceSpec parse_sequence(const Json& j, const std::string& scope = "sequence.") {
    const Json& phases_json = detail::require_key(j, "base_phases", scope);
    if (!phases_json.is_array() || phases_json.empty())
        throw ConfigError("key '" + scope + "base_phases' must be a non-empty array");
    std::vector<double> phases;
    phases.reserve(phases_json.size());
    for (std::size_t i = 0; i < phases_json.size(); ++i)
        phases.push_back(parse_phase(phases_json[i], scope + "base_phases[" + std::to_string(i) + "]"));

    const int loops = detail::get_as<int>(j, "loops", scope);
    TimingSpec timing;
    timing.pi_duration = 1e-9 * detail::get_or<double>(j, "pi_duration_ns", scope, 80.0);
    timing.deadtime = 1e-9 * detail::get_or<double>(j, "deadtime_ns", scope, 80.0);
    timing.beamsplitter_duration =
        1e-9 * detail::get_or<double>(j, "beamsplitter_duration_ns", scope, 0.0);
    if (timing.beamsplitter_duration == 0.0) timing.beamsplitter_duration = 0.5 * timing.pi_duration;

    SequenceSpec seq;
    try {
        seq = build_sequence(PhaseTuple(phases), loops, timing, 0.0);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("key '") + scope + "loops': " + e.what());
    }
    if (j.contains("quantize_bits")) seq.quantize_bits = detail::get_as<int>(j, "quantize_bits", scope);
    if (j.contains("signal")) {
        const Json& sj = j.at("signal");
        SignalSpec sig;
        sig.amplitude = parse_phase(detail::require_key(sj, "delta_phi", scope + "signal."),
                                    scope + "signal.delta_phi");
        sig.omega = two_pi * detail::get_as<double>(sj, "freq_hz", scope + "signal.");
        sig.theta0 = parse_phase(detail::require_key(sj, "theta0", scope + "signal."),
                                 scope + "signal.theta0");
        seq.signal = sig;
    }
    return seq;
}

/// Parse the ensemble block. "ideal": true gives the single perfect atom;
/// otherwise a calibrated thermal ensemble is built.
inline Ensemble parse_ensemble(const Json& j, const TimingSpec& timing,
                               const std::string& scope = "ensemble.") {
    double decay_rate = default_decay_rate;
    if (j.contains("decay_rate_per_s"))
        decay_rate = detail::get_as<double>(j, "decay_rate_per_s", scope);
    else if (j.contains("lifetime_us"))
        decay_rate = 1.0 / (1e-6 * detail::get_as<double>(j, "lifetime_us", scope));
    if (detail::get_or<bool>(j, "ideal", scope, false)) {
        return ideal_ensemble(timing, detail::get_or<bool>(j, "decay", scope, false) ? decay_rate : 0.0);
    }
    EnsembleSpec spec;
    spec.n_samples = detail::get_or<int>(j, "n_samples", scope, 256);
    spec.doppler_sigma_over_rabi = detail::get_or<double>(j, "doppler_sigma_over_rabi", scope, 0.1);
    spec.waist_over_cloud = detail::get_or<double>(j, "waist_over_cloud", scope, 3.0);
    spec.seed = detail::get_or<std::uint64_t>(j, "seed", scope, 1);
    const double target = detail::get_or<double>(j, "target_pi_transfer", scope, 0.9);
    try {
        return make_thermal_ensemble(spec, timing, decay_rate, target);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("ensemble block: ") + e.what());
    }
}

inline EngineKind parse_engine(const std::string& name) {
    if (name == "lindblad") return EngineKind::lindblad;
    if (name == "jump") return EngineKind::jump;
    throw ConfigError("engine must be 'lindblad' or 'jump', got '" + name + "'");
}

/// Parse the scan block shared by the fringe-producing commands.
inline ScanParams parse_scan(const Json& j, const std::string& scope = "scan.") {
    ScanParams p;
    p.n_points = detail::get_or<int>(j, "n_phi_points", scope, 24);
    p.n_trajectories = detail::get_or<int>(j, "n_trajectories", scope, 4000);
    p.seed = detail::get_or<std::uint64_t>(j, "seed", scope, 1);
    p.noise_sigma = detail::get_or<double>(j, "noise_sigma", scope, 0.0);
    p.engine = parse_engine(detail::get_or<std::string>(j, "engine", scope, "lindblad"));
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("scan block: ") + e.what());
    }
    return p;
}

} // namespace rai
