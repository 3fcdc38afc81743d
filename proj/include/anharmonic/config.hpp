#pragma once

#include <charconv>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "anharmonic/spec.hpp"

namespace anharm {

/// Configuration problems: malformed document, unknown key, missing block,
/// wrong type. Messages carry the offending key path. Mapped to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace cfg_detail {

inline void require_known_keys(const nlohmann::json& obj, const std::set<std::string>& known,
                               const std::string& prefix) {
    for (const auto& [key, _] : obj.items()) {
        if (!known.count(key))
            throw ConfigError("unknown key: " + (prefix.empty() ? key : prefix + "." + key));
    }
}

inline double as_number(const nlohmann::json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path + ": expected a number");
    return v.get<double>();
}

inline int as_integer(const nlohmann::json& v, const std::string& path) {
    if (!v.is_number_integer()) throw ConfigError(path + ": expected an integer");
    return v.get<int>();
}

inline std::string as_string(const nlohmann::json& v, const std::string& path) {
    if (!v.is_string()) throw ConfigError(path + ": expected a string");
    return v.get<std::string>();
}

inline std::map<int, double> as_coefficient_map(const nlohmann::json& v, const std::string& path) {
    if (!v.is_object()) throw ConfigError(path + ": expected an object of index -> value");
    std::map<int, double> out;
    for (const auto& [key, val] : v.items()) {
        int idx = 0;
        const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), idx);
        if (ec != std::errc{} || ptr != key.data() + key.size())
            throw ConfigError(path + "." + key + ": key must be an integer index");
        out[idx] = as_number(val, path + "." + key);
    }
    return out;
}

} // namespace cfg_detail

/// Builds a validated oscillator spec from a parsed key-value tree. Accepted
/// keys: order (required), units ("reduced" or {hbar, mass, omega_har}),
/// hbar, mass, omega_har (scalar overrides), coefficients, perturbation,
/// n_ref, n_max, eta. If a'_2 is absent it is synthesized from omega_har as
/// m (n_ref hbar omega_har)^2 / 2; the document must supply at least one of
/// the two. Unknown keys are hard errors.
inline OscillatorSpec build_spec(const nlohmann::json& doc) {
    using namespace cfg_detail;
    if (!doc.is_object()) throw ConfigError("spec document must be a JSON object");
    require_known_keys(doc,
                       {"order", "units", "hbar", "mass", "omega_har", "coefficients",
                        "perturbation", "n_ref", "n_max", "eta"},
                       "");

    OscillatorSpec spec;
    bool omega_supplied = false;

    if (doc.contains("units")) {
        const auto& u = doc["units"];
        if (u.is_string()) {
            if (u.get<std::string>() != "reduced")
                throw ConfigError("units: only the string \"reduced\" or an object is accepted");
            spec.units = UnitSystem{};
            omega_supplied = true;
        } else if (u.is_object()) {
            require_known_keys(u, {"hbar", "mass", "omega_har"}, "units");
            if (u.contains("hbar")) spec.units.hbar = as_number(u["hbar"], "units.hbar");
            if (u.contains("mass")) spec.units.mass = as_number(u["mass"], "units.mass");
            if (u.contains("omega_har")) {
                spec.units.omega_har = as_number(u["omega_har"], "units.omega_har");
                omega_supplied = true;
            }
        } else {
            throw ConfigError("units: expected \"reduced\" or an object");
        }
    }
    if (doc.contains("hbar")) spec.units.hbar = as_number(doc["hbar"], "hbar");
    if (doc.contains("mass")) spec.units.mass = as_number(doc["mass"], "mass");
    if (doc.contains("omega_har")) {
        spec.units.omega_har = as_number(doc["omega_har"], "omega_har");
        omega_supplied = true;
    }

    if (!doc.contains("order")) throw ConfigError("order: required key is missing");
    spec.order = as_integer(doc["order"], "order");
    if (spec.order < 2) throw ConfigError("order below quadratic (order must be >= 2)");

    if (doc.contains("coefficients"))
        spec.intrinsic_coeffs = as_coefficient_map(doc["coefficients"], "coefficients");
    if (doc.contains("perturbation"))
        spec.perturbation_coeffs = as_coefficient_map(doc["perturbation"], "perturbation");
    if (doc.contains("n_ref")) spec.n_ref = as_integer(doc["n_ref"], "n_ref");
    if (doc.contains("n_max")) spec.n_max = as_integer(doc["n_max"], "n_max");
    if (doc.contains("eta")) spec.eta = as_number(doc["eta"], "eta");

    if (!spec.intrinsic_coeffs.count(2)) {
        if (!omega_supplied)
            throw ConfigError(
                "supply either coefficients.2 (a'_2) or omega_har to define the quadratic term");
        spec.units.validate();
        if (spec.n_ref < 1) throw ConfigError("n_ref must be a positive integer");
        const double n_hbar_omega = spec.n_ref * spec.units.hbar * spec.units.omega_har;
        spec.intrinsic_coeffs[2] = spec.units.mass * n_hbar_omega * n_hbar_omega / 2.0;
    }

    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return spec;
}

enum class Command { solve, levels, sweep, perturb, oracle_check };

inline std::string_view to_string(Command c) {
    switch (c) {
        case Command::solve: return "solve";
        case Command::levels: return "levels";
        case Command::sweep: return "sweep";
        case Command::perturb: return "perturb";
        case Command::oracle_check: return "oracle-check";
    }
    return "";
}

enum class OutputFormat { csv, json };

struct SweepConfig {
    int coeff_index = 0;
    double lo = 0.0;
    double hi = 0.0;
    int steps = 0;
    double amplification = 10.0;
};

struct PerturbConfig {
    std::map<int, double> delta;
};

struct OracleConfig {
    std::optional<double> dp_lo;
    std::optional<double> dp_hi;
    std::optional<double> step;
};

/// One fully validated invocation: the command, the oscillator spec, the
/// output channel, and the command-specific block when the command needs one.
struct RunConfig {
    Command command = Command::solve;
    OscillatorSpec spec;
    OutputFormat output_format = OutputFormat::csv;
    std::optional<std::string> output_path;
    std::optional<SweepConfig> sweep;
    std::optional<PerturbConfig> perturb;
    std::optional<OracleConfig> oracle;
};

namespace cfg_detail {

inline Command parse_command(const std::string& name) {
    if (name == "solve") return Command::solve;
    if (name == "levels") return Command::levels;
    if (name == "sweep") return Command::sweep;
    if (name == "perturb") return Command::perturb;
    if (name == "oracle-check") return Command::oracle_check;
    throw ConfigError("command: unknown command \"" + name +
                      "\" (expected solve, levels, sweep, perturb or oracle-check)");
}

// Applies one "dotted.path=value" override onto the document. Values parse
// as JSON when possible (numbers, booleans, objects) and as strings otherwise.
inline void apply_override(nlohmann::json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override \"" + assignment + "\" must have the form key=value");
    const std::string path = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);

    nlohmann::json value = nlohmann::json::parse(raw, nullptr, /*allow_exceptions=*/false);
    if (value.is_discarded()) value = raw;

    std::vector<std::string> segments;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        segments.push_back(path.substr(start, dot - start));
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    nlohmann::json* node = &doc;
    for (std::size_t k = 0; k + 1 < segments.size(); ++k) {
        if (segments[k].empty()) throw ConfigError("override path \"" + path + "\" is malformed");
        nlohmann::json& child = (*node)[segments[k]];
        if (!child.is_object() && !child.is_null())
            throw ConfigError("override path \"" + path + "\" descends into a non-object value");
        if (child.is_null()) child = nlohmann::json::object();
        node = &child;
    }
    if (segments.back().empty()) throw ConfigError("override path \"" + path + "\" is malformed");
    (*node)[segments.back()] = std::move(value);
}

} // namespace cfg_detail

/// Parses a JSON configuration document plus key=value overrides into a
/// RunConfig. Overrides win over document values. Unknown keys anywhere are
/// hard errors, and command-specific blocks must be present exactly when the
/// command requires them.
inline RunConfig parse_config(const std::string& document_text,
                              const std::vector<std::string>& overrides = {}) {
    using namespace cfg_detail;
    nlohmann::json doc;
    if (document_text.empty()) {
        doc = nlohmann::json::object();
    } else {
        doc = nlohmann::json::parse(document_text, nullptr, /*allow_exceptions=*/false);
        if (doc.is_discarded()) throw ConfigError("configuration document is not valid JSON");
        if (!doc.is_object()) throw ConfigError("configuration document must be a JSON object");
    }
    for (const std::string& ov : overrides) apply_override(doc, ov);

    require_known_keys(doc,
                       {"command", "order", "units", "hbar", "mass", "omega_har", "coefficients",
                        "perturbation", "n_ref", "n_max", "eta", "output_format", "output_path",
                        "sweep", "perturb", "oracle"},
                       "");

    RunConfig run;
    if (!doc.contains("command")) throw ConfigError("command: required key is missing");
    run.command = parse_command(as_string(doc["command"], "command"));

    if (doc.contains("output_format")) {
        const std::string f = as_string(doc["output_format"], "output_format");
        if (f == "csv")
            run.output_format = OutputFormat::csv;
        else if (f == "json")
            run.output_format = OutputFormat::json;
        else
            throw ConfigError("output_format: expected \"csv\" or \"json\"");
    }
    if (doc.contains("output_path")) run.output_path = as_string(doc["output_path"], "output_path");

    nlohmann::json spec_doc = nlohmann::json::object();
    for (const char* key : {"order", "units", "hbar", "mass", "omega_har", "coefficients",
                            "perturbation", "n_ref", "n_max", "eta"})
        if (doc.contains(key)) spec_doc[key] = doc[key];
    run.spec = build_spec(spec_doc);

    const bool has_sweep = doc.contains("sweep");
    const bool has_perturb = doc.contains("perturb");
    const bool has_oracle = doc.contains("oracle");
    if (has_sweep && run.command != Command::sweep)
        throw ConfigError("sweep: block is only valid for the sweep command");
    if (has_perturb && run.command != Command::perturb)
        throw ConfigError("perturb: block is only valid for the perturb command");
    if (has_oracle && run.command != Command::oracle_check)
        throw ConfigError("oracle: block is only valid for the oracle-check command");

    if (run.command == Command::sweep) {
        if (!has_sweep) throw ConfigError("sweep.coeff_index missing (sweep block is required)");
        const auto& s = doc["sweep"];
        if (!s.is_object()) throw ConfigError("sweep: expected an object");
        require_known_keys(s, {"coeff_index", "lo", "hi", "steps", "amplification"}, "sweep");
        SweepConfig sc;
        if (!s.contains("coeff_index")) throw ConfigError("sweep.coeff_index missing");
        sc.coeff_index = as_integer(s["coeff_index"], "sweep.coeff_index");
        if (sc.coeff_index < 2 || sc.coeff_index > run.spec.order)
            throw ConfigError("sweep.coeff_index: outside 2..order");
        if (!s.contains("lo")) throw ConfigError("sweep.lo missing");
        if (!s.contains("hi")) throw ConfigError("sweep.hi missing");
        sc.lo = as_number(s["lo"], "sweep.lo");
        sc.hi = as_number(s["hi"], "sweep.hi");
        if (!s.contains("steps")) throw ConfigError("sweep.steps missing");
        sc.steps = as_integer(s["steps"], "sweep.steps");
        if (sc.steps < 2) throw ConfigError("sweep.steps: must be >= 2");
        if (s.contains("amplification")) {
            sc.amplification = as_number(s["amplification"], "sweep.amplification");
            if (!(sc.amplification > 0.0)) throw ConfigError("sweep.amplification: must be positive");
        }
        run.sweep = sc;
    }
    if (run.command == Command::perturb) {
        if (!has_perturb) throw ConfigError("perturb.delta missing (perturb block is required)");
        const auto& p = doc["perturb"];
        if (!p.is_object()) throw ConfigError("perturb: expected an object");
        require_known_keys(p, {"delta"}, "perturb");
        if (!p.contains("delta")) throw ConfigError("perturb.delta missing");
        PerturbConfig pc;
        pc.delta = as_coefficient_map(p["delta"], "perturb.delta");
        for (const auto& [i, _] : pc.delta)
            if (i < 2 || i > run.spec.order)
                throw ConfigError("perturb.delta." + std::to_string(i) + ": outside 2..order");
        run.perturb = pc;
    }
    if (run.command == Command::oracle_check) {
        OracleConfig oc;
        if (has_oracle) {
            const auto& o = doc["oracle"];
            if (!o.is_object()) throw ConfigError("oracle: expected an object");
            require_known_keys(o, {"dp_lo", "dp_hi", "step"}, "oracle");
            if (o.contains("dp_lo")) oc.dp_lo = as_number(o["dp_lo"], "oracle.dp_lo");
            if (o.contains("dp_hi")) oc.dp_hi = as_number(o["dp_hi"], "oracle.dp_hi");
            if (o.contains("step")) oc.step = as_number(o["step"], "oracle.step");
        }
        run.oracle = oc;
    }
    return run;
}

} // namespace anharm
