#pragma once

// Experiment configuration: a small TOML-style key-value tree (sections,
// scalars, single-line arrays) parsed into a schema-checked ExperimentConfig.
// Unknown keys are rejected and every default is materialized into the
// resolved document that lands in the output manifest.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "thresh/potential.hpp"
#include "thresh/radial_solver.hpp"

namespace thresh::config {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Value {
    std::variant<double, bool, std::string, std::vector<double>, std::vector<std::string>> v;
    int line = 0;
};

struct Node {
    std::map<std::string, Node> children;
    std::map<std::string, Value> values;

    const Node* child(const std::string& name) const;
    const Value* value(const std::string& name) const;
};

Node parse_string(const std::string& text);
Node parse_file(const std::string& path);

struct ExperimentConfig {
    std::string kind;
    std::string out_dir;
    bool plots = false;

    RadialPotential potential;
    int l = 0;
    int nodes = 0;
    SolverOptions solver;
    double probe_radius = 10.0;

    // sweep / classify / theorem1
    double e_min = 1e-5;
    double e_max = 1e-1;
    int sweep_points = 6;
    std::vector<double> lambdas; // explicit coupling schedule (optional)

    // greens / verify-bounds
    std::vector<double> k_values{1.0, 0.3, 0.1, 0.03, 0.01};
    int l_max = 48;
    double r_limit = 10.0;
    int samples = 200;

    // envelope / verify-bounds
    double beta = 10.0;
    std::optional<double> r0_tilde;
    std::optional<double> env_A;  // strength handed to the closed forms
    std::optional<double> env_R0;
    std::optional<double> env_a;  // coulomb rate for the F^c column
    double env_V0 = 1.0;          // inner height of the lower-bound tail
    double env_k = 0.1;

    // theorem1
    double t1_amplitude = 0.0;
    double t1_rate = 0.0;
    int t1_points = 5;

    // theorem4
    double t4_k_min = 1e-4;
    double t4_k_max = 1e-1;
    int t4_points = 13;
    double t4_trial_energy = 1e-4;

    std::string resolved_json; // full config with defaults, for the manifest
};

inline const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> kinds{"solve",    "sweep",         "greens",
                                                "envelope", "classify",      "verify-bounds",
                                                "theorem1", "theorem4"};
    return kinds;
}

// Parses, validates against the schema (unknown keys rejected), applies
// defaults and cross-checks values. kind_override, when nonempty, must agree
// with any kind key present in the file.
ExperimentConfig load_experiment_config(const std::string& path,
                                        const std::string& kind_override = "");
ExperimentConfig experiment_config_from_node(const Node& root,
                                             const std::string& kind_override = "");

} // namespace thresh::config
