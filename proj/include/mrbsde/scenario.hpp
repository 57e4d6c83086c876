#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mrbsde/ensemble.hpp"
#include "mrbsde/generator.hpp"
#include "mrbsde/losses.hpp"
#include "mrbsde/solution.hpp"

namespace mrbsde {

// Declarative experiment description; round-trips through JSON with
// unknown keys rejected.
struct ScenarioConfig {
    // grid
    double t_start = 0.0;
    double t_end = 1.0;
    std::size_t n_steps = 100;
    // particles
    std::size_t n_particles = 10000;
    std::uint64_t seed = 7;
    // terminal: constant | brownian | tanh-brownian
    std::string terminal_family = "brownian";
    double terminal_value = 0.0;  // constant family
    double terminal_scale = 1.0;
    // generator: zero | linear | quadratic-z
    std::string generator_family = "zero";
    double gen_ay = 0.0;   // coefficient of y
    double gen_amy = 0.0;  // coefficient of mean(mu_y)
    double gen_az = 0.0;   // coefficient of z
    double gen_amz = 0.0;  // coefficient of mean(mu_z)
    double gen_ak = 0.0;   // coefficient of k (separable part b)
    double gen_c0 = 0.0;   // constant offset
    double gen_qz = 0.0;   // coefficient of z^2 (quadratic-z family)
    double gen_alpha = 0.0;
    std::optional<double> gen_H_tilde;
    // loss: linear-band | shifted-linear | smooth-perturbed
    std::string loss_family = "linear-band";
    double loss_upper0 = 1.0, loss_upper1 = 0.0;  // L = x - (upper0 + upper1 t) [+ eps sin x]
    double loss_lower0 = -1.0, loss_lower1 = 0.0;
    double loss_eps = 0.1;  // smooth-perturbed only
    double loss_c = 1.0, loss_C = 1.0, loss_M = 0.0, loss_separation = 0.0;
    // resistance: none | identity | running-max | running-integral | density
    std::string resistance_kind = "none";
    double lambda_G = 1.0;
    // solver knobs
    double tol = 1e-4;
    int max_iter = 50;
    int basis_degree = 3;
    double ridge = 1e-8;
    double truncation_radius = 3.0;
    int p_norm = 2;
    // output
    std::string out_dir;
};

ScenarioConfig parse_config(const std::string& json_text);
std::string serialize_config(const ScenarioConfig& cfg);
ScenarioConfig load_config_file(const std::string& path);

// Built model objects for a config.
struct ScenarioModel {
    TimeGrid grid;
    ParticleEnsemble ensemble;
    std::vector<double> xi;
    std::vector<double> marks;  // per-particle terminal mark (= xi)
    LossPair losses;
    GeneratorSpec generator;
    std::optional<ResistanceSpec> resistance;
    bool density_mode = false;
};

ScenarioModel build_model(const ScenarioConfig& cfg);

}  // namespace mrbsde
