#include "mrbsde/scenario.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mrbsde {

namespace {

using nlohmann::json;

template <typename T>
void take(json& j, const char* key, T& slot) {
    if (auto it = j.find(key); it != j.end()) {
        slot = it->get<T>();
        j.erase(it);
    }
}

}  // namespace

ScenarioConfig parse_config(const std::string& json_text) {
    json j = json::parse(json_text);
    if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
    ScenarioConfig cfg;
    take(j, "t_start", cfg.t_start);
    take(j, "t_end", cfg.t_end);
    take(j, "n_steps", cfg.n_steps);
    take(j, "n_particles", cfg.n_particles);
    take(j, "seed", cfg.seed);
    take(j, "terminal_family", cfg.terminal_family);
    take(j, "terminal_value", cfg.terminal_value);
    take(j, "terminal_scale", cfg.terminal_scale);
    take(j, "generator_family", cfg.generator_family);
    take(j, "gen_ay", cfg.gen_ay);
    take(j, "gen_amy", cfg.gen_amy);
    take(j, "gen_az", cfg.gen_az);
    take(j, "gen_amz", cfg.gen_amz);
    take(j, "gen_ak", cfg.gen_ak);
    take(j, "gen_c0", cfg.gen_c0);
    take(j, "gen_qz", cfg.gen_qz);
    take(j, "gen_alpha", cfg.gen_alpha);
    if (auto it = j.find("gen_H_tilde"); it != j.end()) {
        cfg.gen_H_tilde = it->get<double>();
        j.erase(it);
    }
    take(j, "loss_family", cfg.loss_family);
    take(j, "loss_upper0", cfg.loss_upper0);
    take(j, "loss_upper1", cfg.loss_upper1);
    take(j, "loss_lower0", cfg.loss_lower0);
    take(j, "loss_lower1", cfg.loss_lower1);
    take(j, "loss_eps", cfg.loss_eps);
    take(j, "loss_c", cfg.loss_c);
    take(j, "loss_C", cfg.loss_C);
    take(j, "loss_M", cfg.loss_M);
    take(j, "loss_separation", cfg.loss_separation);
    take(j, "resistance_kind", cfg.resistance_kind);
    take(j, "lambda_G", cfg.lambda_G);
    take(j, "tol", cfg.tol);
    take(j, "max_iter", cfg.max_iter);
    take(j, "basis_degree", cfg.basis_degree);
    take(j, "ridge", cfg.ridge);
    take(j, "truncation_radius", cfg.truncation_radius);
    take(j, "p_norm", cfg.p_norm);
    take(j, "out_dir", cfg.out_dir);
    if (!j.empty())
        throw std::invalid_argument("config: unknown key '" + j.begin().key() + "'");
    return cfg;
}

std::string serialize_config(const ScenarioConfig& cfg) {
    json j;
    j["t_start"] = cfg.t_start;
    j["t_end"] = cfg.t_end;
    j["n_steps"] = cfg.n_steps;
    j["n_particles"] = cfg.n_particles;
    j["seed"] = cfg.seed;
    j["terminal_family"] = cfg.terminal_family;
    j["terminal_value"] = cfg.terminal_value;
    j["terminal_scale"] = cfg.terminal_scale;
    j["generator_family"] = cfg.generator_family;
    j["gen_ay"] = cfg.gen_ay;
    j["gen_amy"] = cfg.gen_amy;
    j["gen_az"] = cfg.gen_az;
    j["gen_amz"] = cfg.gen_amz;
    j["gen_ak"] = cfg.gen_ak;
    j["gen_c0"] = cfg.gen_c0;
    j["gen_qz"] = cfg.gen_qz;
    j["gen_alpha"] = cfg.gen_alpha;
    if (cfg.gen_H_tilde) j["gen_H_tilde"] = *cfg.gen_H_tilde;
    j["loss_family"] = cfg.loss_family;
    j["loss_upper0"] = cfg.loss_upper0;
    j["loss_upper1"] = cfg.loss_upper1;
    j["loss_lower0"] = cfg.loss_lower0;
    j["loss_lower1"] = cfg.loss_lower1;
    j["loss_eps"] = cfg.loss_eps;
    j["loss_c"] = cfg.loss_c;
    j["loss_C"] = cfg.loss_C;
    j["loss_M"] = cfg.loss_M;
    j["loss_separation"] = cfg.loss_separation;
    j["resistance_kind"] = cfg.resistance_kind;
    j["lambda_G"] = cfg.lambda_G;
    j["tol"] = cfg.tol;
    j["max_iter"] = cfg.max_iter;
    j["basis_degree"] = cfg.basis_degree;
    j["ridge"] = cfg.ridge;
    j["truncation_radius"] = cfg.truncation_radius;
    j["p_norm"] = cfg.p_norm;
    j["out_dir"] = cfg.out_dir;
    return j.dump(2);
}

ScenarioConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

namespace {

LossPair build_losses(const ScenarioConfig& cfg, const TimeGrid& grid) {
    LossPair lp;
    const double u0 = cfg.loss_upper0, u1 = cfg.loss_upper1;
    const double l0 = cfg.loss_lower0, l1 = cfg.loss_lower1;
    if (cfg.loss_family == "linear-band") {
        lp.L_eval = [u0, u1](double t, double x, double) { return x - (u0 + u1 * t); };
        lp.R_eval = [l0, l1](double t, double x, double) { return x - (l0 + l1 * t); };
        lp.c = lp.C = 1.0;
        lp.affine = true;
        lp.smooth = true;
    } else if (cfg.loss_family == "shifted-linear") {
        const double slope = cfg.loss_c > 0.0 ? cfg.loss_c : 1.0;
        lp.L_eval = [u0, u1, slope](double t, double x, double) {
            return slope * (x - (u0 + u1 * t));
        };
        lp.R_eval = [l0, l1, slope](double t, double x, double) {
            return slope * (x - (l0 + l1 * t));
        };
        lp.c = lp.C = slope;
        lp.affine = true;
        lp.smooth = true;
    } else if (cfg.loss_family == "smooth-perturbed") {
        const double eps = cfg.loss_eps;
        if (!(eps >= 0.0 && eps < 1.0))
            throw std::invalid_argument("config: loss_eps must lie in [0,1)");
        lp.L_eval = [u0, u1, eps](double t, double x, double) {
            return x - (u0 + u1 * t) + eps * std::sin(x);
        };
        lp.R_eval = [l0, l1, eps](double t, double x, double) {
            return x - (l0 + l1 * t) + eps * std::sin(x);
        };
        lp.c = 1.0 - eps;
        lp.C = 1.0 + eps;
        lp.affine = false;
        lp.smooth = true;
    } else {
        throw std::invalid_argument("config: unknown loss_family '" + cfg.loss_family + "'");
    }
    double sep = std::numeric_limits<double>::infinity();
    double m_bound = 0.0;
    const double slope = lp.c;
    const double wobble = cfg.loss_family == "smooth-perturbed" ? 2.0 * cfg.loss_eps : 0.0;
    for (double t : grid.nodes) {
        sep = std::min(sep, slope * ((u0 + u1 * t) - (l0 + l1 * t)) - wobble);
        m_bound = std::max(m_bound, std::abs(lp.L_eval(t, 0.0, 0.0)) +
                                        std::abs(lp.R_eval(t, 0.0, 0.0)));
    }
    if (!(sep > 0.0)) throw std::invalid_argument("config: loss band has no separation");
    lp.separation = cfg.loss_separation > 0.0 ? cfg.loss_separation : sep;
    lp.M_bound = cfg.loss_M > 0.0 ? cfg.loss_M : m_bound;
    return lp;
}

GeneratorSpec build_generator(const ScenarioConfig& cfg) {
    GeneratorSpec g;
    if (cfg.generator_family == "zero") {
        g.f = [](double, double, const EmpiricalMeasure&, double, const EmpiricalMeasure&,
                 double) { return 0.0; };
        g.regime = Regime::Lipschitz;
        g.lambda = 0.0;
        g.H2 = 0.0;
    } else if (cfg.generator_family == "linear") {
        const double ay = cfg.gen_ay, amy = cfg.gen_amy, az = cfg.gen_az, amz = cfg.gen_amz,
                     ak = cfg.gen_ak, c0 = cfg.gen_c0;
        g.f = [ay, amy, az, amz, ak, c0](double, double y, const EmpiricalMeasure& my, double z,
                                         const EmpiricalMeasure& mz, double k) {
            return ay * y + amy * my.mean() + az * z + amz * mz.mean() + ak * k + c0;
        };
        g.regime = Regime::Lipschitz;
        g.lambda = std::abs(ay) + std::abs(amy) + std::abs(az) + std::abs(amz) + std::abs(ak);
        g.H2 = std::abs(c0);
        if (ak != 0.0) {
            GeneratorSpec::Separable sep;
            sep.b = [ak](double, double, double, double k) { return ak * k; };
            g.separable = sep;
        }
    } else if (cfg.generator_family == "quadratic-z") {
        const double qz = cfg.gen_qz, ak = cfg.gen_ak, c0 = cfg.gen_c0;
        g.f = [qz, ak, c0](double, double, const EmpiricalMeasure&, double z,
                           const EmpiricalMeasure&, double k) {
            return qz * z * z + ak * k + c0;
        };
        g.regime = Regime::Quadratic;
        g.lambda = std::max(std::abs(qz) + std::abs(ak), 1e-6);
        g.alpha = cfg.gen_alpha;
        g.H2 = std::abs(c0);
        g.H_tilde = cfg.gen_H_tilde ? *cfg.gen_H_tilde : std::abs(c0);
        if (ak != 0.0) {
            GeneratorSpec::Separable sep;
            sep.b = [ak](double, double, double, double k) { return ak * k; };
            g.separable = sep;
        }
    } else {
        throw std::invalid_argument("config: unknown generator_family '" + cfg.generator_family +
                                    "'");
    }
    return g;
}

}  // namespace

ScenarioModel build_model(const ScenarioConfig& cfg) {
    ScenarioModel m;
    m.grid = make_grid(cfg.t_start, cfg.t_end, cfg.n_steps);
    m.ensemble = simulate_brownian(m.grid, cfg.n_particles, cfg.seed);

    m.xi.resize(cfg.n_particles);
    const std::size_t n = m.grid.n_steps;
    if (cfg.terminal_family == "constant") {
        for (auto& v : m.xi) v = cfg.terminal_value;
    } else if (cfg.terminal_family == "brownian") {
        for (std::size_t p = 0; p < cfg.n_particles; ++p)
            m.xi[p] = cfg.terminal_scale * m.ensemble.brownian(p, n);
    } else if (cfg.terminal_family == "tanh-brownian") {
        for (std::size_t p = 0; p < cfg.n_particles; ++p)
            m.xi[p] = std::tanh(cfg.terminal_scale * m.ensemble.brownian(p, n));
    } else {
        throw std::invalid_argument("config: unknown terminal_family '" + cfg.terminal_family +
                                    "'");
    }
    m.marks = m.xi;

    m.losses = build_losses(cfg, m.grid);
    m.generator = build_generator(cfg);

    if (cfg.resistance_kind == "none") {
        m.resistance.reset();
    } else if (cfg.resistance_kind == "density") {
        m.density_mode = true;
    } else {
        ResistanceSpec r;
        r.lambda_G = cfg.lambda_G;
        if (cfg.resistance_kind == "identity")
            r.kind = ResistanceKind::Identity;
        else if (cfg.resistance_kind == "running-max")
            r.kind = ResistanceKind::RunningMax;
        else if (cfg.resistance_kind == "running-integral")
            r.kind = ResistanceKind::RunningIntegral;
        else
            throw std::invalid_argument("config: unknown resistance_kind '" +
                                        cfg.resistance_kind + "'");
        m.resistance = r;
    }
    return m;
}

}  // namespace mrbsde
