#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "trieig/errors.hpp"
#include "trieig/model.hpp"

namespace trieig {

/// One experiment: a model (running-example rates or raw matrices), control
/// bounds, numerical parameters, and output settings. Defaults reproduce
/// the reference parameter set (tau1=0.5, tau2=5, beta2=1, beta3=2, a=1,
/// A=6, dy=1e-2, dt=1e-3, T=10).
struct ExperimentConfig {
    // model
    bool raw_model = false;
    double tau1 = 0.5, tau2 = 5.0, beta2 = 1.0, beta3 = 2.0;
    Mat3 G, F;             // used when raw_model
    Vec3 m{1.0, 2.0, 3.0}; // used when raw_model
    double a = 1.0, A = 6.0;

    // numerics
    double dy = 1e-2;
    double dt = 1e-3;
    double T = 10.0;
    std::vector<double> epsilons{0.1, 0.05, 0.01};
    double delta = 0.1;
    double delta0 = 0.1;
    double alpha_max = 60.0;
    double theta = 1.0;
    std::uint64_t seed = 42;

    // outputs
    std::string out_dir = "out";
    std::string format = "csv";

    ModelParams model() const {
        if (!raw_model) return build_running_example(tau1, tau2, beta2, beta3, a, A);
        ModelParams p;
        p.G = G;
        p.F = F;
        p.m = m;
        p.a = a;
        p.A = A;
        validate(p);
        return p;
    }

    std::optional<RunningExampleRates> rates() const {
        if (raw_model) return std::nullopt;
        return RunningExampleRates{tau1, tau2, beta2, beta3};
    }
};

namespace detail {

inline Mat3 mat3_from_json(const nlohmann::ordered_json& j) {
    Mat3 M;
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) M(i, k) = j.at(i).at(k).get<double>();
    return M;
}

} // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::ordered_json& j) {
    ExperimentConfig c;
    try {
        if (j.contains("model")) {
            const auto& m = j["model"];
            const std::string kind = m.value("kind", "running-example");
            if (kind == "running-example") {
                c.tau1 = m.value("tau1", c.tau1);
                c.tau2 = m.value("tau2", c.tau2);
                c.beta2 = m.value("beta2", c.beta2);
                c.beta3 = m.value("beta3", c.beta3);
            } else if (kind == "raw") {
                c.raw_model = true;
                c.G = detail::mat3_from_json(m.at("G"));
                c.F = detail::mat3_from_json(m.at("F"));
                for (int i = 0; i < 3; ++i) c.m[i] = m.at("m").at(i).get<double>();
            } else {
                throw validation_error("config: model.kind must be running-example or raw");
            }
        }
        if (j.contains("bounds")) {
            c.a = j["bounds"].value("a", c.a);
            c.A = j["bounds"].value("A", c.A);
        }
        if (j.contains("numerics")) {
            const auto& n = j["numerics"];
            c.dy = n.value("dy", c.dy);
            c.dt = n.value("dt", c.dt);
            c.T = n.value("T", c.T);
            c.delta = n.value("delta", c.delta);
            c.delta0 = n.value("delta0", c.delta0);
            c.alpha_max = n.value("alpha_max", c.alpha_max);
            c.theta = n.value("theta", c.theta);
            c.seed = n.value("seed", c.seed);
            if (n.contains("epsilons")) c.epsilons = n["epsilons"].get<std::vector<double>>();
        }
        if (j.contains("outputs")) {
            c.out_dir = j["outputs"].value("dir", c.out_dir);
            c.format = j["outputs"].value("format", c.format);
        }
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(std::string("config: malformed JSON document: ") + e.what());
    }
    if (c.format != "csv" && c.format != "json")
        throw validation_error("config: format must be csv or json");
    return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("config: cannot open " + path.string());
    nlohmann::ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(std::string("config: parse error: ") + e.what());
    }
    return config_from_json(j);
}

} // namespace trieig
