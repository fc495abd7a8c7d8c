// trieig: Perron / Floquet / Hamilton-Jacobi eigenvalues of the controlled
// growth-fragmentation system dx/dt = (G + alpha(t) F) x, with the simplex
// geometry (eigenvector curve, ergodic set, bang-bang connections) behind
// the ergodic-control analysis.
//
// Subcommands: perron | floquet | geometry | hjb | hypotheses.
// Exit codes: 0 ok, 2 config/validation, 3 numerics, 4 geometry, 5 CFL.

#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "trieig/trieig.hpp"

namespace fs = std::filesystem;
using namespace trieig;

namespace {

struct GlobalOpts {
    std::string config_path;
    std::string out_dir;
    std::string format;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

ExperimentConfig resolve_config(const GlobalOpts& g) {
    ExperimentConfig cfg;
    if (!g.config_path.empty()) cfg = load_config(g.config_path);
    if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
    if (!g.format.empty()) cfg.format = g.format;
    if (g.seed_set) cfg.seed = g.seed;
    fs::create_directories(cfg.out_dir);
    return cfg;
}

json model_summary(const ExperimentConfig& cfg) {
    json j;
    if (cfg.raw_model) {
        j["kind"] = "raw";
    } else {
        j["kind"] = "running-example";
        j["tau1"] = cfg.tau1;
        j["tau2"] = cfg.tau2;
        j["beta2"] = cfg.beta2;
        j["beta3"] = cfg.beta3;
    }
    j["a"] = cfg.a;
    j["A"] = cfg.A;
    return j;
}

int cmd_perron(const ExperimentConfig& cfg, double alpha_max, int n_samples) {
    const ModelParams p = cfg.model();
    const fs::path out(cfg.out_dir);

    PerronCurve curve = sample_perron_curve(p, 1e-3, alpha_max, n_samples);
    const PerronOptimum opt = optimize_perron(p);
    curve.optimum = opt;
    write_perron_curve_csv(out / "perron_curve.csv", curve);

    json j;
    j["model"] = model_summary(cfg);
    j["alpha_star"] = opt.alpha_star;
    j["lambda_star"] = opt.lambda_star;
    j["interior"] = opt.interior;
    if (!opt.interior) {
        j["boundary"] = true;
        j["boundary_alpha"] = opt.boundary_alpha;
    }
    if (auto r = cfg.rates()) {
        j["classification"] =
            classify_monotonicity(r->tau1, r->tau2) == PerronMonotonicity::interior_max
                ? "interior-max"
                : "increasing-to-tau1";
    }
    j["curve_file"] = "perron_curve.csv";
    write_json(out / "perron.json", j);
    std::printf("perron: alpha* = %.6f lambda* = %.6f (%s)\n", opt.alpha_star, opt.lambda_star,
                opt.interior ? "interior" : "boundary");
    return 0;
}

int cmd_floquet(const ExperimentConfig& cfg, const std::string& shape, double amplitude,
                double theta, double alpha_mean, const std::vector<double>& eps_sweep) {
    const ModelParams p = cfg.model();
    const fs::path out(cfg.out_dir);

    double mean = alpha_mean;
    if (mean <= 0.0) {
        const PerronOptimum opt = optimize_perron(p);
        mean = opt.alpha_star;
    }

    std::function<double(double)> gamma;
    if (shape == "sine")
        gamma = [theta](double t) { return std::sin(2.0 * 3.14159265358979323846 * t / theta); };
    else if (shape == "square")
        gamma = [theta](double t) { return std::fmod(t, theta) < 0.5 * theta ? 1.0 : -1.0; };
    else if (shape == "const")
        gamma = [](double) { return 1.0; };
    else
        throw validation_error("floquet: control shape must be sine, square or const");

    auto control_at = [&](double eps) {
        std::vector<double> v(4096);
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = mean + eps * gamma(theta * static_cast<double>(i) / v.size());
        return ControlSignal::periodic(std::move(v), theta,
                                       shape == "square" ? Interp::piecewise_constant_left
                                                         : Interp::linear);
    };

    json j;
    j["model"] = model_summary(cfg);
    j["alpha_mean"] = mean;
    j["theta"] = theta;
    j["shape"] = shape;
    const FloquetResult base = lambda_F_full(p, control_at(amplitude));
    j["lambda_F"] = base.lambda_F;
    j["dominant_multiplier"] = base.dominant_multiplier;
    j["integrator"] = {{"steps", base.steps}, {"step_size", base.step_size}};
    j["lambda_P_at_mean"] = lambda_P(p, mean);
    j["first_directional"] = first_directional(p, mean, gamma, theta);
    j["second_directional"] = second_directional(p, mean, gamma, theta);
    {
        // finite-difference cross-checks at the configured amplitude scale
        const double e1 = 1e-4;
        const double fd1 =
            (lambda_F(p, control_at(e1)) - lambda_F(p, control_at(-e1))) / (2.0 * e1);
        const double e2 = 1e-2;
        const double fd2 = (lambda_F(p, control_at(e2)) - 2.0 * lambda_P(p, mean)
                            + lambda_F(p, control_at(-e2)))
                         / (e2 * e2);
        j["first_directional_fd"] = fd1;
        j["second_directional_fd"] = fd2;
    }
    write_json(out / "floquet.json", j);

    CsvWriter sweep(out / "floquet_eps_sweep.csv", {"eps", "lambda_F"});
    for (double e : eps_sweep) sweep.row({e, lambda_F(p, control_at(e))});
    std::printf("floquet: lambda_F = %.8f at eps = %.4f (mean %.4f)\n", base.lambda_F, amplitude,
                mean);
    return 0;
}

int cmd_geometry(const ExperimentConfig& cfg, bool fans, int probe_trials, bool connect_demo) {
    const ModelParams p = cfg.model();
    const fs::path out(cfg.out_dir);

    // eigenvector curve
    const Phi0Trace tr = trace_phi0(p, std::max(cfg.alpha_max, 1e3), 400);
    write_curve_csv(out / "phi0.csv", "alpha", tr.alphas, tr.points);

    // ergodic set and offsets
    const ErgodicSet set = build_ergodic_set(p, cfg.delta);
    write_curve_csv(out / "z0_gamma_a_A.csv", "k", {}, set.gamma_a_A);
    write_curve_csv(out / "z0_gamma_A_a.csv", "k", {}, set.gamma_A_a);
    auto dump_loop = [&](const ClosedRegion& r, const char* name) {
        CsvWriter w(out / name, {"x", "y"});
        for (const ChartPoint& c : r.loop()) w.row({c.x, c.y});
    };
    dump_loop(set.z_minus, "z_minus.csv");
    dump_loop(set.z_plus2, "z_plus2.csv");

    const StabilityReport stab = stability_check(p, set);

    // hypothesis report
    const HypothesisReport rep = h_checks(p, cfg.delta0);
    json j;
    j["model"] = model_summary(cfg);
    j["delta"] = cfg.delta;
    j["H1"] = {{"pass", rep.h1}, {"detail", rep.h1_detail}};
    j["H2"] = {{"pass", rep.h2}, {"detail", rep.h2_detail}};
    j["H3"] = {{"pass", rep.h3}, {"detail", rep.h3_detail}};
    j["H4"] = {{"pass", rep.h4}, {"detail", rep.h4_detail}};
    j["H5"] = {{"pass", rep.h5}, {"detail", rep.h5_detail}};
    j["all_pass"] = rep.all();
    j["stability"] = {{"pass", stab.stable},
                      {"worst_inner_product", stab.worst_value},
                      {"samples", stab.samples}};
    j["endpoint_errors"] = {set.endpoint_error_a, set.endpoint_error_A};

    if (probe_trials > 0) {
        const ProbeStats st = attractiveness_probe(p, set, probe_trials, cfg.seed);
        j["attractiveness"] = {{"trials", st.trials},
                               {"entered", st.entered},
                               {"exited_after_entry", st.exited_after_entry},
                               {"max_entry_time", st.max_entry_time},
                               {"mean_entry_time", st.mean_entry_time}};
        CsvWriter w(out / "entry_times.csv", {"trial", "entry_time"});
        for (std::size_t k = 0; k < st.entry_times.size(); ++k)
            w.row({static_cast<double>(k), st.entry_times[k]});
    }

    if (connect_demo) {
        const double as = optimize_perron(p).alpha_star;
        Vec3 z = perron_vector(p, as);
        Vec3 zp = 0.5 * (perron_vector(p, 0.5 * (p.a + as)) + perron_vector(p, 0.5 * (as + p.A)));
        zp = zp / dot(p.m, zp);
        const ConnectResult c = connect(p, set, z, zp);
        j["connect_demo"] = {{"T_first", c.T_first},
                             {"T_second", c.T_second},
                             {"alpha_first", c.alpha_first},
                             {"alpha_second", c.alpha_second},
                             {"landing_error", c.landing_error}};
    }
    write_json(out / "geometry.json", j);

    if (fans) {
        // families of constant-control trajectories from the simplex boundary
        // (charts figure data) and from the eigenvector curve (tunnels)
        for (auto [name, alpha] : {std::pair<const char*, double>{"fan_high.csv", p.A + cfg.delta},
                                   {"fan_low.csv", p.a - cfg.delta}}) {
            CsvWriter w(out / name, {"curve", "t", "y1", "y2", "y3"});
            int curve_id = 0;
            auto emit = [&](const Vec3& start) {
                const Vec3 target = perron_vector(p, alpha);
                try {
                    const TrajectoryRecord r = integrate_to_equilibrium(p, start, alpha, target);
                    for (std::size_t k = 0; k < r.points.size(); k += 20)
                        w.row({static_cast<double>(curve_id), r.times[k], r.points[k][0],
                               r.points[k][1], r.points[k][2]});
                } catch (const geometry_error&) {
                    // fan members that stall are skipped silently
                }
                ++curve_id;
            };
            for (int k = 1; k < 12; ++k) {
                const double t = k / 12.0;
                emit(project(p, Vec3{1.0 - t, t, 0.0}).y);
                emit(project(p, Vec3{0.0, 1.0 - t, t}).y);
                emit(project(p, Vec3{t, 0.0, 1.0 - t}).y);
            }
            for (std::size_t k = 40; k + 40 < tr.points.size(); k += 80) emit(tr.points[k]);
        }
    }
    std::printf("geometry: H1-H5 %s, stability worst %.2e, outputs in %s\n",
                rep.all() ? "pass" : "FAIL", stab.worst_value, cfg.out_dir.c_str());
    return rep.all() && stab.stable ? 0 : 4;
}

int cmd_hjb(const ExperimentConfig& cfg, const std::vector<double>& discounted,
            bool trajectory, bool particular) {
    const ModelParams p = cfg.model();
    const fs::path out(cfg.out_dir);

    json summary;
    summary["model"] = model_summary(cfg);
    summary["dy"] = cfg.dy;
    summary["dt"] = cfg.dt;
    summary["T"] = cfg.T;
    const PerronOptimum opt = optimize_perron(p);
    summary["lambda_P_star"] = opt.lambda_star;
    summary["alpha_star"] = opt.alpha_star;

    const HjbRun run = run_time_dependent(p, cfg.dy, cfg.dt, cfg.T);
    const SimplexGrid g(p, cfg.dy);
    write_grid_field_csv(out / "u_final.csv", g, run.field);
    write_json(out / "u_final.json", run_sidecar(run));
    {
        CsvWriter w(out / "probe_ratio.csv", {"t", "u_over_t"});
        for (std::size_t k = 0; k < run.probe_times.size(); ++k)
            w.row({run.probe_times[k], run.probe_ratio[k]});
    }
    summary["lambda_ratio"] = run.lambda_ratio;
    summary["lambda_slope"] = run.lambda_slope;
    summary["cfl_ratio"] = run.cfl_ratio;

    const EigenvectorExtract ex = extract_eigenvector(p, g, run);
    write_grid_field_csv(out / "ubar.csv", g, ex.ubar);
    write_segments_csv(out / "separation_line.csv", ex.separation);

    if (!discounted.empty()) {
        json darr = json::array();
        std::vector<HjbRun> runs(discounted.size());
        std::vector<std::thread> workers;
        for (std::size_t k = 0; k < discounted.size(); ++k)
            workers.emplace_back([&, k] { runs[k] = run_discounted(p, cfg.dy, discounted[k],
                                                                   cfg.dt); });
        for (auto& w : workers) w.join();
        for (std::size_t k = 0; k < runs.size(); ++k) {
            const HjbRun& r = runs[k];
            json je = run_sidecar(r);
            darr.push_back(je);
            char name[64];
            std::snprintf(name, sizeof name, "u_eps_%g.csv", discounted[k]);
            write_grid_field_csv(out / name, g, r.field);
        }
        summary["discounted"] = darr;
    }

    if (trajectory) {
        const Vec3 corner = project(p, Vec3{0.0, 1.0, 0.0}).y;
        const OptimalTrajectory otr =
            optimal_trajectory(p, g, run.field, corner, cfg.T, cfg.dt);
        write_trajectory_csv(out / "optimal_trajectory.csv", otr.record);
        CsvWriter w(out / "control_moving_average.csv", {"t", "alpha_avg"});
        for (std::size_t k = 0; k < otr.moving_average.size(); ++k)
            w.row({otr.record.times[k + 100], otr.moving_average[k]});
        summary["trajectory"] = {{"terminal_distance_to_e_star",
                                  norm(otr.record.back() - perron_vector(p, opt.alpha_star))},
                                 {"path_reward_average", otr.path_reward_average}};
    }

    if (particular) {
        const ParticularSolutionReport rep = verify_particular_solution(p);
        summary["particular_solution"] = {{"applicable", rep.applicable},
                                          {"subdomain", rep.subdomain},
                                          {"A_prime", rep.A_prime},
                                          {"positivity", rep.check_positivity},
                                          {"min_inner", rep.min_inner},
                                          {"residual", rep.check_residual},
                                          {"worst_residual", rep.worst_residual},
                                          {"levelsets", rep.check_levelsets},
                                          {"levelset_cosine", rep.levelset_cosine},
                                          {"pass", rep.all()}};
    }

    write_json(out / "hjb_summary.json", summary);
    std::printf("hjb: lambda_ratio = %.5f lambda_slope = %.5f (lambda_P* = %.5f)\n",
                run.lambda_ratio, run.lambda_slope, opt.lambda_star);
    return 0;
}

int cmd_hypotheses(const ExperimentConfig& cfg) {
    const ModelParams p = cfg.model();
    const HypothesisReport rep = h_checks(p, cfg.delta0);
    json j;
    j["model"] = model_summary(cfg);
    j["H1"] = {{"pass", rep.h1}, {"detail", rep.h1_detail}};
    j["H2"] = {{"pass", rep.h2}, {"detail", rep.h2_detail}};
    j["H3"] = {{"pass", rep.h3}, {"detail", rep.h3_detail}};
    j["H4"] = {{"pass", rep.h4}, {"detail", rep.h4_detail}};
    j["H5"] = {{"pass", rep.h5}, {"detail", rep.h5_detail}};
    j["all_pass"] = rep.all();
    write_json(fs::path(cfg.out_dir) / "hypotheses.json", j);

    // sign-criterion curve (appendix figure data): -criterion vs alpha
    CsvWriter w(fs::path(cfg.out_dir) / "h4_criterion.csv", {"alpha", "minus_criterion"});
    for (int i = 0; i < 200; ++i) {
        const double al = 1e-2 * std::pow(1e4, i / 199.0);
        w.row({al, -h4_criterion(p, al)});
    }
    std::printf("hypotheses: H1 %d H2 %d H3 %d H4 %d H5 %d\n", rep.h1, rep.h2, rep.h3, rep.h4,
                rep.h5);
    return rep.all() ? 0 : 4;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Perron / Floquet / Hamilton-Jacobi eigenvalues of a controlled "
                 "growth-fragmentation model"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "JSON experiment configuration");
    app.add_option("--out", g.out_dir, "output directory (overrides config)");
    app.add_option("--format", g.format, "csv|json (overrides config)");
    auto* seed_opt = app.add_option("--seed", g.seed, "RNG seed (overrides config)");

    auto* perron = app.add_subcommand("perron", "Perron eigenvalue curve and optimum");
    double alpha_max = 60.0;
    int n_samples = 400;
    perron->add_option("--alpha-max", alpha_max, "upper end of the sampled control range");
    perron->add_option("--samples", n_samples, "curve sample count");

    auto* floquet = app.add_subcommand("floquet", "Floquet eigenvalue of periodic controls");
    std::string shape = "square";
    double amplitude = 0.0, theta = 1.0, alpha_mean = -1.0;
    std::vector<double> eps_sweep{-0.5, -0.25, -0.1, 0.0, 0.1, 0.25, 0.5};
    floquet->add_option("--control", shape, "sine|square|const perturbation shape");
    floquet->add_option("--amplitude", amplitude, "perturbation amplitude eps");
    floquet->add_option("--theta", theta, "period");
    floquet->add_option("--alpha", alpha_mean, "mean control (default: alpha*)");
    floquet->add_option("--eps-sweep", eps_sweep, "amplitudes for the sweep CSV")->expected(-1);

    auto* geometry = app.add_subcommand("geometry", "eigenvector curve, ergodic set, hypotheses");
    bool fans = false, connect_demo = false;
    int probe_trials = 0;
    geometry->add_flag("--fans", fans, "emit constant-control trajectory fans");
    geometry->add_option("--probe", probe_trials, "attractiveness probe trials");
    geometry->add_flag("--connect-demo", connect_demo, "emit a bang-bang connection example");

    auto* hjb = app.add_subcommand("hjb", "upwind solves of the HJB eigenproblem");
    std::vector<double> discounted;
    bool trajectory = false, particular = false;
    hjb->add_option("--discounted", discounted, "epsilon values for discounted solves")
        ->expected(-1);
    hjb->add_flag("--trajectory", trajectory, "emit the feedback-optimal trajectory");
    hjb->add_flag("--particular-solution", particular, "verify the explicit solution");

    auto* hypo = app.add_subcommand("hypotheses", "standing-hypothesis report H1-H5");

    CLI11_PARSE(app, argc, argv);
    g.seed_set = seed_opt->count() > 0;

    try {
        const ExperimentConfig cfg = resolve_config(g);
        if (perron->parsed()) return cmd_perron(cfg, alpha_max, n_samples);
        if (floquet->parsed())
            return cmd_floquet(cfg, shape, amplitude, theta, alpha_mean, eps_sweep);
        if (geometry->parsed()) return cmd_geometry(cfg, fans, probe_trials, connect_demo);
        if (hjb->parsed()) return cmd_hjb(cfg, discounted, trajectory, particular);
        if (hypo->parsed()) return cmd_hypotheses(cfg);
    } catch (const validation_error& e) {
        std::fprintf(stderr, "error (config/validation): %s\n", e.what());
        return 2;
    } catch (const cfl_error& e) {
        std::fprintf(stderr, "error (CFL): %s\n", e.what());
        return 5;
    } catch (const geometry_error& e) {
        std::fprintf(stderr, "error (geometry): %s\n", e.what());
        return 4;
    } catch (const numerics_error& e) {
        std::fprintf(stderr, "error (numerics): %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
