// Command-line front end: posterior sampling, the contraction-rate study,
// spline-to-network compilation, and the packing lower-bound demo.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bpinn/compiler.hpp"
#include "bpinn/experiments.hpp"
#include "bpinn/posterior.hpp"

namespace {

using nlohmann::json;

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    json cfg;
    in >> cfg;
    return cfg;
}

template <typename T>
T section_get(const json& cfg, const std::string& section, const std::string& key, T fallback) {
    if (cfg.contains(section) && cfg[section].contains(key))
        return cfg[section][key].get<T>();
    return fallback;
}

bpinn::PriorConfig prior_from_config(const json& cfg) {
    bpinn::PriorConfig p;
    p.lambda_W = section_get(cfg, "prior", "lambda_W", p.lambda_W);
    p.lambda_S = section_get(cfg, "prior", "lambda_S", p.lambda_S);
    p.lambda_B = section_get(cfg, "prior", "lambda_B", p.lambda_B);
    p.depth = section_get(cfg, "prior", "depth", p.depth);
    return p;
}

bpinn::McmcConfig mcmc_from_config(const json& cfg) {
    bpinn::McmcConfig m;
    if (cfg.contains("mcmc") && cfg["mcmc"].contains("move_probs")) {
        const auto v = cfg["mcmc"]["move_probs"].get<std::vector<double>>();
        if (v.size() != 4) throw std::runtime_error("mcmc.move_probs needs 4 entries");
        std::copy(v.begin(), v.end(), m.move_probs.begin());
    }
    m.step = section_get(cfg, "mcmc", "step", m.step);
    m.bound_step = section_get(cfg, "mcmc", "bound_step", m.bound_step);
    m.iterations = section_get(cfg, "mcmc", "iterations", m.iterations);
    m.burn_in = section_get(cfg, "mcmc", "burn_in", m.burn_in);
    m.thinning = section_get(cfg, "mcmc", "thinning", m.thinning);
    m.chains = section_get(cfg, "mcmc", "chains", m.chains);
    m.seed = section_get(cfg, "mcmc", "seed", m.seed);
    m.warm_width = section_get(cfg, "mcmc", "warm_width", m.warm_width);
    m.warm_population = section_get(cfg, "mcmc", "warm_population", m.warm_population);
    m.warm_iterations = section_get(cfg, "mcmc", "warm_iterations", m.warm_iterations);
    m.warm_step = section_get(cfg, "mcmc", "warm_step", m.warm_step);
    m.warm_bound = section_get(cfg, "mcmc", "warm_bound", m.warm_bound);
    if (cfg.contains("mcmc") && cfg["mcmc"].contains("m_grid"))
        m.m_grid = cfg["mcmc"]["m_grid"].get<std::vector<double>>();
    return m;
}

json summary_to_json(const bpinn::PosteriorSummary& s) {
    json j;
    j["mean_pop_loss"] = s.mean_pop_loss;
    j["quantile_probs"] = s.quantile_probs;
    j["loss_quantiles"] = s.loss_quantiles;
    j["epsilon_n"] = s.epsilon_n;
    j["m_grid"] = s.m_grid;
    j["mass_exceeding"] = s.mass_exceeding;
    j["sieve_violation_fraction"] = s.sieve_violation_fraction;
    j["retained"] = s.retained;
    json acc;
    const char* names[4] = {"weight_walk", "mask_flip", "width_move", "bound_move"};
    for (int i = 0; i < 4; ++i) {
        acc[names[i]] = {{"attempts", s.move_attempts[static_cast<std::size_t>(i)]},
                         {"accepts", s.move_accepts[static_cast<std::size_t>(i)]}};
    }
    j["acceptance"] = acc;
    j["mean_values"] = s.mean_values;
    return j;
}

int run_sample(const json& cfg, const std::string& preset, int n, std::uint64_t seed,
               const std::string& out_path) {
    const bpinn::EllipticProblem problem = bpinn::problem_preset(preset);
    bpinn::PriorConfig prior = prior_from_config(cfg);
    bpinn::McmcConfig mcmc = mcmc_from_config(cfg);
    mcmc.seed = seed;
    bpinn::LossConfig loss;
    loss.lambda = section_get(cfg, "problem", "lambda", loss.lambda);
    const bpinn::Dataset data = bpinn::generate_dataset(problem, n, seed);
    const bpinn::PosteriorSummary s = bpinn::run_chain(mcmc, prior, data, problem, loss);

    json out = summary_to_json(s);
    out["preset"] = preset;
    out["n"] = n;
    out["seed"] = seed;
    std::ofstream jf(out_path + ".json");
    if (!jf) throw std::runtime_error("cannot write " + out_path + ".json");
    jf << out.dump(2) << "\n";

    bpinn::Table t;
    t.name = "samples";
    t.columns = {"iter", "W", "S", "B", "loglik", "pop_loss"};
    for (const auto& r : s.records)
        t.rows.push_back({static_cast<double>(r.iter), static_cast<double>(r.width),
                          static_cast<double>(r.sparsity), r.bound, r.log_lik, r.pop_loss});
    bpinn::emit_results({t}, out_path + ".csv", "csv", seed, cfg);
    std::printf("sample: %zu retained draws, posterior-mean loss %.6g -> %s.{json,csv}\n",
                s.retained, s.mean_pop_loss, out_path.c_str());
    return 0;
}

int run_rate_study(const json& cfg, const std::string& preset, const std::string& out_path,
                   const std::string& format) {
    const bpinn::EllipticProblem problem = bpinn::problem_preset(preset);
    bpinn::PriorConfig prior = prior_from_config(cfg);
    bpinn::McmcConfig mcmc = mcmc_from_config(cfg);
    bpinn::LossConfig loss;
    bpinn::SieveSchedule sieve;
    sieve.C_W = section_get(cfg, "sieve", "C_W", sieve.C_W);
    sieve.C_S = section_get(cfg, "sieve", "C_S", sieve.C_S);
    sieve.C_B = section_get(cfg, "sieve", "C_B", sieve.C_B);
    std::vector<long> n_grid{256, 512, 1024, 2048, 4096};
    if (cfg.contains("problem") && cfg["problem"].contains("n_grid"))
        n_grid = cfg["problem"]["n_grid"].get<std::vector<long>>();
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    if (cfg.contains("mcmc") && cfg["mcmc"].contains("seeds"))
        seeds = cfg["mcmc"]["seeds"].get<std::vector<std::uint64_t>>();

    const bpinn::RateStudyResult res =
        bpinn::rate_study(problem, n_grid, seeds, mcmc, prior, loss, sieve);
    bpinn::emit_results({res.runs, res.medians}, out_path, format, mcmc.seed, cfg);
    std::printf("rate-study: fitted slope %.4f (theoretical %.4f)%s -> %s\n", res.fitted_slope,
                res.theoretical_slope, res.any_failed ? " [some cells FAILED]" : "",
                out_path.c_str());
    return res.any_failed ? 1 : 0;
}

int run_compile_spline(int order, int segments, int dim, const std::string& target,
                       const std::string& out_path, bool verify) {
    bpinn::SplineSpec spec{order, segments, dim};
    spec.validate();
    auto f = [&](std::span<const double> x) {
        double v = 1.0;
        if (target == "sin") {
            for (double xa : x) v *= std::sin(2.0 * std::numbers::pi * xa);
        } else if (target == "gaussian") {
            double q = 0.0;
            for (double xa : x) q += (xa - 0.5) * (xa - 0.5);
            v = std::exp(-8.0 * q);
        } else {
            throw std::runtime_error("unknown target function: " + target);
        }
        return v;
    };
    const bpinn::SplineCoeffs coeffs = bpinn::quasi_interpolant(f, spec);
    const bpinn::GadgetCoefficients gadgets = bpinn::derive_gadgets();
    const bpinn::NetworkParams net = bpinn::compile_spline_network(coeffs, gadgets);

    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << bpinn::to_json(net).dump() << "\n";

    const bpinn::SizeReport rep = bpinn::size_report(net, spec, 4.0);
    std::printf("compile-spline: depth %d, max width %d, sparsity %zu / %zu, max|w| %.4g -> %s\n",
                rep.depth, rep.max_width, rep.sparsity, rep.total_params, rep.max_abs_weight,
                out_path.c_str());
    if (verify) {
        bpinn::Evaluator ev(net);
        std::mt19937_64 rng(12345);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        double worst = 0.0;
        std::vector<double> x(static_cast<std::size_t>(dim));
        for (int t = 0; t < 1000; ++t) {
            for (auto& xa : x) xa = unif(rng);
            const double want = bpinn::spline_eval(coeffs, x).value;
            const double got = ev.forward_value(x);
            worst = std::max(worst, std::abs(got - want) / (1.0 + std::abs(want)));
        }
        std::printf("compile-spline: verify max relative gap %.3g over 1000 points\n", worst);
        if (worst > 1e-6) {
            std::printf("compile-spline: VERIFICATION FAILED\n");
            return 1;
        }
    }
    return 0;
}

int run_packing_demo(const json& cfg, const std::string& out_path, const std::string& format) {
    std::vector<int> m_grid{2, 3, 4};
    if (cfg.contains("packing") && cfg["packing"].contains("m_grid"))
        m_grid = cfg["packing"]["m_grid"].get<std::vector<int>>();
    bpinn::PackingConfig pc;
    pc.dim = section_get(cfg, "packing", "dim", pc.dim);
    pc.amplitude = section_get(cfg, "packing", "amplitude", pc.amplitude);
    pc.beta = section_get(cfg, "packing", "beta", pc.beta);
    pc.num_codes = section_get(cfg, "packing", "num_codes", pc.num_codes);
    pc.seed = section_get(cfg, "packing", "seed", pc.seed);
    const long n1 = section_get<long>(cfg, "packing", "n1", 1000);
    const long n2 = section_get<long>(cfg, "packing", "n2", 1000);
    const bpinn::EllipticProblem problem = bpinn::make_packing_problem(pc.dim, pc.beta);

    bpinn::Table summary;
    summary.name = "packing_summary";
    summary.columns = {"m", "min_interior_sq", "max_boundary_sq", "kl_n1"};
    std::vector<double> ms, seps;
    std::vector<bpinn::Table> tables;
    for (int m : m_grid) {
        pc.m = m;
        const bpinn::Packing packing = bpinn::build_packing(pc);
        const bpinn::PackingTable pt = bpinn::packing_separation_and_kl(packing, problem, n1, n2);
        double max_boundary = 0.0, kl0 = 0.0;
        for (const auto& row : pt.pairs.rows) {
            max_boundary = std::max(max_boundary, row[4]);
            kl0 = std::max(kl0, row[5]);
        }
        summary.rows.push_back({static_cast<double>(m), pt.min_interior_sq, max_boundary, kl0});
        bpinn::Table per = pt.pairs;
        per.name = "pairs_m" + std::to_string(m);
        tables.push_back(per);
        ms.push_back(static_cast<double>(m));
        seps.push_back(pt.min_interior_sq);
    }
    tables.push_back(summary);
    bpinn::emit_results(tables, out_path, format, pc.seed, cfg);
    const double slope = bpinn::loglog_slope(ms, seps);
    std::printf("packing-demo: min-separation^2 slope vs m: %.4f (theoretical %.4f) -> %s\n", slope,
                -(2.0 * pc.beta - 4.0), out_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian physics-informed sigma3-network toolkit"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file");

    auto* sample = app.add_subcommand("sample", "Posterior sampling on one dataset");
    std::string preset = "sin-1d";
    int n = 256;
    std::uint64_t seed = 1;
    std::string out_path = "results";
    sample->add_option("--preset", preset, "Problem preset");
    sample->add_option("--n", n, "Observations per region");
    sample->add_option("--seed", seed, "RNG seed");
    sample->add_option("--output", out_path, "Output path stem");

    auto* rate = app.add_subcommand("rate-study", "Loss-vs-n contraction study");
    std::string rate_preset = "sin-1d", rate_out = "rate_study.csv", rate_fmt = "csv";
    rate->add_option("--preset", rate_preset, "Problem preset");
    rate->add_option("--output", rate_out, "Output path");
    rate->add_option("--format", rate_fmt, "csv or json");

    auto* comp = app.add_subcommand("compile-spline", "Compile a spline fit into a network");
    int order = 4, segments = 8, dim = 1;
    std::string target = "sin", comp_out = "network.json";
    bool verify = false;
    comp->add_option("--order", order, "Spline order k (k-1 divisible by 3)");
    comp->add_option("--segments", segments, "Partition size l");
    comp->add_option("--dim", dim, "Spatial dimension");
    comp->add_option("--target", target, "Target function (sin|gaussian)");
    comp->add_option("--output", comp_out, "Network JSON path");
    comp->add_flag("--verify", verify, "Check the network against the spline");

    auto* pack = app.add_subcommand("packing-demo", "Separated-hypotheses packing tables");
    std::string pack_out = "packing.csv", pack_fmt = "csv";
    pack->add_option("--output", pack_out, "Output path");
    pack->add_option("--format", pack_fmt, "csv or json");

    CLI11_PARSE(app, argc, argv);
    try {
        const json cfg = load_config(config_path);
        if (sample->parsed()) return run_sample(cfg, preset, n, seed, out_path);
        if (rate->parsed()) return run_rate_study(cfg, rate_preset, rate_out, rate_fmt);
        if (comp->parsed())
            return run_compile_spline(order, segments, dim, target, comp_out, verify);
        if (pack->parsed()) return run_packing_demo(cfg, pack_out, pack_fmt);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
