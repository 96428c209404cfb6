#pragma once

// execute(config): runs one command and writes its artifacts to config.out_dir.
// Every artifact carries the config hash, version, quadrature spec and RNG.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "emlab/acceptance.hpp"
#include "emlab/config.hpp"
#include "emlab/csv.hpp"
#include "emlab/harness.hpp"
#include "emlab/landscape.hpp"
#include "emlab/population_em.hpp"
#include "emlab/rng.hpp"
#include "emlab/sample_em.hpp"

namespace emlab {

namespace cli_detail {

namespace fs = std::filesystem;

struct Context {
    const ExperimentConfig& cfg;
    std::string hash;
    fs::path dir;
    std::ostream& log;
};

inline json provenance(const Context& cx) {
    json p;
    p["emlab_version"] = kVersion;
    p["config_hash"] = cx.hash;
    p["quadrature"] = quadrature_text(cx.cfg.quadrature);
    p["generator"] = kGeneratorName;
    p["config"] = to_json(cx.cfg);
    return p;
}

inline void stamp(CsvWriter& w, const Context& cx) {
    w.meta("emlab_version", kVersion);
    w.meta("config_hash", cx.hash);
    w.meta("quadrature", quadrature_text(cx.cfg.quadrature));
    w.meta("generator", kGeneratorName);
    w.meta("config", serialize_config(cx.cfg));
}

inline std::ofstream open_out(const Context& cx, const std::string& name) {
    std::ofstream f(cx.dir / name, std::ios::binary);
    if (!f) throw DomainError("cannot write " + (cx.dir / name).string());
    cx.log << "wrote " << (cx.dir / name).string() << '\n';
    return f;
}

inline void write_json(const Context& cx, const std::string& name, json body) {
    body["provenance"] = provenance(cx);
    auto f = open_out(cx, name);
    f << body.dump(2) << '\n';
}

inline json state_json(const ABState& s) { return {{"a", detail::vec_json(s.a)}, {"b", detail::vec_json(s.b)}}; }

inline json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline void write_trajectory(const Context& cx, const std::string& name, const Trajectory& tr) {
    auto f = open_out(cx, name);
    CsvWriter w(f);
    stamp(w, cx);
    w.meta("coordinates", "working (centered, whitened when sigma is given)");
    w.header({"t", "norm_a", "dist_b", "beta", "sin_beta", "p", "ratio_a", "ratio_b", "ratio_sin"});
    for (const auto& r : tr.steps)
        w.row({double(r.t), r.norm_a, r.dist_b, r.beta, r.sin_beta, r.p, r.ratio_a, r.ratio_b, r.ratio_sin});
}

// Draws in the configured coordinates, then maps them to working ones.
inline Dataset make_dataset(const ExperimentConfig& cfg, Eigen::Index n, std::uint64_t seed) {
    const auto& m = cfg.model;
    const MixtureModel work = m.working();
    if (!m.sigma && !m.mu1) return sample_mixture(work, n, seed);
    const int d = m.d;
    const Vec ts = m.theta_star ? *m.theta_star : Vec(0.5 * (*m.mu2 - *m.mu1));
    const Mat L = m.sigma ? Mat(Eigen::LLT<Mat>(*m.sigma).matrixL()) : Mat(Mat::Identity(d, d));
    auto rng = make_rng(seed, 0);
    std::normal_distribution<double> n01;
    std::bernoulli_distribution coin(0.5);
    DataMatrix centered(n, d);
    Vec w(d);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double z = coin(rng) ? 1.0 : -1.0;
        for (int j = 0; j < d; ++j) w[j] = n01(rng);
        centered.row(i) = (z * ts + L * w).transpose();  // y - c
    }
    Dataset ds{m.sigma ? whiten(centered, *m.sigma) : centered, seed, work};
    return ds;
}

inline void write_dataset(const Context& cx, const Dataset& ds) {
    auto f = open_out(cx, "dataset.csv");
    CsvWriter w(f);
    stamp(w, cx);
    w.meta("seed", std::to_string(ds.seed));
    w.meta("n", std::to_string(ds.n()));
    w.meta("d", std::to_string(ds.dim()));
    std::string ts;
    for (int j = 0; j < ds.dim(); ++j) ts += (j ? " " : "") + fmt_double(ds.model.theta_star[j]);
    w.meta("theta_star", ts);
    w.meta("coordinates", "working (centered, whitened when sigma is given)");
    std::vector<std::string> cols;
    for (int j = 0; j < ds.dim(); ++j) cols.push_back("y" + std::to_string(j + 1));
    w.header(cols);
    std::vector<double> row(ds.dim());
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
        for (int j = 0; j < ds.dim(); ++j) row[j] = ds.data(i, j);
        w.row(row);
    }
}

inline json trajectory_summary(const Trajectory& tr, const MixtureModel& model, const ABState& init) {
    json s;
    s["iterations"] = static_cast<int>(tr.steps.size());
    s["converged"] = tr.converged;
    s["final_state"] = state_json(tr.final_state);
    s["predicted_limit"] = to_string(classify_limit(init, model));
    const auto& last = tr.steps.back();
    s["final_norm_a"] = num(last.norm_a);
    s["final_dist_b"] = num(last.dist_b);
    return s;
}

inline json contraction_json(const Trajectory& tr) {
    if (tr.steps.size() < 5) return nullptr;
    const auto c = contraction_estimate(tr);
    return {{"kappa_a", num(c.kappa_a)}, {"kappa_b", num(c.kappa_b)}, {"kappa_sin", num(c.kappa_sin)},
            {"c_b", num(c.c_b)},         {"T0", c.T0},                {"valid", c.valid}};
}

inline int cmd_run_population(const Context& cx) {
    const auto& cfg = cx.cfg;
    const auto model = cfg.model.working();
    const auto init = cfg.working_init();
    const bool m1 = cfg.model.kind == "model1";
    const auto tr = m1 ? run_model1(init.b, model, cfg.stop, cfg.quadrature) : run(init, model, cfg.stop, cfg.quadrature);
    write_trajectory(cx, "trajectory.csv", tr);
    json s = trajectory_summary(tr, model, init);
    if (!m1) {
        const auto b = a_priori_bounds(init, model);
        s["a_priori_bounds"] = {{"c_U1", b.c_U1}, {"c_U2", b.c_U2}, {"c_U3", b.c_U3}};
    }
    s["contraction"] = contraction_json(tr);
    write_json(cx, "summary.json", s);
    return 0;
}

inline int cmd_run_sample(const Context& cx) {
    const auto& cfg = cx.cfg;
    const auto init = cfg.working_init();
    const auto ds = make_dataset(cfg, cfg.n, cfg.seed);
    if (cfg.export_dataset) write_dataset(cx, ds);
    const bool m1 = cfg.model.kind == "model1";
    const auto tr = m1 ? run_sample_model1(init.b, ds, cfg.stop) : run_sample(init, ds, cfg.stop);
    write_trajectory(cx, "trajectory.csv", tr);
    json s = trajectory_summary(tr, ds.model, init);
    if (!m1) s["sample_loglik"] = num(sample_loglik(from_ab(tr.final_state, ds.model), ds));
    write_json(cx, "summary.json", s);
    return 0;
}

inline int cmd_coupled(const Context& cx) {
    const auto& cfg = cx.cfg;
    const auto model = cfg.model.working();
    const auto init = cfg.working_init();
    const auto ds = make_dataset(cfg, cfg.n, cfg.seed);
    if (cfg.export_dataset) write_dataset(cx, ds);
    const auto run = detail::couple(detail::population_fixed(init, model, cfg.T, cfg.quadrature), init, ds, cfg.T);
    {
        auto f = open_out(cx, "coupled.csv");
        CsvWriter w(f);
        stamp(w, cx);
        w.header({"t", "sample_norm_a", "sample_dist_b", "population_norm_a", "population_dist_b", "discrepancy"});
        for (int t = 0; t <= cfg.T; ++t) {
            const auto& s = run.sample.steps[t];
            const auto& p = run.population.steps[t];
            w.row({double(t), s.norm_a, s.dist_b, p.norm_a, p.dist_b, distance(s.state, p.state)});
        }
    }
    write_json(cx, "summary.json",
               {{"n", cfg.n},
                {"T", cfg.T},
                {"sup_discrepancy", num(run.sup_discrepancy)},
                {"tail_discrepancy", num(run.tail_discrepancy)},
                {"final_error", num(run.final_error)}});
    return 0;
}

inline int cmd_landscape(const Context& cx) {
    const auto& cfg = cx.cfg;
    const auto model = cfg.model.working();
    const int d = model.dim;
    const bool m1 = cfg.model.kind == "model1";
    const auto kind = m1 ? LandscapeModel::Model1 : LandscapeModel::Model2;
    const Vec that = model.theta_star / model.theta_star.norm();
    ABState base{Vec::Zero(d), model.theta_star};
    if (cfg.init_b) base = cfg.working_init();
    auto unit = [](const Vec& v, const char* f) {
        if (v.norm() == 0.0) throw ConfigError(f, "direction must be nonzero");
        return Vec(v / v.norm());
    };
    const Vec da = cfg.landscape.dir_a ? unit(*cfg.landscape.dir_a, "landscape.dir_a") : that;
    const Vec db = cfg.landscape.dir_b ? unit(*cfg.landscape.dir_b, "landscape.dir_b") : that;
    const int P = cfg.landscape.points;
    const double span = cfg.landscape.span;
    {
        auto f = open_out(cx, "landscape.csv");
        CsvWriter w(f);
        stamp(w, cx);
        w.meta("slice", m1 ? "theta = base.b + a_offset*dir_a + b_offset*dir_b"
                           : "a = base.a + a_offset*dir_a, b = base.b + b_offset*dir_b");
        w.header({"a_offset", "b_offset", "G"});
        for (int i = 0; i < P; ++i)
            for (int j = 0; j < P; ++j) {
                const double sa = -span + 2.0 * span * i / (P - 1);
                const double sb = -span + 2.0 * span * j / (P - 1);
                ABState x = base;
                if (m1) {
                    x.a.setZero();
                    x.b += sa * da + sb * db;
                } else {
                    x.a += sa * da;
                    x.b += sb * db;
                }
                w.row({sa, sb, landscape_value(x, model, kind, cfg.quadrature)});
            }
    }
    std::vector<std::pair<std::string, ABState>> pts;
    const Vec z = Vec::Zero(d);
    if (m1) {
        pts = {{"origin", {z, z}}, {"plus_theta", {z, model.theta_star}}, {"minus_theta", {z, -model.theta_star}}};
    } else {
        pts = {{"truth", {z, model.theta_star}}, {"truth_swapped", {z, -model.theta_star}}, {"midpoint", {z, z}}};
    }
    json arr = json::array();
    for (const auto& [name, x] : pts) {
        const auto rep = classify_stationary(x, model, kind, {}, cfg.quadrature);
        arr.push_back({{"point", name},
                       {"state", state_json(rep.point)},
                       {"grad_norm", num(rep.grad_norm)},
                       {"hessian_eigs", rep.hessian_eigs},
                       {"classification", to_string(rep.classification)},
                       {"higher_order", rep.higher_order}});
    }
    write_json(cx, "stationary.json", {{"model", cfg.model.kind}, {"points", arr}});
    return 0;
}

inline int cmd_kernels(const Context& cx) {
    const auto& cfg = cx.cfg;
    const auto g = detail::unit_grid(cfg.kernels.points, cfg.kernels.hi);
    auto f = open_out(cx, "kernels.csv");
    CsvWriter w(f);
    stamp(w, cx);
    w.meta("columns", "F = F(x_b, x_theta), K = K(x_theta, x_b)");
    w.header({"x_a", "x_b", "x_theta", "P", "Gamma", "S", "F", "K"});
    const auto& q = cfg.quadrature;
    for (double xa : g)
        for (double xb : g)
            for (double xt : g) {
                const auto m = kernel_moments(xa, xb, xt, q);
                w.row({xa, xb, xt, m.P, m.Gamma, m.S, eval_F(xb, xt, q), eval_K(xt, xb, q)});
            }
    return 0;
}

inline int cmd_consistency(const Context& cx) {
    const auto& cfg = cx.cfg;
    ConsistencyConfig cc;
    cc.model = cfg.model.working();
    cc.init = cfg.working_init();
    cc.n_ladder.assign(cfg.n_ladder.begin(), cfg.n_ladder.end());
    cc.trials = cfg.trials;
    cc.T = cfg.T;
    cc.seed = cfg.seed;
    cc.threads = cfg.threads;
    cc.quad = cfg.quadrature;
    if (cfg.model.sigma || cfg.model.mu1)
        cx.log << "note: consistency samples directly in working coordinates\n";
    const auto r = run_consistency(cc);
    {
        auto f = open_out(cx, "trials.csv");
        CsvWriter w(f);
        stamp(w, cx);
        w.header({"n", "trial", "seed", "sup_discrepancy", "tail_discrepancy", "final_error"});
        for (const auto& t : r.per_trial)
            w.row_text({std::to_string(t.n), std::to_string(t.trial), std::to_string(t.seed),
                        fmt_double(t.sup_discrepancy), fmt_double(t.tail_discrepancy), fmt_double(t.final_error)});
    }
    {
        auto f = open_out(cx, "rate_fit.csv");
        CsvWriter w(f);
        stamp(w, cx);
        w.header({"n", "log_n", "median_final_error", "log_error"});
        for (std::size_t i = 0; i < r.n_ladder.size(); ++i) {
            const double n = double(r.n_ladder[i]);
            w.row({n, std::log(n), r.final_error[i], std::log(r.final_error[i])});
        }
    }
    json seeds = json::array();
    for (auto s : r.seeds) seeds.push_back(s);
    write_json(cx, "consistency.json",
               {{"n_ladder", r.n_ladder},
                {"trials", r.trials},
                {"median_sup_discrepancy", r.sup_discrepancy},
                {"median_tail_discrepancy", r.tail_discrepancy},
                {"median_final_error", r.final_error},
                {"slope", num(r.slope)},
                {"seeds", seeds}});
    return 0;
}

inline int cmd_verify(const Context& cx) {
    AcceptanceOptions o;
    o.seed = cx.cfg.seed;
    o.threads = resolve_threads(cx.cfg.threads);
    o.quad = cx.cfg.quadrature;
    const auto results = run_acceptance(o, [&](const CriterionResult& r) { cx.log << format_result(r) << std::endl; });
    json arr = json::array();
    bool all = true;
    for (const auto& r : results) {
        all = all && r.pass;
        arr.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail},
                       {"budget_seconds", r.budget_seconds}});
    }
    write_json(cx, "verify.json", {{"seed", o.seed}, {"all_pass", all}, {"criteria", arr}});
    return all ? 0 : 1;
}

}  // namespace cli_detail

// Machine-readable error document.
inline json error_json(const std::string& kind, const std::string& message, const std::string& field = "") {
    json e{{"kind", kind}, {"message", message}};
    if (!field.empty()) e["field"] = field;
    return {{"error", e}};
}

// Runs the configured command; returns the process exit status.
inline int execute(const ExperimentConfig& cfg, std::ostream& log = std::cout) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    cli_detail::Context cx{cfg, config_hash(cfg), fs::path(cfg.out_dir), log};
    const auto& c = cfg.command;
    if (c == "run-population") return cli_detail::cmd_run_population(cx);
    if (c == "run-sample") return cli_detail::cmd_run_sample(cx);
    if (c == "coupled") return cli_detail::cmd_coupled(cx);
    if (c == "landscape") return cli_detail::cmd_landscape(cx);
    if (c == "kernels") return cli_detail::cmd_kernels(cx);
    if (c == "consistency") return cli_detail::cmd_consistency(cx);
    if (c == "verify") return cli_detail::cmd_verify(cx);
    throw ConfigError("command", "unknown command '" + c + "'");
}

}  // namespace emlab
