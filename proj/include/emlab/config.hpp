#pragma once

// Experiment configuration: a JSON document parsed into ExperimentConfig,
// with unknown keys rejected and every default made explicit on output.

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "emlab/errors.hpp"
#include "emlab/gauss_quad.hpp"
#include "emlab/geometry.hpp"
#include "emlab/population_em.hpp"

namespace emlab {

using json = nlohmann::ordered_json;

// verify defaults to the seed the acceptance suite is tuned for.
inline constexpr std::uint64_t AcceptanceSeed = 20160509;

inline const std::vector<std::string>& known_commands() {
    static const std::vector<std::string> c{"run-population", "run-sample", "coupled", "landscape",
                                            "kernels",        "consistency", "verify"};
    return c;
}

struct ModelSpec {
    std::string kind = "model2";  // or "model1"
    int d = 0;
    std::optional<Vec> theta_star;
    std::optional<Vec> mu1, mu2;
    std::optional<Mat> sigma;

    // Truth in working coordinates: centered, and whitened when sigma is set.
    MixtureModel working() const;
    Vec center() const;
};

struct LandscapeSpec {
    int points = 41;
    double span = 1.0;
    std::optional<Vec> dir_a, dir_b;  // default θ*/‖θ*‖ for both
};

struct KernelGridSpec {
    int points = 20;
    double hi = 3.0;
};

struct ExperimentConfig {
    std::string command;
    ModelSpec model;
    bool has_model = false;
    std::optional<Vec> init_a, init_b;
    StopRule stop;
    QuadratureSpec quadrature;
    std::uint64_t seed = 1;
    long long n = 10000;
    int T = 50;
    std::vector<long long> n_ladder{1000, 10000, 100000, 1000000};
    int trials = 20;
    int threads = 0;
    bool export_dataset = false;
    LandscapeSpec landscape;
    KernelGridSpec kernels;
    std::string out_dir = "out";

    // Initial state in working coordinates.
    ABState working_init() const;
};

namespace detail {

// Walks a JSON object, consuming known keys; whatever is left is an error.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }
    std::string field(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
    const json* get(const std::string& k) {
        seen_.push_back(k);
        auto it = j_.find(k);
        return it == j_.end() ? nullptr : &*it;
    }
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            bool ok = false;
            for (const auto& s : seen_) ok = ok || s == it.key();
            if (!ok) throw ConfigError(field(it.key()), "unknown field");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::vector<std::string> seen_;
};

inline double as_double(const json& v, const std::string& f) {
    if (!v.is_number()) throw ConfigError(f, "expected a number");
    return v.get<double>();
}
inline long long as_int(const json& v, const std::string& f) {
    if (!v.is_number_integer()) throw ConfigError(f, "expected an integer");
    return v.get<long long>();
}
inline std::uint64_t as_u64(const json& v, const std::string& f) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
    throw ConfigError(f, "expected a non-negative integer");
}
inline Vec as_vec(const json& v, const std::string& f) {
    if (!v.is_array() || v.empty()) throw ConfigError(f, "expected a non-empty array of numbers");
    Vec out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = as_double(v[i], f + "[" + std::to_string(i) + "]");
    if (!out.allFinite()) throw ConfigError(f, "entries must be finite");
    return out;
}
inline Mat as_mat(const json& v, const std::string& f) {
    if (!v.is_array() || v.empty()) throw ConfigError(f, "expected a square array of arrays");
    const auto d = static_cast<Eigen::Index>(v.size());
    Mat m(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const auto row = as_vec(v[i], f + "[" + std::to_string(i) + "]");
        if (row.size() != d) throw ConfigError(f, "matrix must be square");
        m.row(i) = row.transpose();
    }
    return m;
}
inline json vec_json(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}
inline json mat_json(const Mat& m) {
    json a = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec_json(m.row(i).transpose()));
    return a;
}
inline void need_dim(const Vec& v, int d, const std::string& f) {
    if (v.size() != d)
        throw ConfigError(f, "has dimension " + std::to_string(v.size()) + ", model dimension is " + std::to_string(d));
}

inline ModelSpec parse_model(const json& j) {
    ObjectReader r(j, "model");
    ModelSpec m;
    if (auto v = r.get("kind")) {
        if (!v->is_string()) throw ConfigError("model.kind", "expected a string");
        m.kind = v->get<std::string>();
        if (m.kind != "model1" && m.kind != "model2")
            throw ConfigError("model.kind", "must be \"model1\" or \"model2\"");
    }
    if (auto v = r.get("theta_star")) m.theta_star = as_vec(*v, "model.theta_star");
    if (auto v = r.get("mu1")) m.mu1 = as_vec(*v, "model.mu1");
    if (auto v = r.get("mu2")) m.mu2 = as_vec(*v, "model.mu2");
    if (auto v = r.get("sigma")) m.sigma = as_mat(*v, "model.sigma");
    const json* dv = r.get("d");
    r.finish();

    if (m.theta_star && (m.mu1 || m.mu2))
        throw ConfigError("model.theta_star", "give either theta_star or mu1/mu2, not both");
    if (!m.theta_star && !(m.mu1 && m.mu2))
        throw ConfigError(m.mu1 ? "model.mu2" : (m.mu2 ? "model.mu1" : "model.theta_star"), "missing");
    if (m.mu1 && m.kind == "model1") throw ConfigError("model.mu1", "model1 is centered; use theta_star");
    const Vec& ref = m.theta_star ? *m.theta_star : *m.mu1;
    m.d = static_cast<int>(ref.size());
    if (dv) {
        const auto d = as_int(*dv, "model.d");
        if (d != m.d) throw ConfigError("model.d", "does not match the length of the mean vectors");
    }
    if (m.mu2) need_dim(*m.mu2, m.d, "model.mu2");
    if (m.sigma) {
        if (m.sigma->rows() != m.d) throw ConfigError("model.sigma", "dimension does not match the model");
        try {
            inverse_sqrt(*m.sigma);
        } catch (const Error& e) {
            throw ConfigError("model.sigma", e.what());
        }
    }
    return m;
}

}  // namespace detail

inline Vec ModelSpec::center() const {
    if (mu1) return 0.5 * (*mu1 + *mu2);
    return Vec::Zero(d);
}

inline MixtureModel ModelSpec::working() const {
    Vec ts = theta_star ? *theta_star : Vec(0.5 * (*mu2 - *mu1));
    if (sigma) ts = inverse_sqrt(*sigma) * ts;
    return MixtureModel(ts);
}

inline ABState ExperimentConfig::working_init() const {
    const int d = model.d;
    Vec a = init_a ? *init_a : Vec::Zero(d);
    Vec b = *init_b;
    a -= model.center();
    if (model.sigma) {
        const Mat w = inverse_sqrt(*model.sigma);
        a = w * a;
        b = w * b;
    }
    return {a, b};
}

inline bool command_needs_model(const std::string& c) { return c != "kernels" && c != "verify"; }
inline bool command_needs_init(const std::string& c) {
    return c == "run-population" || c == "run-sample" || c == "coupled" || c == "consistency";
}

inline ExperimentConfig parse_config(const json& j) {
    using namespace detail;
    ObjectReader r(j, "");
    ExperimentConfig c;
    if (auto v = r.get("command")) {
        if (!v->is_string()) throw ConfigError("command", "expected a string");
        c.command = v->get<std::string>();
    }
    bool known = false;
    for (const auto& k : known_commands()) known = known || k == c.command;
    if (!known) throw ConfigError("command", c.command.empty() ? "missing" : "unknown command '" + c.command + "'");

    if (auto v = r.get("model")) {
        c.model = parse_model(*v);
        c.has_model = true;
    }
    if (auto v = r.get("init")) {
        ObjectReader ir(*v, "init");
        if (auto a = ir.get("a")) c.init_a = as_vec(*a, "init.a");
        if (auto b = ir.get("b")) c.init_b = as_vec(*b, "init.b");
        ir.finish();
    }
    if (auto v = r.get("stop")) {
        ObjectReader sr(*v, "stop");
        if (auto x = sr.get("max_iters")) c.stop.max_iters = static_cast<int>(as_int(*x, "stop.max_iters"));
        if (auto x = sr.get("step_tol")) c.stop.step_tol = as_double(*x, "stop.step_tol");
        sr.finish();
        if (c.stop.max_iters < 1) throw ConfigError("stop.max_iters", "must be >= 1");
        if (!(c.stop.step_tol > 0.0)) throw ConfigError("stop.step_tol", "must be > 0");
    }
    if (auto v = r.get("quadrature")) {
        ObjectReader qr(*v, "quadrature");
        auto& q = c.quadrature;
        if (auto x = qr.get("nodes_per_lobe")) q.nodes_per_lobe = static_cast<int>(as_int(*x, "quadrature.nodes_per_lobe"));
        if (auto x = qr.get("abs_tol")) q.abs_tol = as_double(*x, "quadrature.abs_tol");
        if (auto x = qr.get("truncation_radius")) q.truncation_radius = as_double(*x, "quadrature.truncation_radius");
        if (auto x = qr.get("max_nodes_per_lobe"))
            q.max_nodes_per_lobe = static_cast<int>(as_int(*x, "quadrature.max_nodes_per_lobe"));
        if (auto x = qr.get("max_panels")) q.max_panels = static_cast<int>(as_int(*x, "quadrature.max_panels"));
        qr.finish();
        try {
            q.validate();
        } catch (const Error& e) {
            throw ConfigError("quadrature", e.what());
        }
    }
    if (c.command == "verify") c.seed = AcceptanceSeed;
    if (auto v = r.get("seed")) c.seed = as_u64(*v, "seed");
    if (auto v = r.get("n")) c.n = as_int(*v, "n");
    if (auto v = r.get("T")) c.T = static_cast<int>(as_int(*v, "T"));
    if (auto v = r.get("n_ladder")) {
        if (!v->is_array() || v->empty()) throw ConfigError("n_ladder", "expected a non-empty array of integers");
        c.n_ladder.clear();
        for (std::size_t i = 0; i < v->size(); ++i) c.n_ladder.push_back(as_int((*v)[i], "n_ladder[" + std::to_string(i) + "]"));
    }
    if (auto v = r.get("trials")) c.trials = static_cast<int>(as_int(*v, "trials"));
    if (auto v = r.get("threads")) c.threads = static_cast<int>(as_int(*v, "threads"));
    if (auto v = r.get("export_dataset")) {
        if (!v->is_boolean()) throw ConfigError("export_dataset", "expected true or false");
        c.export_dataset = v->get<bool>();
    }
    if (auto v = r.get("landscape")) {
        ObjectReader lr(*v, "landscape");
        if (auto x = lr.get("points")) c.landscape.points = static_cast<int>(as_int(*x, "landscape.points"));
        if (auto x = lr.get("span")) c.landscape.span = as_double(*x, "landscape.span");
        if (auto x = lr.get("dir_a")) c.landscape.dir_a = as_vec(*x, "landscape.dir_a");
        if (auto x = lr.get("dir_b")) c.landscape.dir_b = as_vec(*x, "landscape.dir_b");
        lr.finish();
        if (c.landscape.points < 2) throw ConfigError("landscape.points", "must be >= 2");
        if (!(c.landscape.span > 0.0)) throw ConfigError("landscape.span", "must be > 0");
    }
    if (auto v = r.get("kernels")) {
        ObjectReader kr(*v, "kernels");
        if (auto x = kr.get("points")) c.kernels.points = static_cast<int>(as_int(*x, "kernels.points"));
        if (auto x = kr.get("hi")) c.kernels.hi = as_double(*x, "kernels.hi");
        kr.finish();
        if (c.kernels.points < 2) throw ConfigError("kernels.points", "must be >= 2");
        if (!(c.kernels.hi > 0.0)) throw ConfigError("kernels.hi", "must be > 0");
    }
    if (auto v = r.get("output")) {
        ObjectReader orr(*v, "output");
        if (auto x = orr.get("dir")) {
            if (!x->is_string()) throw ConfigError("output.dir", "expected a string");
            c.out_dir = x->get<std::string>();
        }
        orr.finish();
    }
    r.finish();

    if (c.n < 1) throw ConfigError("n", "must be >= 1");
    if (c.T < 1) throw ConfigError("T", "must be >= 1");
    if (c.trials < 1) throw ConfigError("trials", "must be >= 1");
    if (c.threads < 0) throw ConfigError("threads", "must be >= 0");
    for (std::size_t i = 0; i < c.n_ladder.size(); ++i) {
        if (c.n_ladder[i] < 1) throw ConfigError("n_ladder[" + std::to_string(i) + "]", "must be >= 1");
        if (i > 0 && c.n_ladder[i] <= c.n_ladder[i - 1])
            throw ConfigError("n_ladder[" + std::to_string(i) + "]", "ladder must be strictly increasing");
    }

    if (command_needs_model(c.command) && !c.has_model) throw ConfigError("model", "required for " + c.command);
    if (c.has_model) {
        const int d = c.model.d;
        if (c.init_a) need_dim(*c.init_a, d, "init.a");
        if (c.init_b) need_dim(*c.init_b, d, "init.b");
        if (c.landscape.dir_a) need_dim(*c.landscape.dir_a, d, "landscape.dir_a");
        if (c.landscape.dir_b) need_dim(*c.landscape.dir_b, d, "landscape.dir_b");
        if (c.model.kind == "model1" && c.init_a && c.init_a->norm() > 0.0)
            throw ConfigError("init.a", "model1 has no midpoint; leave it out or zero");
    }
    if (command_needs_init(c.command) && !c.init_b) throw ConfigError("init.b", "required for " + c.command);
    if (c.command == "consistency" && c.model.kind == "model1")
        throw ConfigError("model.kind", "consistency runs Model 2 only");
    if (c.command == "coupled" && c.model.kind == "model1")
        throw ConfigError("model.kind", "coupled runs Model 2 only");
    return c;
}

inline ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<document>", std::string("malformed JSON: ") + e.what());
    }
    return parse_config(j);
}

inline ExperimentConfig parse_config(const char* text) { return parse_config(std::string(text)); }

// Fully resolved config, fixed key order; the canonical form that gets hashed.
inline json to_json(const ExperimentConfig& c) {
    using namespace detail;
    json j;
    j["command"] = c.command;
    if (c.has_model) {
        json m;
        m["kind"] = c.model.kind;
        m["d"] = c.model.d;
        if (c.model.theta_star) m["theta_star"] = vec_json(*c.model.theta_star);
        if (c.model.mu1) m["mu1"] = vec_json(*c.model.mu1);
        if (c.model.mu2) m["mu2"] = vec_json(*c.model.mu2);
        if (c.model.sigma) m["sigma"] = mat_json(*c.model.sigma);
        j["model"] = m;
        json in;
        in["a"] = vec_json(c.init_a ? *c.init_a : Vec(Vec::Zero(c.model.d)));
        if (c.init_b) in["b"] = vec_json(*c.init_b);
        j["init"] = in;
    }
    j["stop"] = {{"max_iters", c.stop.max_iters}, {"step_tol", c.stop.step_tol}};
    const auto& q = c.quadrature;
    j["quadrature"] = {{"nodes_per_lobe", q.nodes_per_lobe},
                       {"abs_tol", q.abs_tol},
                       {"truncation_radius", q.truncation_radius},
                       {"max_nodes_per_lobe", q.max_nodes_per_lobe},
                       {"max_panels", q.max_panels}};
    j["seed"] = c.seed;
    j["n"] = c.n;
    j["T"] = c.T;
    j["n_ladder"] = c.n_ladder;
    j["trials"] = c.trials;
    j["threads"] = c.threads;
    j["export_dataset"] = c.export_dataset;
    json l{{"points", c.landscape.points}, {"span", c.landscape.span}};
    if (c.landscape.dir_a) l["dir_a"] = vec_json(*c.landscape.dir_a);
    if (c.landscape.dir_b) l["dir_b"] = vec_json(*c.landscape.dir_b);
    j["landscape"] = l;
    j["kernels"] = {{"points", c.kernels.points}, {"hi", c.kernels.hi}};
    j["output"] = {{"dir", c.out_dir}};
    return j;
}

inline std::string serialize_config(const ExperimentConfig& c) { return to_json(c).dump(); }

// Canonical text of any valid document.
inline std::string normalize_config(const std::string& text) { return serialize_config(parse_config(text)); }

// FNV-1a over the canonical serialization. Threads and the output directory
// change neither results nor bytes, so they are left out.
inline std::string config_hash(const ExperimentConfig& c) {
    json j = to_json(c);
    j.erase("threads");
    j.erase("output");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : j.dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace emlab
