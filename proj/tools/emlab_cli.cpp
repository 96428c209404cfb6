// emlab: experiment runner. See README for the config schema.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "emlab/cli.hpp"

namespace {

int fail(const emlab::json& err, int code) {
    std::cerr << err.dump() << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"emlab: EM for two-component Gaussian mixtures, population and sample"};
    app.set_version_flag("--version", std::string(emlab::kVersion));
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    int threads = -1;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--out", out_dir, "output directory (overrides output.dir)");
    auto* seed_opt = app.add_option("--seed", seed, "base seed (overrides seed)");
    app.add_option("--threads", threads, "worker threads; falls back to EMLAB_THREADS")->check(CLI::NonNegativeNumber);

    std::string kernels_action = "tabulate";
    for (const auto& name : emlab::known_commands()) {
        auto* sub = app.add_subcommand(name);
        if (name == "kernels")
            sub->add_option("action", kernels_action, "only 'tabulate'")->check(CLI::IsMember({"tabulate"}));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        return fail(emlab::error_json("UsageError", e.what()), 2);
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        emlab::json doc = emlab::json::object();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw emlab::ConfigError("--config", "cannot open " + config_path);
            std::stringstream ss;
            ss << in.rdbuf();
            try {
                doc = emlab::json::parse(ss.str());
            } catch (const emlab::json::parse_error& e) {
                throw emlab::ConfigError("<document>", std::string("malformed JSON: ") + e.what());
            }
            if (!doc.is_object()) throw emlab::ConfigError("<root>", "expected an object");
        }
        if (doc.contains("command") && doc["command"] != command)
            throw emlab::ConfigError("command", "config says " + doc["command"].dump() + ", command line says " + command);
        doc["command"] = command;
        if (*seed_opt) doc["seed"] = seed;
        if (threads >= 0) doc["threads"] = threads;
        if (!out_dir.empty()) doc["output"]["dir"] = out_dir;

        const auto cfg = emlab::parse_config(doc);
        return emlab::execute(cfg, std::cout);
    } catch (const emlab::ConfigError& e) {
        return fail(emlab::error_json("ConfigError", e.what(), e.field()), 2);
    } catch (const emlab::Error& e) {
        return fail(emlab::error_json(e.kind(), e.what()), 3);
    } catch (const std::exception& e) {
        return fail(emlab::error_json("InternalError", e.what()), 4);
    }
}
