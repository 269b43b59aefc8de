// lrlab: reproducible experiment driver for the certification suites.
// Usage: lrlab <subcommand> --config <path> [--seed N] [--threads N]
//              [--out DIR] [--override-guards]
// Exit codes: 0 all checks pass, 1 bound violation, 2 config/schema error,
// 3 resource guard tripped.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "lrlab/common.hpp"
#include "lrlab/suites.hpp"

namespace {

struct RunConfig {
    std::string suite;
    lrlab::suites::Options opt;
    std::string out_dir = "out";
};

std::string trimmed(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& where, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw lrlab::ConfigError(where + ": not a number: '" + v + "'");
    }
}

long long parse_int(const std::string& where, const std::string& v) {
    try {
        std::size_t used = 0;
        const long long x = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw lrlab::ConfigError(where + ": not an integer: '" + v + "'");
    }
}

// key = value lines, '#' starts a comment; the first key must be `schema = 1`
void apply_config_file(const std::string& path, RunConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw lrlab::ConfigError("cannot read config: " + path);
    bool schema_seen = false;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trimmed(line);
        if (stripped.empty()) continue;
        const std::string where = path + ":" + std::to_string(lineno);

        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw lrlab::ConfigError(where + ": expected 'key = value'");
        const std::string key = trimmed(stripped.substr(0, eq));
        const std::string value = trimmed(stripped.substr(eq + 1));
        if (key.empty() || value.empty())
            throw lrlab::ConfigError(where + ": empty key or value");

        if (key == "schema") {
            if (value != "1")
                throw lrlab::ConfigError(where + ": unsupported schema version " + value);
            schema_seen = true;
            continue;
        }
        if (!schema_seen)
            throw lrlab::ConfigError(path + ": first key must be 'schema = 1'");

        if (key == "suite") {
            if (!cfg.suite.empty() && value != cfg.suite)
                throw lrlab::ConfigError(where + ": config suite '" + value +
                                         "' does not match subcommand '" + cfg.suite + "'");
        } else if (key == "seed") {
            cfg.opt.seed = static_cast<std::uint64_t>(parse_int(where, value));
        } else if (key == "count") {
            const long long c = parse_int(where, value);
            if (c < 0) throw lrlab::ConfigError(where + ": count must be >= 0");
            cfg.opt.count = static_cast<int>(c);
        } else if (key == "threads") {
            cfg.opt.threads = static_cast<int>(parse_int(where, value));
        } else if (key == "out") {
            cfg.out_dir = value;
        } else if (key == "lambda") {
            cfg.opt.lambda = parse_double(where, value);
        } else if (key == "beta") {
            cfg.opt.beta = parse_double(where, value);
        } else if (key == "epsilon") {
            cfg.opt.epsilon = parse_double(where, value);
        } else if (key == "sigma") {
            cfg.opt.sigma = parse_double(where, value);
        } else if (key == "t_max") {
            cfg.opt.t_max = parse_double(where, value);
        } else {
            throw lrlab::ConfigError(where + ": unknown key '" + key + "'");
        }
    }
    if (!schema_seen) throw lrlab::ConfigError(path + ": missing 'schema = 1'");
}

int run(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    lrlab::set_guard_override(cfg.opt.override_guards);

    const auto start = std::chrono::steady_clock::now();
    const lrlab::suites::SuiteResult res = lrlab::suites::run_suite(cfg.suite, cfg.opt);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    fs::create_directories(cfg.out_dir);
    const std::string csv_path = (fs::path(cfg.out_dir) / (res.suite + ".csv")).string();
    const std::string json_path = (fs::path(cfg.out_dir) / (res.suite + ".json")).string();
    lrlab::suites::write_csv(csv_path, res.table);
    lrlab::suites::write_json(json_path, res);

    std::printf("%-18s %8s %8s %14s %10s\n", "suite", "cases", "pass", "worst_margin",
                "wall_s");
    std::printf("%-18s %8d %8d %14.6g %10.2f\n", res.suite.c_str(), res.n_cases,
                res.n_pass, res.has_margin ? res.worst_margin : 0.0, wall);
    std::printf("artifacts: %s %s\n", csv_path.c_str(), json_path.c_str());
    std::printf("%s\n", res.pass ? "PASS" : "FAIL");
    return res.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lrlab: exact small-lattice certification of fermionic "
                 "light-cone bounds and linear response"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_flag;
    long long seed_flag = -1;
    int threads_flag = 0;
    bool override_guards = false;

    for (const std::string& name : lrlab::suites::suite_names()) {
        CLI::App* sub = app.add_subcommand(name, "run the " + name + " suite");
        sub->add_option("--config", config_path, "key = value config file (schema 1)");
        sub->add_option("--seed", seed_flag, "override the batch seed");
        sub->add_option("--threads", threads_flag, "worker threads");
        sub->add_option("--out", out_flag, "artifact directory");
        sub->add_flag("--override-guards", override_guards,
                      "lift the Fock-dimension and commutator-depth guards");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // help/version exit cleanly, bad flags are config errors
    }

    RunConfig cfg;
    cfg.suite = app.get_subcommands().front()->get_name();
    cfg.opt.threads = 0;  // sentinel: resolved below

    try {
        if (!config_path.empty()) apply_config_file(config_path, cfg);

        // precedence: command line > config file > environment > default
        if (seed_flag >= 0) cfg.opt.seed = static_cast<std::uint64_t>(seed_flag);
        if (threads_flag > 0) {
            cfg.opt.threads = threads_flag;
        } else if (cfg.opt.threads <= 0) {
            if (const char* env = std::getenv("LRLAB_THREADS"))
                cfg.opt.threads = static_cast<int>(parse_int("LRLAB_THREADS", env));
        }
        if (cfg.opt.threads <= 0) cfg.opt.threads = 1;
        if (!out_flag.empty()) cfg.out_dir = out_flag;
        cfg.opt.override_guards = override_guards;

        return run(cfg);
    } catch (const lrlab::GuardError& e) {
        std::fprintf(stderr, "guard: %s\n", e.what());
        return 3;
    } catch (const lrlab::ConfigError& e) {
        std::fprintf(stderr, "config: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
