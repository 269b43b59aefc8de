#pragma once
// suites: seeded experiment batches shared by the command-line driver and the
// regression harness.  Each suite assembles its cases deterministically from
// (seed, case index), runs the corresponding checks, and returns a table of
// rows plus a summary; nothing here touches the filesystem except the two
// writers at the bottom.

#include <cstdint>
#include <string>
#include <vector>

namespace lrlab::suites {

struct Options {
    std::uint64_t seed = 1;
    int count = -1;  // randomized-case count (or k_max for tree-suite); < 0 = default
    int threads = 1;
    bool override_guards = false;
    // optional config-file overrides; negative means "use the suite default"
    double lambda = -1.0;   // model: disorder strength
    double beta = -1.0;     // model: inverse temperature
    double epsilon = -1.0;  // decay: polynomial tail exponent offset
    double sigma = -1.0;    // decay: exponential rate
    double t_max = -1.0;    // case batch: time-range half-width
};

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

struct SuiteResult {
    std::string suite;
    Table table;
    int n_cases = 0;
    int n_pass = 0;
    double worst_margin = 0.0;  // min margin over rows that carry one
    bool has_margin = false;
    bool pass = false;
    std::string extra_json;  // suite-specific payload (ac-measure atom dump)
};

// 17 significant digits, enough for doubles to round-trip through text
std::string format17(double v);

SuiteResult car_suite(const Options& opt);
SuiteResult verify_lr_suite(const Options& opt);
SuiteResult verify_multicomm_suite(const Options& opt);
SuiteResult tree_suite(const Options& opt);
SuiteResult convergence_suite(const Options& opt);
SuiteResult telescoping_suite(const Options& opt);
SuiteResult nonauto_suite(const Options& opt);
SuiteResult conductivity_suite(const Options& opt);
SuiteResult ac_measure_suite(const Options& opt);
SuiteResult increments_suite(const Options& opt);

// subcommand names in dispatch order
const std::vector<std::string>& suite_names();
SuiteResult run_suite(const std::string& name, const Options& opt);

void write_csv(const std::string& path, const Table& table);
void write_json(const std::string& path, const SuiteResult& result);

}  // namespace lrlab::suites
