#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fkmix::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kTolerance = 2, kResource = 3 };

struct ModelChoice {
    std::optional<double> q;
    std::optional<double> kappa;
    std::optional<double> p; // defaults to critical
};

struct EstimateOptions {
    ModelChoice model;
    std::string observable = "delta-R";
    std::vector<int> sizes;
    int r = 0;
    double delta = 0.5;
    double a = -1.0;
    std::optional<uint64_t> seed;
    int workers = 1;
    int samples = 500;
    int chains = 4;
    int max_chains = 256;
    double target_rel_err = 0.0;
    int burn_in = -1;
    int stride = 1;
    std::string statistic = "conditional";
    int window_radius = 8;
    int window_sweeps = 16;
    bool fit = false;
    int bootstrap = 10000;
    std::string out_dir;
    std::string run_id;
    bool resume = true;
};

struct ExactOptions {
    std::string action; // predict | ratio | verify-channels | verify-laplace
    ModelChoice model;
    std::vector<double> r_values;
    double tol = 0.0; // 0 selects the action's default
};

struct EnumerateOptions {
    ModelChoice model;
    int R = 1;
    std::string out; // empty: stdout
};

// Output directory: flag, else FKMIX_OUTPUT_DIR, else "fkmix-out".
std::string resolve_out_dir(const std::string& flag);

// "key = value" lines, '#' comments; returned as "--key" "value" pairs.
std::vector<std::string> config_arguments(const std::string& path);

int cmd_estimate(const EstimateOptions& opt, std::ostream& log);
int cmd_exact(const ExactOptions& opt, std::ostream& out);
int cmd_enumerate(const EnumerateOptions& opt, std::ostream& out);
int cmd_verify(std::ostream& out);

} // namespace fkmix::cli
