#include "runner.hpp"

#include "fkmix/lattice.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <string>
#include <vector>

using namespace fkmix::cli;

namespace {

void add_model(CLI::App* app, ModelChoice& m) {
    auto* q = app->add_option("--q", m.q, "cluster weight q");
    auto* k = app->add_option("--kappa", m.kappa, "CLE parameter kappa");
    q->excludes(k);
    app->add_option("--p", m.p, "edge parameter (default: self-dual point)");
}

// Splices "--config FILE" into key=value flags placed before the other
// arguments, so that flags on the command line win.
std::vector<std::string> expand(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    for (size_t i = 0; i + 1 < args.size(); ++i) {
        if (args[i] != "--config")
            continue;
        auto extra = config_arguments(args[i + 1]);
        args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
        // after the subcommand words, before the flags
        size_t at = 0;
        while (at < args.size() && args[at].rfind("-", 0) != 0)
            ++at;
        args.insert(args.begin() + static_cast<long>(at), extra.begin(), extra.end());
        break;
    }
    return args;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fkmix: mixing rate of critical FK percolation and exact CLE formulas"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    std::string config_path;
    app.add_option("--config", config_path, "key=value file; command-line flags override it");

    EstimateOptions est;
    auto* e = app.add_subcommand("estimate", "Monte Carlo estimates over a list of sizes");
    add_model(e, est.model);
    e->add_option("--observable", est.observable, "delta-R | delta-rR | ratio-A | nested-sign")
        ->check(CLI::IsMember({"delta-R", "delta-rR", "ratio-A", "nested-sign"}));
    e->add_option("--sizes", est.sizes, "box radii R")->delimiter(',')->required()->multi_option_policy(
        CLI::MultiOptionPolicy::TakeAll);
    e->add_option("--r", est.r, "inner scale for delta-rR and ratio-A");
    e->add_option("--delta", est.delta, "annulus aspect for ratio-A");
    e->add_option("--a", est.a, "base of a^l_R for nested-sign");
    e->add_option("--seed", est.seed, "64-bit seed")->required();
    e->add_option("--workers", est.workers, "threads (results do not depend on it)");
    e->add_option("--samples", est.samples, "samples per chain");
    e->add_option("--chains", est.chains, "initial number of chains per size");
    e->add_option("--max-chains", est.max_chains, "cap on chains per size");
    e->add_option("--target-rel-err", est.target_rel_err, "add chains until stderr/|mean| is below this");
    e->add_option("--burn-in", est.burn_in, "sweeps before sampling (default max(100, 4R))");
    e->add_option("--stride", est.stride, "sweeps between samples");
    e->add_option("--statistic", est.statistic, "conditional | indicator (delta-R, nested-sign)");
    e->add_option("--window-radius", est.window_radius, "refresh window for the conditional statistic");
    e->add_option("--window-sweeps", est.window_sweeps, "window refreshes per full sweep");
    e->add_flag("--fit", est.fit, "fit a power law over the sizes");
    e->add_option("--bootstrap", est.bootstrap, "bootstrap resamples for the fit interval");
    e->add_option("--out", est.out_dir, "output directory (default $FKMIX_OUTPUT_DIR or ./fkmix-out)");
    e->add_option("--run-id", est.run_id, "file stem (default: prefix of the input hash)");
    e->add_flag("!--no-resume", est.resume, "ignore an existing checkpoint");

    ExactOptions ex;
    auto* x = app.add_subcommand("exact", "exact CLE-side formulas");
    x->add_option("action", ex.action, "predict | ratio | verify-channels | verify-laplace")
        ->required()
        ->check(CLI::IsMember({"predict", "ratio", "verify-channels", "verify-laplace"}));
    add_model(x, ex.model);
    x->add_option("--r", ex.r_values, "r values for the ratio table")->delimiter(',')->multi_option_policy(
        CLI::MultiOptionPolicy::TakeAll);
    x->add_option("--tol", ex.tol, "residual tolerance");

    EnumerateOptions en;
    auto* n = app.add_subcommand("enumerate", "exact marginals by enumeration (at most 24 edges)");
    add_model(n, en.model);
    n->add_option("--R", en.R, "box radius");
    n->add_option("--out", en.out, "fixture file (default: stdout)");

    auto* v = app.add_subcommand("verify", "fast self-checks of the exact formulas");

    std::vector<std::string> args;
    try {
        args = expand(argc, argv);
    } catch (const std::exception& err) {
        std::cerr << "usage error: " << err.what() << "\n";
        return kUsage;
    }
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& err) {
        int code = app.exit(err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*e)
            return cmd_estimate(est, std::cerr);
        if (*x)
            return cmd_exact(ex, std::cout);
        if (*n)
            return cmd_enumerate(en, std::cout);
        if (*v)
            return cmd_verify(std::cout);
    } catch (const fkmix::domain_error& err) {
        std::cerr << "usage error: " << err.what() << "\n";
        return kUsage;
    } catch (const fkmix::resource_error& err) {
        std::cerr << "resource limit: " << err.what() << "\n";
        return kResource;
    } catch (const fkmix::accuracy_error& err) {
        std::cerr << "tolerance breach: " << err.what() << "\n";
        return kTolerance;
    }
    return kUsage;
}
