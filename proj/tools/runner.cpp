#include "runner.hpp"

#include "fkmix/estimators.hpp"
#include "fkmix/exact.hpp"
#include "fkmix/rcm.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

namespace fkmix::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kCsvSchema = "# fkmix-csv v1";
constexpr const char* kCsvHeader = "run_id,observable,q,kappa,R,r,delta,n_raw,n_eff,mean,stderr,tau_int,seed";
constexpr const char* kCheckpointSchema = "fkmix-checkpoint/1";

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// git blob hash of the canonical text
std::string content_hash(const std::string& text) {
    std::string blob = "blob " + std::to_string(text.size()) + '\0' + text;
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(blob.data(), blob.size(), md, &len, EVP_sha1(), nullptr);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i)
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return hex.str();
}

void write_atomic(const fs::path& path, const std::string& text) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        f << text;
        if (!f)
            throw resource_error("cannot write " + tmp.string());
    }
    fs::rename(tmp, path);
}

struct Model {
    double q = 0.0;
    double kappa = 0.0;
    double p = 0.0;
};

Model resolve_for_sampling(const ModelChoice& m) {
    if (m.q.has_value() == m.kappa.has_value())
        throw domain_error("give exactly one of --q and --kappa");
    Model out;
    out.q = m.q ? *m.q : q_of_kappa(*m.kappa);
    out.kappa = (out.q > 0 && out.q <= 4) ? kappa_of_q(out.q) : std::nan("");
    out.p = m.p ? *m.p : critical_p(out.q);
    return out;
}

double resolve_kappa(const ModelChoice& m) {
    if (m.q.has_value() == m.kappa.has_value())
        throw domain_error("give exactly one of --q and --kappa");
    return m.kappa ? *m.kappa : kappa_of_q(*m.q);
}

std::string canonical_config(const EstimateOptions& o, const Model& m) {
    std::ostringstream s;
    s << "observable=" << o.observable << "\nq=" << num(m.q) << "\np=" << num(m.p) << "\nsizes=";
    for (size_t i = 0; i < o.sizes.size(); ++i)
        s << (i ? "," : "") << o.sizes[i];
    s << "\nr=" << o.r << "\ndelta=" << num(o.delta) << "\na=" << num(o.a) << "\nseed=" << *o.seed
      << "\nsamples=" << o.samples << "\nchains=" << o.chains << "\nmax_chains=" << o.max_chains
      << "\ntarget_rel_err=" << num(o.target_rel_err) << "\nburn_in=" << o.burn_in << "\nstride=" << o.stride
      << "\nstatistic=" << o.statistic << "\nwindow_radius=" << o.window_radius
      << "\nwindow_sweeps=" << o.window_sweeps << "\n";
    return s.str();
}

json record_to_json(const ChainRecord& r) {
    return json{{"chain", r.chain}, {"cursor", r.cursor}, {"series", r.series}};
}

ChainRecord record_from_json(const json& j) {
    ChainRecord r;
    r.chain = j.at("chain").get<uint64_t>();
    r.cursor = j.at("cursor").get<uint64_t>();
    r.series = j.at("series").get<std::vector<std::vector<double>>>();
    return r;
}

class Checkpoint {
public:
    Checkpoint(fs::path path, std::string hash, bool resume) : path_(std::move(path)), hash_(std::move(hash)) {
        if (!resume || !fs::exists(path_))
            return;
        std::ifstream f(path_);
        json j = json::parse(f, nullptr, false);
        if (j.is_discarded() || j.value("schema", "") != kCheckpointSchema || j.value("input_hash", "") != hash_)
            return;
        for (auto& [key, chains] : j.at("points").items())
            for (const auto& c : chains)
                points_[key].push_back(record_from_json(c));
    }

    std::vector<ChainRecord> completed(const std::string& key) const {
        auto it = points_.find(key);
        return it == points_.end() ? std::vector<ChainRecord>{} : it->second;
    }

    void add(const std::string& key, const ChainRecord& rec) {
        auto& v = points_[key];
        if (rec.chain < v.size())
            return;
        v.push_back(rec);
        save();
    }

    json summary() const {
        json j = json::object();
        for (const auto& [k, v] : points_) {
            json cursors = json::array();
            for (const auto& r : v)
                cursors.push_back(r.cursor);
            j[k] = {{"chains", v.size()}, {"cursors", cursors}};
        }
        return j;
    }

private:
    void save() const {
        json pts = json::object();
        for (const auto& [k, v] : points_) {
            json arr = json::array();
            for (const auto& r : v)
                arr.push_back(record_to_json(r));
            pts[k] = arr;
        }
        json j{{"schema", kCheckpointSchema}, {"input_hash", hash_}, {"points", pts}};
        write_atomic(path_, j.dump());
    }

    fs::path path_;
    std::string hash_;
    std::map<std::string, std::vector<ChainRecord>> points_;
};

struct Row {
    std::string observable;
    int R = 0;
    int r = 0;
    bool has_r = false;
    EstimateResult est;
    int chains = 0;
    bool target_met = true;
};

std::string csv_row(const std::string& run_id, const Row& row, const Model& m, double delta, bool has_delta) {
    std::ostringstream s;
    s << run_id << ',' << row.observable << ',' << num(m.q) << ',' << num(m.kappa) << ',' << row.R << ','
      << (row.has_r ? std::to_string(row.r) : "") << ',' << (has_delta ? num(delta) : "") << ',' << row.est.n_raw
      << ',' << num(row.est.n_effective) << ',' << num(row.est.mean) << ',' << num(row.est.stderr_) << ','
      << num(row.est.tau_int) << ',' << row.est.seed << '\n';
    return s.str();
}

DeltaStatistic parse_statistic(const std::string& s) {
    if (s == "conditional")
        return DeltaStatistic::Conditional;
    if (s == "indicator")
        return DeltaStatistic::Indicator;
    throw domain_error("statistic must be conditional or indicator, got " + s);
}

} // namespace

std::string resolve_out_dir(const std::string& flag) {
    if (!flag.empty())
        return flag;
    if (const char* env = std::getenv("FKMIX_OUTPUT_DIR"); env && *env)
        return env;
    return "fkmix-out";
}

std::vector<std::string> config_arguments(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw domain_error("cannot read config file " + path);
    std::vector<std::string> args;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const char* ws = " \t\r";
        s.erase(0, s.find_first_not_of(ws));
        s.erase(s.find_last_not_of(ws) + 1);
        return s;
    };
    while (std::getline(f, line)) {
        ++lineno;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty())
            continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw domain_error(path + ":" + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (value == "true") {
            args.push_back("--" + key);
        } else if (value != "false") {
            args.push_back("--" + key);
            args.push_back(value);
        }
    }
    return args;
}

int cmd_estimate(const EstimateOptions& opt, std::ostream& log) {
    if (!opt.seed)
        throw domain_error("seed: required for estimate");
    if (opt.sizes.empty())
        throw domain_error("sizes: at least one size required");
    const Model m = resolve_for_sampling(opt.model);
    const RcmParams params(m.q, m.p);
    const bool needs_r = opt.observable == "delta-rR" || opt.observable == "ratio-A";
    if (opt.observable != "delta-R" && !needs_r && opt.observable != "nested-sign")
        throw domain_error("observable: unknown value " + opt.observable);
    if (needs_r && opt.r < 1)
        throw domain_error("r: required (>= 1) for " + opt.observable);

    const std::string canon = canonical_config(opt, m);
    const std::string hash = content_hash(canon);
    const std::string run_id = opt.run_id.empty() ? hash.substr(0, 12) : opt.run_id;
    const fs::path dir = resolve_out_dir(opt.out_dir);
    fs::create_directories(dir);
    Checkpoint ckpt(dir / (run_id + ".ckpt.json"), hash, opt.resume);

    RunControl base;
    base.seed = *opt.seed;
    base.workers = opt.workers;
    base.burn_in = opt.burn_in;
    base.stride = opt.stride;
    base.samples_per_chain = opt.samples;
    base.chains = opt.chains;
    base.max_chains = opt.max_chains;
    base.target_rel_err = opt.target_rel_err;
    base.statistic = parse_statistic(opt.statistic);
    base.window_radius = opt.window_radius;
    base.window_sweeps = opt.window_sweeps;

    const auto t0 = std::chrono::steady_clock::now();
    std::vector<Row> rows;
    std::vector<FitPoint> fit_points;
    json extra = json::array();
    for (int R : opt.sizes) {
        const std::string key = opt.observable + ":R=" + std::to_string(R);
        RunControl ctl = base;
        ctl.resume = ckpt.completed(key);
        if (!ctl.resume.empty())
            log << key << ": resuming " << ctl.resume.size() << " chains from checkpoint\n";
        ctl.on_chain = [&](const ChainRecord& rec) { ckpt.add(key, rec); };
        Row row{opt.observable, R, opt.r, needs_r, {}, 0, true};
        if (opt.observable == "delta-R") {
            PointResult pr = estimate_delta_R(params, R, ctl);
            row.est = pr.estimate;
            row.chains = pr.chains;
            row.target_met = pr.target_met;
        } else if (opt.observable == "delta-rR") {
            PointResult pr = estimate_delta_rR(params, opt.r, R, ctl);
            row.est = pr.estimate;
            row.chains = pr.chains;
            row.target_met = pr.target_met;
        } else if (opt.observable == "nested-sign") {
            PointResult pr = estimate_nested_sign(params, R, opt.a, ctl);
            row.est = pr.estimate;
            row.chains = pr.chains;
            row.target_met = pr.target_met;
        } else {
            RatioResult rr = estimate_ratio_A(params, opt.r, opt.delta, R, ctl);
            row.est = rr.ratio.estimate;
            row.chains = rr.ratio.chains;
            row.target_met = rr.ratio.target_met;
            Row diff{"diff-A", R, opt.r, true, rr.difference, rr.ratio.chains, true};
            Row free{"free-A", R, opt.r, true, rr.free_probability, rr.ratio.chains, true};
            rows.push_back(row);
            rows.push_back(diff);
            rows.push_back(free);
            extra.push_back({{"R", R}, {"detector_checks", rr.detector_checks}});
            log << opt.observable << " R=" << R << " mean=" << num(row.est.mean) << " stderr=" << num(row.est.stderr_)
                << " chains=" << row.chains << "\n";
            fit_points.push_back({static_cast<double>(R), rr.difference});
            continue;
        }
        log << opt.observable << " R=" << R << " mean=" << num(row.est.mean) << " stderr=" << num(row.est.stderr_)
            << " chains=" << row.chains << (row.target_met ? "" : " (target not met)") << "\n";
        rows.push_back(row);
        fit_points.push_back({static_cast<double>(R), row.est});
    }

    int code = kOk;
    std::ostringstream csv;
    csv << kCsvSchema << '\n' << kCsvHeader << '\n';
    const bool has_delta = opt.observable == "ratio-A";
    for (const Row& row : rows) {
        csv << csv_row(run_id, row, m, opt.delta, has_delta);
        if (!row.target_met)
            code = kResource;
    }
    json fit_json = nullptr;
    if (opt.fit) {
        try {
            ExponentFit fit = fit_exponent(fit_points, opt.bootstrap, *opt.seed);
            csv << run_id << ",fit:" << opt.observable << ',' << num(m.q) << ',' << num(m.kappa) << ",,,"
                << (has_delta ? num(opt.delta) : "") << ",,," << num(fit.exponent) << ',' << num(fit.stderr_)
                << ",," << *opt.seed << '\n';
            fit_json = {{"exponent", fit.exponent},
                        {"stderr", fit.stderr_},
                        {"intercept", fit.intercept},
                        {"ci95", {fit.ci95.first, fit.ci95.second}},
                        {"resamples", opt.bootstrap}};
            log << "fit exponent=" << num(fit.exponent) << " ci95=[" << num(fit.ci95.first) << ", "
                << num(fit.ci95.second) << "]\n";
        } catch (const domain_error& e) {
            log << "fit failed: " << e.what() << "\n";
            fit_json = {{"error", e.what()}};
            code = std::max(code, static_cast<int>(kTolerance));
        }
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_atomic(dir / (run_id + ".csv"), csv.str());

    json points = json::array();
    for (const Row& row : rows)
        points.push_back({{"observable", row.observable},
                          {"R", row.R},
                          {"r", row.has_r ? json(row.r) : json(nullptr)},
                          {"mean", row.est.mean},
                          {"stderr", row.est.stderr_},
                          {"n_raw", row.est.n_raw},
                          {"n_eff", row.est.n_effective},
                          {"tau_int", row.est.tau_int},
                          {"chains", row.chains},
                          {"target_met", row.target_met}});
    json summary{{"schema", "fkmix-run/1"},
                 {"run_id", run_id},
                 {"input_hash", hash},
                 {"config", canon},
                 {"workers", opt.workers},
                 {"points", points},
                 {"fit", fit_json},
                 {"detector_checks", extra},
                 {"wall_seconds", wall},
                 {"checkpoint", ckpt.summary()}};
    write_atomic(dir / (run_id + ".json"), summary.dump(2) + "\n");
    log << "wrote " << (dir / (run_id + ".csv")).string() << "\n";
    return code;
}

int cmd_exact(const ExactOptions& opt, std::ostream& out) {
    const double kappa = resolve_kappa(opt.model);
    const CleParams c = CleParams::from_kappa(kappa);
    out << std::setprecision(12) << std::fixed;
    if (opt.action == "predict") {
        out << "kappa " << c.kappa << "\nq " << (kappa >= 4 && kappa < 8 ? q_of_kappa(kappa) : std::nan(""))
            << "\niota " << c.predicted_iota << "\namplitude " << c.amplitude << "\ncentral_charge "
            << c.central_charge << "\n";
        return kOk;
    }
    if (opt.action == "ratio") {
        if (opt.r_values.empty())
            throw domain_error("r: at least one value required");
        out << "r,rn_ratio,asymptotic,difference\n";
        for (double r : opt.r_values) {
            double v = rn_ratio(kappa, r), a = rn_ratio_asymptotic(kappa, r);
            out << r << ',' << v << ',' << a << ',' << v - a << '\n';
        }
        return kOk;
    }
    if (opt.action == "verify-channels") {
        const double tol = opt.tol > 0 ? opt.tol : 1e-9;
        int code = kOk;
        out << std::scientific << std::setprecision(3);
        for (Parity kind : {Parity::Odd, Parity::Even})
            for (double tau : {0.05, 0.1, 0.5, 1.0, 2.0, 5.0}) {
                auto pt = ModulusPoint::from_tau(tau);
                double zo = z_open(kind, pt, c), zc = z_closed(kind, pt, c);
                double res = std::abs(zo - zc) / std::abs(zc);
                bool ok = res <= tol;
                out << (ok ? "ok   " : "FAIL ") << (kind == Parity::Odd ? "odd " : "even") << " kappa=" << kappa
                    << " tau=" << tau << " residual=" << res << '\n';
                if (!ok)
                    code = kTolerance;
            }
        return code;
    }
    if (opt.action == "verify-laplace") {
        const double tol = opt.tol > 0 ? opt.tol : 1e-6;
        int code = kOk;
        out << std::scientific << std::setprecision(3);
        for (Parity kind : {Parity::Odd, Parity::Even})
            for (double x : {0.25, 0.5, 1.0, 2.0}) {
                double res = verify_laplace(kind, x, c);
                bool ok = res <= tol;
                out << (ok ? "ok   " : "FAIL ") << (kind == Parity::Odd ? "odd " : "even") << " kappa=" << kappa
                    << " x=" << x << " residual=" << res << '\n';
                if (!ok)
                    code = kTolerance;
            }
        return code;
    }
    throw domain_error("exact: unknown action " + opt.action);
}

int cmd_enumerate(const EnumerateOptions& opt, std::ostream& out) {
    const Model m = resolve_for_sampling(opt.model);
    const RcmParams params(m.q, m.p);
    const BoxLattice lat(opt.R);
    const Enumeration f = enumerate_measure(lat, BoundaryCondition::free(), params);
    const Enumeration w = enumerate_measure(lat, BoundaryCondition::wired(), params);
    std::ostringstream s;
    s << "# fkmix-enumerate v1\n# q=" << num(m.q) << " p=" << num(m.p) << " R=" << opt.R
      << " edges=" << lat.num_edges() << "\n# Z_free=" << num(f.Z) << " Z_wired=" << num(w.Z) << "\n";
    s << "edge,x0,y0,x1,y1,marginal_free,marginal_wired,delta\n";
    for (int e = 0; e < lat.num_edges(); ++e) {
        auto [u, v] = lat.ends(EdgeId{e});
        s << e << ',' << u.x << ',' << u.y << ',' << v.x << ',' << v.y << ',' << num(f.marginal[e]) << ','
          << num(w.marginal[e]) << ',' << num(w.marginal[e] - f.marginal[e]) << '\n';
    }
    if (opt.out.empty()) {
        out << s.str();
    } else {
        if (fs::path(opt.out).has_parent_path())
            fs::create_directories(fs::path(opt.out).parent_path());
        write_atomic(opt.out, s.str());
    }
    return kOk;
}

int cmd_verify(std::ostream& out) {
    int code = kOk;
    std::ostringstream sink;
    for (double kappa : {3.0, 16.0 / 3.0, 5.0, 7.0}) {
        ExactOptions o{"verify-channels", {std::nullopt, kappa, std::nullopt}, {}, 0.0};
        int c = cmd_exact(o, sink);
        out << (c == kOk ? "ok   " : "FAIL ") << "channel duality kappa=" << kappa << '\n';
        code = std::max(code, c);
    }
    for (double r : {0.01, 0.1, 0.5, 0.9}) {
        double res = std::abs(rn_ratio(6.0, r) - 1.0);
        bool ok = res <= 1e-12;
        out << (ok ? "ok   " : "FAIL ") << "kappa=6 ratio r=" << r << " residual=" << res << '\n';
        if (!ok)
            code = kTolerance;
    }
    for (double kappa : {5.0, 16.0 / 3.0, 7.0}) {
        ExactOptions o{"verify-laplace", {std::nullopt, kappa, std::nullopt}, {}, 0.0};
        int c = cmd_exact(o, sink);
        out << (c == kOk ? "ok   " : "FAIL ") << "laplace kappa=" << kappa << '\n';
        code = std::max(code, c);
    }
    if (code != kOk)
        out << sink.str();
    return code;
}

} // namespace fkmix::cli
