#include "fkmix/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>

namespace fkmix {

namespace {

enum class Kind : uint64_t { DeltaR = 1, DeltaRR = 2, RatioA = 3, NestedSign = 4 };

// Stream ids: estimator kind and sizes in the high bits, chain index in the low 24.
uint64_t stream_id(Kind kind, int R, int r, uint64_t chain) {
    uint64_t tag = static_cast<uint64_t>(kind) << 20 | static_cast<uint64_t>(R) << 10 | static_cast<uint64_t>(r);
    return tag << 24 | chain;
}

void check_control(const RunControl& ctl) {
    if (ctl.workers < 1)
        throw domain_error("workers must be >= 1");
    if (ctl.samples_per_chain < 1 || ctl.chains < 1)
        throw domain_error("samples_per_chain and chains must be >= 1");
    if (ctl.stride < 1)
        throw domain_error("stride must be >= 1");
    if (ctl.target_rel_err < 0 || ctl.max_chains < ctl.chains)
        throw domain_error("need target_rel_err >= 0 and max_chains >= chains");
    if (ctl.max_chains >= (1 << 24))
        throw domain_error("max_chains too large");
}

std::vector<std::vector<double>> channel(const std::vector<ChainRecord>& recs, size_t k) {
    std::vector<std::vector<double>> out;
    out.reserve(recs.size());
    for (const auto& r : recs)
        out.push_back(r.series.at(k));
    return out;
}

bool target_met(const EstimateResult& e, double target) {
    if (target <= 0)
        return true;
    if (e.stderr_ == 0.0)
        return true;
    return e.mean != 0.0 && e.stderr_ <= target * std::abs(e.mean);
}

// Adds chains in rounds until the combined estimate meets the target.
PointResult drive(const RunControl& ctl, const std::function<ChainRecord(uint64_t)>& fn,
                  const std::function<EstimateResult(const std::vector<ChainRecord>&)>& combine) {
    check_control(ctl);
    PointResult out;
    for (size_t i = 0; i < ctl.resume.size(); ++i) {
        if (ctl.resume[i].chain != i)
            throw domain_error("resumed chains must be 0..k-1 in order");
        out.records.push_back(ctl.resume[i]);
    }
    int want = std::max(ctl.chains, static_cast<int>(out.records.size()));
    for (;;) {
        if (static_cast<int>(out.records.size()) < want) {
            auto fresh = run_chains(out.records.size(), static_cast<uint64_t>(want), ctl.workers, fn);
            for (auto& rec : fresh) {
                if (ctl.on_chain)
                    ctl.on_chain(rec);
                out.records.push_back(std::move(rec));
            }
        }
        out.estimate = combine(out.records);
        out.estimate.seed = ctl.seed;
        out.chains = static_cast<int>(out.records.size());
        out.target_met = target_met(out.estimate, ctl.target_rel_err);
        if (out.target_met || want >= ctl.max_chains)
            return out;
        double rel = out.estimate.mean != 0.0 ? out.estimate.stderr_ / std::abs(out.estimate.mean) : 4.0;
        double grow = std::min(16.0, std::pow(rel / ctl.target_rel_err, 2) * 1.2);
        int next = static_cast<int>(std::ceil(want * grow));
        want = std::min(ctl.max_chains, std::max(want + 1, next));
    }
}

double power(double a, int l) { return l == 0 ? 1.0 : std::pow(a, l); }

} // namespace

int default_burn_in(int R) { return std::max(100, 4 * R); }

std::vector<ChainRecord> run_chains(uint64_t first, uint64_t last, int workers,
                                    const std::function<ChainRecord(uint64_t)>& fn) {
    const size_t n = last > first ? last - first : 0;
    std::vector<ChainRecord> out(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<size_t> next{0};
    auto work = [&] {
        for (size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                out[i] = fn(first + i);
                out[i].chain = first + i;
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int threads = static_cast<int>(std::min<size_t>(static_cast<size_t>(std::max(workers, 1)), n));
    if (threads <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back(work);
        for (auto& th : pool)
            th.join();
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    return out;
}

PointResult estimate_delta_R(const RcmParams& params, int R, const RunControl& ctl) {
    if (params.q < 1)
        throw domain_error("mixing-rate estimators need q >= 1");
    const BoxLattice lat(R);
    const int burn = ctl.burn_in >= 0 ? ctl.burn_in : default_burn_in(R);
    const bool conditional = ctl.statistic == DeltaStatistic::Conditional;
    const int m = conditional ? std::min(ctl.window_radius, R) : 0;
    const int k = m > 0 ? ctl.window_sweeps : 0;
    const std::vector<EdgeId> window = m > 0 ? window_edges(lat, m) : std::vector<EdgeId>{};
    const EdgeId e0 = lat.horizontal(0, 0);

    auto fn = [&](uint64_t c) {
        CoupledChain ch(lat, params, ctl.seed, stream_id(Kind::DeltaR, R, 0, c));
        ChainRecord rec;
        rec.series.resize(1);
        auto& s = rec.series[0];
        s.reserve(ctl.samples_per_chain);
        for (int i = 0; i < burn; ++i)
            ch.sweep();
        if (conditional) {
            ch.watch(origin_edges(lat));
            for (int i = 0; i < ctl.samples_per_chain; ++i) {
                ch.sweep();
                for (int j = 0; j < k; ++j)
                    ch.sweep_edges(window);
                s.push_back(static_cast<double>(ch.take_hits()));
            }
        } else {
            for (int i = 0; i < ctl.samples_per_chain; ++i) {
                for (int j = 0; j < ctl.stride; ++j)
                    ch.sweep();
                int d = int{ch.upper()[e0]} - int{ch.lower()[e0]};
                if (d < 0 || d > 1)
                    throw std::logic_error("edge indicator difference outside {0,1}");
                s.push_back(d);
            }
        }
        rec.cursor = ch.rng().cursor();
        return rec;
    };
    const double scale = conditional ? (params.p - params.p_pivotal()) / (4.0 * (k + 1)) : 1.0;
    auto combine = [&](const std::vector<ChainRecord>& recs) { return scaled(summarize(channel(recs, 0)), scale); };
    return drive(ctl, fn, combine);
}

PointResult estimate_delta_rR(const RcmParams& params, int r, int R, const RunControl& ctl) {
    if (params.q < 1)
        throw domain_error("mixing-rate estimators need q >= 1");
    if (r < 1 || r >= R)
        throw domain_error("need 1 <= r < R");
    const BoxLattice lat(R);
    const int burn = ctl.burn_in >= 0 ? ctl.burn_in : default_burn_in(R);
    const Rect box{-r, -r, r, r};
    auto fn = [&](uint64_t c) {
        CoupledChain ch(lat, params, ctl.seed, stream_id(Kind::DeltaRR, R, r, c));
        ChainRecord rec;
        rec.series.resize(1);
        for (int i = 0; i < burn; ++i)
            ch.sweep();
        for (int i = 0; i < ctl.samples_per_chain; ++i) {
            for (int j = 0; j < ctl.stride; ++j)
                ch.sweep();
            int d = int{has_horizontal_crossing(lat, ch.upper(), box)} - int{has_horizontal_crossing(lat, ch.lower(), box)};
            if (d < 0 || d > 1)
                throw std::logic_error("crossing difference outside {0,1}");
            rec.series[0].push_back(d);
        }
        rec.cursor = ch.rng().cursor();
        return rec;
    };
    auto combine = [](const std::vector<ChainRecord>& recs) { return summarize(channel(recs, 0)); };
    return drive(ctl, fn, combine);
}

RatioResult estimate_ratio_A(const RcmParams& params, int r, double delta, int R, const RunControl& ctl) {
    if (params.q < 1)
        throw domain_error("mixing-rate estimators need q >= 1");
    const BoxLattice lat(R);
    const AnnulusSpec ann = AnnulusSpec::from_delta(r, delta);
    check_annulus(lat, ann);
    const int burn = ctl.burn_in >= 0 ? ctl.burn_in : default_burn_in(R);
    std::atomic<int64_t> checks{0};
    auto fn = [&](uint64_t c) {
        CoupledChain ch(lat, params, ctl.seed, stream_id(Kind::RatioA, R, r, c));
        ChainRecord rec;
        rec.series.resize(2);
        for (int i = 0; i < burn; ++i)
            ch.sweep();
        for (int i = 0; i < ctl.samples_per_chain; ++i) {
            for (int j = 0; j < ctl.stride; ++j)
                ch.sweep();
            bool lo = event_A(lat, ch.lower(), ann), hi = event_A(lat, ch.upper(), ann);
            if (ctl.check_loops) {
                if (lo != event_A_via_loops(lat, ch.lower(), BoundaryCondition::Kind::Free, ann) ||
                    hi != event_A_via_loops(lat, ch.upper(), BoundaryCondition::Kind::Wired, ann))
                    throw std::logic_error("circuit and loop detectors of A disagree");
                checks.fetch_add(2);
            }
            rec.series[0].push_back(int{hi} - int{lo});
            rec.series[1].push_back(lo ? 1.0 : 0.0);
        }
        rec.cursor = ch.rng().cursor();
        return rec;
    };
    RatioResult out;
    auto combine = [&](const std::vector<ChainRecord>& recs) {
        auto num = channel(recs, 0), den = channel(recs, 1);
        out.difference = summarize(num, ctl.seed);
        out.free_probability = summarize(den, ctl.seed);
        const double d = out.free_probability.mean;
        if (d == 0.0)
            throw domain_error("free-boundary probability of A estimated as 0; increase n or delta");
        const double rho = out.difference.mean / d;
        // delta method: linearize the ratio sample by sample, keeping autocorrelation
        auto lin = num;
        for (size_t i = 0; i < lin.size(); ++i)
            for (size_t j = 0; j < lin[i].size(); ++j)
                lin[i][j] = (num[i][j] - rho * den[i][j]) / d;
        EstimateResult e = summarize(lin, ctl.seed);
        e.mean = rho;
        return e;
    };
    out.ratio = drive(ctl, fn, combine);
    out.detector_checks = checks.load();
    return out;
}

PointResult estimate_nested_sign(const RcmParams& params, int R, double a, const RunControl& ctl) {
    const BoxLattice lat(R);
    const int burn = ctl.burn_in >= 0 ? ctl.burn_in : default_burn_in(R);
    const bool conditional = ctl.statistic == DeltaStatistic::Conditional;
    const auto edges = origin_edges(lat);
    // midpoints of the origin edges in quarter units
    const Point refs[4] = {{2, 0}, {-2, 0}, {0, 2}, {0, -2}};
    const auto wired = BoundaryCondition::Kind::Wired;
    auto fn = [&](uint64_t c) {
        ChainState st = make_chain(lat, BoundaryCondition::wired(), params, true, stream_id(Kind::NestedSign, R, 0, c));
        Stream rng(ctl.seed, st.stream_id);
        ConnectivityOracle oracle(lat, st.bc);
        ChainRecord rec;
        rec.series.resize(1);
        for (int i = 0; i < burn; ++i)
            glauber_sweep(lat, st, rng, oracle);
        for (int i = 0; i < ctl.samples_per_chain; ++i) {
            for (int j = 0; j < ctl.stride; ++j)
                glauber_sweep(lat, st, rng, oracle);
            double v = 0.0;
            if (conditional) {
                EdgeConfig cfg = st.config;
                for (int k = 0; k < 4; ++k) {
                    const EdgeId e = edges[k];
                    const bool was = cfg[e];
                    double pe = oracle.joined_without(cfg.bits.data(), e) ? params.p : params.p_pivotal();
                    cfg.set(e, true);
                    int lo = loops_around_point(extract_loops(lat, cfg, wired), refs[k].x, refs[k].y);
                    cfg.set(e, false);
                    int lc = loops_around_point(extract_loops(lat, cfg, wired), refs[k].x, refs[k].y);
                    cfg.set(e, was);
                    double wc = power(a, lc);
                    v += wc + pe * (power(a, lo) - wc);
                }
                v /= 4.0;
            } else {
                v = power(a, loops_around_origin(extract_loops(lat, st.config, wired)));
            }
            rec.series[0].push_back(v);
        }
        rec.cursor = rng.cursor();
        return rec;
    };
    auto combine = [](const std::vector<ChainRecord>& recs) { return summarize(channel(recs, 0)); };
    return drive(ctl, fn, combine);
}

ExponentFit fit_exponent(const std::vector<FitPoint>& points, int resamples, uint64_t seed) {
    if (points.size() < 3)
        throw domain_error("fit_exponent needs at least 3 points");
    const size_t n = points.size();
    std::vector<double> x(n), y(n), s(n);
    bool weighted = true;
    for (size_t i = 0; i < n; ++i) {
        const auto& pt = points[i];
        if (!(pt.estimate.mean > 0) || !(pt.scale > 0))
            throw domain_error("fit_exponent: nonpositive value at scale " + std::to_string(pt.scale) +
                               " (mean " + std::to_string(pt.estimate.mean) + ")");
        x[i] = std::log(pt.scale);
        y[i] = std::log(pt.estimate.mean);
        s[i] = pt.estimate.stderr_ / pt.estimate.mean;
        if (!(s[i] > 0))
            weighted = false;
    }
    auto solve = [&](const std::vector<double>& yy, double* slope_var) {
        double sw = 0, sx = 0, sy = 0;
        for (size_t i = 0; i < n; ++i) {
            double w = weighted ? 1.0 / (s[i] * s[i]) : 1.0;
            sw += w;
            sx += w * x[i];
            sy += w * yy[i];
        }
        double mx = sx / sw, my = sy / sw, sxx = 0, sxy = 0;
        for (size_t i = 0; i < n; ++i) {
            double w = weighted ? 1.0 / (s[i] * s[i]) : 1.0;
            sxx += w * (x[i] - mx) * (x[i] - mx);
            sxy += w * (x[i] - mx) * (yy[i] - my);
        }
        double b = sxy / sxx;
        if (slope_var) {
            if (weighted) {
                *slope_var = 1.0 / sxx;
            } else {
                double ssr = 0;
                for (size_t i = 0; i < n; ++i) {
                    double res = yy[i] - (my + b * (x[i] - mx));
                    ssr += res * res;
                }
                *slope_var = ssr / static_cast<double>(n - 2) / sxx;
            }
        }
        return std::pair<double, double>{b, my - b * mx};
    };
    ExponentFit fit;
    fit.points = points;
    double var = 0;
    auto [b, a0] = solve(y, &var);
    fit.exponent = -b;
    fit.intercept = a0;
    fit.stderr_ = std::sqrt(var);
    if (!weighted || resamples <= 0) {
        fit.ci95 = {fit.exponent - 1.96 * fit.stderr_, fit.exponent + 1.96 * fit.stderr_};
        return fit;
    }
    Stream rng(seed, 0xF17);
    std::vector<double> exps;
    exps.reserve(resamples);
    std::vector<double> yy(n);
    for (int t = 0; t < resamples; ++t) {
        for (size_t i = 0; i < n; ++i) {
            // Box-Muller on the counter stream keeps the draws reproducible
            double u1 = 1.0 - rng.uniform(), u2 = rng.uniform();
            double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
            yy[i] = y[i] + s[i] * z;
        }
        exps.push_back(-solve(yy, nullptr).first);
    }
    std::sort(exps.begin(), exps.end());
    auto at = [&](double q) { return exps[static_cast<size_t>(std::floor(q * (exps.size() - 1)))]; };
    fit.ci95 = {std::min(at(0.025), fit.exponent), std::max(at(0.975), fit.exponent)};
    return fit;
}

} // namespace fkmix
