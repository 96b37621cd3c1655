#include "fkmix/exact.hpp"
#include "fkmix/lattice.hpp"
#include "fkmix/rcm.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace fkmix {

namespace {

constexpr double pi = std::numbers::pi;

void check_kappa(double kappa) {
    if (!(kappa > 8.0 / 3.0 && kappa < 8.0))
        throw domain_error("kappa must lie in (8/3, 8), got " + std::to_string(kappa));
}

// sin((n+1) a) / sin(a), continued through sin(a) = 0.
double chebyshev_u(long n, double a) {
    double s = std::sin(a);
    if (std::abs(s) > 1e-9)
        return std::sin((n + 1) * a) / s;
    // a is a multiple of pi: the ratio tends to (n+1) cos(a)^n
    double c = std::cos(a) > 0 ? 1.0 : -1.0;
    return (n + 1) * ((n % 2 == 0) ? 1.0 : c);
}

// sin((chi + pi m)/g) / sin(chi), continued through g = 1.
double closed_weight(long m, const CleParams& c) {
    if (std::abs(std::sin(c.chi)) > 1e-9)
        return std::sin((c.chi + pi * m) / c.g) / std::sin(c.chi);
    return ((m % 2 == 0) ? 1.0 : -1.0) * (m + 1);
}

double inverse_euler_product(double x, double tol) {
    double prod = 1.0, xk = x;
    for (int k = 1; k < 1000000 && xk > tol * 1e-3; ++k) {
        prod *= 1.0 - xk;
        xk *= x;
    }
    return 1.0 / prod;
}

double sinh_ratio(double a, double b, double x) {
    if (std::abs(x) < 1e-12)
        return a / b;
    return std::sinh(a * x) / std::sinh(b * x);
}

struct Term {
    double exponent;
    double weight;
    int n;
};

// Sum of weight * base^(exponent - shift) over terms, smallest exponent first.
double sum_terms(std::vector<Term>& terms, double log_base, double shift = 0.0) {
    std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.exponent < b.exponent; });
    double s = 0.0;
    for (auto& t : terms)
        s += t.weight * std::exp((t.exponent - shift) * log_base);
    return s;
}

// Generic lattice sum over n in Z: expo(n) is a convex quadratic, weight(n)
// is bounded by |n|+1 in magnitude. Terms are gathered outward from the
// minimum until the largest possible remaining term is below tol relative to
// the partial sum and the exponents are increasing.
template <class Expo, class Weight, class Keep>
std::vector<Term> gather(Expo expo, Weight weight, Keep keep, double log_base, double tol, int max_terms,
                         double shift = 0.0) {
    std::vector<Term> terms;
    double partial = 0.0;
    double prev_lo = -1e300, prev_hi = -1e300;
    for (int k = 0; k < max_terms; ++k) {
        double bound = 0.0;
        bool increasing = true;
        for (int n : {k, -k - 1}) {
            double e = expo(n);
            double prev = n >= 0 ? prev_hi : prev_lo;
            if (e <= prev)
                increasing = false;
            (n >= 0 ? prev_hi : prev_lo) = e;
            double mag = (std::abs(n) + 1.0) * std::exp((e - shift) * log_base);
            bound = std::max(bound, mag);
            if (!keep(n))
                continue;
            double w = weight(n);
            terms.push_back({e, w, n});
            partial += w * std::exp((e - shift) * log_base);
        }
        if (k >= 2 && increasing && bound < tol * std::abs(partial))
            return terms;
        if (k >= 2 && increasing && partial == 0.0 && bound < 1e-300)
            return terms;
    }
    throw accuracy_error("series did not converge within " + std::to_string(max_terms) + " terms");
}

} // namespace

CleParams CleParams::from_kappa(double kappa) {
    check_kappa(kappa);
    CleParams c;
    c.kappa = kappa;
    c.g = 4.0 / kappa;
    c.chi = pi * (1.0 - c.g);
    c.central_charge = 1.0 - 6.0 * (1.0 - c.g) * (1.0 - c.g) / c.g;
    c.gamma_lqg = kappa > 4.0 ? 4.0 / std::sqrt(kappa) : std::sqrt(kappa);
    c.predicted_iota = fkmix::predicted_iota(kappa);
    c.amplitude = fkmix::predicted_amplitude(kappa);
    return c;
}

CleParams CleParams::from_q(double q) {
    return from_kappa(kappa_of_q(q));
}

double predicted_iota(double kappa) {
    check_kappa(kappa);
    return 3.0 * kappa / 8.0 - 1.0;
}

double predicted_amplitude(double kappa) {
    check_kappa(kappa);
    return 4.0 * std::cos((kappa - 4.0) * pi / 4.0);
}

SeriesAccuracy::SeriesAccuracy(double t, int n) : tol(t), max_terms(n) {
    if (!(t >= 1e-15))
        throw domain_error("series tolerance must be >= 1e-15");
    if (n < 1)
        throw domain_error("max_terms must be positive");
}

double SeriesAccuracy::effective() const {
    return std::min(tol, 1e-12);
}

ModulusPoint ModulusPoint::from_tau(double tau) {
    if (!(tau > 0))
        throw domain_error("modulus tau must be positive");
    return {tau, std::exp(-2.0 * pi * tau), std::exp(-pi / tau)};
}

ModulusPoint ModulusPoint::from_r(double r) {
    if (!(r > 0 && r < 1))
        throw domain_error("r must lie in (0,1)");
    return from_tau(std::log(1.0 / r) / (2.0 * pi));
}

double rn_ratio(double kappa, double r, const SeriesAccuracy& acc) {
    check_kappa(kappa);
    if (!(r > 0 && r < 1))
        throw domain_error("rn_ratio needs r in (0,1)");
    const double tau = std::log(1.0 / r) / (2.0 * pi);
    if (tau < kChannelSwitchTau) {
        // near r = 1 the sums below cancel; the open channel gives the same ratio
        const CleParams c = CleParams::from_kappa(kappa);
        const double lq = -pi / tau;
        auto expo = [&](int p) { return c.g * p * p / 4.0 - (1.0 - c.g) * p / 2.0; };
        auto weight = [&](int p) { return chebyshev_u(p, c.chi); };
        const double shift = std::min(expo(0), expo(1));
        auto odd = gather(expo, weight, [](int p) { return p % 2 == 0; }, lq, acc.effective(), acc.max_terms, shift);
        auto even = gather(expo, weight, [](int p) { return p % 2 != 0; }, lq, acc.effective(), acc.max_terms, shift);
        double den = sum_terms(even, lq, shift);
        if (std::abs(den) < 1e-300)
            throw accuracy_error("rn_ratio denominator vanishes");
        return sum_terms(odd, lq, shift) / den;
    }
    const double theta = kappa * pi / 4.0;
    auto expo = [&](int m) { return kappa * m * m / 8.0 + (kappa / 4.0 - 1.0) * m; };
    // both sums share the factor sin(theta); dividing it out keeps kappa = 4 finite
    auto weight = [&](int m) { return chebyshev_u(m, theta); };
    auto all = [](int) { return true; };
    const double lr = std::log(r);
    auto den_terms = gather(expo, weight, all, lr, acc.effective(), acc.max_terms);
    auto num_terms = den_terms;
    for (auto& t : num_terms)
        if (t.n % 2 != 0)
            t.weight = -t.weight;
    double num = sum_terms(num_terms, lr);
    double den = sum_terms(den_terms, lr);
    if (std::abs(den) < 1e-300)
        throw accuracy_error("rn_ratio denominator vanishes");
    return num / den;
}

double rn_ratio_asymptotic(double kappa, double r) {
    return 1.0 + predicted_amplitude(kappa) * std::pow(r, predicted_iota(kappa));
}

double z_open(Parity kind, const ModulusPoint& pt, const CleParams& c, const SeriesAccuracy& acc) {
    const double tol = acc.effective();
    const double lq = -pi / pt.tau;
    const int want = kind == Parity::Odd ? 0 : 1; // odd level collects even p
    auto expo = [&](int p) { return c.g * p * p / 4.0 - (1.0 - c.g) * p / 2.0; };
    auto weight = [&](int p) { return chebyshev_u(p, c.chi); };
    auto keep = [&](int p) { return ((p % 2) + 2) % 2 == want; };
    auto terms = gather(expo, weight, keep, lq, tol, acc.max_terms);
    double s = sum_terms(terms, lq);
    return std::exp(-c.central_charge / 24.0 * lq) * inverse_euler_product(pt.q_open, tol) * s;
}

// The closed-channel terms are O(1) while the even sum can be 1e-13 for
// small tau and kappa < 4, so this series is summed in quad precision.
double z_closed(Parity kind, const ModulusPoint& pt, const CleParams& c, const SeriesAccuracy& acc) {
    using Q = boost::multiprecision::cpp_bin_float_quad;
    const double tol = acc.effective();
    const Q qpi = boost::math::constants::pi<Q>();
    const Q g = Q(4) / Q(c.kappa);
    const Q chi = qpi * (1 - g);
    const Q tau = Q(pt.tau);
    const Q lr = -2 * qpi * tau;
    const Q sin_chi = sin(chi);
    const bool at_four = abs(sin_chi) < Q(1e-9);
    Q sum = 0;
    double prev_hi = -1e300, prev_lo = -1e300;
    for (int k = 0;; ++k) {
        if (k >= acc.max_terms)
            throw accuracy_error("closed-channel series did not converge");
        double bound = 0.0;
        bool increasing = true;
        for (int m : {k, -k - 1}) {
            Q a = chi + qpi * m;
            Q e = (a * a - chi * chi) / (2 * qpi * qpi * g);
            double ed = static_cast<double>(e);
            double& prev = m >= 0 ? prev_hi : prev_lo;
            if (ed <= prev)
                increasing = false;
            prev = ed;
            Q w = at_four ? Q(((m % 2 == 0) ? 1 : -1) * (m + 1)) : sin(a / g) / sin_chi;
            if (kind == Parity::Odd && m % 2 != 0)
                w = -w;
            Q term = w * exp(e * lr);
            sum += term;
            bound = std::max(bound, (std::abs(m) + 1.0) * static_cast<double>(exp(e * lr)));
        }
        if (k >= 2 && increasing && bound < 1e-6 * tol * static_cast<double>(abs(sum)))
            break;
        if (k >= 2 && increasing && bound < 1e-300)
            break;
    }
    const Q r2 = exp(2 * lr);
    Q prod = 1, xk = r2;
    while (xk > Q(tol) * Q(1e-6)) {
        prod *= 1 - xk;
        xk *= r2;
    }
    const Q cc = 1 - 6 * (1 - g) * (1 - g) / g;
    Q z = exp(-cc / 12 * lr) / prod * sum / sqrt(2 * g);
    return static_cast<double>(z);
}

cplx qa_moment(QaKind kind, double t, double x, const CleParams& c, int k) {
    if (!(t > 0))
        throw domain_error("qa_moment needs t > 0");
    const bool dense = !c.simple();
    const bool simple_kind = kind == QaKind::Simple1 || kind == QaKind::Simple2;
    if (simple_kind && dense)
        throw domain_error("simple-phase moments need kappa in (8/3,4]");
    if (!simple_kind && !dense)
        throw domain_error("dense-phase moments need kappa in (4,8)");
    const cplx ix(0.0, x);
    const cplx front = std::exp((-ix - 1.0) * std::log(t)) * complex_gamma(1.0 + ix);
    const double n = 2.0 * std::cos(c.chi);
    const double g = c.g;
    auto denom = [&](double a) {
        double h = 2.0 * std::cosh(a * pi * x);
        return h * h - n * n;
    };
    double v = 0.0;
    switch (kind) {
    case QaKind::TForested:
        v = n * sinh_ratio((1.0 / g - 1.0) * pi, pi / g, x);
        break;
    case QaKind::KForested:
        if (k < 1)
            throw domain_error("QA^{k,f} needs k >= 1");
        v = std::pow(n / (2.0 * std::cosh(pi * x)), k);
        break;
    case QaKind::Dense1:
        v = n * sinh_ratio(pi, g * pi, x) *
            (2.0 * std::cosh(g * pi * x) / denom(g) - sinh_ratio((1.0 - g) * pi, pi, x));
        break;
    case QaKind::Dense2:
        v = n * sinh_ratio(pi, g * pi, x) * n / denom(g);
        break;
    case QaKind::Dense1Forested:
        v = n * (2.0 * std::cosh(pi * x) / denom(1.0) - sinh_ratio((1.0 / g - 1.0) * pi, pi / g, x));
        break;
    case QaKind::Dense2Forested:
        v = n * n / denom(1.0);
        break;
    case QaKind::Simple1:
        v = 2.0 * n * std::cosh(pi * x) / denom(1.0);
        break;
    case QaKind::Simple2:
        v = n * n / denom(1.0);
        break;
    }
    return front * v;
}

namespace {

// 2cos(chi)/(sqrt 2 pi) eta(2 i tau) Z(tau), open channel: the eta modular
// transform turns the product into 1/(2 sqrt tau) q^{(1-c)/24} and every
// exponent becomes (g/4)(p - (1-g)/g)^2.
double density_open(Parity kind, double tau, const CleParams& c, const SeriesAccuracy& acc) {
    const double lq = -pi / tau;
    const int want = kind == Parity::Odd ? 0 : 1;
    const double shift = (1.0 - c.g) / c.g;
    auto expo = [&](int p) { return c.g / 4.0 * (p - shift) * (p - shift); };
    auto weight = [&](int p) { return chebyshev_u(p, c.chi); };
    auto keep = [&](int p) { return ((p % 2) + 2) % 2 == want; };
    auto terms = gather(expo, weight, keep, lq, acc.effective(), acc.max_terms);
    return 2.0 * std::cos(c.chi) / pi / (2.0 * std::sqrt(tau)) * sum_terms(terms, lq);
}

// Closed channel: eta(2 i tau) = r^{1/12} prod (1 - r^{2k}) cancels the
// product in Z and every exponent becomes (chi + pi m)^2 / (2 pi^2 g).
double density_closed(Parity kind, double tau, const CleParams& c, const SeriesAccuracy& acc) {
    const double lr = -2.0 * pi * tau;
    auto expo = [&](int m) {
        double a = c.chi + pi * m;
        return a * a / (2.0 * pi * pi * c.g);
    };
    auto weight = [&](int m) {
        double sign = (kind == Parity::Odd && m % 2 != 0) ? -1.0 : 1.0;
        return sign * closed_weight(m, c);
    };
    auto all = [](int) { return true; };
    auto terms = gather(expo, weight, all, lr, acc.effective(), acc.max_terms);
    return 2.0 * std::cos(c.chi) / (std::sqrt(2.0) * pi) / std::sqrt(2.0 * c.g) * sum_terms(terms, lr);
}

double laplace_weight(const CleParams& c) {
    // pi gamma^2 / 4
    return pi * c.gamma_lqg * c.gamma_lqg / 4.0;
}

} // namespace

double modulus_density(Parity kind, double tau, const CleParams& c, Channel channel, const SeriesAccuracy& acc) {
    if (!(tau > 0))
        throw domain_error("modulus_density needs tau > 0");
    return channel == Channel::Open ? density_open(kind, tau, c, acc) : density_closed(kind, tau, c, acc);
}

double modulus_density(Parity kind, double tau, const CleParams& c, const SeriesAccuracy& acc) {
    return modulus_density(kind, tau, c, tau < kChannelSwitchTau ? Channel::Open : Channel::Closed, acc);
}

double laplace_lhs(Parity kind, double x, const CleParams& c, double quad_tol) {
    const double w = laplace_weight(c) * x * x;
    const double u_max = std::sqrt(kChannelSwitchTau);
    // tau = u^2 on (0, 0.2] absorbs the 1/sqrt(tau) of the open channel
    auto near = [&](double u) {
        if (u <= 0.0)
            return 0.0;
        double tau = u * u;
        return 2.0 * u * std::exp(-w * tau) * modulus_density(kind, tau, c, Channel::Open);
    };
    auto far = [&](double tau) { return std::exp(-w * tau) * modulus_density(kind, tau, c, Channel::Closed); };
    double a = integrate(near, 0.0, u_max, quad_tol * 1e-2).value;
    double b = integrate_to_infinity(far, kChannelSwitchTau, 0.8, quad_tol * 1e-2).value;
    return a + b;
}

double laplace_rhs(Parity kind, double x, const CleParams& c) {
    if (!(x > 0))
        throw domain_error("Laplace check needs x > 0");
    QaKind k;
    if (c.simple())
        k = kind == Parity::Odd ? QaKind::Simple1 : QaKind::Simple2;
    else
        k = kind == Parity::Odd ? QaKind::Dense1 : QaKind::Dense2;
    const double a = c.gamma_lqg * c.gamma_lqg / 4.0;
    cplx v = 2.0 * std::sinh(a * pi * x) / (pi * c.gamma_lqg * x * complex_gamma(cplx(1.0, x))) * qa_moment(k, 1.0, x, c);
    return v.real();
}

double laplace_rhs_hyperbolic(Parity kind, double x, const CleParams& c) {
    const double n = 2.0 * std::cos(c.chi);
    const double gam = c.gamma_lqg;
    if (c.simple()) {
        double a = 1.0 / c.g;
        double h = 2.0 * std::cosh(pi * x);
        double base = 2.0 * std::sinh(a * pi * x) / (pi * gam * x) / (h * h - n * n);
        return kind == Parity::Odd ? base * n * h : base * n * n;
    }
    double h = 2.0 * std::cosh(c.g * pi * x);
    double pref = 2.0 * n * std::sinh(pi * x) / (pi * gam * x);
    if (kind == Parity::Odd)
        return pref * (h / (h * h - n * n) - std::sinh((1.0 - c.g) * pi * x) / std::sinh(pi * x));
    return pref * n / (h * h - n * n);
}

double verify_laplace(Parity kind, double x, const CleParams& c, double quad_tol) {
    double lhs = laplace_lhs(kind, x, c, quad_tol);
    double rhs = laplace_rhs(kind, x, c);
    return std::abs(lhs - rhs) / std::abs(rhs);
}

} // namespace fkmix
