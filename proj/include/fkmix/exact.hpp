#pragma once

#include "fkmix/special.hpp"

#include <complex>

namespace fkmix {

struct CleParams {
    double kappa = 6.0;
    double g = 2.0 / 3.0;
    double chi = 0.0;
    double central_charge = 0.0;
    double gamma_lqg = 0.0;
    double predicted_iota = 0.0;
    double amplitude = 0.0;

    static CleParams from_kappa(double kappa);
    static CleParams from_q(double q);
    bool simple() const { return kappa <= 4.0; }
};

double predicted_iota(double kappa);
// 4 cos((kappa-4) pi/4). At kappa = 6 this vanishes and the mixing rate is
// identically zero, so the exponent carries no information there.
double predicted_amplitude(double kappa);

struct SeriesAccuracy {
    double tol = 1e-15;
    int max_terms = 10000;

    SeriesAccuracy() = default;
    SeriesAccuracy(double t, int n = 10000);
    // Requested tolerance, never looser than 1e-12.
    double effective() const;
};

struct ModulusPoint {
    double tau = 1.0;
    double r = 0.0;
    double q_open = 0.0;

    static ModulusPoint from_tau(double tau);
    static ModulusPoint from_r(double r);
};

enum class Parity { Odd, Even };
enum class Channel { Open, Closed };

double rn_ratio(double kappa, double r, const SeriesAccuracy& acc = {});
double rn_ratio_asymptotic(double kappa, double r);

double z_open(Parity kind, const ModulusPoint& pt, const CleParams& params, const SeriesAccuracy& acc = {});
double z_closed(Parity kind, const ModulusPoint& pt, const CleParams& params, const SeriesAccuracy& acc = {});
inline double z_odd_open(const ModulusPoint& pt, const CleParams& c, const SeriesAccuracy& a = {}) {
    return z_open(Parity::Odd, pt, c, a);
}
inline double z_even_open(const ModulusPoint& pt, const CleParams& c, const SeriesAccuracy& a = {}) {
    return z_open(Parity::Even, pt, c, a);
}
inline double z_odd_closed(const ModulusPoint& pt, const CleParams& c, const SeriesAccuracy& a = {}) {
    return z_closed(Parity::Odd, pt, c, a);
}
inline double z_even_closed(const ModulusPoint& pt, const CleParams& c, const SeriesAccuracy& a = {}) {
    return z_closed(Parity::Even, pt, c, a);
}

enum class QaKind {
    TForested,     // QA_T^f
    KForested,     // QA^{k,f}
    Dense1,        // QA_1
    Dense2,        // QA_2
    Dense1Forested, // QA_1^f
    Dense2Forested, // QA_2^f
    Simple1,       // simple-phase QA_1
    Simple2,       // simple-phase QA_2
};

// M[L1 e^{-t L1} L2^{ix}] for the measure named by kind; k is used by KForested only.
cplx qa_moment(QaKind kind, double t, double x, const CleParams& params, int k = 1);

// m(tau) = Z(tau) * 2cos(chi)/(sqrt(2) pi) * eta(2 i tau). The eta factor is
// folded into each channel's series analytically, so neither product is formed.
double modulus_density(Parity kind, double tau, const CleParams& params, const SeriesAccuracy& acc = {});
double modulus_density(Parity kind, double tau, const CleParams& params, Channel channel,
                       const SeriesAccuracy& acc = {});
constexpr double kChannelSwitchTau = 0.2;

double laplace_lhs(Parity kind, double x, const CleParams& params, double quad_tol = 1e-10);
double laplace_rhs(Parity kind, double x, const CleParams& params);
// The same right-hand side written out in hyperbolic functions.
double laplace_rhs_hyperbolic(Parity kind, double x, const CleParams& params);
double verify_laplace(Parity kind, double x, const CleParams& params, double quad_tol = 1e-10);

} // namespace fkmix
