#pragma once

#include <complex>
#include <functional>
#include <limits>

namespace fkmix {

using cplx = std::complex<double>;

// Lanczos approximation (g = 7, 9 terms) with reflection for Re z < 1/2.
cplx complex_gamma(cplx z);

// eta(i t) = e^{-pi t/12} prod_{k>=1} (1 - e^{-2 pi k t}) for real t > 0.
double dedekind_eta(double t, double tol = 1e-15);

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    int evaluations = 0;
};

// Adaptive Gauss-Kronrod (7/15) on [a,b], bisecting the worst panel until the
// summed error estimate drops below max(abs_tol, rel_tol*|I|).
QuadResult integrate(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-10,
                     double abs_tol = 0.0, int max_panels = 4000);

// Integral over [a, inf): panels of doubling width until a panel's
// contribution is below rel_tol times the running total.
QuadResult integrate_to_infinity(const std::function<double(double)>& f, double a, double first_width,
                                 double rel_tol = 1e-10, int max_panels = 200);

} // namespace fkmix
