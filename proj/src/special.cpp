#include "fkmix/special.hpp"
#include "fkmix/lattice.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <queue>
#include <vector>

namespace fkmix {

namespace {

constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7,
};

cplx lanczos(cplx z) {
    z -= 1.0;
    cplx x = kLanczos[0];
    for (int i = 1; i < 9; ++i)
        x += kLanczos[i] / (z + static_cast<double>(i));
    cplx t = z + kLanczosG + 0.5;
    return std::sqrt(2.0 * std::numbers::pi) * std::pow(t, z + 0.5) * std::exp(-t) * x;
}

// Kronrod 15-point nodes (positive half) and weights, with the embedded Gauss 7-point weights.
constexpr std::array<double, 8> kXk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851, 0.864864423359769072789712788640926,
    0.741531185599394439863864773280788, 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
};
constexpr std::array<double, 8> kWk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204, 0.104790010322250183839876322541518,
    0.140653259715525918745189590510238, 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780, 0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
};

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gauss_kronrod(const std::function<double(double)>& f, double a, double b) {
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double fc = f(c);
    double k = fc * kWk[7], g = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        double dx = h * kXk[j];
        double s = f(c - dx) + f(c + dx);
        k += kWk[j] * s;
        if (j % 2 == 1)
            g += kWg[j / 2] * s;
    }
    return {a, b, k * h, std::abs((k - g) * h)};
}

} // namespace

cplx complex_gamma(cplx z) {
    if (z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real()))
        throw domain_error("gamma pole at nonpositive integer");
    if (z.real() < 0.5)
        return std::numbers::pi / (std::sin(std::numbers::pi * z) * lanczos(1.0 - z));
    return lanczos(z);
}

double dedekind_eta(double t, double tol) {
    if (!(t > 0))
        throw domain_error("dedekind_eta needs t > 0");
    const double x = std::exp(-2.0 * std::numbers::pi * t);
    double prod = 1.0, xk = x;
    for (int k = 1; k < 100000 && xk > tol * 1e-3; ++k) {
        prod *= 1.0 - xk;
        xk *= x;
    }
    return std::exp(-std::numbers::pi * t / 12.0) * prod;
}

QuadResult integrate(const std::function<double(double)>& f, double a, double b, double rel_tol, double abs_tol,
                     int max_panels) {
    std::priority_queue<Panel> heap;
    Panel first = gauss_kronrod(f, a, b);
    heap.push(first);
    double total = first.value, err = first.error;
    int evals = 15;
    while (err > std::max(abs_tol, rel_tol * std::abs(total))) {
        if (static_cast<int>(heap.size()) >= max_panels)
            throw accuracy_error("adaptive quadrature did not converge on [" + std::to_string(a) + "," +
                                 std::to_string(b) + "]");
        Panel worst = heap.top();
        heap.pop();
        double mid = 0.5 * (worst.a + worst.b);
        Panel l = gauss_kronrod(f, worst.a, mid), r = gauss_kronrod(f, mid, worst.b);
        evals += 30;
        total += l.value + r.value - worst.value;
        err += l.error + r.error - worst.error;
        heap.push(l);
        heap.push(r);
    }
    // recompute sums from the panels to shed accumulated rounding
    total = 0.0;
    err = 0.0;
    while (!heap.empty()) {
        total += heap.top().value;
        err += heap.top().error;
        heap.pop();
    }
    return {total, err, evals};
}

QuadResult integrate_to_infinity(const std::function<double(double)>& f, double a, double first_width,
                                 double rel_tol, int max_panels) {
    QuadResult out;
    double lo = a, w = first_width;
    for (int i = 0; i < max_panels; ++i) {
        QuadResult piece = integrate(f, lo, lo + w, rel_tol, 1e-3 * rel_tol * std::abs(out.value));
        out.value += piece.value;
        out.error += piece.error;
        out.evaluations += piece.evaluations;
        if (i > 0 && std::abs(piece.value) <= rel_tol * std::abs(out.value))
            return out;
        lo += w;
        w *= 2.0;
    }
    throw accuracy_error("semi-infinite quadrature tail did not decay");
}

} // namespace fkmix
