#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

namespace sbmc {

namespace detail {

template <class F>
double adaptive_simpson_rec(const F& f, double a, double b, double fa, double fm,
                            double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace detail

/// Adaptive Simpson on [a,b]. tol is treated as an absolute tolerance on
/// the result; callers wanting a relative tolerance scale it by a first
/// coarse pass (integrate_auto below does this).
template <class F>
double integrate(const F& f, double a, double b, double tol = 1e-12, int max_depth = 48) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

/// Two-pass wrapper giving a relative tolerance: coarse estimate first,
/// then refine with an absolute budget scaled to it.
template <class F>
double integrate_auto(const F& f, double a, double b, double rel_tol = 1e-10) {
    const double coarse = integrate(f, a, b, 1e-8, 20);
    const double scale = std::max(std::abs(coarse), 1e-300);
    return integrate(f, a, b, rel_tol * scale, 48);
}

/// Integral of g over [0, inf) for integrands that decay to zero. The upper
/// cutoff doubles until the local tail contribution is negligible.
template <class F>
double integrate_to_infinity(const F& g, double rel_tol = 1e-10) {
    double hi = 1.0;
    double total = integrate_auto(g, 0.0, hi, rel_tol);
    for (int k = 0; k < 60; ++k) {
        const double piece = integrate_auto(g, hi, 2.0 * hi, rel_tol);
        total += piece;
        hi *= 2.0;
        if (std::abs(piece) <= rel_tol * std::abs(total) && std::abs(g(hi)) * hi <= rel_tol * std::abs(total))
            return total;
    }
    throw std::runtime_error("integrate_to_infinity: no convergence, integrand decays too slowly");
}

} // namespace sbmc
