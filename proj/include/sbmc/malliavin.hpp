#pragma once

#include <cmath>

#include "sbmc/dynamics.hpp"
#include "sbmc/types.hpp"

namespace sbmc {

/// The integration-by-parts weight for one trajectory and direction v,
/// split into its stochastic-integral and Hessian-trace parts.
struct IbpWeight {
    double martingale_term = 0.0;
    double trace_term = 0.0;
    double total = 0.0;
    double s_T = 0.0;
    Vec direction;
};

/// The weight is linear in v: total = <mart_grad + trace_grad, v>.
/// Caching the two gradients lets one simulation pass serve every
/// direction requested afterwards.
struct WeightGradient {
    Vec mart_grad;
    Vec trace_grad;
    double s_T = 0.0;

    double martingale(const Vec& v) const { return mart_grad.dot(v); }
    double trace(const Vec& v) const { return trace_grad.dot(v); }
    double total(const Vec& v) const { return mart_grad.dot(v) + trace_grad.dot(v); }
};

enum class TraceMode {
    Reduced, // O(n): similarity-invariant trace, Fubini over the jump times
    Naive    // O(n^2): literal double sum, kept as the brute-force oracle
};

namespace detail {

/// Trace of u -> hess(t, x, u, w): sum over basis directions.
inline double hessian_trace(const DriftModel& drift, double t, const Vec& x, const Vec& w) {
    const int d = static_cast<int>(x.size());
    double tr = 0.0;
    Vec e = Vec::Zero(d);
    for (int k = 0; k < d; ++k) {
        e[k] = 1.0;
        tr += drift.hess(t, x, e, w)[k];
        e[k] = 0.0;
    }
    return tr;
}

/// Naive trace term: each step's subordinator increment is a jump at the
/// step's right endpoint t_{i+1}, and its inner ds-integral runs over the
/// steps from that time on.
inline double trace_term_naive(const PathBundle& b, const DriftModel& drift,
                               const DiffusionSpec& diff, const Vec& v) {
    const int n = b.n_steps();
    const int d = b.dim();
    const Vec u = b.jacobian_inv[n] * v;

    // G_j with columns hess(e_l, w_j), w_j = J_j J_n^{-1} v, conjugated to
    // A_j = J_j^{-1} G_j J_j once per node.
    std::vector<Mat> a(n);
    Vec e = Vec::Zero(d);
    for (int j = 0; j < n; ++j) {
        const Vec w = b.jacobian[j] * u;
        Mat g(d, d);
        for (int l = 0; l < d; ++l) {
            e[l] = 1.0;
            g.col(l) = drift.hess(b.grid[j], b.x[j], e, w);
            e[l] = 0.0;
        }
        a[j] = b.jacobian_inv[j] * g * b.jacobian[j];
    }

    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        if (b.ds[i] == 0.0) continue;
        const double t_jump = b.grid[i + 1];
        const Mat m = diff.sigma_inv(t_jump) * b.jacobian[i + 1];
        const Mat m_inv = b.jacobian_inv[i + 1] * diff.sigma(t_jump);
        double inner = 0.0;
        for (int j = i + 1; j < n; ++j)
            inner += b.step_dt(j) * (m * a[j] * m_inv).trace();
        total += b.ds[i] * inner;
    }
    return total;
}

} // namespace detail

/// Both gradients of the weight in v, from one sweep over the bundle.
inline WeightGradient weight_gradient(const PathBundle& b, const DriftModel& drift,
                                      const DiffusionSpec& diff) {
    const int n = b.n_steps();
    const int d = b.dim();

    Vec mart_acc = Vec::Zero(d);
    for (int i = 0; i < n; ++i)
        mart_acc.noalias() += (diff.sigma_inv(b.grid[i]) * b.jacobian[i]).transpose() * b.dw[i];

    // trace = sum_j S(t_j) dt_j Tr{u -> hess(u, J_j J_n^{-1} v)}; with
    // q_j[m] = sum_k hess(e_k, e_m)[k] this is <q_j, J_j J_n^{-1} v>.
    Vec trace_acc = Vec::Zero(d);
    Vec ek = Vec::Zero(d), em = Vec::Zero(d);
    Vec q(d);
    for (int j = 1; j < n; ++j) {
        if (b.s_values[j] == 0.0) continue;
        for (int m = 0; m < d; ++m) {
            em[m] = 1.0;
            double s = 0.0;
            for (int k = 0; k < d; ++k) {
                ek[k] = 1.0;
                s += drift.hess(b.grid[j], b.x[j], ek, em)[k];
                ek[k] = 0.0;
            }
            q[m] = s;
            em[m] = 0.0;
        }
        trace_acc.noalias() += (b.s_values[j] * b.step_dt(j)) * (b.jacobian[j].transpose() * q);
    }

    WeightGradient g;
    g.mart_grad = b.jacobian_inv[n].transpose() * mart_acc;
    g.trace_grad = b.jacobian_inv[n].transpose() * trace_acc;
    g.s_T = b.s_total();
    return g;
}

/// The pathwise weight: Ito sum of (sigma^{-1} J)* against the Brownian
/// increments paired with J_T^{-1} v, plus the drift-Hessian trace
/// correction. Reduced mode is the default; Naive is the O(n^2) literal
/// transcription used to cross-check it.
inline IbpWeight ibp_weight(const PathBundle& b, const DriftModel& drift,
                            const DiffusionSpec& diff, const Vec& v,
                            TraceMode mode = TraceMode::Reduced) {
    require(v.size() == b.x0.size(), "ibp_weight: direction dimension mismatch");
    const int n = b.n_steps();
    const Vec u = b.jacobian_inv[n] * v;

    IbpWeight w;
    w.direction = v;
    w.s_T = b.s_total();

    for (int i = 0; i < n; ++i)
        w.martingale_term += b.dw[i].dot(diff.sigma_inv(b.grid[i]) * (b.jacobian[i] * u));

    if (mode == TraceMode::Reduced) {
        for (int j = 1; j < n; ++j) {
            if (b.s_values[j] == 0.0) continue;
            const Vec wj = b.jacobian[j] * u;
            w.trace_term += b.s_values[j] * b.step_dt(j) *
                            detail::hessian_trace(drift, b.grid[j], b.x[j], wj);
        }
    } else {
        w.trace_term = detail::trace_term_naive(b, drift, diff, v);
    }
    w.total = w.martingale_term + w.trace_term;
    return w;
}

/// Weight for a fixed finite-jump path ell: simulate a fresh trajectory
/// driven by ell and evaluate the weight on it. The associated identity
/// divides by ell(T), exactly as with a sampled path.
inline IbpWeight finite_jump_weight(const SubordinatorPath& ell, const DriftModel& drift,
                                    const DiffusionSpec& diff, const Vec& x0, const Vec& v,
                                    Rng& rng) {
    PathBundle b = simulate(x0, drift, diff, ell, zero_perturbation(static_cast<int>(x0.size())), rng);
    return ibp_weight(b, drift, diff, v);
}

inline IbpWeight finite_jump_weight(const SubordinatorPath& ell, const DriftModel& drift,
                                    const DiffusionSpec& diff, const Vec& x0, const Vec& v,
                                    NoiseSource& noise) {
    PathBundle b = simulate(x0, drift, diff, ell, zero_perturbation(static_cast<int>(x0.size())), noise);
    return ibp_weight(b, drift, diff, v);
}

} // namespace malliavin_guard_unused
