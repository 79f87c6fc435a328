#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "sbmc/rng.hpp"
#include "sbmc/subordinator.hpp"
#include "sbmc/types.hpp"

namespace sbmc {

/// Drift b_t(x) with hand-coded first and second derivatives and declared
/// sup bounds. grad(t,x)*u = directional derivative of b along u;
/// hess(t,x,u,w) = second directional derivative along (u,w).
struct DriftModel {
    std::function<Vec(double, const Vec&)> b;
    std::function<Mat(double, const Vec&)> grad;
    std::function<Vec(double, const Vec&, const Vec&, const Vec&)> hess;
    std::function<double(double)> K1; // bound on ||grad b_t||, increasing in t
    std::function<double(double)> K2; // bound on ||hess b_t||, increasing in t
    std::string name;
};

/// Time-dependent invertible diffusion matrix with its inverse supplied
/// directly (never computed by inversion at run time).
struct DiffusionSpec {
    std::function<Mat(double)> sigma;
    std::function<Mat(double)> sigma_inv;
    std::function<double(double)> lambda1; // bound on ||sigma_t||
    std::function<double(double)> lambda2; // bound on ||sigma_t^{-1}||
    std::string name;
};

/// Deterministic additive perturbation path with V(0) = 0.
struct DeterministicPath {
    std::function<Vec(double)> V;
    std::string name;
};

inline DeterministicPath zero_perturbation(int d) {
    return DeterministicPath{[d](double) { return Vec::Zero(d); }, "zero"};
}

/// One simulated trajectory on the subordinator's grid: state X, Jacobian
/// flow J and its inverse, and the driving increments.
struct PathBundle {
    std::vector<double> grid;
    std::vector<double> s_values; // S(t_i)
    std::vector<Vec> x;           // X at each node
    std::vector<Mat> jacobian;    // J at each node
    std::vector<Mat> jacobian_inv;
    std::vector<Vec> dw; // Brownian increment over each step, N(0, dS_i I)
    std::vector<double> ds;
    Vec x0;

    int n_steps() const { return static_cast<int>(grid.size()) - 1; }
    int dim() const { return static_cast<int>(x0.size()); }
    double horizon() const { return grid.back(); }
    double s_total() const { return s_values.back(); }
    double step_dt(int i) const { return grid[i + 1] - grid[i]; }
};

/// Supplies the standard-normal draws behind the Brownian increments.
/// FixedNoise replays a caller-provided table, which is how truncation
/// couplings reuse the Gaussian attached to a retained jump.
struct NoiseSource {
    virtual ~NoiseSource() = default;
    virtual void fill(int step, Vec& z) = 0;
};

struct RngNoise final : NoiseSource {
    explicit RngNoise(Rng& rng) : rng_(&rng) {}
    void fill(int, Vec& z) override {
        for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = rng_->normal();
    }
    Rng* rng_;
};

struct FixedNoise final : NoiseSource {
    explicit FixedNoise(const Mat& draws) : draws_(&draws) {}
    void fill(int step, Vec& z) override { z = draws_->col(step); }
    const Mat* draws_;
};

/// Euler scheme for dX = b dt + sigma dW_{S(t)} + dV with left-point
/// coefficients; dW_i ~ N(0, dS_i I). The Jacobian flow advances by
/// J <- (I + dt grad b) J and its inverse by the inverse factor, so
/// J * J^{-1} stays at machine identity along the whole path.
inline PathBundle simulate(const Vec& x0, const DriftModel& drift, const DiffusionSpec& diff,
                           const SubordinatorPath& sub, const DeterministicPath& v_path,
                           NoiseSource& noise) {
    const int d = static_cast<int>(x0.size());
    const int n = sub.n_steps();
    require(n >= 1, "simulate: subordinator path has no steps");

    PathBundle b;
    b.grid = sub.grid;
    b.s_values = sub.values;
    b.x0 = x0;
    b.x.resize(n + 1);
    b.jacobian.resize(n + 1);
    b.jacobian_inv.resize(n + 1);
    b.dw.resize(n);
    b.ds.resize(n);

    b.x[0] = x0;
    b.jacobian[0] = Mat::Identity(d, d);
    b.jacobian_inv[0] = Mat::Identity(d, d);

    Vec z(d);
    Vec v_prev = v_path.V(sub.grid[0]);
    Mat step_factor(d, d);
    for (int i = 0; i < n; ++i) {
        const double t = sub.grid[i];
        const double dt = sub.step_dt(i);
        const double ds = sub.step_ds(i);
        b.ds[i] = ds;

        noise.fill(i, z);
        b.dw[i] = std::sqrt(ds) * z;

        Vec v_next = v_path.V(sub.grid[i + 1]);
        b.x[i + 1] = b.x[i] + dt * drift.b(t, b.x[i]) + diff.sigma(t) * b.dw[i] +
                     (v_next - v_prev);
        v_prev = std::move(v_next);

        step_factor = Mat::Identity(d, d) + dt * drift.grad(t, b.x[i]);
        b.jacobian[i + 1] = step_factor * b.jacobian[i];
        b.jacobian_inv[i + 1] = b.jacobian_inv[i] * step_factor.inverse();

        if (!b.x[i + 1].allFinite())
            throw simulation_error("simulate: state left the finite range", i);
    }
    return b;
}

inline PathBundle simulate(const Vec& x0, const DriftModel& drift, const DiffusionSpec& diff,
                           const SubordinatorPath& sub, const DeterministicPath& v_path,
                           Rng& rng) {
    RngNoise noise(rng);
    return simulate(x0, drift, diff, sub, v_path, noise);
}

/// Coupled coarse/fine comparison for step-size selection. The same
/// Brownian motion drives both grids: deterministic-time increments are
/// split by Brownian bridge, stable paths keep their jumps (and the
/// Gaussians attached to them) fixed and only refine the drift stepping.
/// Returns the max-norm distance between the solutions at shared nodes.
inline double grid_refinement_error(const DriftModel& drift, const DiffusionSpec& diff,
                                    const BernsteinSpec& spec, const Vec& x0, double horizon,
                                    int n_coarse, int factor, Rng& rng,
                                    const DeterministicPath* v_path = nullptr) {
    require(n_coarse >= 1, "grid_refinement_error: n_coarse must be >= 1");
    require(factor >= 2, "grid_refinement_error: factor must be >= 2");
    const int d = static_cast<int>(x0.size());
    const DeterministicPath v = v_path ? *v_path : zero_perturbation(d);

    SubordinatorPath coarse = sample_path(spec, horizon, n_coarse, rng);
    Mat coarse_z(d, n_coarse);
    for (int i = 0; i < n_coarse; ++i)
        for (int k = 0; k < d; ++k) coarse_z(k, i) = rng.normal();

    const int n_fine = n_coarse * factor;
    SubordinatorPath fine;
    fine.grid.resize(n_fine + 1);
    const double dtf = horizon / n_fine;
    for (int i = 0; i <= n_fine; ++i) fine.grid[i] = (i == n_fine) ? horizon : i * dtf;
    fine.values.assign(n_fine + 1, 0.0);

    Mat fine_z = Mat::Zero(d, n_fine);
    if (!spec.is_stable()) {
        // S(t) = t: split each coarse increment evenly and bridge the
        // Gaussian so the sub-increments add back to the coarse one.
        for (int i = 0; i <= n_fine; ++i) fine.values[i] = fine.grid[i];
        for (int i = 0; i < n_coarse; ++i) {
            const double ds_c = coarse.step_ds(i);
            Vec rem = std::sqrt(ds_c) * coarse_z.col(i);
            double var_rem = ds_c;
            const double ds_f = ds_c / factor;
            for (int j = 0; j < factor - 1; ++j) {
                Vec part(d);
                const double c = ds_f / var_rem;
                const double cond_sd = std::sqrt(ds_f * (var_rem - ds_f) / var_rem);
                for (int k = 0; k < d; ++k) part[k] = c * rem[k] + cond_sd * rng.normal();
                fine_z.col(i * factor + j) = part / std::sqrt(ds_f);
                rem -= part;
                var_rem -= ds_f;
            }
            fine_z.col(i * factor + factor - 1) = rem / std::sqrt(ds_f);
        }
    } else {
        // Pure-jump path: a coarse jump at node i+1 lands in the fine step
        // whose right endpoint is the same time, with the same Gaussian.
        for (int i = 0; i < n_coarse; ++i) {
            const int jf = (i + 1) * factor - 1;
            const double ds = coarse.step_ds(i);
            for (int f = 0; f <= factor - 1; ++f) {
                const int idx = i * factor + f;
                fine.values[idx + 1] = fine.values[idx] + (idx == jf ? ds : 0.0);
            }
            if (ds > 0.0) fine.jumps.push_back({fine.grid[jf + 1], ds});
            fine_z.col(jf) = coarse_z.col(i);
        }
    }

    FixedNoise cn(coarse_z), fn(fine_z);
    PathBundle bc = simulate(x0, drift, diff, coarse, v, cn);
    PathBundle bf = simulate(x0, drift, diff, fine, v, fn);

    double err = 0.0;
    for (int i = 0; i <= n_coarse; ++i)
        err = std::max(err, (bc.x[i] - bf.x[i * factor]).lpNorm<Eigen::Infinity>());
    return err;
}

/// Max relative mismatch between grad (resp. hess) and finite differences
/// of b (resp. grad) over randomized probes; used by validation tests.
inline std::pair<double, double> probe_drift_derivatives(const DriftModel& drift, int d,
                                                         int n_probes, Rng& rng,
                                                         double step = 1e-4) {
    double worst_grad = 0.0, worst_hess = 0.0;
    for (int probe = 0; probe < n_probes; ++probe) {
        const double t = rng.uniform();
        Vec x(d), u(d), w(d);
        for (int k = 0; k < d; ++k) {
            x[k] = 4.0 * rng.uniform() - 2.0;
            u[k] = rng.normal();
            w[k] = rng.normal();
        }
        u.normalize();
        w.normalize();

        const Vec fd_grad = (drift.b(t, x + step * u) - drift.b(t, x - step * u)) / (2.0 * step);
        const Vec an_grad = drift.grad(t, x) * u;
        worst_grad = std::max(worst_grad,
                              (fd_grad - an_grad).norm() / std::max(1.0, an_grad.norm()));

        const Vec fd_hess =
            ((drift.grad(t, x + step * u) - drift.grad(t, x - step * u)) / (2.0 * step)) * w;
        const Vec an_hess = drift.hess(t, x, u, w);
        worst_hess = std::max(worst_hess,
                              (fd_hess - an_hess).norm() / std::max(1.0, an_hess.norm()));
    }
    return {worst_grad, worst_hess};
}

} // namespace sbmc
