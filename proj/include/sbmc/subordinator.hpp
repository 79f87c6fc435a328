#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <variant>
#include <vector>

#include "sbmc/estimate.hpp"
#include "sbmc/rng.hpp"
#include "sbmc/types.hpp"

namespace sbmc {

/// Laplace exponent family of the time change S. Stable{alpha} is
/// B(r) = r^{alpha/2}, so W_{S(t)} is the rotationally symmetric
/// alpha-stable process; DeterministicTime is S(t) = t.
struct Stable {
    double alpha;
};
struct DeterministicTime {};

struct BernsteinSpec {
    std::variant<Stable, DeterministicTime> kind;

    static BernsteinSpec stable(double alpha) {
        require(alpha > 0.0 && alpha < 2.0, "BernsteinSpec: alpha must lie in (0,2)");
        return BernsteinSpec{Stable{alpha}};
    }
    static BernsteinSpec deterministic() { return BernsteinSpec{DeterministicTime{}}; }

    bool is_stable() const { return std::holds_alternative<Stable>(kind); }
    double alpha() const { return std::get<Stable>(kind).alpha; }
};

/// A discretized nondecreasing time-change path on a fixed physical grid.
/// Sampled stable paths are represented as pure-jump paths: the increment
/// accrued over (t_i, t_{i+1}] is one jump placed at t_{i+1}.
struct SubordinatorPath {
    std::vector<double> grid;   // 0 = t_0 < ... < t_n = T
    std::vector<double> values; // S(t_0) ... S(t_n), nondecreasing, values[0] = 0
    struct Jump {
        double time; // lies on the grid
        double size; // > 0
    };
    std::vector<Jump> jumps;

    int n_steps() const { return static_cast<int>(grid.size()) - 1; }
    double horizon() const { return grid.back(); }
    double total() const { return values.back(); }
    double step_dt(int i) const { return grid[i + 1] - grid[i]; }
    double step_ds(int i) const { return values[i + 1] - values[i]; }
};

/// One-sided stable variate with Laplace transform exp(-r^gamma), gamma in
/// (0,1), by Kanter's transformation of a uniform and an exponential.
inline double sample_one_sided_stable(double gamma, Rng& rng) {
    const double theta = std::numbers::pi * rng.uniform();
    const double w = rng.exponential();
    const double a = std::pow(std::sin(gamma * theta), gamma) *
                     std::pow(std::sin((1.0 - gamma) * theta), 1.0 - gamma) /
                     std::sin(theta);
    return std::pow(a, 1.0 / gamma) * std::pow(w, -(1.0 - gamma) / gamma);
}

/// Floor below which a sampled S(T) is treated as numerically zero; the
/// path is rejected and resampled to keep 1/S(T) representable.
inline constexpr double kSubordinatorFloor = 1e-30;

/// Sample a subordinator path on a uniform n-step grid over [0,T].
/// Stable increments are exact (Kanter), one jump per step at the step's
/// right endpoint. rejections, when given, counts paths discarded by the
/// S(T) positivity guard.
inline SubordinatorPath sample_path(const BernsteinSpec& spec, double horizon, int n_steps,
                                    Rng& rng, long* rejections = nullptr) {
    require(horizon > 0.0, "sample_path: horizon must be positive");
    require(n_steps >= 1, "sample_path: n_steps must be >= 1");

    SubordinatorPath path;
    path.grid.resize(n_steps + 1);
    const double dt = horizon / n_steps;
    for (int i = 0; i <= n_steps; ++i) path.grid[i] = (i == n_steps) ? horizon : i * dt;

    path.values.resize(n_steps + 1);
    if (!spec.is_stable()) {
        path.values = path.grid;
        return path;
    }

    const double gamma = 0.5 * spec.alpha();
    // c^gamma = dt makes E exp(-r * c X) = exp(-dt r^gamma).
    const double scale = std::pow(dt, 1.0 / gamma);
    for (;;) {
        path.values[0] = 0.0;
        path.jumps.clear();
        path.jumps.reserve(n_steps);
        for (int i = 0; i < n_steps; ++i) {
            const double ds = scale * sample_one_sided_stable(gamma, rng);
            path.values[i + 1] = path.values[i] + ds;
            path.jumps.push_back({path.grid[i + 1], ds});
        }
        if (path.values[n_steps] >= kSubordinatorFloor) break;
        if (rejections) ++(*rejections);
    }
    return path;
}

/// Keep only jumps of size >= eps and rebuild the values as cumulative
/// sums of what remains. The truncation of a path with no jumps is the
/// zero path, matching the pure-jump definition of the cut-off.
inline SubordinatorPath truncate_small_jumps(const SubordinatorPath& path, double eps) {
    require(eps > 0.0, "truncate_small_jumps: eps must be positive");
    SubordinatorPath out;
    out.grid = path.grid;
    out.jumps.reserve(path.jumps.size());
    for (const auto& j : path.jumps)
        if (j.size >= eps) out.jumps.push_back(j);

    out.values.assign(path.grid.size(), 0.0);
    std::size_t k = 0;
    double acc = 0.0;
    for (std::size_t i = 1; i < out.grid.size(); ++i) {
        while (k < out.jumps.size() && out.jumps[k].time <= out.grid[i]) {
            acc += out.jumps[k].size;
            ++k;
        }
        out.values[i] = acc;
    }
    return out;
}

/// Deterministic finite-jump path on a uniform n-step grid over [0,T];
/// jump times not already on the grid are inserted as extra nodes.
inline SubordinatorPath make_jump_path(double horizon, int n_steps,
                                       std::vector<SubordinatorPath::Jump> jumps) {
    require(horizon > 0.0, "make_jump_path: horizon must be positive");
    require(n_steps >= 1, "make_jump_path: n_steps must be >= 1");
    std::sort(jumps.begin(), jumps.end(),
              [](const auto& a, const auto& b) { return a.time < b.time; });
    for (const auto& j : jumps) {
        require(j.time > 0.0 && j.time <= horizon, "make_jump_path: jump time outside (0,T]");
        require(j.size > 0.0, "make_jump_path: jump size must be positive");
    }

    SubordinatorPath path;
    path.grid.reserve(n_steps + 1 + jumps.size());
    const double dt = horizon / n_steps;
    std::size_t k = 0;
    for (int i = 0; i <= n_steps; ++i) {
        const double t = (i == n_steps) ? horizon : i * dt;
        while (k < jumps.size() && jumps[k].time < t - 1e-12 * horizon) {
            path.grid.push_back(jumps[k].time);
            ++k;
        }
        if (k < jumps.size() && std::abs(jumps[k].time - t) <= 1e-12 * horizon) {
            jumps[k].time = t; // snap to the grid node
            ++k;
        }
        path.grid.push_back(t);
    }
    path.jumps = std::move(jumps);

    path.values.assign(path.grid.size(), 0.0);
    std::size_t j = 0;
    double acc = 0.0;
    for (std::size_t i = 1; i < path.grid.size(); ++i) {
        while (j < path.jumps.size() && path.jumps[j].time <= path.grid[i]) {
            acc += path.jumps[j].size;
            ++j;
        }
        path.values[i] = acc;
    }
    return path;
}

/// E S(t)^{-p} for the Stable(alpha) subordinator, in closed form.
inline double neg_moment(double alpha, double t, double p) {
    require(alpha > 0.0 && alpha < 2.0, "neg_moment: alpha must lie in (0,2)");
    require(t > 0.0, "neg_moment: t must be positive");
    require(p > 0.0, "neg_moment: p must be positive");
    return 2.0 * std::tgamma(2.0 * p / alpha) / (alpha * std::tgamma(p)) *
           std::pow(t, -2.0 * p / alpha);
}

/// Monte Carlo estimate of E exp(lambda / S(t)), alpha in (1,2). A draw
/// that overflows exp() marks the estimate diverged instead of returning
/// a number.
inline Estimate exp_inv_moment(double alpha, double t, double lambda, long n_samples, Rng& rng,
                               std::uint64_t seed_label = 0) {
    require(alpha > 1.0 && alpha < 2.0, "exp_inv_moment: alpha must lie in (1,2)");
    require(t > 0.0, "exp_inv_moment: t must be positive");
    require(lambda >= 0.0, "exp_inv_moment: lambda must be nonnegative");
    require(n_samples >= 2, "exp_inv_moment: need at least 2 samples");

    const double gamma = 0.5 * alpha;
    const double scale = std::pow(t, 1.0 / gamma);
    Accumulator acc;
    for (long k = 0; k < n_samples; ++k) {
        double s = scale * sample_one_sided_stable(gamma, rng);
        while (s < kSubordinatorFloor) s = scale * sample_one_sided_stable(gamma, rng);
        const double x = std::exp(lambda / s);
        if (!std::isfinite(x)) {
            Estimate bad;
            bad.n = k;
            bad.seed = seed_label;
            bad.diverged = true;
            bad.mean = std::numeric_limits<double>::quiet_NaN();
            bad.stderr_ = std::numeric_limits<double>::quiet_NaN();
            return bad;
        }
        acc.add(x);
    }
    return acc.estimate(seed_label);
}

/// Envelope shape exp[c*lambda/t^{2/alpha} + c*lambda^{alpha/(2(alpha-1))}/t^{1/(alpha-1)}]
/// that E exp(lambda/S(t)) must stay below for some constant c, alpha in (1,2).
inline double exp_inv_envelope_exponent(double alpha, double t, double lambda) {
    require(alpha > 1.0 && alpha < 2.0, "exp_inv_envelope_exponent: alpha must lie in (1,2)");
    return lambda / std::pow(t, 2.0 / alpha) +
           std::pow(lambda, alpha / (2.0 * (alpha - 1.0))) / std::pow(t, 1.0 / (alpha - 1.0));
}

} // namespace sbmc
