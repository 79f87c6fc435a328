#pragma once

#include <cmath>
#include <cstdint>

namespace sbmc {

/// A Monte Carlo result: sample mean, standard error, sample count, seed.
struct Estimate {
    double mean = 0.0;
    double stderr_ = 0.0; // sample standard deviation / sqrt(n)
    long n = 0;
    std::uint64_t seed = 0;
    bool diverged = false; // set when a running sum left the finite range
};

/// Streaming mean/variance (Welford). merge() is Chan's pairwise update,
/// applied in a fixed order so parallel reductions stay deterministic.
class Accumulator {
public:
    void add(double x) {
        ++n_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }

    void merge(const Accumulator& o) {
        if (o.n_ == 0) return;
        if (n_ == 0) {
            *this = o;
            return;
        }
        const double d = o.mean_ - mean_;
        const double nt = static_cast<double>(n_ + o.n_);
        m2_ += o.m2_ + d * d * (static_cast<double>(n_) * static_cast<double>(o.n_)) / nt;
        mean_ += d * static_cast<double>(o.n_) / nt;
        n_ += o.n_;
    }

    long count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double stderr_of_mean() const {
        return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
    }

    Estimate estimate(std::uint64_t seed) const {
        return Estimate{mean(), stderr_of_mean(), n_, seed, false};
    }

private:
    long n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

} // namespace sbmc
