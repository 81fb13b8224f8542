#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "hchain/chain_model.hpp"
#include "hchain/lattice.hpp"

namespace hchain {

/// v(x, t) = w(x) b((t - c) / h) / (h I0) with the C-infinity bump
/// b(s) = exp(-1 / (1 - s^2)) on (-1, 1) and I0 = int b, so that
/// int v(x, t) dt = w(x).
class TestFunction {
public:
    TestFunction() = default;
    TestFunction(std::vector<std::pair<long, double>> weights, double center, double half_width);
    static TestFunction point(long site, double center, double half_width, double weight = 1.0);

    const std::vector<std::pair<long, double>>& weights() const { return weights_; }
    double center() const { return center_; }
    double half_width() const { return half_width_; }
    double t_begin() const { return center_ - half_width_; }
    double t_end() const { return center_ + half_width_; }
    long max_abs_site() const;

    /// Temporal factor b((t - c)/h) / (h I0).
    double profile(double t) const;
    /// int profile(t) e^{i omega t} dt.
    std::complex<double> profile_transform(double omega) const;
    /// S(theta) = sum of w(x) sin(x theta) over sites on `side` (x = 0 excluded).
    double sine_sum(double theta, Side side) const;

    TestFunction shifted(double dt) const;

    friend bool operator==(const TestFunction&, const TestFunction&) = default;

private:
    std::vector<std::pair<long, double>> weights_;
    double center_ = 0.0;
    double half_width_ = 1.0;
};

/// int_{-1}^{1} exp(-1 / (1 - s^2)) ds
double bump_integral();

/// Quadrature weights realizing [S_tau u, v] = sum_x int u(x, t + tau) v(x, t) dt
/// on a trajectory grid: composite Simpson over the grid indices covering the
/// support (extended to an even interval count), exact sum over sites.
class PairingPlan {
public:
    PairingPlan(const TestFunction& v, const TimeGrid& grid, long half_width, double tau = 0.0);

    std::size_t first_index() const { return first_; }
    std::size_t count() const { return count_; }
    /// Weight of u(x, t_{first + k}) for x = sites()[s]: row-major (k, s).
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<long>& sites() const { return sites_; }

    double apply(const Trajectory& traj) const;
    double apply(std::span<const LatticeState> states) const;

private:
    std::size_t first_ = 0;
    std::size_t count_ = 0;
    std::vector<long> sites_;
    std::vector<double> weights_;
};

/// [S_tau u, v]; throws when v's support leaves the recorded range or window.
double pair(const Trajectory& traj, const TestFunction& v, double tau = 0.0);

}  // namespace hchain
