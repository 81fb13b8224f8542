#pragma once

#include <array>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "hchain/chain_model.hpp"
#include "hchain/lattice.hpp"
#include "hchain/quadrature.hpp"

namespace hchain {

/// Safety margin (sites) added to the signal cone when sizing windows.
inline constexpr long cone_margin = 16;

/// Smallest half-width L with L >= radius + v_max |t| + margin.
long required_half_width(long radius, double horizon, const ChainParams& params);

/// Thrown when the signal cone of the occupied (or observed) sites leaves the window.
class WindowOverrun : public std::runtime_error {
public:
    WindowOverrun(long required, long actual);
    long required_half_width() const { return required_; }

private:
    long required_;
};

/// Thrown when the stepping solver's energy drifts beyond tolerance.
class InstabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Mat2 = std::array<double, 4>;  // row-major (00, 01, 10, 11)

/// Whole-line Green function calG^{ij}_t(z) of one half's dispersion, tabulated
/// for z = 0..z_max by the periodic trapezoidal rule on a ThetaGrid.  All four
/// entries are even in z.
class FreeGreenFunction {
public:
    FreeGreenFunction(double t, Side side, const ChainParams& params, long z_max,
                      const ThetaGrid& grid);

    double t() const { return t_; }
    long z_max() const { return z_max_; }
    double value(int i, int j, long z) const;
    Mat2 at(long z) const;

private:
    double t_;
    long z_max_;
    std::vector<double> g00_;  // also g11
    std::vector<double> g01_;
    std::vector<double> g10_;
};

/// Power of two >= max(64, 8 (z_max + v_max |t|)).
std::size_t recommended_theta_points(long z_max, double t, const ChainParams& params);

/// Dirichlet Green function G^{ij}_{t,side}(x, y) = calG(x - y) - calG(x + y)
/// on a rectangle of same-sign sites.  Sites are given by magnitude:
/// x in [x_lo, x_hi], y in [y_lo, y_hi] with 0 <= lo <= hi, and the actual
/// lattice sites are +x (right) or -x (left).
class GreenKernel {
public:
    GreenKernel(Side side, double t, long x_lo, long x_hi, long y_lo, long y_hi,
                std::vector<Mat2> values);

    Side side() const { return side_; }
    double t() const { return t_; }
    long x_lo() const { return x_lo_; }
    long x_hi() const { return x_hi_; }
    long y_lo() const { return y_lo_; }
    long y_hi() const { return y_hi_; }

    /// Entry at lattice sites (x, y); both must have the kernel's sign (0 allowed).
    const Mat2& at(long x, long y) const;
    double value(int i, int j, long x, long y) const { return at(x, y)[2 * i + j]; }

private:
    Side side_;
    double t_;
    long x_lo_, x_hi_, y_lo_, y_hi_;
    std::vector<Mat2> values_;
};

/// n_theta == 0 selects recommended_theta_points.  An unshifted grid that
/// samples theta = 0 is rejected when kappa_side = 0.
GreenKernel green_kernel(double t, Side side, const ChainParams& params, long x_lo, long x_hi,
                         long y_lo, long y_hi, std::size_t n_theta = 0, bool shifted = true);

/// Exact solution U_0(t) Y0 of the decoupled problem with z(0, t) = 0.
/// Throws WindowOverrun when occupied radius + v_max |t| + margin exceeds L.
LatticeState evolve_unperturbed(const LatticeState& y0, double t, const ChainParams& params,
                                std::size_t n_theta = 0);

enum class Scheme { velocity_verlet, yoshida4 };

struct StepperOptions {
    double dt_internal = 1e-3;
    Scheme scheme = Scheme::yoshida4;
    /// Hold u(0) = v(0) = 0, decoupling the two halves.
    bool clamp_origin = false;
    /// Recorded sub-window [-R, R]; negative means the whole window.
    long observe_radius = -1;
    /// Relative energy growth that aborts the run.
    double energy_tolerance = 1e-6;
    SeedLineage lineage{};
};

/// Time-steps the chain with clamped walls at +-(L+1) and records the states on
/// `grid` (grid.t_begin() >= 0; Y0 is the state at t = 0).
Trajectory evolve_full(const LatticeState& y0, const TimeGrid& grid, const ChainParams& params,
                       const StepperOptions& options = {});

/// Precomputed U_0(t) rows for a fixed set of times and observation sites.
/// Output states live on [-observe_radius, observe_radius] with z(0) = 0.
class UnperturbedPropagator {
public:
    UnperturbedPropagator(const ChainParams& params, long half_width, long observe_radius,
                          std::vector<double> times, std::size_t n_theta = 0);
    ~UnperturbedPropagator();
    UnperturbedPropagator(UnperturbedPropagator&&) noexcept;
    UnperturbedPropagator& operator=(UnperturbedPropagator&&) noexcept;

    long half_width() const { return half_width_; }
    long observe_radius() const { return observe_radius_; }
    const std::vector<double>& times() const { return times_; }

    std::vector<LatticeState> apply(const LatticeState& y0) const;

private:
    struct Tables;
    long half_width_;
    long observe_radius_;
    std::vector<double> times_;
    std::unique_ptr<Tables> tables_;
};

/// Exact propagation of the truncated chain (clamped walls at +-(L+1)) by the
/// eigen-decomposition of its stiffness matrix.
class ModalPropagator {
public:
    ModalPropagator(const ChainParams& params, long half_width, bool clamp_origin = false);
    ~ModalPropagator();
    ModalPropagator(ModalPropagator&&) noexcept;
    ModalPropagator& operator=(ModalPropagator&&) noexcept;

    long half_width() const { return half_width_; }
    const ChainParams& params() const { return params_; }
    std::span<const double> frequencies() const;

    LatticeState evolve(const LatticeState& y0, double t) const;

    struct Plan;
    std::shared_ptr<const Plan> plan(std::vector<double> times, long observe_radius) const;
    std::vector<LatticeState> apply(const Plan& plan, const LatticeState& y0) const;

private:
    struct Modes;
    ChainParams params_;
    long half_width_;
    bool clamp_origin_;
    std::unique_ptr<Modes> modes_;
};

}  // namespace hchain
