#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "hchain/chain_model.hpp"
#include "hchain/initial_measures.hpp"
#include "hchain/quadrature.hpp"
#include "hchain/test_function.hpp"

namespace hchain {

/// Limit spectrum entries at one theta.  Off-diagonal entries are purely
/// imaginary: q-hat^01 = i * q01_imag, q-hat^10 = -q-hat^01.
struct LimitValue {
    double q00 = 0.0;
    double q01_imag = 0.0;
    double q11 = 0.0;

    CMat2 matrix() const;
};

/// Limiting spectral matrix of `side` from the initial spectral density
/// q-hat_side(theta).  Throws on phi(theta) = 0 and on q00 < -1e-12.
LimitValue limit_value(const CMat2& qhat, double theta, Side side, const ChainParams& params);

/// Tabulated limit spectrum on a theta grid.
class LimitSpectrum {
public:
    LimitSpectrum(Side side, ThetaGrid grid, std::vector<LimitValue> values);

    Side side() const { return side_; }
    const ThetaGrid& grid() const { return grid_; }
    const LimitValue& at(std::size_t k) const { return values_[k]; }
    std::size_t size() const { return values_.size(); }

private:
    Side side_;
    ThetaGrid grid_;
    std::vector<LimitValue> values_;
};

/// Unshifted grids with kappa_side = 0 are rejected.
LimitSpectrum limit_spectrum(const SpectralDensity& density, const ChainParams& params, Side side,
                             std::size_t n_theta = 2048, bool shifted = true);

/// Adaptive quadrature settings for the covariance integrals.
struct QuadratureOptions {
    std::size_t initial_panels = 8;
    std::size_t order = 32;
    std::size_t max_panels = 1 << 14;
    double tolerance = 1e-10;
};

/// Result of an adaptively refined integral.
struct QuadratureResult {
    double value = 0.0;
    double change = 0.0;  // |last - previous|
    std::size_t nodes = 0;
};

/// int over the torus of f(theta) by composite Gauss-Legendre on [0, pi],
/// integrating f(theta) + f(-theta), doubling the panel count until two
/// successive values differ by less than the tolerance (absolute, or
/// relative to |value| when that is larger than 1).
QuadratureResult torus_integral(const std::function<double(double)>& f,
                                const QuadratureOptions& options = {});

/// Q_infty^nu(x, y): diagonal entries on same-sign pairs, zero otherwise.
Mat2 limit_equal_time_cov(long x, long y, const SpectralDensityPair& densities,
                          const ChainParams& params, const QuadratureOptions& options = {});

/// Q_infty^{P,nu}(x1, x2, t1, t2); depends on t1 - t2 only.
double limit_spacetime_cov(long x1, long x2, double t1, double t2,
                           const SpectralDensityPair& densities, const ChainParams& params,
                           const QuadratureOptions& options = {});

/// q^P_infty(x, t) for the homogeneous chain; throws unless params.is_homogeneous().
double homogeneous_spacetime_cov(long x, double t, const SpectralDensityPair& densities,
                                 const ChainParams& params, const QuadratureOptions& options = {});

/// Limit of E([S_{tau0 + tau} u, v1][S_{tau0} u, v2]) for the unperturbed chain as
/// tau0 -> infinity: sum over sides of
/// (2/pi) int q00 S1 S2 Re(e^{i phi tau} B1(phi) conj(B2(phi))) dtheta.
/// tau = 0 gives the space-time limit form of the pair (v1, v2).
double limit_pairing(const TestFunction& v1, const TestFunction& v2, double tau,
                     const SpectralDensityPair& densities, const ChainParams& params,
                     const QuadratureOptions& options = {});

/// Homogeneous-chain analogue of limit_pairing built from q^P_infty.
double homogeneous_limit_pairing(const TestFunction& v1, const TestFunction& v2, double tau,
                                 const SpectralDensityPair& densities, const ChainParams& params,
                                 const QuadratureOptions& options = {});

/// Exact covariance E[Y^i(x, t) Y^j(y, t)] of the truncated unperturbed chain
/// started from `spec`, for sites |x|, |y| <= radius (row-major over
/// (channel, site) pairs, site index x + radius).  Used as a finite-time reference.
std::vector<double> unperturbed_covariance_at(const InitialMeasureSpec& spec,
                                              const ChainParams& params, double t, long radius);

}  // namespace hchain
