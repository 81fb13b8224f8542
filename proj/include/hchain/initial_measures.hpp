#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hchain/chain_model.hpp"
#include "hchain/dynamics.hpp"
#include "hchain/lattice.hpp"
#include "hchain/quadrature.hpp"

namespace hchain {

using CMat2 = std::array<std::complex<double>, 4>;  // row-major (00, 01, 10, 11)

/// Moving-average description of one stationary half:
///   Y^i(x) = sum_k c^i(x - k) xi^{d(i)}(k)
/// with centred odd-length kernels c^i(m), m = -r..r.  Channel 1 is driven by
/// xi^0 when `shared_driver` is set, by an independent xi^1 otherwise.
struct HalfMeasureSpec {
    std::vector<double> c0{1.0};
    std::vector<double> c1{1.0};
    bool shared_driver = false;

    /// Largest kernel radius r_supp.
    long radius() const;
    double tap(int channel, long m) const;
    int driver(int channel) const { return channel == 1 && shared_driver ? 0 : channel; }
    void validate() const;

    friend bool operator==(const HalfMeasureSpec&, const HalfMeasureSpec&) = default;
};

/// Two halves glued at the origin; site 0 uses the right half.
struct InitialMeasureSpec {
    HalfMeasureSpec left;
    HalfMeasureSpec right;

    const HalfMeasureSpec& half(Side s) const { return s == Side::left ? left : right; }
    long support_radius() const;
    /// e_0 = max over channels and halves of q^{ii}(0).
    double mean_energy_bound() const;
    void validate() const;

    friend bool operator==(const InitialMeasureSpec&, const InitialMeasureSpec&) = default;
};

/// Correlation matrices q^{ij}(z) = E[Y^i(x + z) Y^j(x)] for |z| <= 2 r_supp.
class CovarianceSequence {
public:
    explicit CovarianceSequence(const HalfMeasureSpec& half);

    long radius() const { return radius_; }
    /// Zero beyond the support.
    Mat2 at(long z) const;
    double value(int i, int j, long z) const { return at(z)[2 * i + j]; }

private:
    long radius_;
    std::vector<Mat2> values_;
};

/// Spectral density matrix q-hat(theta) = sum_x e^{i x theta} q(x) of one half.
class SpectralDensity {
public:
    SpectralDensity() = default;
    SpectralDensity(std::function<CMat2(double)> eval, std::string label);

    /// Exact finite transform of a moving-average half, C^i conj(C^j).
    static SpectralDensity from_half(const HalfMeasureSpec& half);
    /// q-hat^00 = T / phi^2, q-hat^11 = T, no cross terms.
    static SpectralDensity gibbs(double temperature, Side side, const ChainParams& params);

    CMat2 operator()(double theta) const { return eval_(theta); }
    const std::string& label() const { return label_; }

private:
    std::function<CMat2(double)> eval_;
    std::string label_;
};

struct SpectralDensityPair {
    SpectralDensity left;
    SpectralDensity right;

    const SpectralDensity& half(Side s) const { return s == Side::left ? left : right; }
};

SpectralDensityPair spectral_densities(const InitialMeasureSpec& spec);

struct TheoreticalCovariance {
    CovarianceSequence left;
    CovarianceSequence right;
    ThetaGrid grid;
    std::vector<CMat2> qhat_left;   // on grid nodes
    std::vector<CMat2> qhat_right;
};

TheoreticalCovariance theoretical_covariance(const InitialMeasureSpec& spec,
                                             std::size_t n_theta = 2048);

/// Exact Q_0^{ij}(x, y) = E[Y^i(x) Y^j(y)] of the glued field.
Mat2 initial_covariance(const InitialMeasureSpec& spec, long x, long y);

/// Draws Y0 on [-L, L] for ensemble member `member`.  Throws when L < r_supp.
LatticeState sample_initial(const InitialMeasureSpec& spec, long half_width, std::uint64_t seed,
                            std::uint64_t member = 0);

// Built-in specs

/// c^0 = c^1 = delta: white noise in both channels.
HalfMeasureSpec white_noise_half();
/// Triangular displacement and raised-cosine velocity tapers of radius r,
/// normalized so q^{00}(0) = q^{11}(0) = 1.
HalfMeasureSpec desk_half(long radius = 3);
/// Truncated sqrt(T) F^{-1}[1/phi] displacement kernel and sqrt(T) delta
/// velocity kernel, approximating the Gibbs covariance T/phi^2, T.
HalfMeasureSpec gibbs_half(double temperature, Side side, const ChainParams& params,
                           long radius = 8);

InitialMeasureSpec white_noise_spec();
InitialMeasureSpec desk_spec();
InitialMeasureSpec gibbs_spec(double temperature, const ChainParams& params, long radius = 8);

}  // namespace hchain
