#include "hchain/initial_measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hchain/philox.hpp"

namespace hchain {

long HalfMeasureSpec::radius() const {
    return static_cast<long>(std::max(c0.size(), c1.size()) / 2);
}

double HalfMeasureSpec::tap(int channel, long m) const {
    const auto& c = channel == 0 ? c0 : c1;
    const long r = static_cast<long>(c.size() / 2);
    if (m < -r || m > r) return 0.0;
    return c[static_cast<std::size_t>(m + r)];
}

void HalfMeasureSpec::validate() const {
    for (const auto* c : {&c0, &c1}) {
        if (c->empty() || c->size() % 2 == 0) {
            throw std::invalid_argument("moving-average kernels must have odd length (centred)");
        }
        for (double v : *c) {
            if (!std::isfinite(v)) throw std::invalid_argument("kernel taps must be finite");
        }
    }
}

long InitialMeasureSpec::support_radius() const { return std::max(left.radius(), right.radius()); }

double InitialMeasureSpec::mean_energy_bound() const {
    double e = 0.0;
    for (const auto* h : {&left, &right}) {
        const CovarianceSequence q(*h);
        e = std::max({e, q.value(0, 0, 0), q.value(1, 1, 0)});
    }
    return e;
}

void InitialMeasureSpec::validate() const {
    left.validate();
    right.validate();
}

CovarianceSequence::CovarianceSequence(const HalfMeasureSpec& half) : radius_(2 * half.radius()) {
    half.validate();
    const long r = half.radius();
    values_.resize(static_cast<std::size_t>(2 * radius_ + 1));
    for (long z = -radius_; z <= radius_; ++z) {
        Mat2 q{};
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                if (half.driver(i) != half.driver(j)) continue;
                double s = 0.0;
                for (long m = -r; m <= r; ++m) s += half.tap(i, m + z) * half.tap(j, m);
                q[2 * i + j] = s;
            }
        }
        values_[static_cast<std::size_t>(z + radius_)] = q;
    }
}

Mat2 CovarianceSequence::at(long z) const {
    if (z < -radius_ || z > radius_) return Mat2{};
    return values_[static_cast<std::size_t>(z + radius_)];
}

SpectralDensity::SpectralDensity(std::function<CMat2(double)> eval, std::string label)
    : eval_(std::move(eval)), label_(std::move(label)) {}

SpectralDensity SpectralDensity::from_half(const HalfMeasureSpec& half) {
    half.validate();
    return SpectralDensity(
        [half](double theta) {
            std::array<std::complex<double>, 2> c{};
            const long r = half.radius();
            for (long m = -r; m <= r; ++m) {
                const std::complex<double> e = std::polar(1.0, static_cast<double>(m) * theta);
                c[0] += half.tap(0, m) * e;
                c[1] += half.tap(1, m) * e;
            }
            CMat2 q{};
            for (int i = 0; i < 2; ++i) {
                for (int j = 0; j < 2; ++j) {
                    if (i == j) {
                        q[2 * i + j] = std::norm(c[i]);
                    } else if (half.driver(i) == half.driver(j)) {
                        q[2 * i + j] = c[i] * std::conj(c[j]);
                    }
                }
            }
            return q;
        },
        "moving-average");
}

SpectralDensity SpectralDensity::gibbs(double temperature, Side side, const ChainParams& params) {
    return SpectralDensity(
        [temperature, side, params](double theta) {
            const double phi = dispersion(theta, side, params);
            return CMat2{temperature / (phi * phi), 0.0, 0.0, temperature};
        },
        "gibbs");
}

SpectralDensityPair spectral_densities(const InitialMeasureSpec& spec) {
    return {SpectralDensity::from_half(spec.left), SpectralDensity::from_half(spec.right)};
}

TheoreticalCovariance theoretical_covariance(const InitialMeasureSpec& spec, std::size_t n_theta) {
    spec.validate();
    TheoreticalCovariance out{CovarianceSequence(spec.left), CovarianceSequence(spec.right),
                              ThetaGrid(n_theta, true), {}, {}};
    const auto pair = spectral_densities(spec);
    for (double theta : out.grid.nodes()) {
        out.qhat_left.push_back(pair.left(theta));
        out.qhat_right.push_back(pair.right(theta));
    }
    return out;
}

Mat2 initial_covariance(const InitialMeasureSpec& spec, long x, long y) {
    const HalfMeasureSpec& hx = spec.half(x >= 0 ? Side::right : Side::left);
    const HalfMeasureSpec& hy = spec.half(y >= 0 ? Side::right : Side::left);
    const long rx = hx.radius();
    Mat2 q{};
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            if (hx.driver(i) != hy.driver(j)) continue;
            double s = 0.0;
            for (long k = x - rx; k <= x + rx; ++k) s += hx.tap(i, x - k) * hy.tap(j, y - k);
            q[2 * i + j] = s;
        }
    }
    return q;
}

LatticeState sample_initial(const InitialMeasureSpec& spec, long half_width, std::uint64_t seed,
                            std::uint64_t member) {
    spec.validate();
    const long r = spec.support_radius();
    if (half_width < r) {
        throw std::invalid_argument("window half-width must be at least the kernel radius");
    }
    const long lo = -half_width - r;
    const long hi = half_width + r;
    const auto count = static_cast<std::size_t>(hi - lo + 1);
    const bool need_second = !spec.left.shared_driver || !spec.right.shared_driver;
    std::vector<double> xi0(count), xi1(need_second ? count : 0);
    for (long k = lo; k <= hi; ++k) {
        const auto i = static_cast<std::size_t>(k - lo);
        xi0[i] = philox_normal(seed, member, 0, k);
        if (need_second) xi1[i] = philox_normal(seed, member, 1, k);
    }

    LatticeState out(half_width);
    for (long x = -half_width; x <= half_width; ++x) {
        const HalfMeasureSpec& h = spec.half(x >= 0 ? Side::right : Side::left);
        for (int ch = 0; ch < 2; ++ch) {
            const auto& noise = h.driver(ch) == 0 ? xi0 : xi1;
            const auto& c = ch == 0 ? h.c0 : h.c1;
            const long rc = static_cast<long>(c.size() / 2);
            double s = 0.0;
            for (long m = -rc; m <= rc; ++m) {
                s += c[static_cast<std::size_t>(m + rc)] * noise[static_cast<std::size_t>(x - m - lo)];
            }
            (ch == 0 ? out.u(x) : out.v(x)) = s;
        }
    }
    return out;
}

HalfMeasureSpec white_noise_half() { return HalfMeasureSpec{{1.0}, {1.0}, false}; }

HalfMeasureSpec desk_half(long radius) {
    if (radius < 0) throw std::invalid_argument("kernel radius must be >= 0");
    HalfMeasureSpec h;
    h.c0.clear();
    h.c1.clear();
    for (long m = -radius; m <= radius; ++m) {
        const double a = static_cast<double>(m);
        const double r1 = static_cast<double>(radius + 1);
        h.c0.push_back(r1 - std::abs(a));
        h.c1.push_back(1.0 + std::cos(std::numbers::pi * a / r1));
    }
    for (auto* c : {&h.c0, &h.c1}) {
        double n2 = 0.0;
        for (double v : *c) n2 += v * v;
        for (double& v : *c) v /= std::sqrt(n2);
    }
    return h;
}

HalfMeasureSpec gibbs_half(double temperature, Side side, const ChainParams& params, long radius) {
    if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
    if (params.kappa(side) <= 0.0) {
        throw std::invalid_argument("Gibbs-like kernel needs a pinned half (kappa > 0)");
    }
    const ThetaGrid grid(4096, true);
    HalfMeasureSpec h;
    h.c0.assign(static_cast<std::size_t>(2 * radius + 1), 0.0);
    h.c1 = {std::sqrt(temperature)};
    for (long m = 0; m <= radius; ++m) {
        double s = 0.0;
        for (double theta : grid.nodes()) {
            s += std::cos(static_cast<double>(m) * theta) / dispersion(theta, side, params);
        }
        const double c = std::sqrt(temperature) * s / static_cast<double>(grid.size());
        h.c0[static_cast<std::size_t>(radius + m)] = c;
        h.c0[static_cast<std::size_t>(radius - m)] = c;
    }
    return h;
}

InitialMeasureSpec white_noise_spec() { return {white_noise_half(), white_noise_half()}; }

InitialMeasureSpec desk_spec() { return {desk_half(3), desk_half(3)}; }

InitialMeasureSpec gibbs_spec(double temperature, const ChainParams& params, long radius) {
    return {gibbs_half(temperature, Side::left, params, radius),
            gibbs_half(temperature, Side::right, params, radius)};
}

}  // namespace hchain
