#include "hchain/limit_theory.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hchain/dynamics.hpp"

namespace hchain {

namespace {

constexpr double pi = std::numbers::pi;

double sign_of(double theta) { return theta > 0.0 ? 1.0 : (theta < 0.0 ? -1.0 : 0.0); }

double side_sign(Side side) { return side == Side::right ? 1.0 : -1.0; }

bool same_sign(long x, long y) { return (x > 0 && y > 0) || (x < 0 && y < 0); }

}  // namespace

CMat2 LimitValue::matrix() const {
    const std::complex<double> i01(0.0, q01_imag);
    return {q00, i01, -i01, q11};
}

LimitValue limit_value(const CMat2& qhat, double theta, Side side, const ChainParams& params) {
    const double phi = dispersion(theta, side, params);
    if (!(phi > 0.0)) {
        throw std::invalid_argument("limit spectrum undefined where the dispersion vanishes");
    }
    const std::complex<double> i(0.0, 1.0);
    const double sg = sign_of(theta);
    const double s = side_sign(side);
    const std::complex<double> q00 = 0.25 * (qhat[0] + qhat[3] / (phi * phi)) +
                                     s * (i / 4.0) * sg / phi * (qhat[2] - qhat[1]);
    LimitValue v;
    v.q00 = q00.real();
    if (v.q00 < -1e-12) throw std::domain_error("negative limit density: invalid input spectrum");
    v.q01_imag = s * sg * phi * v.q00;
    v.q11 = phi * phi * v.q00;
    return v;
}

LimitSpectrum::LimitSpectrum(Side side, ThetaGrid grid, std::vector<LimitValue> values)
    : side_(side), grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw std::invalid_argument("one value per grid node required");
}

LimitSpectrum limit_spectrum(const SpectralDensity& density, const ChainParams& params, Side side,
                             std::size_t n_theta, bool shifted) {
    params.validate();
    if (!shifted && params.kappa(side) == 0.0) {
        throw std::invalid_argument(
            "kappa = 0 requires the midpoint-shifted grid (theta = 0 is singular)");
    }
    ThetaGrid grid(n_theta, shifted);
    std::vector<LimitValue> values;
    values.reserve(n_theta);
    for (double theta : grid.nodes()) values.push_back(limit_value(density(theta), theta, side, params));
    return LimitSpectrum(side, std::move(grid), std::move(values));
}

QuadratureResult torus_integral(const std::function<double(double)>& f,
                                const QuadratureOptions& options) {
    auto integrate = [&](std::size_t panels) {
        const QuadratureRule rule = composite_gauss_legendre(0.0, pi, panels, options.order);
        double s = 0.0;
        for (std::size_t k = 0; k < rule.size(); ++k) {
            const double th = rule.nodes[k];
            s += rule.weights[k] * (f(th) + f(-th));
        }
        return s;
    };
    std::size_t panels = options.initial_panels;
    double previous = integrate(panels);
    while (true) {
        panels *= 2;
        const double current = integrate(panels);
        const double change = std::abs(current - previous);
        if (change < options.tolerance * std::max(1.0, std::abs(current)) ||
            panels >= options.max_panels) {
            return {current, change, panels * options.order};
        }
        previous = current;
    }
}

Mat2 limit_equal_time_cov(long x, long y, const SpectralDensityPair& densities,
                          const ChainParams& params, const QuadratureOptions& options) {
    if (!same_sign(x, y)) return Mat2{};
    const Side side = x > 0 ? Side::right : Side::left;
    const auto& q = densities.half(side);
    const double dx = static_cast<double>(x);
    const double dy = static_cast<double>(y);
    const double q00 = torus_integral(
        [&](double th) {
            return limit_value(q(th), th, side, params).q00 * std::sin(dx * th) * std::sin(dy * th);
        },
        options).value;
    const double q11 = torus_integral(
        [&](double th) {
            return limit_value(q(th), th, side, params).q11 * std::sin(dx * th) * std::sin(dy * th);
        },
        options).value;
    return {2.0 / pi * q00, 0.0, 0.0, 2.0 / pi * q11};
}

double limit_spacetime_cov(long x1, long x2, double t1, double t2,
                           const SpectralDensityPair& densities, const ChainParams& params,
                           const QuadratureOptions& options) {
    if (!same_sign(x1, x2)) return 0.0;
    const Side side = x1 > 0 ? Side::right : Side::left;
    const auto& q = densities.half(side);
    const double dt = t1 - t2;
    const double d1 = static_cast<double>(x1);
    const double d2 = static_cast<double>(x2);
    return 2.0 / pi *
           torus_integral(
               [&](double th) {
                   const double phi = dispersion(th, side, params);
                   return std::cos(phi * dt) * limit_value(q(th), th, side, params).q00 *
                          std::sin(d1 * th) * std::sin(d2 * th);
               },
               options)
               .value;
}

namespace {

// Homogeneous chain: total limit density q00 and w with q-hat^01 = i w.
std::pair<double, double> homogeneous_density(const SpectralDensityPair& densities,
                                              const ChainParams& params, double theta) {
    const LimitValue r = limit_value(densities.right(theta), theta, Side::right, params);
    const LimitValue l = limit_value(densities.left(theta), theta, Side::left, params);
    return {r.q00 + l.q00, r.q01_imag + l.q01_imag};
}

void require_homogeneous(const ChainParams& params) {
    if (!params.is_homogeneous()) {
        throw std::invalid_argument(
            "homogeneous limit needs nu_- = nu_+ and kappa_- = kappa_+ = kappa_0 > 0");
    }
}

}  // namespace

double homogeneous_spacetime_cov(long x, double t, const SpectralDensityPair& densities,
                                 const ChainParams& params, const QuadratureOptions& options) {
    require_homogeneous(params);
    const double dx = static_cast<double>(x);
    return torus_integral(
               [&](double th) {
                   const double phi = dispersion(th, Side::right, params);
                   const auto [q00, w] = homogeneous_density(densities, params, th);
                   return std::cos(dx * th) * std::cos(phi * t) * q00 -
                          std::sin(dx * th) * std::sin(phi * t) * w / phi;
               },
               options)
               .value /
           (2.0 * pi);
}

double limit_pairing(const TestFunction& v1, const TestFunction& v2, double tau,
                     const SpectralDensityPair& densities, const ChainParams& params,
                     const QuadratureOptions& options) {
    double total = 0.0;
    for (Side side : {Side::left, Side::right}) {
        const auto& q = densities.half(side);
        total += 2.0 / pi *
                 torus_integral(
                     [&](double th) {
                         const double s1 = v1.sine_sum(th, side);
                         const double s2 = v2.sine_sum(th, side);
                         if (s1 == 0.0 || s2 == 0.0) return 0.0;
                         const double phi = dispersion(th, side, params);
                         const auto e = std::polar(1.0, phi * tau) * v1.profile_transform(phi) *
                                        std::conj(v2.profile_transform(phi));
                         return limit_value(q(th), th, side, params).q00 * s1 * s2 * e.real();
                     },
                     options)
                     .value;
    }
    return total;
}

double homogeneous_limit_pairing(const TestFunction& v1, const TestFunction& v2, double tau,
                                 const SpectralDensityPair& densities, const ChainParams& params,
                                 const QuadratureOptions& options) {
    require_homogeneous(params);
    auto transform = [](const TestFunction& v, double th) {
        std::complex<double> s = 0.0;
        for (const auto& [x, w] : v.weights()) s += w * std::polar(1.0, static_cast<double>(x) * th);
        return s;
    };
    const std::complex<double> i(0.0, 1.0);
    return torus_integral(
               [&](double th) {
                   const double phi = dispersion(th, Side::right, params);
                   const auto [q00, w] = homogeneous_density(densities, params, th);
                   const auto e = std::polar(1.0, phi * tau) * v1.profile_transform(phi) *
                                  std::conj(v2.profile_transform(phi));
                   const auto spatial = std::conj(transform(v1, th)) * transform(v2, th);
                   return (spatial * (e.real() * q00 - i * w * e.imag() / phi)).real();
               },
               options)
               .value /
           (2.0 * pi);
}

std::vector<double> unperturbed_covariance_at(const InitialMeasureSpec& spec,
                                              const ChainParams& params, double t, long radius) {
    spec.validate();
    const long r = spec.support_radius();
    const long L = required_half_width(radius + r, t, params) + r;
    const UnperturbedPropagator prop(params, L, radius, {t});
    const auto n = static_cast<std::size_t>(2 * (2 * radius + 1));
    std::vector<double> cov(n * n, 0.0);
    std::vector<double> response(n);
    for (int d = 0; d < 2; ++d) {
        for (long k = -L - r; k <= L + r; ++k) {
            LatticeState y0(L);
            bool any = false;
            for (long x = std::max(-L, k - r); x <= std::min(L, k + r); ++x) {
                const HalfMeasureSpec& h = spec.half(x >= 0 ? Side::right : Side::left);
                for (int ch = 0; ch < 2; ++ch) {
                    if (h.driver(ch) != d) continue;
                    const double c = h.tap(ch, x - k);
                    if (c == 0.0) continue;
                    (ch == 0 ? y0.u(x) : y0.v(x)) = c;
                    any = true;
                }
            }
            if (!any) continue;
            const LatticeState z = prop.apply(y0).front();
            for (int ch = 0; ch < 2; ++ch) {
                for (long x = -radius; x <= radius; ++x) {
                    response[static_cast<std::size_t>(ch * (2 * radius + 1) + x + radius)] = z.value(ch, x);
                }
            }
            for (std::size_t a = 0; a < n; ++a) {
                if (response[a] == 0.0) continue;
                for (std::size_t b = 0; b < n; ++b) cov[a * n + b] += response[a] * response[b];
            }
        }
    }
    return cov;
}

}  // namespace hchain
