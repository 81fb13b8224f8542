#include "hchain/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace hchain {

ThetaGrid::ThetaGrid(std::size_t n, bool shifted) : n_(n), shifted_(shifted) {
    if (n < 2 || n % 2 != 0) {
        throw std::invalid_argument("theta grid size must be even and >= 2");
    }
    constexpr double pi = std::numbers::pi;
    step_ = 2.0 * pi / static_cast<double>(n);
    nodes_.resize(n);
    const std::size_t half = n / 2;
    if (shifted) {
        // positive half first, then mirror
        for (std::size_t j = 0; j < half; ++j) {
            const double theta = (static_cast<double>(j) + 0.5) * step_;
            nodes_[half + j] = theta;
            nodes_[half - 1 - j] = -theta;
        }
    } else {
        // theta_k = -pi + (k+1) h: k = half-1 is 0, k = n-1 is pi
        for (std::size_t j = 0; j < half; ++j) {
            const double theta = static_cast<double>(j) * step_;
            nodes_[half - 1 + j] = theta;
            if (j > 0) nodes_[half - 1 - j] = -theta;
        }
        nodes_[n - 1] = pi;
    }
}

std::size_t ThetaGrid::mirror_index(std::size_t k) const {
    if (shifted_) return n_ - 1 - k;
    // unshifted: node(k) = (k + 1 - n/2) h, so -node(k) sits at n - 2 - k (mod n)
    const std::size_t half = n_ / 2;
    if (k == n_ - 1) return k;  // pi maps to itself
    if (k == half - 1) return k;
    return n_ - 2 - k;
}

namespace {

// P_n(x) and P_n'(x) by the three-term recurrence.
std::pair<double, double> legendre(std::size_t order, double x) {
    double p0 = 1.0;
    double p1 = x;
    for (std::size_t k = 2; k <= order; ++k) {
        const double kk = static_cast<double>(k);
        const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
        p0 = p1;
        p1 = p2;
    }
    const double n = static_cast<double>(order);
    return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

}  // namespace

QuadratureRule gauss_legendre(std::size_t order) {
    if (order < 2) throw std::invalid_argument("Gauss-Legendre order must be >= 2");
    QuadratureRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const double n = static_cast<double>(order);
    for (std::size_t i = 0; i < (order + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            const auto [p, dp] = legendre(order, x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double dp = legendre(order, x).second;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[order - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[order - 1 - i] = w;
    }
    if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
    return rule;
}

QuadratureRule composite_gauss_legendre(double a, double b, std::size_t panels, std::size_t order) {
    if (panels == 0) throw std::invalid_argument("need at least one panel");
    const QuadratureRule base = gauss_legendre(order);
    QuadratureRule rule;
    rule.nodes.reserve(panels * order);
    rule.weights.reserve(panels * order);
    const double width = (b - a) / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
        const double lo = a + static_cast<double>(p) * width;
        const double mid = lo + 0.5 * width;
        for (std::size_t k = 0; k < order; ++k) {
            rule.nodes.push_back(mid + 0.5 * width * base.nodes[k]);
            rule.weights.push_back(0.5 * width * base.weights[k]);
        }
    }
    return rule;
}

}  // namespace hchain
