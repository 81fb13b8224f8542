#pragma once

#include <cstddef>
#include <vector>

namespace hchain {

/// Uniform periodic grid on the torus (-pi, pi].
///
/// The midpoint-shifted grid theta_k = -pi + (k + 1/2) h never contains 0 or
/// +-pi; the unshifted grid theta_k = -pi + (k + 1) h contains both.  Nodes
/// are stored so that node(n - 1 - k) == -node(k) exactly on the shifted grid.
class ThetaGrid {
public:
    ThetaGrid(std::size_t n, bool shifted);

    std::size_t size() const { return nodes_.size(); }
    bool shifted() const { return shifted_; }
    double step() const { return step_; }
    double node(std::size_t k) const { return nodes_[k]; }
    const std::vector<double>& nodes() const { return nodes_; }
    bool contains_zero() const { return !shifted_; }

    /// Index of -node(k) on the grid.
    std::size_t mirror_index(std::size_t k) const;

private:
    std::size_t n_;
    bool shifted_;
    double step_;
    std::vector<double> nodes_;
};

/// Composite Gauss-Legendre rule: `panels` equal panels of `order` nodes each.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton on P_n).
QuadratureRule gauss_legendre(std::size_t order);

QuadratureRule composite_gauss_legendre(double a, double b, std::size_t panels,
                                        std::size_t order = 32);

}  // namespace hchain
