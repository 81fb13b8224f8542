#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace hchain {

class LatticeState;
class Trajectory;

enum class Side { left, right };

inline const char* side_name(Side s) { return s == Side::left ? "left" : "right"; }

/// Coupling and pinning constants of the two-sided chain.
///
/// Sites x >= 1 carry (nu_plus, kappa_plus), sites x <= -1 carry
/// (nu_minus, kappa_minus) and the origin is pinned with kappa_0.  The bonds
/// (0, +1) and (0, -1) use nu_plus and nu_minus respectively.
struct ChainParams {
    double nu_minus = 1.0;
    double nu_plus = 1.0;
    double kappa_minus = 0.0;
    double kappa_plus = 0.0;
    double kappa_0 = 0.0;

    /// Throws std::invalid_argument unless nu_pm > 0, kappa >= 0 and all finite.
    void validate() const;

    double nu(Side s) const { return s == Side::left ? nu_minus : nu_plus; }
    double kappa(Side s) const { return s == Side::left ? kappa_minus : kappa_plus; }

    /// Band top a = sqrt(4 nu^2 + kappa^2); a^2 is returned without rounding through sqrt.
    double band_top_squared(Side s) const { return 4.0 * nu(s) * nu(s) + kappa(s) * kappa(s); }
    double band_top(Side s) const;

    /// Bound on the group velocity |phi'(theta)| over both halves.
    double max_group_velocity() const;
    /// Largest normal-mode frequency of the two halves, max(a_-, a_+).
    double max_frequency() const;

    bool is_homogeneous() const;

    friend bool operator==(const ChainParams&, const ChainParams&) = default;
};

/// Result of ordering the halves so that kappa_minus <= kappa_plus.
struct NormalizedParams {
    ChainParams params;
    bool mirrored = false;
};

NormalizedParams normalize(const ChainParams& p);

/// Dispersion relation phi(theta) = sqrt(nu^2 (2 - 2 cos theta) + kappa^2).
double dispersion(double theta, Side side, const ChainParams& params);

// ---------------------------------------------------------------------------
// Admissibility of kappa_0 (condition C)

struct ClauseResult {
    std::string id;
    std::string description;
    bool applicable = false;
    bool satisfied = true;
};

struct AdmissibilityReport {
    bool admissible = true;
    bool mirrored = false;
    std::vector<ClauseResult> clauses;

    std::vector<std::string> violated_ids() const;
};

/// Evaluates every clause of condition C on the normalized parameters.
/// Inequalities are decided on squared quantities; equality in a strict
/// inequality counts as a violation.
AdmissibilityReport check_condition_c(const ChainParams& params);

// ---------------------------------------------------------------------------
// Energy and weighted norms

/// H = H_+ + H_- + H_0 on the window [-L, L] with u = 0 outside the window,
/// so the bonds to the clamped walls at +-(L+1) are included.
double hamiltonian(const LatticeState& state, const ChainParams& params);

/// <x> = (1 + x^2)^(1/2)
inline double japanese_bracket(double x) { return std::sqrt(1.0 + x * x); }

/// ||u||_alpha = (sum <x>^(2 alpha) u(x)^2)^(1/2) over a finite window.
class WeightedNorm {
public:
    explicit WeightedNorm(double alpha) : alpha_(alpha) {}

    double alpha() const { return alpha_; }

    /// `values[i]` sits at lattice site `first_site + i`.
    double operator()(std::span<const double> values, long first_site) const;
    double operator()(const LatticeState& state) const;  // sqrt(||u||^2 + ||v||^2)

    /// |||u|||_{alpha,k,T} over the recorded times with |t| <= T, k in {0, 1}.
    double trajectory_seminorm(const Trajectory& traj, int k, double horizon) const;

private:
    double alpha_;
};

}  // namespace hchain
