#include "hchain/chain_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "hchain/lattice.hpp"

namespace hchain {

void ChainParams::validate() const {
    const double all[] = {nu_minus, nu_plus, kappa_minus, kappa_plus, kappa_0};
    for (double value : all) {
        if (!std::isfinite(value)) throw std::invalid_argument("chain parameters must be finite");
    }
    if (!(nu_minus > 0.0) || !(nu_plus > 0.0)) {
        throw std::invalid_argument("interaction constants nu_minus, nu_plus must be positive");
    }
    if (kappa_minus < 0.0 || kappa_plus < 0.0 || kappa_0 < 0.0) {
        throw std::invalid_argument("pinning constants must be nonnegative");
    }
}

double ChainParams::band_top(Side s) const { return std::sqrt(band_top_squared(s)); }

double ChainParams::max_group_velocity() const { return std::max(nu_minus, nu_plus); }

double ChainParams::max_frequency() const {
    return std::max(band_top(Side::left), band_top(Side::right));
}

bool ChainParams::is_homogeneous() const {
    return nu_minus == nu_plus && kappa_minus == kappa_plus && kappa_0 == kappa_plus &&
           kappa_plus > 0.0;
}

NormalizedParams normalize(const ChainParams& p) {
    if (p.kappa_minus <= p.kappa_plus) return {p, false};
    ChainParams m = p;
    std::swap(m.nu_minus, m.nu_plus);
    std::swap(m.kappa_minus, m.kappa_plus);
    return {m, true};
}

double dispersion(double theta, Side side, const ChainParams& params) {
    const double nu = params.nu(side);
    const double kappa = params.kappa(side);
    // 2 - 2 cos(theta) = 4 sin^2(theta/2) avoids cancellation near theta = 0
    const double s = std::sin(0.5 * theta);
    return std::sqrt(4.0 * nu * nu * s * s + kappa * kappa);
}

std::vector<std::string> AdmissibilityReport::violated_ids() const {
    std::vector<std::string> ids;
    for (const auto& c : clauses) {
        if (c.applicable && !c.satisfied) ids.push_back(c.id);
    }
    return ids;
}

namespace {

// The K-curves have the form c + sign * (1/2) sqrt(A) sqrt(B) with A, B >= 0.
// Comparisons with kappa_0^2 are decided without taking square roots of the
// radicands: with d = kappa_0^2 - c and P = A B / 4,
//   k2 < c + sqrt(P)  <=>  d < 0 or d^2 < P
//   k2 > c + sqrt(P)  <=>  d > 0 and d^2 > P
//   k2 > c - sqrt(P)  <=>  d > 0 or (d == 0 and P > 0) or (d < 0 and d^2 < P)
//   k2 < c - sqrt(P)  <=>  d < 0 and d^2 > P
struct Curve {
    double c;
    double product;  // A * B / 4
};

bool below_plus(double k2, Curve k) {
    const double d = k2 - k.c;
    return d < 0.0 || d * d < k.product;
}

bool above_plus(double k2, Curve k) {
    const double d = k2 - k.c;
    return d > 0.0 && d * d > k.product;
}

bool above_minus(double k2, Curve k) {
    const double d = k2 - k.c;
    if (d > 0.0) return true;
    if (d == 0.0) return k.product > 0.0;
    return d * d < k.product;
}

bool below_minus(double k2, Curve k) {
    const double d = k2 - k.c;
    return d < 0.0 && d * d > k.product;
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

}  // namespace

AdmissibilityReport check_condition_c(const ChainParams& raw) {
    raw.validate();
    const auto [p, mirrored] = normalize(raw);
    AdmissibilityReport report;
    report.mirrored = mirrored;

    const double km2 = p.kappa_minus * p.kappa_minus;
    const double kp2 = p.kappa_plus * p.kappa_plus;
    const double am2 = p.band_top_squared(Side::left);
    const double ap2 = p.band_top_squared(Side::right);
    const double k02 = p.kappa_0 * p.kappa_0;
    const double c = 0.5 * (km2 + kp2);

    // K_pm(w) for |w| >= a_pm and K_0(w) for |w| <= kappa_+, with w^2 given.
    auto k_minus = [&](double w2) { return Curve{c, (w2 - km2) * (w2 - am2) / 4.0}; };
    auto k_plus = [&](double w2) { return Curve{c, (w2 - kp2) * (w2 - ap2) / 4.0}; };
    auto k_zero = [&](double w2) { return Curve{c, (kp2 - w2) * (ap2 - w2) / 4.0}; };

    auto add = [&](std::string id, std::string description, bool applicable, bool satisfied) {
        report.clauses.push_back({std::move(id), std::move(description), applicable,
                                  applicable ? satisfied : true});
    };

    const bool identical = p.nu_minus == p.nu_plus && p.kappa_minus == p.kappa_plus;
    add("identical_halves", "identical halves excluded (nu_- = nu_+ and kappa_- = kappa_+)", true,
        !identical);

    // numeric bound only where the clause applies
    auto value = [&](bool applicable, const char* sign, double product) {
        return applicable ? " = " + fmt(c) + sign + "sqrt(" + fmt(product) + ")" : std::string();
    };

    add("upper_bound_a_minus",
        "kappa_0^2 < K_+(a_-)" + value(am2 >= ap2, " + ", k_plus(am2).product) + " when a_- >= a_+",
        am2 >= ap2, am2 >= ap2 && below_plus(k02, k_plus(am2)));

    add("upper_bound_a_plus",
        "kappa_0^2 < K_-(a_+)" + value(ap2 >= am2, " + ", k_minus(ap2).product) + " when a_+ >= a_-",
        ap2 >= am2, ap2 >= am2 && below_plus(k02, k_minus(ap2)));

    // kappa_- != 0 implies kappa_+ >= kappa_- > 0, so K_0 is defined.
    const bool lower_applicable = p.kappa_minus != 0.0 && p.kappa_plus > 0.0;
    add("lower_bound_kappa_minus",
        "kappa_0^2 > K_0(kappa_-)" + value(lower_applicable, " - ", k_zero(km2).product) + " when kappa_- != 0",
        lower_applicable, lower_applicable && above_minus(k02, k_zero(km2)));

    const bool gap_applicable = am2 <= kp2 && p.kappa_plus > 0.0;
    add("gap_a_minus_below_kappa_plus",
        "kappa_0^2 > K_-(kappa_+) or kappa_0^2 < K_0(a_-) when a_- <= kappa_+", gap_applicable,
        gap_applicable &&
            (above_plus(k02, k_minus(kp2)) || below_minus(k02, k_zero(am2))));

    const bool unpinned = p.kappa_minus == 0.0 && p.kappa_plus == 0.0;
    add("nonzero_kappa_0", "kappa_0 != 0 when kappa_- = kappa_+ = 0", unpinned,
        p.kappa_0 != 0.0);

    report.admissible = std::all_of(report.clauses.begin(), report.clauses.end(),
                                    [](const ClauseResult& r) { return r.satisfied; });
    return report;
}

double hamiltonian(const LatticeState& state, const ChainParams& params) {
    const long L = state.half_width();
    if (L < 1) throw std::invalid_argument("hamiltonian needs a window of at least 3 sites");
    auto u = [&](long x) { return state.contains(x) ? state.u(x) : 0.0; };

    const double np2 = params.nu_plus * params.nu_plus;
    const double nm2 = params.nu_minus * params.nu_minus;
    const double kp2 = params.kappa_plus * params.kappa_plus;
    const double km2 = params.kappa_minus * params.kappa_minus;
    const double k02 = params.kappa_0 * params.kappa_0;

    double h_plus = 0.0;
    for (long x = 1; x <= L; ++x) {
        const double bond = u(x + 1) - u(x);
        h_plus += state.v(x) * state.v(x) + np2 * bond * bond + kp2 * u(x) * u(x);
    }
    double h_minus = 0.0;
    for (long x = -1; x >= -L; --x) {
        const double bond = u(x - 1) - u(x);
        h_minus += state.v(x) * state.v(x) + nm2 * bond * bond + km2 * u(x) * u(x);
    }
    const double b_plus = u(1) - u(0);
    const double b_minus = u(-1) - u(0);
    const double h_zero = state.v(0) * state.v(0) + np2 * b_plus * b_plus +
                          nm2 * b_minus * b_minus + k02 * u(0) * u(0);
    return 0.5 * (h_plus + h_minus + h_zero);
}

double WeightedNorm::operator()(std::span<const double> values, long first_site) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double x = static_cast<double>(first_site + static_cast<long>(i));
        sum += std::pow(1.0 + x * x, alpha_) * values[i] * values[i];
    }
    return std::sqrt(sum);
}

double WeightedNorm::operator()(const LatticeState& state) const {
    const double a = (*this)(state.u_values(), state.first_site());
    const double b = (*this)(state.v_values(), state.first_site());
    return std::sqrt(a * a + b * b);
}

double WeightedNorm::trajectory_seminorm(const Trajectory& traj, int k, double horizon) const {
    if (k != 0 && k != 1) throw std::invalid_argument("seminorm order k must be 0 or 1");
    double best = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (std::abs(traj.grid().time(i)) > horizon) continue;
        const auto& s = traj.state(i);
        double total = std::pow((*this)(s.u_values(), s.first_site()), 2);
        if (k == 1) total += std::pow((*this)(s.v_values(), s.first_site()), 2);
        best = std::max(best, total);
    }
    return std::sqrt(best);
}

}  // namespace hchain
