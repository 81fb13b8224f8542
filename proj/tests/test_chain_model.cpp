#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "hchain/chain_model.hpp"
#include "hchain/lattice.hpp"
#include "hchain/quadrature.hpp"

using namespace hchain;

namespace {

ChainParams make(double nm, double np, double km, double kp, double k0) {
    return ChainParams{nm, np, km, kp, k0};
}

bool violates(const AdmissibilityReport& r, const std::string& id) {
    for (const auto& v : r.violated_ids()) {
        if (v == id) return true;
    }
    return false;
}

// Independent energy: enumerate every bond and on-site term explicitly.
double brute_energy(const LatticeState& s, const ChainParams& p) {
    const long L = s.half_width();
    auto u = [&](long x) { return (x < -L || x > L) ? 0.0 : s.u(x); };
    double e = 0.0;
    for (long x = -L; x <= L; ++x) {
        e += 0.5 * s.v(x) * s.v(x);
        const double k = x > 0 ? p.kappa_plus : (x < 0 ? p.kappa_minus : p.kappa_0);
        e += 0.5 * k * k * u(x) * u(x);
    }
    // bonds (x, x+1) for x = -L-1 .. L
    for (long x = -L - 1; x <= L; ++x) {
        const double nu = x >= 0 ? p.nu_plus : p.nu_minus;
        const double d = u(x + 1) - u(x);
        e += 0.5 * nu * nu * d * d;
    }
    return e;
}

}  // namespace

TEST_CASE("dispersion reference values") {
    const auto p = make(1.0, 1.0, 0.0, 0.5, 0.0);
    CHECK(dispersion(0.0, Side::right, p) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(dispersion(std::numbers::pi, Side::left, p) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(dispersion(std::numbers::pi / 2, Side::left, p) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("dispersion is even and stays within [kappa, a]") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> nu(0.1, 3.0), kappa(0.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        const auto p = make(nu(rng), nu(rng), kappa(rng), kappa(rng), kappa(rng));
        const ThetaGrid grid(256, trial % 2 == 0);
        for (Side side : {Side::left, Side::right}) {
            for (std::size_t k = 0; k < grid.size(); ++k) {
                const double th = grid.node(k);
                const double f = dispersion(th, side, p);
                CHECK(f == dispersion(-th, side, p));
                CHECK(dispersion(grid.node(grid.mirror_index(k)), side, p) == f);
                CHECK(f >= p.kappa(side) * (1.0 - 1e-15));
                CHECK(f <= p.band_top(side) * (1.0 + 1e-15));
            }
        }
    }
}

TEST_CASE("validation rejects nonpositive couplings and negative pinning") {
    CHECK_THROWS(make(0.0, 1.0, 0.0, 0.0, 1.0).validate());
    CHECK_THROWS(make(1.0, -1.0, 0.0, 0.0, 1.0).validate());
    CHECK_THROWS(make(1.0, 1.0, -0.1, 0.0, 1.0).validate());
    CHECK_THROWS(make(1.0, 1.0, 0.0, 0.0, NAN).validate());
    CHECK_NOTHROW(make(1.0, 2.0, 0.0, 0.0, 1.0).validate());
}

TEST_CASE("normalization mirrors when kappa_minus > kappa_plus") {
    const auto n = normalize(make(1.0, 2.0, 1.5, 0.5, 1.0));
    CHECK(n.mirrored);
    CHECK(n.params.nu_minus == 2.0);
    CHECK(n.params.kappa_minus == 0.5);
    CHECK_FALSE(normalize(make(1.0, 2.0, 0.5, 0.5, 1.0)).mirrored);
}

TEST_CASE("condition C reference cases") {
    const auto ok = check_condition_c(make(1.0, 2.0, 1.0, 1.0, 2.0));
    CHECK(ok.admissible);
    CHECK(ok.violated_ids().empty());

    const auto same = check_condition_c(make(1.3, 1.3, 0.7, 0.7, 2.0));
    CHECK_FALSE(same.admissible);
    CHECK(violates(same, "identical_halves"));

    const auto unpinned = check_condition_c(make(1.0, 2.0, 0.0, 0.0, 0.0));
    CHECK_FALSE(unpinned.admissible);
    CHECK(violates(unpinned, "nonzero_kappa_0"));

    // kappa_0^2 above 1 + 4 sqrt(3)
    const auto high = check_condition_c(make(1.0, 2.0, 1.0, 1.0, std::sqrt(1.0 + 4.0 * std::sqrt(3.0) + 0.01)));
    CHECK_FALSE(high.admissible);
    // kappa_0^2 = kappa^2 is a tie and counts as violated
    CHECK_FALSE(check_condition_c(make(1.0, 2.0, 1.0, 1.0, 1.0)).admissible);
}

TEST_CASE("condition C is invariant under mirroring the chain") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> nu(0.2, 2.5), kappa(0.0, 2.0), k0(0.0, 4.0);
    for (int trial = 0; trial < 500; ++trial) {
        const auto p = make(nu(rng), nu(rng), kappa(rng), kappa(rng), k0(rng));
        const auto m = make(p.nu_plus, p.nu_minus, p.kappa_plus, p.kappa_minus, p.kappa_0);
        CHECK(check_condition_c(p).admissible == check_condition_c(m).admissible);
    }
}

TEST_CASE("condition C on equal pinning matches the interval characterization") {
    const double kappa = 1.0;
    int mismatches = 0;
    int admissible = 0;
    for (int i = 0; i < 100; ++i) {
        for (int j = 0; j < 100; ++j) {
            const double nm = 0.1 + 0.03 * i;
            const double np = 0.1 + 0.03 * j + 0.013;  // never equal to nm
            const double width = 2.0 * std::max(nm, np) * std::sqrt(std::abs(nm * nm - np * np));
            for (double frac : {-0.5, 0.001, 0.25, 0.5, 0.75, 0.999, 1.5}) {
                const double k02 = kappa * kappa + frac * width;
                if (k02 < 0.0) continue;
                const auto p = make(nm, np, kappa, kappa, std::sqrt(k02));
                const bool expected = frac > 0.0 && frac < 1.0;
                const bool got = check_condition_c(p).admissible;
                if (got != expected) ++mismatches;
                if (got) ++admissible;
            }
        }
    }
    CHECK(mismatches == 0);
    CHECK(admissible > 0);
}

TEST_CASE("condition C unpinned halves need kappa_0 != 0 only") {
    CHECK(check_condition_c(make(1.0, 2.0, 0.0, 0.0, 0.5)).admissible);
    CHECK_FALSE(check_condition_c(make(1.0, 2.0, 0.0, 0.0, 0.0)).admissible);
}

TEST_CASE("hamiltonian reference values") {
    const auto p = make(1.0, 1.0, 0.3, 0.7, 1.0);
    CHECK(hamiltonian(LatticeState(5), p) == 0.0);

    LatticeState delta(3);
    delta.u(0) = 1.0;
    CHECK(hamiltonian(delta, p) == doctest::Approx(1.5).epsilon(1e-15));

    CHECK_THROWS(hamiltonian(LatticeState(0), p));
}

TEST_CASE("hamiltonian equals bond-by-bond summation on random states") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> nu(0.2, 2.5), kappa(0.0, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        const auto p = make(nu(rng), nu(rng), kappa(rng), kappa(rng), kappa(rng));
        LatticeState s(1 + trial % 20);
        for (long x = s.first_site(); x <= s.half_width(); ++x) {
            s.u(x) = g(rng);
            s.v(x) = g(rng);
        }
        const double h = hamiltonian(s, p);
        CHECK(h >= 0.0);
        CHECK(h == doctest::Approx(brute_energy(s, p)).epsilon(1e-13));
    }
}

TEST_CASE("weighted norm is homogeneous and subadditive") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    for (double alpha : {-2.0, -0.5, 0.0, 0.75, 3.0}) {
        const WeightedNorm norm(alpha);
        for (int trial = 0; trial < 50; ++trial) {
            LatticeState a(12), b(12);
            for (long x = -12; x <= 12; ++x) {
                a.u(x) = g(rng);
                a.v(x) = g(rng);
                b.u(x) = g(rng);
                b.v(x) = g(rng);
            }
            const double s = 3.0 * g(rng);
            CHECK(norm(s * a) == doctest::Approx(std::abs(s) * norm(a)).epsilon(1e-13));
            CHECK(norm(a + b) <= norm(a) + norm(b) + 1e-12);
            CHECK(norm(a) > 0.0);
        }
    }
    const WeightedNorm unit(0.5);
    const std::vector<double> at3{1.0};
    CHECK(unit(at3, 3) == doctest::Approx(std::pow(10.0, 0.25)));
    CHECK(japanese_bracket(3.0) == doctest::Approx(std::sqrt(10.0)));
}

TEST_CASE("trajectory seminorm takes the sup over times within the horizon") {
    const auto p = make(1.0, 1.0, 1.0, 1.0, 1.0);
    std::vector<LatticeState> states;
    for (int k = 0; k < 3; ++k) {
        LatticeState s(1);
        s.u(0) = k + 1.0;
        s.v(0) = 10.0 * (k + 1.0);
        states.push_back(s);
    }
    const Trajectory traj(p, TimeGrid{1.0, 0, 2}, states, Provenance::synthetic, {});
    const WeightedNorm norm(0.0);
    CHECK(norm.trajectory_seminorm(traj, 0, 1.0) == doctest::Approx(2.0));
    CHECK(norm.trajectory_seminorm(traj, 1, 5.0) == doctest::Approx(std::sqrt(9.0 + 900.0)));
    CHECK_THROWS(norm.trajectory_seminorm(traj, 2, 1.0));
}
