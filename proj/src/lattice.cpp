#include "hchain/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hchain {

LatticeState::LatticeState(long half_width)
    : half_width_(half_width),
      u_(static_cast<std::size_t>(2 * std::max(half_width, 0L) + 1), 0.0),
      v_(u_.size(), 0.0) {
    if (half_width < 0) throw std::invalid_argument("window half-width must be >= 0");
}

LatticeState::LatticeState(long half_width, std::vector<double> u, std::vector<double> v)
    : half_width_(half_width), u_(std::move(u)), v_(std::move(v)) {
    if (half_width < 0) throw std::invalid_argument("window half-width must be >= 0");
    const auto n = static_cast<std::size_t>(2 * half_width + 1);
    if (u_.size() != n || v_.size() != n) {
        throw std::invalid_argument("u and v must both cover the window [-L, L]");
    }
}

bool LatticeState::all_finite() const {
    auto finite = [](double x) { return std::isfinite(x); };
    return std::all_of(u_.begin(), u_.end(), finite) && std::all_of(v_.begin(), v_.end(), finite);
}

long LatticeState::occupied_radius() const {
    long r = -1;
    for (long x = -half_width_; x <= half_width_; ++x) {
        if (u(x) != 0.0 || v(x) != 0.0) r = std::max(r, std::abs(x));
    }
    return r;
}

LatticeState LatticeState::restricted(long radius) const {
    if (radius < 0 || radius > half_width_) throw std::invalid_argument("restriction radius out of range");
    LatticeState out(radius);
    for (long x = -radius; x <= radius; ++x) {
        out.u(x) = u(x);
        out.v(x) = v(x);
    }
    return out;
}

LatticeState LatticeState::padded(long radius) const {
    if (radius < half_width_) throw std::invalid_argument("padding radius smaller than window");
    LatticeState out(radius);
    for (long x = -half_width_; x <= half_width_; ++x) {
        out.u(x) = u(x);
        out.v(x) = v(x);
    }
    return out;
}

LatticeState operator+(const LatticeState& a, const LatticeState& b) {
    if (a.half_width() != b.half_width()) throw std::invalid_argument("window mismatch");
    LatticeState out(a.half_width());
    for (long x = a.first_site(); x <= a.half_width(); ++x) {
        out.u(x) = a.u(x) + b.u(x);
        out.v(x) = a.v(x) + b.v(x);
    }
    return out;
}

LatticeState operator*(double s, const LatticeState& a) {
    LatticeState out(a.half_width());
    for (long x = a.first_site(); x <= a.half_width(); ++x) {
        out.u(x) = s * a.u(x);
        out.v(x) = s * a.v(x);
    }
    return out;
}

const char* provenance_name(Provenance p) {
    switch (p) {
        case Provenance::spectral: return "spectral";
        case Provenance::stepping: return "stepping";
        case Provenance::modal: return "modal";
        case Provenance::synthetic: return "synthetic";
    }
    return "unknown";
}

long TimeGrid::index_of(double t) const {
    return std::lround(t / dt) - first;
}

TimeGrid TimeGrid::spanning(double t_begin, double t_end, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
    if (t_end < t_begin) throw std::invalid_argument("time span is reversed");
    const long a = std::lround(t_begin / dt);
    const long b = std::lround(t_end / dt);
    const double tol = 1e-9 * std::max(1.0, std::abs(t_end) / dt);
    if (std::abs(t_begin / dt - static_cast<double>(a)) > tol ||
        std::abs(t_end / dt - static_cast<double>(b)) > tol) {
        throw std::invalid_argument("time span endpoints must be multiples of the step");
    }
    return TimeGrid{dt, a, static_cast<std::size_t>(b - a)};
}

Trajectory::Trajectory(ChainParams params, TimeGrid grid, std::vector<LatticeState> states,
                       Provenance provenance, SeedLineage lineage)
    : params_(params),
      grid_(grid),
      states_(std::move(states)),
      provenance_(provenance),
      lineage_(lineage) {
    if (!(grid_.dt > 0.0)) throw std::invalid_argument("trajectory time step must be positive");
    if (states_.size() != grid_.size()) {
        throw std::invalid_argument("trajectory needs one state per grid time");
    }
    for (const auto& s : states_) {
        if (s.half_width() != states_.front().half_width()) {
            throw std::invalid_argument("trajectory states must share one window");
        }
    }
}

Trajectory shift_trajectory(const Trajectory& traj, double tau) {
    const TimeGrid& g = traj.grid();
    const double steps = tau / g.dt;
    const long m = std::lround(steps);
    if (std::abs(steps - static_cast<double>(m)) > 1e-9 * std::max(1.0, std::abs(steps))) {
        throw std::invalid_argument("shift must be an integer multiple of the time step");
    }
    TimeGrid shifted = g;
    shifted.first -= m;
    std::vector<LatticeState> states(traj.states().begin(), traj.states().end());
    return Trajectory(traj.params(), shifted, std::move(states), traj.provenance(),
                      traj.lineage());
}

}  // namespace hchain
