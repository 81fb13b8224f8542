#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hchain/chain_model.hpp"

namespace hchain {

/// Displacement/velocity pair (u, v) on the symmetric window [-L, L].
class LatticeState {
public:
    LatticeState() = default;
    /// Zero state on [-L, L]; L must be >= 0.
    explicit LatticeState(long half_width);
    LatticeState(long half_width, std::vector<double> u, std::vector<double> v);

    long half_width() const { return half_width_; }
    std::size_t size() const { return u_.size(); }
    long first_site() const { return -half_width_; }
    bool contains(long x) const { return x >= -half_width_ && x <= half_width_; }

    double& u(long x) { return u_[index(x)]; }
    double& v(long x) { return v_[index(x)]; }
    double u(long x) const { return u_[index(x)]; }
    double v(long x) const { return v_[index(x)]; }
    /// Channel 0 is displacement, channel 1 velocity.
    double value(int channel, long x) const { return channel == 0 ? u(x) : v(x); }

    std::span<double> u_values() { return u_; }
    std::span<double> v_values() { return v_; }
    std::span<const double> u_values() const { return u_; }
    std::span<const double> v_values() const { return v_; }

    bool all_finite() const;
    /// Largest |x| with a nonzero entry, or -1 for the zero state.
    long occupied_radius() const;

    /// Restriction to [-R, R], R <= half_width().
    LatticeState restricted(long radius) const;
    /// Embedding into [-R, R], R >= half_width(), zero padded.
    LatticeState padded(long radius) const;

    friend bool operator==(const LatticeState&, const LatticeState&) = default;

private:
    std::size_t index(long x) const { return static_cast<std::size_t>(x + half_width_); }

    long half_width_ = 0;
    std::vector<double> u_;
    std::vector<double> v_;
};

LatticeState operator+(const LatticeState& a, const LatticeState& b);
LatticeState operator*(double s, const LatticeState& a);

enum class Provenance : std::uint8_t { spectral = 0, stepping = 1, modal = 2, synthetic = 3 };

const char* provenance_name(Provenance p);

struct SeedLineage {
    std::uint64_t master_seed = 0;
    std::uint64_t member = 0;
    friend bool operator==(const SeedLineage&, const SeedLineage&) = default;
};

/// Uniform time grid t_k = (first + k) dt, k = 0..steps.  Keeping the origin
/// as an integer multiple of dt makes time shifts exact index arithmetic.
struct TimeGrid {
    double dt = 1.0;
    long first = 0;
    std::size_t steps = 0;

    std::size_t size() const { return steps + 1; }
    double time(std::size_t k) const { return static_cast<double>(first + static_cast<long>(k)) * dt; }
    double t_begin() const { return time(0); }
    double t_end() const { return time(steps); }
    /// Grid index of time t relative to the grid origin (not range checked).
    long index_of(double t) const;

    /// Grid with step dt covering [t_begin, t_end]; both ends must be multiples of dt.
    static TimeGrid spanning(double t_begin, double t_end, double dt);

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

/// Time-sampled states of one realization.  All states share one window.
class Trajectory {
public:
    Trajectory() = default;
    Trajectory(ChainParams params, TimeGrid grid, std::vector<LatticeState> states,
               Provenance provenance, SeedLineage lineage);

    const ChainParams& params() const { return params_; }
    const TimeGrid& grid() const { return grid_; }
    long half_width() const { return states_.empty() ? 0 : states_.front().half_width(); }
    Provenance provenance() const { return provenance_; }
    const SeedLineage& lineage() const { return lineage_; }

    std::size_t size() const { return states_.size(); }
    const LatticeState& state(std::size_t k) const { return states_[k]; }
    std::span<const LatticeState> states() const { return states_; }

    friend bool operator==(const Trajectory&, const Trajectory&) = default;

private:
    ChainParams params_{};
    TimeGrid grid_{};
    std::vector<LatticeState> states_;
    Provenance provenance_ = Provenance::spectral;
    SeedLineage lineage_{};
};

/// Time-shifted view S_tau u(x, t) = u(x, t + tau): the same states relabelled
/// to times t_k - tau.  tau must be an integer multiple of the grid step.
/// Evaluating the view outside its recorded range is reported by the consumer
/// (see pair()).
Trajectory shift_trajectory(const Trajectory& traj, double tau);

}  // namespace hchain
