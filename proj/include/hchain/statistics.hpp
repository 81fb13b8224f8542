#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hchain/chain_model.hpp"
#include "hchain/dynamics.hpp"
#include "hchain/initial_measures.hpp"
#include "hchain/lattice.hpp"
#include "hchain/test_function.hpp"

namespace hchain {

/// A scalar functional of one realization: either a pairing [S_tau u, v]
/// or a point value Y^channel(site, time).
struct Observable {
    enum class Kind { pairing, point };

    Kind kind = Kind::point;
    TestFunction v;
    double tau = 0.0;
    int channel = 0;
    long site = 0;
    double time = 0.0;

    static Observable pairing(TestFunction v, double tau);
    static Observable point(int channel, long site, double time);

    /// Time interval the observable reads.
    double t_begin() const;
    double t_end() const;
    long max_abs_site() const;
};

/// N x K matrix of per-member observable values (row-major).
class SampleMatrix {
public:
    SampleMatrix(std::size_t rows, std::size_t cols);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    std::vector<double> column(std::size_t c) const;
    const std::vector<double>& data() const { return data_; }

    friend bool operator==(const SampleMatrix&, const SampleMatrix&) = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
};

/// Empirical mean of a product of two observables.
struct CorrelationEstimate {
    std::string id;
    double tau = 0.0;
    double estimate = 0.0;
    double standard_error = 0.0;
    std::size_t samples = 0;
    /// Sample means of the two factors (zero in expectation).
    double mean_first = 0.0;
    double mean_second = 0.0;
};

/// Mean and standard error (sample std / sqrt N) with pairwise summation.
struct MeanEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
};
MeanEstimate mean_estimate(std::span<const double> xs);

CorrelationEstimate estimate_product(const SampleMatrix& samples, std::size_t a, std::size_t b,
                                     double tau = 0.0, std::string id = {});

enum class ChainMode { unperturbed, full };
enum class Solver { automatic, spectral, modal, stepping };

struct EnsembleSpec {
    ChainParams params;
    InitialMeasureSpec initial;
    ChainMode mode = ChainMode::full;
    Solver solver = Solver::automatic;
    long half_width = 256;
    long observe_radius = 10;
    double dt_record = 0.05;
    /// Recorded intervals [begin, end], snapped outward to the dt_record grid.
    std::vector<std::pair<double, double>> windows;
    std::uint64_t seed = 1;
    std::size_t members = 1000;
    /// Internal step of the stepping solver.
    double dt_internal = 1e-3;
    /// Deterministic Y0 shared by every member instead of a draw from `initial`.
    std::optional<LatticeState> fixed_initial;
};

/// Recording windows that cover every observable, padded by one step and merged.
std::vector<std::pair<double, double>> windows_for(const std::vector<Observable>& observables,
                                                   double dt_record);

/// Ensemble of independent chain realizations, each realized on demand from
/// (seed, member index).  Members record only the configured windows on the
/// observation sub-window [-R, R].
class ChainEnsemble {
public:
    explicit ChainEnsemble(EnsembleSpec spec);
    ~ChainEnsemble();
    ChainEnsemble(ChainEnsemble&&) noexcept;

    const EnsembleSpec& spec() const { return spec_; }
    std::size_t size() const { return spec_.members; }
    Solver solver() const { return solver_; }
    const std::vector<TimeGrid>& windows() const { return grids_; }

    /// One trajectory per recording window.
    std::vector<Trajectory> realize(std::size_t member) const;

private:
    struct Engine;
    EnsembleSpec spec_;
    Solver solver_;
    std::vector<TimeGrid> grids_;
    std::unique_ptr<Engine> engine_;
};

/// Evaluates observables on every member; rows are members.  Work is split
/// into contiguous member blocks, so the result does not depend on `workers`.
SampleMatrix sample_observables(const ChainEnsemble& ensemble,
                                const std::vector<Observable>& observables, unsigned workers = 1);

/// Same for an explicit list of single-window trajectories.
SampleMatrix sample_observables(std::span<const Trajectory> ensemble,
                                const std::vector<Observable>& observables);

/// Same for members stored as segment lists that share one set of grids.
SampleMatrix sample_observables(std::span<const std::vector<Trajectory>> members,
                                const std::vector<Observable>& observables);

/// E([S_tau u, v1][S_tau u, v2]) over the ensemble.
CorrelationEstimate estimate_Q_P(std::span<const Trajectory> ensemble, const TestFunction& v1,
                                 const TestFunction& v2, double tau);

struct ConvergenceTrack {
    std::vector<CorrelationEstimate> rows;
    /// Largest |difference| among the upper half of the tau list, its paired
    /// standard error and z-score.
    double cauchy_difference = 0.0;
    double cauchy_standard_error = 0.0;
    double cauchy_z = 0.0;
    bool cauchy_pass = true;
};

/// `columns[k]` holds the two sample columns of the product at taus[k].
ConvergenceTrack convergence_track(const SampleMatrix& samples,
                                   const std::vector<std::pair<std::size_t, std::size_t>>& columns,
                                   const std::vector<double>& taus, double threshold = 4.0);

ConvergenceTrack convergence_track(std::span<const Trajectory> ensemble, const TestFunction& v1,
                                   const TestFunction& v2, const std::vector<double>& taus);

/// Paired comparison of two product estimates on the same members.
struct PairedDifference {
    double difference = 0.0;
    double standard_error = 0.0;
    double z = 0.0;
};
PairedDifference paired_difference(const SampleMatrix& samples, std::pair<std::size_t, std::size_t> a,
                                   std::pair<std::size_t, std::size_t> b);

struct MomentCheck {
    std::vector<std::size_t> indices;
    double statistic = 0.0;  // empirical minus Gaussian prediction
    double standard_error = 0.0;
    double z = 0.0;
};

struct GaussianityReport {
    std::vector<MomentCheck> fourth;  // Wick pairings
    std::vector<MomentCheck> third;
    double max_abs_z = 0.0;
    bool pass = true;
};

/// Throws std::invalid_argument when fewer than 1000 samples or 4 columns.
GaussianityReport gaussianity_test(const SampleMatrix& samples, const std::vector<std::size_t>& columns,
                                   double threshold = 4.0);

GaussianityReport gaussianity_test(std::span<const Trajectory> ensemble,
                                   const std::vector<TestFunction>& vs, double tau);

struct MixingRow {
    double tau = 0.0;
    CorrelationEstimate estimate;
    std::optional<double> oracle;
    double z = 0.0;  // against the oracle when present, else against zero
};

/// I_tau = E([S_{tau0 + tau} u, v1][S_{tau0} u, v2]); `columns[k]` are the
/// sample columns of the two factors at taus[k].
std::vector<MixingRow> mixing_diagnostic(const SampleMatrix& samples,
                                         const std::vector<std::pair<std::size_t, std::size_t>>& columns,
                                         const std::vector<double>& taus,
                                         const std::vector<std::optional<double>>& oracles = {});

}  // namespace hchain
