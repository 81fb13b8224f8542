#include "hchain/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <thread>

#include "hchain/summation.hpp"

namespace hchain {

Observable Observable::pairing(TestFunction v, double tau) {
    Observable o;
    o.kind = Kind::pairing;
    o.v = std::move(v);
    o.tau = tau;
    return o;
}

Observable Observable::point(int channel, long site, double time) {
    if (channel != 0 && channel != 1) throw std::invalid_argument("channel must be 0 or 1");
    Observable o;
    o.kind = Kind::point;
    o.channel = channel;
    o.site = site;
    o.time = time;
    return o;
}

double Observable::t_begin() const { return kind == Kind::pairing ? v.t_begin() + tau : time; }
double Observable::t_end() const { return kind == Kind::pairing ? v.t_end() + tau : time; }
long Observable::max_abs_site() const {
    return kind == Kind::pairing ? v.max_abs_site() : std::abs(site);
}

SampleMatrix::SampleMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

std::vector<double> SampleMatrix::column(std::size_t c) const {
    if (c >= cols_) throw std::out_of_range("sample column out of range");
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = data_[r * cols_ + c];
    return out;
}

MeanEstimate mean_estimate(std::span<const double> xs) {
    if (xs.size() < 2) throw std::invalid_argument("an estimate needs at least two samples");
    const double n = static_cast<double>(xs.size());
    const double mean = pairwise_sum(xs) / n;
    std::vector<double> sq(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - mean) * (xs[i] - mean);
    const double var = pairwise_sum(sq) / (n - 1.0);
    return {mean, std::sqrt(var / n)};
}

namespace {

double z_score(double value, double se) {
    if (se > 0.0) return value / se;
    return value == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), value);
}

std::vector<double> products(const SampleMatrix& s, std::size_t a, std::size_t b) {
    std::vector<double> p(s.rows());
    for (std::size_t r = 0; r < s.rows(); ++r) p[r] = s(r, a) * s(r, b);
    return p;
}

}  // namespace

CorrelationEstimate estimate_product(const SampleMatrix& samples, std::size_t a, std::size_t b,
                                     double tau, std::string id) {
    if (a >= samples.cols() || b >= samples.cols()) throw std::out_of_range("sample column out of range");
    if (samples.rows() < 2) throw std::invalid_argument("an estimate needs at least two samples");
    const auto p = products(samples, a, b);
    const auto m = mean_estimate(p);
    const auto ca = samples.column(a);
    const auto cb = samples.column(b);
    const double n = static_cast<double>(samples.rows());
    CorrelationEstimate e;
    e.id = std::move(id);
    e.tau = tau;
    e.estimate = m.mean;
    e.standard_error = m.standard_error;
    e.samples = samples.rows();
    e.mean_first = pairwise_sum(ca) / n;
    e.mean_second = pairwise_sum(cb) / n;
    return e;
}

std::vector<std::pair<double, double>> windows_for(const std::vector<Observable>& observables,
                                                   double dt_record) {
    if (!(dt_record > 0.0)) throw std::invalid_argument("recording step must be positive");
    std::vector<std::pair<long, long>> idx;
    for (const auto& o : observables) {
        // two steps of slack cover the Simpson parity extension
        const long pad = o.kind == Observable::Kind::pairing ? 2 : 0;
        long a = static_cast<long>(std::floor(o.t_begin() / dt_record + 1e-9)) - pad;
        long b = static_cast<long>(std::ceil(o.t_end() / dt_record - 1e-9)) + pad;
        if (o.t_begin() < 0.0) throw std::invalid_argument("observables must read times t >= 0");
        idx.emplace_back(std::max(a, 0L), b);
    }
    std::sort(idx.begin(), idx.end());
    std::vector<std::pair<long, long>> merged;
    for (const auto& iv : idx) {
        if (!merged.empty() && iv.first <= merged.back().second + 1) {
            merged.back().second = std::max(merged.back().second, iv.second);
        } else {
            merged.push_back(iv);
        }
    }
    std::vector<std::pair<double, double>> out;
    for (const auto& [a, b] : merged) out.emplace_back(a * dt_record, b * dt_record);
    return out;
}

struct ChainEnsemble::Engine {
    std::vector<double> times;
    std::unique_ptr<UnperturbedPropagator> unperturbed;
    std::unique_ptr<ModalPropagator> modal;
    std::shared_ptr<const ModalPropagator::Plan> plan;
    TimeGrid stepping_grid;
};

ChainEnsemble::ChainEnsemble(EnsembleSpec spec) : spec_(std::move(spec)), engine_(std::make_unique<Engine>()) {
    spec_.params.validate();
    if (spec_.members < 1) throw std::invalid_argument("an ensemble needs at least one member");
    if (spec_.windows.empty()) throw std::invalid_argument("ensemble has no recording windows");
    if (spec_.observe_radius < 0 || spec_.observe_radius > spec_.half_width) {
        throw std::invalid_argument("observation radius must lie in [0, L]");
    }
    if (spec_.fixed_initial) {
        if (spec_.fixed_initial->half_width() > spec_.half_width) {
            throw std::invalid_argument("fixed initial state is wider than the window");
        }
    } else {
        spec_.initial.validate();
        if (spec_.half_width < spec_.initial.support_radius()) {
            throw std::invalid_argument("window narrower than the initial covariance support");
        }
    }
    solver_ = spec_.solver;
    if (solver_ == Solver::automatic) {
        solver_ = spec_.mode == ChainMode::unperturbed ? Solver::spectral : Solver::modal;
    }
    if (solver_ == Solver::spectral && spec_.mode != ChainMode::unperturbed) {
        throw std::invalid_argument("the spectral solver covers the unperturbed chain only");
    }
    double t_max = 0.0;
    for (const auto& [a, b] : spec_.windows) {
        if (a < 0.0 || b < a) throw std::invalid_argument("recording windows need 0 <= begin <= end");
        const double dt = spec_.dt_record;
        const long ia = static_cast<long>(std::floor(a / dt + 1e-9));
        const long ib = static_cast<long>(std::ceil(b / dt - 1e-9));
        grids_.push_back(TimeGrid{dt, ia, static_cast<std::size_t>(ib - ia)});
        t_max = std::max(t_max, grids_.back().t_end());
    }
    const long need = required_half_width(spec_.observe_radius, t_max, spec_.params);
    if (need > spec_.half_width) throw WindowOverrun(need, spec_.half_width);

    for (const auto& g : grids_) {
        for (std::size_t k = 0; k < g.size(); ++k) engine_->times.push_back(g.time(k));
    }
    const bool clamp = spec_.mode == ChainMode::unperturbed;
    switch (solver_) {
        case Solver::spectral:
            engine_->unperturbed = std::make_unique<UnperturbedPropagator>(
                spec_.params, spec_.half_width, spec_.observe_radius, engine_->times);
            break;
        case Solver::modal:
            engine_->modal = std::make_unique<ModalPropagator>(spec_.params, spec_.half_width, clamp);
            engine_->plan = engine_->modal->plan(engine_->times, spec_.observe_radius);
            break;
        case Solver::stepping:
            engine_->stepping_grid = TimeGrid{spec_.dt_record, 0, static_cast<std::size_t>(std::lround(t_max / spec_.dt_record))};
            break;
        case Solver::automatic:
            break;
    }
}

ChainEnsemble::~ChainEnsemble() = default;
ChainEnsemble::ChainEnsemble(ChainEnsemble&&) noexcept = default;

std::vector<Trajectory> ChainEnsemble::realize(std::size_t member) const {
    if (member >= spec_.members) throw std::out_of_range("ensemble member out of range");
    const SeedLineage lineage{spec_.seed, member};
    LatticeState y0 = spec_.fixed_initial ? spec_.fixed_initial->padded(spec_.half_width)
                                          : sample_initial(spec_.initial, spec_.half_width, spec_.seed, member);
    const bool clamp = spec_.mode == ChainMode::unperturbed;
    if (clamp) {
        y0.u(0) = 0.0;
        y0.v(0) = 0.0;
    }
    std::vector<Trajectory> out;
    out.reserve(grids_.size());
    if (solver_ == Solver::stepping) {
        StepperOptions opts;
        opts.dt_internal = spec_.dt_internal;
        opts.clamp_origin = clamp;
        opts.observe_radius = spec_.observe_radius;
        opts.lineage = lineage;
        const Trajectory full = evolve_full(y0, engine_->stepping_grid, spec_.params, opts);
        for (const auto& g : grids_) {
            const auto first = static_cast<std::size_t>(g.first);
            std::vector<LatticeState> states(full.states().begin() + static_cast<long>(first),
                                             full.states().begin() + static_cast<long>(first + g.size()));
            out.emplace_back(spec_.params, g, std::move(states), Provenance::stepping, lineage);
        }
        return out;
    }
    std::vector<LatticeState> states = solver_ == Solver::spectral
                                           ? engine_->unperturbed->apply(y0)
                                           : engine_->modal->apply(*engine_->plan, y0);
    const Provenance prov = solver_ == Solver::spectral ? Provenance::spectral : Provenance::modal;
    std::size_t offset = 0;
    for (const auto& g : grids_) {
        std::vector<LatticeState> part(std::make_move_iterator(states.begin() + static_cast<long>(offset)),
                                       std::make_move_iterator(states.begin() + static_cast<long>(offset + g.size())));
        offset += g.size();
        out.emplace_back(spec_.params, g, std::move(part), prov, lineage);
    }
    return out;
}

namespace {

struct Binding {
    std::size_t window = 0;
    std::optional<PairingPlan> plan;
    std::size_t index = 0;
    int channel = 0;
    long site = 0;
};

Binding bind_observable(const Observable& o, const std::vector<TimeGrid>& grids, long radius) {
    if (o.max_abs_site() > radius) throw std::out_of_range("observable leaves the observation window");
    for (std::size_t w = 0; w < grids.size(); ++w) {
        const TimeGrid& g = grids[w];
        Binding b;
        b.window = w;
        if (o.kind == Observable::Kind::pairing) {
            try {
                b.plan.emplace(o.v, g, radius, o.tau);
            } catch (const std::out_of_range&) {
                continue;
            }
            return b;
        }
        const double steps = o.time / g.dt;
        const long k = std::lround(steps) - g.first;
        if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, std::abs(steps))) {
            throw std::invalid_argument("point observable time is not on the recording grid");
        }
        if (k < 0 || k > static_cast<long>(g.steps)) continue;
        b.index = static_cast<std::size_t>(k);
        b.channel = o.channel;
        b.site = o.site;
        return b;
    }
    throw std::out_of_range("observable is not covered by a recording window");
}

double evaluate(const Binding& b, std::span<const LatticeState> states) {
    if (b.plan) return b.plan->apply(states);
    return states[b.index].value(b.channel, b.site);
}

}  // namespace

SampleMatrix sample_observables(const ChainEnsemble& ensemble, const std::vector<Observable>& observables,
                                unsigned workers) {
    std::vector<Binding> bindings;
    for (const auto& o : observables) {
        bindings.push_back(bind_observable(o, ensemble.windows(), ensemble.spec().observe_radius));
    }
    const std::size_t n = ensemble.size();
    SampleMatrix out(n, observables.size());
    const std::size_t w = std::clamp<std::size_t>(workers, 1, n);
    auto run = [&](std::size_t begin, std::size_t end) {
        for (std::size_t m = begin; m < end; ++m) {
            const auto trajs = ensemble.realize(m);
            for (std::size_t j = 0; j < bindings.size(); ++j) {
                out(m, j) = evaluate(bindings[j], trajs[bindings[j].window].states());
            }
        }
    };
    if (w == 1) {
        run(0, n);
        return out;
    }
    std::vector<std::exception_ptr> errors(w);
    std::vector<std::thread> threads;
    for (std::size_t i = 0; i < w; ++i) {
        threads.emplace_back([&, i] {
            try {
                run(n * i / w, n * (i + 1) / w);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

SampleMatrix sample_observables(std::span<const Trajectory> ensemble, const std::vector<Observable>& observables) {
    SampleMatrix out(ensemble.size(), observables.size());
    for (std::size_t m = 0; m < ensemble.size(); ++m) {
        const Trajectory& traj = ensemble[m];
        for (std::size_t j = 0; j < observables.size(); ++j) {
            const Binding b = bind_observable(observables[j], {traj.grid()}, traj.half_width());
            out(m, j) = evaluate(b, traj.states());
        }
    }
    return out;
}

SampleMatrix sample_observables(std::span<const std::vector<Trajectory>> members,
                                const std::vector<Observable>& observables) {
    SampleMatrix out(members.size(), observables.size());
    if (members.empty()) return out;
    std::vector<TimeGrid> grids;
    for (const auto& seg : members.front()) grids.push_back(seg.grid());
    const long radius = members.front().empty() ? 0 : members.front().front().half_width();
    std::vector<Binding> bindings;
    for (const auto& o : observables) bindings.push_back(bind_observable(o, grids, radius));
    for (std::size_t m = 0; m < members.size(); ++m) {
        const auto& segs = members[m];
        if (segs.size() != grids.size()) throw std::invalid_argument("members record different windows");
        for (std::size_t w = 0; w < segs.size(); ++w) {
            if (!(segs[w].grid() == grids[w]) || segs[w].half_width() != radius) {
                throw std::invalid_argument("members record different windows");
            }
        }
        for (std::size_t j = 0; j < bindings.size(); ++j) {
            out(m, j) = evaluate(bindings[j], segs[bindings[j].window].states());
        }
    }
    return out;
}

CorrelationEstimate estimate_Q_P(std::span<const Trajectory> ensemble, const TestFunction& v1,
                                 const TestFunction& v2, double tau) {
    if (ensemble.empty()) throw std::invalid_argument("empty ensemble");
    const auto s = sample_observables(ensemble, {Observable::pairing(v1, tau), Observable::pairing(v2, tau)});
    return estimate_product(s, 0, 1, tau, "Q");
}

PairedDifference paired_difference(const SampleMatrix& samples, std::pair<std::size_t, std::size_t> a,
                                   std::pair<std::size_t, std::size_t> b) {
    std::vector<double> d(samples.rows());
    for (std::size_t r = 0; r < samples.rows(); ++r) {
        d[r] = samples(r, a.first) * samples(r, a.second) - samples(r, b.first) * samples(r, b.second);
    }
    const auto m = mean_estimate(d);
    return {m.mean, m.standard_error, z_score(m.mean, m.standard_error)};
}

ConvergenceTrack convergence_track(const SampleMatrix& samples,
                                   const std::vector<std::pair<std::size_t, std::size_t>>& columns,
                                   const std::vector<double>& taus, double threshold) {
    if (columns.size() != taus.size()) throw std::invalid_argument("one column pair per tau");
    for (std::size_t k = 1; k < taus.size(); ++k) {
        if (!(taus[k] > taus[k - 1])) throw std::invalid_argument("tau list must be increasing");
    }
    ConvergenceTrack track;
    for (std::size_t k = 0; k < taus.size(); ++k) {
        track.rows.push_back(estimate_product(samples, columns[k].first, columns[k].second, taus[k], "Q"));
    }
    const std::size_t top = (taus.size() + 1) / 2;
    const std::size_t start = taus.size() - top;
    for (std::size_t i = start; i < taus.size(); ++i) {
        for (std::size_t j = i + 1; j < taus.size(); ++j) {
            const auto d = paired_difference(samples, columns[j], columns[i]);
            if (std::abs(d.z) >= std::abs(track.cauchy_z)) {
                track.cauchy_difference = d.difference;
                track.cauchy_standard_error = d.standard_error;
                track.cauchy_z = d.z;
            }
        }
    }
    track.cauchy_pass = std::abs(track.cauchy_z) <= threshold;
    return track;
}

ConvergenceTrack convergence_track(std::span<const Trajectory> ensemble, const TestFunction& v1,
                                   const TestFunction& v2, const std::vector<double>& taus) {
    if (ensemble.empty()) throw std::invalid_argument("empty ensemble");
    std::vector<Observable> obs;
    std::vector<std::pair<std::size_t, std::size_t>> cols;
    for (double tau : taus) {
        cols.emplace_back(obs.size(), obs.size() + 1);
        obs.push_back(Observable::pairing(v1, tau));
        obs.push_back(Observable::pairing(v2, tau));
    }
    return convergence_track(sample_observables(ensemble, obs), cols, taus);
}

GaussianityReport gaussianity_test(const SampleMatrix& samples, const std::vector<std::size_t>& columns,
                                   double threshold) {
    if (samples.rows() < 1000) throw std::invalid_argument("Gaussianity test needs at least 1000 samples");
    if (columns.size() < 4) throw std::invalid_argument("Gaussianity test needs at least four observables");
    const std::size_t k = columns.size();
    const std::size_t n = samples.rows();
    const double nd = static_cast<double>(n);
    std::vector<std::vector<double>> cols;
    for (auto c : columns) cols.push_back(samples.column(c));

    std::vector<double> b(k * k);
    std::vector<double> buf(n);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < k; ++j) {
            for (std::size_t r = 0; r < n; ++r) buf[r] = cols[i][r] * cols[j][r];
            b[i * k + j] = b[j * k + i] = pairwise_sum(buf) / nd;
        }
    }
    auto bij = [&](std::size_t i, std::size_t j) { return b[i * k + j]; };

    GaussianityReport rep;
    auto record = [&](std::vector<MomentCheck>& dst, std::vector<std::size_t> ids, double stat,
                      const std::vector<double>& influence) {
        const auto m = mean_estimate(influence);
        MomentCheck c;
        for (auto id : ids) c.indices.push_back(columns[id]);
        c.statistic = stat;
        c.standard_error = m.standard_error;
        c.z = z_score(stat, m.standard_error);
        rep.max_abs_z = std::max(rep.max_abs_z, std::abs(c.z));
        dst.push_back(std::move(c));
    };

    std::vector<double> psi(n);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i; j < k; ++j)
            for (std::size_t l = j; l < k; ++l)
                for (std::size_t m = l; m < k; ++m) {
                    for (std::size_t r = 0; r < n; ++r) {
                        buf[r] = cols[i][r] * cols[j][r] * cols[l][r] * cols[m][r];
                    }
                    const double m4 = pairwise_sum(buf) / nd;
                    const double wick = bij(i, j) * bij(l, m) + bij(i, l) * bij(j, m) + bij(i, m) * bij(j, l);
                    for (std::size_t r = 0; r < n; ++r) {
                        const double a = cols[i][r], bb = cols[j][r], c = cols[l][r], d = cols[m][r];
                        psi[r] = buf[r] - bij(l, m) * a * bb - bij(i, j) * c * d - bij(j, m) * a * c -
                                 bij(i, l) * bb * d - bij(j, l) * a * d - bij(i, m) * bb * c;
                    }
                    record(rep.fourth, {i, j, l, m}, m4 - wick, psi);
                }
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i; j < k; ++j)
            for (std::size_t l = j; l < k; ++l) {
                for (std::size_t r = 0; r < n; ++r) buf[r] = cols[i][r] * cols[j][r] * cols[l][r];
                record(rep.third, {i, j, l}, pairwise_sum(buf) / nd, buf);
            }
    rep.pass = rep.max_abs_z <= threshold;
    return rep;
}

GaussianityReport gaussianity_test(std::span<const Trajectory> ensemble, const std::vector<TestFunction>& vs,
                                   double tau) {
    std::vector<Observable> obs;
    std::vector<std::size_t> cols;
    for (const auto& v : vs) {
        cols.push_back(obs.size());
        obs.push_back(Observable::pairing(v, tau));
    }
    return gaussianity_test(sample_observables(ensemble, obs), cols);
}

std::vector<MixingRow> mixing_diagnostic(const SampleMatrix& samples,
                                         const std::vector<std::pair<std::size_t, std::size_t>>& columns,
                                         const std::vector<double>& taus,
                                         const std::vector<std::optional<double>>& oracles) {
    if (columns.size() != taus.size()) throw std::invalid_argument("one column pair per tau");
    if (!oracles.empty() && oracles.size() != taus.size()) throw std::invalid_argument("one oracle per tau");
    std::vector<MixingRow> rows;
    for (std::size_t k = 0; k < taus.size(); ++k) {
        MixingRow row;
        row.tau = taus[k];
        row.estimate = estimate_product(samples, columns[k].first, columns[k].second, taus[k], "I");
        if (!oracles.empty()) row.oracle = oracles[k];
        row.z = z_score(row.estimate.estimate - row.oracle.value_or(0.0), row.estimate.standard_error);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace hchain
