#include "hchain/dynamics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace hchain {

long required_half_width(long radius, double horizon, const ChainParams& params) {
    const double reach = params.max_group_velocity() * std::abs(horizon);
    return std::max(radius, 0L) + static_cast<long>(std::ceil(reach - 1e-12)) + cone_margin;
}

WindowOverrun::WindowOverrun(long required, long actual)
    : std::runtime_error("window half-width " + std::to_string(actual) +
                         " is too small for the signal cone; need L >= " +
                         std::to_string(required)),
      required_(required) {}

namespace {

// cos(pi m / n) for m = 0..2n-1
std::vector<double> cos_table(std::size_t n) {
    std::vector<double> table(2 * n);
    for (std::size_t m = 0; m < 2 * n; ++m) {
        table[m] = std::cos(std::numbers::pi * static_cast<double>(m) / static_cast<double>(n));
    }
    return table;
}

}  // namespace

FreeGreenFunction::FreeGreenFunction(double t, Side side, const ChainParams& params, long z_max,
                                     const ThetaGrid& grid)
    : t_(t), z_max_(z_max) {
    if (z_max < 0) throw std::invalid_argument("z_max must be >= 0");
    const std::size_t n = grid.size();
    if (n < 64) throw std::invalid_argument("n_theta must be >= 64");
    const double kappa = params.kappa(side);
    if (!grid.shifted() && kappa == 0.0) {
        throw std::invalid_argument(
            "unshifted theta grid samples theta = 0 where the dispersion vanishes (kappa = 0); "
            "use the shifted grid");
    }

    // Samples on theta >= 0; the integrand is even so only these are needed.
    const std::size_t half = n / 2;
    const double h = grid.step();
    const bool shifted = grid.shifted();
    const std::size_t count = shifted ? half : half + 1;  // unshifted: 0, h, ..., pi
    std::vector<double> f00(count), f01(count), f10(count);
    for (std::size_t j = 0; j < count; ++j) {
        const double theta = shifted ? (static_cast<double>(j) + 0.5) * h
                                     : (j == half ? std::numbers::pi : static_cast<double>(j) * h);
        const double phi = dispersion(theta, side, params);
        const double c = std::cos(phi * t);
        const double s = std::sin(phi * t);
        f00[j] = c;
        f01[j] = phi > 0.0 ? s / phi : t;
        f10[j] = -phi * s;
    }

    const std::vector<double> table = cos_table(n);
    const std::size_t period = 2 * n;
    const double inv_n = 1.0 / static_cast<double>(n);
    g00_.assign(static_cast<std::size_t>(z_max) + 1, 0.0);
    g01_.assign(g00_.size(), 0.0);
    g10_.assign(g00_.size(), 0.0);

    for (long z = 0; z <= z_max; ++z) {
        const std::size_t zz = static_cast<std::size_t>(z) % period;
        double s00 = 0.0, s01 = 0.0, s10 = 0.0;
        if (shifted) {
            // cos(z theta_j) = cos(pi z (2j+1) / n)
            std::size_t m = zz;
            const std::size_t stride = (2 * zz) % period;
            for (std::size_t j = 0; j < half; ++j) {
                const double c = table[m];
                s00 += c * f00[j];
                s01 += c * f01[j];
                s10 += c * f10[j];
                m += stride;
                if (m >= period) m -= period;
            }
            s00 *= 2.0;
            s01 *= 2.0;
            s10 *= 2.0;
        } else {
            // cos(z j h) = cos(pi 2 z j / n)
            std::size_t m = (2 * zz) % period;
            const std::size_t stride = m;
            for (std::size_t j = 1; j < half; ++j) {
                const double c = table[m];
                s00 += c * f00[j];
                s01 += c * f01[j];
                s10 += c * f10[j];
                m += stride;
                if (m >= period) m -= period;
            }
            const double sign = (z % 2 == 0) ? 1.0 : -1.0;
            s00 = 2.0 * s00 + f00[0] + sign * f00[half];
            s01 = 2.0 * s01 + f01[0] + sign * f01[half];
            s10 = 2.0 * s10 + f10[0] + sign * f10[half];
        }
        const auto iz = static_cast<std::size_t>(z);
        g00_[iz] = s00 * inv_n;
        g01_[iz] = s01 * inv_n;
        g10_[iz] = s10 * inv_n;
    }
}

double FreeGreenFunction::value(int i, int j, long z) const {
    const auto iz = static_cast<std::size_t>(std::abs(z));
    if (std::abs(z) > z_max_) throw std::out_of_range("lag outside tabulated range");
    if (i == j) return g00_[iz];
    return i == 0 ? g01_[iz] : g10_[iz];
}

Mat2 FreeGreenFunction::at(long z) const {
    const auto iz = static_cast<std::size_t>(std::abs(z));
    if (std::abs(z) > z_max_) throw std::out_of_range("lag outside tabulated range");
    return {g00_[iz], g01_[iz], g10_[iz], g00_[iz]};
}

std::size_t recommended_theta_points(long z_max, double t, const ChainParams& params) {
    const double need =
        8.0 * (static_cast<double>(std::max(z_max, 0L)) + params.max_group_velocity() * std::abs(t));
    std::size_t n = 64;
    while (static_cast<double>(n) < need) n *= 2;
    return n;
}

GreenKernel::GreenKernel(Side side, double t, long x_lo, long x_hi, long y_lo, long y_hi,
                         std::vector<Mat2> values)
    : side_(side), t_(t), x_lo_(x_lo), x_hi_(x_hi), y_lo_(y_lo), y_hi_(y_hi),
      values_(std::move(values)) {
    if (x_lo < 0 || y_lo < 0 || x_hi < x_lo || y_hi < y_lo) {
        throw std::invalid_argument("kernel index ranges must satisfy 0 <= lo <= hi");
    }
    const auto expected = static_cast<std::size_t>((x_hi - x_lo + 1) * (y_hi - y_lo + 1));
    if (values_.size() != expected) throw std::invalid_argument("kernel value count mismatch");
}

const Mat2& GreenKernel::at(long x, long y) const {
    const long sign = side_ == Side::right ? 1 : -1;
    const long ax = sign * x;
    const long ay = sign * y;
    if (ax < x_lo_ || ax > x_hi_ || ay < y_lo_ || ay > y_hi_) {
        throw std::out_of_range("site pair outside the kernel's index rectangle");
    }
    return values_[static_cast<std::size_t>((ax - x_lo_) * (y_hi_ - y_lo_ + 1) + (ay - y_lo_))];
}

GreenKernel green_kernel(double t, Side side, const ChainParams& params, long x_lo, long x_hi,
                         long y_lo, long y_hi, std::size_t n_theta, bool shifted) {
    params.validate();
    if (x_lo < 0 || y_lo < 0 || x_hi < x_lo || y_hi < y_lo) {
        throw std::invalid_argument("kernel index ranges must satisfy 0 <= lo <= hi");
    }
    if (n_theta == 0) n_theta = recommended_theta_points(x_hi + y_hi, t, params);
    if (n_theta < 64 || n_theta % 2 != 0) throw std::invalid_argument("n_theta must be even and >= 64");
    const ThetaGrid grid(n_theta, shifted);
    const FreeGreenFunction free(t, side, params, x_hi + y_hi, grid);
    std::vector<Mat2> values;
    values.reserve(static_cast<std::size_t>((x_hi - x_lo + 1) * (y_hi - y_lo + 1)));
    for (long x = x_lo; x <= x_hi; ++x) {
        for (long y = y_lo; y <= y_hi; ++y) {
            const Mat2 a = free.at(x - y);
            const Mat2 b = free.at(x + y);
            values.push_back({a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]});
        }
    }
    return GreenKernel(side, t, x_lo, x_hi, y_lo, y_hi, std::move(values));
}

LatticeState evolve_unperturbed(const LatticeState& y0, double t, const ChainParams& params,
                                std::size_t n_theta) {
    params.validate();
    const long L = y0.half_width();
    LatticeState out(L);
    long radius = -1;
    for (long x = -L; x <= L; ++x) {
        if (x != 0 && (y0.u(x) != 0.0 || y0.v(x) != 0.0)) radius = std::max(radius, std::abs(x));
    }
    if (radius < 0) return out;
    const long required = required_half_width(radius, t, params);
    if (required > L) throw WindowOverrun(required, L);

    for (Side side : {Side::right, Side::left}) {
        const long sign = side == Side::right ? 1 : -1;
        const std::size_t n = n_theta == 0 ? recommended_theta_points(L + radius, t, params) : n_theta;
        const ThetaGrid grid(n, true);
        const FreeGreenFunction free(t, side, params, L + radius, grid);
        for (long x = 1; x <= L; ++x) {
            double u = 0.0, v = 0.0;
            for (long y = 1; y <= radius; ++y) {
                const double u0 = y0.u(sign * y);
                const double v0 = y0.v(sign * y);
                if (u0 == 0.0 && v0 == 0.0) continue;
                const Mat2 a = free.at(x - y);
                const Mat2 b = free.at(x + y);
                u += (a[0] - b[0]) * u0 + (a[1] - b[1]) * v0;
                v += (a[2] - b[2]) * u0 + (a[3] - b[3]) * v0;
            }
            out.u(sign * x) = u;
            out.v(sign * x) = v;
        }
    }
    return out;
}

namespace {

class SteppedChain {
public:
    SteppedChain(const LatticeState& y0, const ChainParams& p, bool clamp)
        : L_(y0.half_width()),
          u_(y0.u_values().begin(), y0.u_values().end()),
          v_(y0.v_values().begin(), y0.v_values().end()),
          a_(u_.size(), 0.0),
          np2_(p.nu_plus * p.nu_plus),
          nm2_(p.nu_minus * p.nu_minus),
          kp2_(p.kappa_plus * p.kappa_plus),
          km2_(p.kappa_minus * p.kappa_minus),
          k02_(p.kappa_0 * p.kappa_0),
          clamp_(clamp) {
        if (clamp_) {
            u_[origin()] = 0.0;
            v_[origin()] = 0.0;
        }
        accelerate();
    }

    void step_verlet(double h) {
        const std::size_t n = u_.size();
        for (std::size_t i = 0; i < n; ++i) v_[i] += 0.5 * h * a_[i];
        for (std::size_t i = 0; i < n; ++i) u_[i] += h * v_[i];
        accelerate();
        for (std::size_t i = 0; i < n; ++i) v_[i] += 0.5 * h * a_[i];
    }

    void step(double h, Scheme scheme) {
        if (scheme == Scheme::velocity_verlet) {
            step_verlet(h);
            return;
        }
        static const double cbrt2 = std::cbrt(2.0);
        static const double w1 = 1.0 / (2.0 - cbrt2);
        static const double w0 = -cbrt2 / (2.0 - cbrt2);
        step_verlet(w1 * h);
        step_verlet(w0 * h);
        step_verlet(w1 * h);
    }

    LatticeState state() const { return LatticeState(L_, u_, v_); }

private:
    std::size_t origin() const { return static_cast<std::size_t>(L_); }

    void accelerate() {
        const std::size_t n = u_.size();
        const std::size_t o = origin();
        auto at = [&](std::size_t i) { return i < n ? u_[i] : 0.0; };
        for (std::size_t i = o + 1; i < n; ++i) {
            a_[i] = np2_ * (at(i + 1) + u_[i - 1] - 2.0 * u_[i]) - kp2_ * u_[i];
        }
        for (std::size_t i = 0; i < o; ++i) {
            const double left = i == 0 ? 0.0 : u_[i - 1];
            a_[i] = nm2_ * (left + u_[i + 1] - 2.0 * u_[i]) - km2_ * u_[i];
        }
        if (clamp_) {
            a_[o] = 0.0;
        } else {
            const double right = o + 1 < n ? u_[o + 1] : 0.0;
            const double left = o > 0 ? u_[o - 1] : 0.0;
            a_[o] = np2_ * (right - u_[o]) + nm2_ * (left - u_[o]) - k02_ * u_[o];
        }
    }

    long L_;
    std::vector<double> u_, v_, a_;
    double np2_, nm2_, kp2_, km2_, k02_;
    bool clamp_;
};

}  // namespace

Trajectory evolve_full(const LatticeState& y0, const TimeGrid& grid, const ChainParams& params,
                       const StepperOptions& options) {
    params.validate();
    const long L = y0.half_width();
    if (L < 1) throw std::invalid_argument("window must contain at least 3 sites");
    if (!y0.all_finite()) throw std::invalid_argument("initial state has non-finite entries");
    if (!(options.dt_internal > 0.0) || options.dt_internal > 0.1 / params.max_frequency()) {
        throw std::invalid_argument("dt_internal must lie in (0, 0.1 / a_max]");
    }
    if (grid.t_begin() < 0.0) throw std::invalid_argument("recording grid must start at t >= 0");
    if (options.observe_radius > L) throw std::invalid_argument("observation radius exceeds window");

    const double horizon = grid.t_end();
    const long radius = options.observe_radius >= 0 ? options.observe_radius : y0.occupied_radius();
    if (radius >= 0) {
        const long required = required_half_width(radius, horizon, params);
        if (required > L) throw WindowOverrun(required, L);
    }

    SteppedChain chain(y0, params, options.clamp_origin);
    const double h0 = hamiltonian(chain.state(), params);
    auto record = [&](const LatticeState& s) {
        return options.observe_radius >= 0 ? s.restricted(options.observe_radius) : s;
    };

    std::vector<LatticeState> states;
    states.reserve(grid.size());
    double t_now = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double target = grid.time(k);
        const double span = target - t_now;
        const auto substeps =
            static_cast<long>(std::ceil(span / options.dt_internal - 1e-9));
        if (substeps > 0) {
            const double h = span / static_cast<double>(substeps);
            for (long s = 0; s < substeps; ++s) chain.step(h, options.scheme);
        }
        t_now = target;
        LatticeState current = chain.state();
        if (h0 > 0.0) {
            const double drift = std::abs(hamiltonian(current, params) - h0) / h0;
            if (!(drift <= options.energy_tolerance)) {
                throw InstabilityError("relative energy drift " + std::to_string(drift) +
                                       " at t = " + std::to_string(target) + " exceeds tolerance");
            }
        }
        states.push_back(record(current));
    }
    return Trajectory(params, grid, std::move(states), Provenance::stepping, options.lineage);
}

struct UnperturbedPropagator::Tables {
    // rows ((k * R) + (x - 1)) * 2 + channel, columns [u0(1..L), v0(1..L)] by magnitude
    Eigen::MatrixXd right;
    Eigen::MatrixXd left;
};

UnperturbedPropagator::UnperturbedPropagator(const ChainParams& params, long half_width,
                                             long observe_radius, std::vector<double> times,
                                             std::size_t n_theta)
    : half_width_(half_width), observe_radius_(observe_radius), times_(std::move(times)),
      tables_(std::make_unique<Tables>()) {
    params.validate();
    if (observe_radius < 0 || observe_radius > half_width) {
        throw std::invalid_argument("observation radius must lie in [0, L]");
    }
    double horizon = 0.0;
    for (double t : times_) horizon = std::max(horizon, std::abs(t));
    const long required = required_half_width(observe_radius, horizon, params);
    if (required > half_width) throw WindowOverrun(required, half_width);

    const long L = half_width;
    const long R = observe_radius;
    const long z_max = L + R;
    if (n_theta == 0) n_theta = recommended_theta_points(z_max, horizon, params);
    const ThetaGrid grid(n_theta, true);
    const auto rows = static_cast<Eigen::Index>(times_.size() * static_cast<std::size_t>(R) * 2);
    const auto cols = static_cast<Eigen::Index>(2 * L);

    for (Side side : {Side::right, Side::left}) {
        Eigen::MatrixXd& m = side == Side::right ? tables_->right : tables_->left;
        m.setZero(rows, cols);
        for (std::size_t k = 0; k < times_.size(); ++k) {
            const FreeGreenFunction free(times_[k], side, params, z_max, grid);
            for (long x = 1; x <= R; ++x) {
                const auto row = static_cast<Eigen::Index>((static_cast<long>(k) * R + (x - 1)) * 2);
                for (long y = 1; y <= L; ++y) {
                    const Mat2 a = free.at(x - y);
                    const Mat2 b = free.at(x + y);
                    const auto cu = static_cast<Eigen::Index>(y - 1);
                    const auto cv = static_cast<Eigen::Index>(L + y - 1);
                    m(row, cu) = a[0] - b[0];
                    m(row, cv) = a[1] - b[1];
                    m(row + 1, cu) = a[2] - b[2];
                    m(row + 1, cv) = a[3] - b[3];
                }
            }
        }
    }
}

UnperturbedPropagator::~UnperturbedPropagator() = default;
UnperturbedPropagator::UnperturbedPropagator(UnperturbedPropagator&&) noexcept = default;
UnperturbedPropagator& UnperturbedPropagator::operator=(UnperturbedPropagator&&) noexcept = default;

std::vector<LatticeState> UnperturbedPropagator::apply(const LatticeState& y0) const {
    const long L = half_width_;
    const long R = observe_radius_;
    if (y0.half_width() != L) throw std::invalid_argument("initial state window must match propagator");
    std::vector<LatticeState> out(times_.size(), LatticeState(R));
    Eigen::VectorXd in(2 * L);
    for (Side side : {Side::right, Side::left}) {
        const long sign = side == Side::right ? 1 : -1;
        for (long y = 1; y <= L; ++y) {
            in(y - 1) = y0.u(sign * y);
            in(L + y - 1) = y0.v(sign * y);
        }
        const Eigen::VectorXd res = (side == Side::right ? tables_->right : tables_->left) * in;
        for (std::size_t k = 0; k < times_.size(); ++k) {
            for (long x = 1; x <= R; ++x) {
                const auto row = static_cast<Eigen::Index>((static_cast<long>(k) * R + (x - 1)) * 2);
                out[k].u(sign * x) = res(row);
                out[k].v(sign * x) = res(row + 1);
            }
        }
    }
    return out;
}

struct ModalPropagator::Modes {
    Eigen::MatrixXd vectors;  // columns are modes, rows are sites -L..L
    Eigen::VectorXd omega;
    std::vector<double> omega_list;
};

struct ModalPropagator::Plan {
    std::vector<double> times;
    long observe_radius = 0;
    Eigen::MatrixXd cos_table;  // modes x times
    Eigen::MatrixXd sin_table;  // sin(w t) / w
    Eigen::MatrixXd wsin_table;  // w sin(w t)
    Eigen::MatrixXd observed;  // rows -R..R of the mode matrix
};

ModalPropagator::ModalPropagator(const ChainParams& params, long half_width, bool clamp_origin)
    : params_(params), half_width_(half_width), clamp_origin_(clamp_origin),
      modes_(std::make_unique<Modes>()) {
    params.validate();
    if (half_width < 1) throw std::invalid_argument("window must contain at least 3 sites");
    const long L = half_width;
    const Eigen::Index n = 2 * L + 1;
    const double np2 = params.nu_plus * params.nu_plus;
    const double nm2 = params.nu_minus * params.nu_minus;
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    for (long x = -L; x <= L; ++x) {
        const Eigen::Index i = x + L;
        if (x > 0) k(i, i) = 2.0 * np2 + params.kappa_plus * params.kappa_plus;
        if (x < 0) k(i, i) = 2.0 * nm2 + params.kappa_minus * params.kappa_minus;
        if (x == 0) k(i, i) = np2 + nm2 + params.kappa_0 * params.kappa_0;
        if (x < L) {
            const double bond = x >= 0 ? np2 : nm2;
            k(i, i + 1) = -bond;
            k(i + 1, i) = -bond;
        }
    }
    if (clamp_origin) {
        const Eigen::Index o = L;
        k.row(o).setZero();
        k.col(o).setZero();
        k(o, o) = 1.0;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(k);
    if (solver.info() != Eigen::Success) throw std::runtime_error("eigen-decomposition failed");
    modes_->vectors = solver.eigenvectors();
    modes_->omega = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    modes_->omega_list.assign(modes_->omega.data(), modes_->omega.data() + n);
}

ModalPropagator::~ModalPropagator() = default;
ModalPropagator::ModalPropagator(ModalPropagator&&) noexcept = default;
ModalPropagator& ModalPropagator::operator=(ModalPropagator&&) noexcept = default;

std::span<const double> ModalPropagator::frequencies() const { return modes_->omega_list; }

namespace {

double sin_over(double w, double t) { return w > 0.0 ? std::sin(w * t) / w : t; }

}  // namespace

LatticeState ModalPropagator::evolve(const LatticeState& y0, double t) const {
    auto p = plan({t}, half_width_);
    return apply(*p, y0).front();
}

std::shared_ptr<const ModalPropagator::Plan> ModalPropagator::plan(std::vector<double> times,
                                                                   long observe_radius) const {
    if (observe_radius < 0 || observe_radius > half_width_) {
        throw std::invalid_argument("observation radius must lie in [0, L]");
    }
    auto p = std::make_shared<Plan>();
    const Eigen::Index n = modes_->omega.size();
    const auto nt = static_cast<Eigen::Index>(times.size());
    p->cos_table.resize(n, nt);
    p->sin_table.resize(n, nt);
    p->wsin_table.resize(n, nt);
    for (Eigen::Index j = 0; j < nt; ++j) {
        const double t = times[static_cast<std::size_t>(j)];
        for (Eigen::Index m = 0; m < n; ++m) {
            const double w = modes_->omega(m);
            p->cos_table(m, j) = std::cos(w * t);
            p->sin_table(m, j) = sin_over(w, t);
            p->wsin_table(m, j) = w * std::sin(w * t);
        }
    }
    p->observed = modes_->vectors.middleRows(half_width_ - observe_radius, 2 * observe_radius + 1);
    p->times = std::move(times);
    p->observe_radius = observe_radius;
    return p;
}

std::vector<LatticeState> ModalPropagator::apply(const Plan& plan, const LatticeState& y0) const {
    if (y0.half_width() > half_width_) throw std::invalid_argument("initial state exceeds window");
    const LatticeState full = y0.half_width() == half_width_ ? y0 : y0.padded(half_width_);
    const Eigen::Index n = modes_->omega.size();
    Eigen::Map<const Eigen::VectorXd> u0(full.u_values().data(), n);
    Eigen::Map<const Eigen::VectorXd> v0(full.v_values().data(), n);
    Eigen::VectorXd uu = u0;
    Eigen::VectorXd vv = v0;
    if (clamp_origin_) {
        uu(half_width_) = 0.0;
        vv(half_width_) = 0.0;
    }
    const Eigen::VectorXd a = modes_->vectors.transpose() * uu;
    const Eigen::VectorXd b = modes_->vectors.transpose() * vv;

    const Eigen::MatrixXd cu = (plan.cos_table.array().colwise() * a.array() +
                                plan.sin_table.array().colwise() * b.array())
                                   .matrix();
    const Eigen::MatrixXd cv = (plan.cos_table.array().colwise() * b.array() -
                                plan.wsin_table.array().colwise() * a.array())
                                   .matrix();
    const Eigen::MatrixXd us = plan.observed * cu;
    const Eigen::MatrixXd vs = plan.observed * cv;

    const long R = plan.observe_radius;
    std::vector<LatticeState> out;
    out.reserve(plan.times.size());
    for (Eigen::Index j = 0; j < us.cols(); ++j) {
        LatticeState s(R);
        for (long x = -R; x <= R; ++x) {
            s.u(x) = us(x + R, j);
            s.v(x) = vs(x + R, j);
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace hchain
