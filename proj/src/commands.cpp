#include "hchain/commands.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "hchain/config.hpp"
#include "hchain/limit_theory.hpp"
#include "hchain/statistics.hpp"
#include "hchain/trajectory_io.hpp"

namespace hchain {

namespace fs = std::filesystem;

namespace {

struct DomainFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MissingInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string num(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, ptr);
}

std::string hex64(std::uint64_t h) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }
std::string verdict(bool b) { return b ? "pass" : "fail"; }

// Runs `body`, mapping exceptions onto exit codes.
template <class F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::input;
    } catch (const ConfigError& e) {
        err << "error: invalid config: " << e.what() << "\n";
        return exit_code::input;
    } catch (const MissingInput& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::input;
    } catch (const FormatError& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::input;
    } catch (const DomainFailure& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::domain;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return e.code() == std::errc::no_such_file_or_directory ? exit_code::input : exit_code::environment;
    } catch (const WindowOverrun& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::input;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::input;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::environment;
    }
}

RunConfig load(const fs::path& path) {
    if (!fs::exists(path)) throw MissingInput("config file " + path.string() + " not found");
    return load_config(path);
}

fs::path output_dir(const RunConfig& cfg, const CommandOptions& opts) {
    return opts.output ? *opts.output : fs::path(cfg.output);
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw fs::filesystem_error("cannot create output directory", dir, ec ? ec : std::make_error_code(std::errc::io_error));
    }
}

void write_file(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << bytes;
    out.close();
    if (!out) throw fs::filesystem_error("failed to write", path, std::make_error_code(std::errc::io_error));
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingInput("missing input " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool perturbed_allowed(const ChainParams& p) {
    return p.is_homogeneous() || check_condition_c(p).admissible;
}

std::vector<std::pair<double, double>> recording_windows(const RunConfig& cfg) {
    const auto set = config_observables(cfg);
    if (set.observables.empty()) return {{0.0, cfg.t_end}};
    return windows_for(set.observables, cfg.dt);
}

std::string member_name(std::size_t m, TrajectoryFormat f) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "member_%06zu.%s", m, f == TrajectoryFormat::binary ? "bin" : "csv");
    return buf;
}

const char* solver_label(Solver s) {
    switch (s) {
        case Solver::spectral: return "spectral";
        case Solver::modal: return "modal";
        case Solver::stepping: return "stepping";
        case Solver::automatic: return "automatic";
    }
    return "";
}

// Limit oracle for a pairing, when the chain has a closed-form limit.
std::optional<double> pairing_oracle(const RunConfig& cfg, const SpectralDensityPair* dens, const TestFunction& v1,
                                     const TestFunction& v2, double tau) {
    if (!dens) return std::nullopt;
    if (cfg.mode == ChainMode::unperturbed) return limit_pairing(v1, v2, tau, *dens, cfg.params);
    if (cfg.params.is_homogeneous()) return homogeneous_limit_pairing(v1, v2, tau, *dens, cfg.params);
    return std::nullopt;
}

}  // namespace

int cmd_check(const fs::path& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig cfg = load(config);
        const auto report = check_condition_c(cfg.params);
        out << "nu_minus=" << num(cfg.params.nu_minus) << "\n"
            << "nu_plus=" << num(cfg.params.nu_plus) << "\n"
            << "kappa_minus=" << num(cfg.params.kappa_minus) << "\n"
            << "kappa_plus=" << num(cfg.params.kappa_plus) << "\n"
            << "kappa_0=" << num(cfg.params.kappa_0) << "\n"
            << "mirrored=" << yes_no(report.mirrored) << "\n";
        for (const auto& c : report.clauses) {
            out << "clause " << c.id << " applicable=" << yes_no(c.applicable)
                << " satisfied=" << yes_no(c.satisfied) << " : " << c.description << "\n";
        }
        out << "homogeneous=" << yes_no(cfg.params.is_homogeneous()) << "\n";
        out << "admissible=" << yes_no(report.admissible) << "\n";
        return report.admissible ? exit_code::ok : exit_code::domain;
    });
}

int cmd_simulate(const fs::path& config, const CommandOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig cfg = load(config);
        if (cfg.mode == ChainMode::full && !perturbed_allowed(cfg.params)) {
            throw DomainFailure("parameters violate condition C; the full chain needs admissible kappa_0");
        }
        EnsembleSpec spec = ensemble_spec(cfg);
        spec.windows = recording_windows(cfg);
        const ChainEnsemble ensemble(spec);
        const fs::path dir = output_dir(cfg, options);
        ensure_dir(dir);

        const std::size_t n = ensemble.size();
        std::vector<std::uint64_t> hashes(n);
        const std::size_t w = std::clamp<std::size_t>(options.workers, 1, n);
        std::vector<std::exception_ptr> errors(w);
        auto run = [&](std::size_t i) {
            try {
                for (std::size_t m = n * i / w; m < n * (i + 1) / w; ++m) {
                    const auto segs = ensemble.realize(m);
                    std::ostringstream buf(std::ios::binary);
                    if (cfg.format == TrajectoryFormat::binary) {
                        write_trajectory_binary(buf, segs);
                    } else {
                        write_trajectory_csv(buf, segs);
                    }
                    const std::string bytes = buf.str();
                    hashes[m] = fnv1a64(bytes);
                    write_file(dir / member_name(m, cfg.format), bytes);
                }
            } catch (...) {
                errors[i] = std::current_exception();
            }
        };
        if (w == 1) {
            run(0);
        } else {
            std::vector<std::thread> threads;
            for (std::size_t i = 0; i < w; ++i) threads.emplace_back(run, i);
            for (auto& t : threads) t.join();
        }
        for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }

        std::ostringstream m;
        m << "tool=hchain\n"
          << "version=" << tool_version << "\n"
          << "config_hash=" << hex64(config_hash(cfg)) << "\n"
          << "master_seed=" << cfg.seed << "\n"
          << "members=" << n << "\n"
          << "mode=" << (cfg.mode == ChainMode::full ? "full" : "unperturbed") << "\n"
          << "solver=" << solver_label(ensemble.solver()) << "\n"
          << "format=" << (cfg.format == TrajectoryFormat::binary ? "binary" : "csv") << "\n"
          << "observe_radius=" << cfg.observe_radius << "\n"
          << "dt=" << num(cfg.dt) << "\n";
        for (const auto& g : ensemble.windows()) m << "window=" << num(g.t_begin()) << "," << num(g.t_end()) << "\n";
        for (std::size_t k = 0; k < n; ++k) {
            m << "file=" << member_name(k, cfg.format) << " member=" << k << " fnv1a64=" << hex64(hashes[k]) << "\n";
        }
        write_file(dir / "manifest.txt", m.str());
        out << "wrote " << n << " trajectories to " << dir.string() << "\n";
        out << "config_hash=" << hex64(config_hash(cfg)) << "\n";
        return exit_code::ok;
    });
}

int cmd_limits(const fs::path& config, const CommandOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig cfg = load(config);
        if (cfg.initial_kind == InitialKind::delta) {
            throw ConfigError("deterministic initial data has no limit covariance");
        }
        for (Side s : {Side::left, Side::right}) {
            if (cfg.params.kappa(s) == 0.0 && !cfg.midpoint) {
                throw DomainFailure(std::string("kappa_") + (s == Side::left ? "minus" : "plus") +
                                    " = 0 requires midpoint = true");
            }
        }
        const auto dens = spectral_densities(cfg.initial_spec());
        const fs::path dir = output_dir(cfg, options);
        ensure_dir(dir);
        QuadratureOptions refined;
        refined.initial_panels *= 4;

        std::ostringstream spec_csv;
        spec_csv << "side,theta,q00,q01_imag,q11\n";
        for (Side s : {Side::left, Side::right}) {
            const auto ls = limit_spectrum(s == Side::left ? dens.left : dens.right, cfg.params, s, cfg.theta_points,
                                           cfg.midpoint);
            for (std::size_t k = 0; k < ls.size(); ++k) {
                const auto& v = ls.at(k);
                spec_csv << side_name(s) << "," << num(ls.grid().node(k)) << "," << num(v.q00) << ","
                         << num(v.q01_imag) << "," << num(v.q11) << "\n";
            }
        }
        write_file(dir / "spectrum.csv", spec_csv.str());

        std::ostringstream eq;
        eq << "x,y,q00,q11,q00_refined,q11_refined,refinement_change\n";
        const long r = cfg.observe_radius;
        for (long x = -r; x <= r; ++x) {
            for (long y = x; y <= r; ++y) {
                const Mat2 a = limit_equal_time_cov(x, y, dens, cfg.params);
                const Mat2 b = limit_equal_time_cov(x, y, dens, cfg.params, refined);
                const double change = std::max(std::abs(a[0] - b[0]), std::abs(a[3] - b[3]));
                eq << x << "," << y << "," << num(a[0]) << "," << num(a[3]) << "," << num(b[0]) << ","
                   << num(b[3]) << "," << num(change) << "\n";
            }
        }
        write_file(dir / "equal_time.csv", eq.str());

        std::vector<double> taus{0.0};
        for (double t : cfg.mixing_taus) {
            if (t != 0.0) taus.push_back(t);
        }
        std::ostringstream pc;
        pc << "v1,v2,tau,kind,value,refined,refinement_change\n";
        const bool homog = cfg.params.is_homogeneous() && cfg.mode == ChainMode::full;
        for (std::size_t i = 0; i < cfg.test_functions.size(); ++i) {
            for (std::size_t j = 0; j < cfg.test_functions.size(); ++j) {
                const auto& a = cfg.test_functions[i];
                const auto& b = cfg.test_functions[j];
                for (double tau : taus) {
                    const double v = homog ? homogeneous_limit_pairing(a.v, b.v, tau, dens, cfg.params)
                                           : limit_pairing(a.v, b.v, tau, dens, cfg.params);
                    const double w = homog ? homogeneous_limit_pairing(a.v, b.v, tau, dens, cfg.params, refined)
                                           : limit_pairing(a.v, b.v, tau, dens, cfg.params, refined);
                    pc << a.name << "," << b.name << "," << num(tau) << "," << (homog ? "homogeneous" : "unperturbed")
                       << "," << num(v) << "," << num(w) << "," << num(std::abs(v - w)) << "\n";
                }
            }
        }
        write_file(dir / "pairing.csv", pc.str());

        if (cfg.params.is_homogeneous()) {
            std::ostringstream hc;
            hc << "x,t,q00,refined,refinement_change\n";
            std::vector<double> ts{0.0};
            for (double t : cfg.taus) {
                if (t != 0.0) ts.push_back(t);
            }
            for (long x = 0; x <= r; ++x) {
                for (double t : ts) {
                    const double v = homogeneous_spacetime_cov(x, t, dens, cfg.params);
                    const double w = homogeneous_spacetime_cov(x, t, dens, cfg.params, refined);
                    hc << x << "," << num(t) << "," << num(v) << "," << num(w) << "," << num(std::abs(v - w)) << "\n";
                }
            }
            write_file(dir / "homogeneous.csv", hc.str());
        }
        out << "wrote limit tables to " << dir.string() << "\n";
        return exit_code::ok;
    });
}

int cmd_compare(const fs::path& config, const CommandOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig cfg = load(config);
        const fs::path dir = output_dir(cfg, options);
        const std::string manifest = read_file(dir / "manifest.txt");
        std::map<std::string, std::string> meta;
        std::vector<std::string> files;
        {
            std::istringstream in(manifest);
            std::string line;
            while (std::getline(in, line)) {
                const auto eq = line.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = line.substr(0, eq);
                if (key == "file") {
                    files.push_back(line.substr(eq + 1, line.find(' ') - eq - 1));
                } else {
                    meta[key] = line.substr(eq + 1);
                }
            }
        }
        if (meta["config_hash"] != hex64(config_hash(cfg))) {
            throw MissingInput("manifest in " + dir.string() + " was produced by a different config");
        }
        if (files.size() < 2) throw MissingInput("compare needs at least two simulated members");
        std::vector<std::vector<Trajectory>> members;
        members.reserve(files.size());
        for (const auto& f : files) {
            if (!fs::exists(dir / f)) throw MissingInput("missing trajectory file " + (dir / f).string());
            members.push_back(load_trajectory(dir / f));
        }
        const auto set = config_observables(cfg);
        const SampleMatrix samples = sample_observables(members, set.observables);

        std::optional<SpectralDensityPair> dens;
        if (cfg.initial_kind != InitialKind::delta) dens = spectral_densities(cfg.initial_spec());
        const SpectralDensityPair* dp = dens ? &*dens : nullptr;

        std::vector<std::pair<std::string, bool>> verdicts;
        const auto& tfs = cfg.test_functions;

        std::ostringstream conv;
        conv << "v1,v2,tau,estimate,stderr,oracle,z\n";
        if (!cfg.taus.empty()) {
            for (std::size_t i = 0; i < tfs.size(); ++i) {
                for (std::size_t j = i; j < tfs.size(); ++j) {
                    std::vector<std::pair<std::size_t, std::size_t>> cols;
                    for (double tau : cfg.taus) cols.emplace_back(set.index(tfs[i].name, tau), set.index(tfs[j].name, tau));
                    const auto track = convergence_track(samples, cols, cfg.taus);
                    const auto oracle = pairing_oracle(cfg, dp, tfs[i].v, tfs[j].v, 0.0);
                    const std::string id = tfs[i].name + "_" + tfs[j].name;
                    for (const auto& row : track.rows) {
                        conv << tfs[i].name << "," << tfs[j].name << "," << num(row.tau) << "," << num(row.estimate)
                             << "," << num(row.standard_error) << ",";
                        if (oracle) {
                            conv << num(*oracle) << "," << num((row.estimate - *oracle) / row.standard_error);
                        } else {
                            conv << ",";
                        }
                        conv << "\n";
                    }
                    verdicts.emplace_back("cauchy_" + id, track.cauchy_pass);
                    if (oracle) {
                        const auto& last = track.rows.back();
                        verdicts.emplace_back("oracle_" + id,
                                              std::abs(last.estimate - *oracle) <= 4.0 * last.standard_error);
                    }
                    if (i == j) verdicts.emplace_back("variance_" + id, track.rows.front().estimate > 0.0);
                }
            }
        }
        write_file(dir / "convergence.csv", conv.str());

        std::ostringstream gs;
        gs << "order,observables,statistic,stderr,z\n";
        if (tfs.size() >= 4 && samples.rows() >= 1000 && !cfg.taus.empty()) {
            std::vector<std::size_t> cols;
            for (const auto& f : tfs) cols.push_back(set.index(f.name, cfg.taus.back()));
            const auto rep = gaussianity_test(samples, cols);
            auto label = [&](const std::vector<std::size_t>& idx) {
                std::string s;
                for (auto c : idx) s += (s.empty() ? "" : "*") + set.keys[c].first;
                return s;
            };
            for (const auto& c : rep.fourth) {
                gs << 4 << "," << label(c.indices) << "," << num(c.statistic) << "," << num(c.standard_error) << ","
                   << num(c.z) << "\n";
            }
            for (const auto& c : rep.third) {
                gs << 3 << "," << label(c.indices) << "," << num(c.statistic) << "," << num(c.standard_error) << ","
                   << num(c.z) << "\n";
            }
            verdicts.emplace_back("gaussianity", rep.pass);
        } else {
            out << "gaussianity=skipped (needs 4 test functions and 1000 members)\n";
        }
        write_file(dir / "gaussianity.csv", gs.str());

        std::ostringstream mx;
        mx << "v1,v2,tau,estimate,stderr,oracle,z\n";
        if (!cfg.mixing_taus.empty()) {
            const double tau0 = cfg.taus.back();
            for (const auto& a : tfs) {
                for (const auto& b : tfs) {
                    std::vector<std::pair<std::size_t, std::size_t>> cols;
                    std::vector<std::optional<double>> oracles;
                    for (double tau : cfg.mixing_taus) {
                        cols.emplace_back(set.index(a.name, tau0 + tau), set.index(b.name, tau0));
                        oracles.push_back(pairing_oracle(cfg, dp, a.v, b.v, tau));
                    }
                    const auto rows = mixing_diagnostic(samples, cols, cfg.mixing_taus, oracles);
                    bool ok = true;
                    for (const auto& row : rows) {
                        mx << a.name << "," << b.name << "," << num(row.tau) << "," << num(row.estimate.estimate) << ","
                           << num(row.estimate.standard_error) << "," << (row.oracle ? num(*row.oracle) : "") << ","
                           << num(row.z) << "\n";
                        if (row.oracle) ok = ok && std::abs(row.z) <= 4.0;
                    }
                    // without an oracle only the decay at the largest shift is judged
                    if (!rows.back().oracle) ok = std::abs(rows.back().z) <= 4.0;
                    verdicts.emplace_back("mixing_" + a.name + "_" + b.name, ok);
                }
            }
        }
        write_file(dir / "mixing.csv", mx.str());

        bool all = true;
        std::ostringstream summary;
        summary << "config_hash=" << hex64(config_hash(cfg)) << "\n" << "members=" << samples.rows() << "\n";
        for (const auto& [k, v] : verdicts) {
            summary << k << "=" << verdict(v) << "\n";
            all = all && v;
        }
        summary << "overall=" << verdict(all) << "\n";
        write_file(dir / "summary.txt", summary.str());
        out << summary.str();
        return all ? exit_code::ok : exit_code::domain;
    });
}

}  // namespace hchain
