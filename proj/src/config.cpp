#include "hchain/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace hchain {

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                         message),
      line_(line),
      column_(column) {}

namespace {

struct Token {
    std::string_view text;
    std::size_t line = 0;
    std::size_t column = 0;  // of text.front()

    [[noreturn]] void fail(const std::string& msg, std::size_t offset = 0) const {
        throw ParseError(line, column + offset, msg);
    }
};

std::string_view trim(std::string_view s, std::size_t* lead = nullptr) {
    std::size_t a = 0;
    while (a < s.size() && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r')) ++a;
    std::size_t b = s.size();
    while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
    if (lead) *lead = a;
    return s.substr(a, b - a);
}

double parse_double(const Token& t) {
    double v = 0.0;
    const char* end = t.text.data() + t.text.size();
    const auto [ptr, ec] = std::from_chars(t.text.data(), end, v);
    if (t.text.empty()) t.fail("expected a number");
    if (ec != std::errc() || ptr != end) t.fail("malformed number '" + std::string(t.text) + "'", ptr - t.text.data());
    if (!std::isfinite(v)) t.fail("number must be finite");
    return v;
}

template <class Int>
Int parse_int(const Token& t) {
    Int v = 0;
    const char* end = t.text.data() + t.text.size();
    const auto [ptr, ec] = std::from_chars(t.text.data(), end, v);
    if (t.text.empty()) t.fail("expected an integer");
    if (ec != std::errc() || ptr != end) t.fail("malformed integer '" + std::string(t.text) + "'", ptr - t.text.data());
    return v;
}

bool parse_bool(const Token& t) {
    if (t.text == "true") return true;
    if (t.text == "false") return false;
    t.fail("expected true or false");
}

// Splits on `sep`, keeping column bookkeeping; empty input gives no items.
std::vector<Token> split(const Token& t, char sep) {
    std::vector<Token> out;
    if (trim(t.text).empty()) return out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = t.text.find(sep, start);
        const std::string_view piece = t.text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
        std::size_t lead = 0;
        const auto body = trim(piece, &lead);
        out.push_back({body, t.line, t.column + start + lead});
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::vector<double> parse_list(const Token& t) {
    std::vector<double> out;
    for (const auto& item : split(t, ',')) out.push_back(parse_double(item));
    return out;
}

template <class E>
E parse_enum(const Token& t, std::initializer_list<std::pair<const char*, E>> names) {
    for (const auto& [name, value] : names) {
        if (t.text == name) return value;
    }
    std::string allowed;
    for (const auto& [name, value] : names) allowed += std::string(allowed.empty() ? "" : "|") + name;
    t.fail("expected one of " + allowed);
}

// v = center=1.5 width=1.5 sites=2:1,3:-0.5
TestFunction parse_test_function(const Token& t) {
    std::optional<double> center, width;
    std::vector<std::pair<long, double>> weights;
    bool have_sites = false;
    for (const auto& field : split(t, ' ')) {
        if (field.text.empty()) continue;
        const auto eq = field.text.find('=');
        if (eq == std::string_view::npos) field.fail("expected center=, width= or sites=");
        const auto key = field.text.substr(0, eq);
        const Token value{field.text.substr(eq + 1), field.line, field.column + eq + 1};
        if (key == "center") {
            center = parse_double(value);
        } else if (key == "width") {
            width = parse_double(value);
        } else if (key == "sites") {
            have_sites = true;
            for (const auto& item : split(value, ',')) {
                const auto colon = item.text.find(':');
                if (colon == std::string_view::npos) item.fail("expected site:weight");
                const long x = parse_int<long>({item.text.substr(0, colon), item.line, item.column});
                const double w = parse_double({item.text.substr(colon + 1), item.line, item.column + colon + 1});
                weights.emplace_back(x, w);
            }
        } else {
            field.fail("unknown test function field '" + std::string(key) + "'");
        }
    }
    if (!center || !width || !have_sites) t.fail("test function needs center=, width= and sites=");
    try {
        return TestFunction(std::move(weights), *center, *width);
    } catch (const std::invalid_argument& e) {
        t.fail(e.what());
    }
}

std::string fmt(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

std::string fmt_list(const std::vector<double>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + fmt(xs[i]);
    return s;
}

const char* mode_name(ChainMode m) { return m == ChainMode::full ? "full" : "unperturbed"; }

const char* kind_name(InitialKind k) {
    switch (k) {
        case InitialKind::white_noise: return "white_noise";
        case InitialKind::desk: return "desk";
        case InitialKind::gibbs: return "gibbs";
        case InitialKind::custom: return "custom";
        case InitialKind::delta: return "delta";
    }
    return "";
}

const char* solver_name(Solver s) {
    switch (s) {
        case Solver::automatic: return "automatic";
        case Solver::spectral: return "spectral";
        case Solver::modal: return "modal";
        case Solver::stepping: return "stepping";
    }
    return "";
}

using Setter = void (*)(RunConfig&, const Token&);

const std::map<std::string, std::map<std::string, Setter>>& schema() {
    static const std::map<std::string, std::map<std::string, Setter>> s{
        {"chain",
         {{"nu_minus", [](RunConfig& c, const Token& t) { c.params.nu_minus = parse_double(t); }},
          {"nu_plus", [](RunConfig& c, const Token& t) { c.params.nu_plus = parse_double(t); }},
          {"kappa_minus", [](RunConfig& c, const Token& t) { c.params.kappa_minus = parse_double(t); }},
          {"kappa_plus", [](RunConfig& c, const Token& t) { c.params.kappa_plus = parse_double(t); }},
          {"kappa_0", [](RunConfig& c, const Token& t) { c.params.kappa_0 = parse_double(t); }},
          {"mode", [](RunConfig& c, const Token& t) {
               c.mode = parse_enum<ChainMode>(t, {{"full", ChainMode::full}, {"unperturbed", ChainMode::unperturbed}});
           }}}},
        {"initial",
         {{"kind", [](RunConfig& c, const Token& t) {
               c.initial_kind = parse_enum<InitialKind>(
                   t, {{"white_noise", InitialKind::white_noise}, {"desk", InitialKind::desk},
                       {"gibbs", InitialKind::gibbs}, {"custom", InitialKind::custom}, {"delta", InitialKind::delta}});
           }},
          {"temperature", [](RunConfig& c, const Token& t) { c.temperature = parse_double(t); }},
          {"kernel_radius", [](RunConfig& c, const Token& t) { c.kernel_radius = parse_int<long>(t); }},
          {"left_c0", [](RunConfig& c, const Token& t) { c.custom_left.c0 = parse_list(t); }},
          {"left_c1", [](RunConfig& c, const Token& t) { c.custom_left.c1 = parse_list(t); }},
          {"left_shared_driver", [](RunConfig& c, const Token& t) { c.custom_left.shared_driver = parse_bool(t); }},
          {"right_c0", [](RunConfig& c, const Token& t) { c.custom_right.c0 = parse_list(t); }},
          {"right_c1", [](RunConfig& c, const Token& t) { c.custom_right.c1 = parse_list(t); }},
          {"right_shared_driver", [](RunConfig& c, const Token& t) { c.custom_right.shared_driver = parse_bool(t); }},
          {"delta_site", [](RunConfig& c, const Token& t) { c.delta_site = parse_int<long>(t); }},
          {"delta_channel", [](RunConfig& c, const Token& t) { c.delta_channel = parse_int<int>(t); }}}},
        {"grid",
         {{"half_width", [](RunConfig& c, const Token& t) { c.half_width = parse_int<long>(t); }},
          {"observe_radius", [](RunConfig& c, const Token& t) { c.observe_radius = parse_int<long>(t); }},
          {"dt", [](RunConfig& c, const Token& t) { c.dt = parse_double(t); }},
          {"dt_internal", [](RunConfig& c, const Token& t) { c.dt_internal = parse_double(t); }},
          {"t_end", [](RunConfig& c, const Token& t) { c.t_end = parse_double(t); }},
          {"theta_points", [](RunConfig& c, const Token& t) { c.theta_points = parse_int<std::size_t>(t); }},
          {"midpoint", [](RunConfig& c, const Token& t) { c.midpoint = parse_bool(t); }}}},
        {"run",
         {{"members", [](RunConfig& c, const Token& t) { c.members = parse_int<std::size_t>(t); }},
          {"seed", [](RunConfig& c, const Token& t) { c.seed = parse_int<std::uint64_t>(t); }},
          {"solver", [](RunConfig& c, const Token& t) {
               c.solver = parse_enum<Solver>(t, {{"automatic", Solver::automatic}, {"spectral", Solver::spectral},
                                                 {"modal", Solver::modal}, {"stepping", Solver::stepping}});
           }},
          {"output", [](RunConfig& c, const Token& t) {
               if (t.text.empty()) t.fail("output directory must not be empty");
               c.output = std::string(t.text);
           }},
          {"format", [](RunConfig& c, const Token& t) {
               c.format = parse_enum<TrajectoryFormat>(t, {{"binary", TrajectoryFormat::binary}, {"csv", TrajectoryFormat::csv}});
           }},
          {"taus", [](RunConfig& c, const Token& t) { c.taus = parse_list(t); }},
          {"mixing_taus", [](RunConfig& c, const Token& t) { c.mixing_taus = parse_list(t); }}}},
    };
    return s;
}

bool valid_name(std::string_view s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](char ch) {
        return (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') || ch == '_';
    });
}

bool on_grid(double t, double dt) {
    const double k = t / dt;
    return std::abs(k - std::round(k)) <= 1e-9 * std::max(1.0, std::abs(k));
}

}  // namespace

RunConfig parse_config(std::string_view text) {
    RunConfig cfg;
    std::string section;
    std::set<std::string> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool tf_section_seen = false;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        ++line_no;
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;

        std::string_view line = raw;
        const auto hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        std::size_t lead = 0;
        const auto body = trim(line, &lead);
        if (body.empty()) continue;
        const Token whole{body, line_no, lead + 1};

        if (body.front() == '[') {
            if (body.back() != ']') whole.fail("unterminated section header", body.size() - 1);
            section = std::string(trim(body.substr(1, body.size() - 2)));
            if (section != "test_functions" && !schema().count(section)) {
                whole.fail("unknown section '" + section + "'", 1);
            }
            if (section == "test_functions") {
                if (tf_section_seen) whole.fail("section [test_functions] repeated");
                tf_section_seen = true;
            }
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) whole.fail("expected key = value");
        std::size_t klead = 0;
        const auto key = std::string(trim(body.substr(0, eq), &klead));
        std::size_t vlead = 0;
        const auto value = trim(body.substr(eq + 1), &vlead);
        const Token val{value, line_no, lead + 1 + eq + 1 + vlead};
        if (section.empty()) whole.fail("key outside any section");
        const std::string full = section + "." + key;
        if (!seen.insert(full).second) whole.fail("duplicate key '" + key + "'");

        if (section == "test_functions") {
            if (!valid_name(key)) whole.fail("test function names use letters, digits and '_'");
            cfg.test_functions.push_back({key, parse_test_function(val)});
            continue;
        }
        const auto& keys = schema().at(section);
        const auto it = keys.find(key);
        if (it == keys.end()) whole.fail("unknown key '" + key + "' in [" + section + "]");
        it->second(cfg, val);
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::filesystem::filesystem_error("cannot open config", path, std::make_error_code(std::errc::no_such_file_or_directory));
    std::ostringstream ss;
    ss << in.rdbuf();
    RunConfig cfg = parse_config(ss.str());
    validate_config(cfg);
    return cfg;
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream o;
    o << "[chain]\n"
      << "nu_minus = " << fmt(c.params.nu_minus) << "\n"
      << "nu_plus = " << fmt(c.params.nu_plus) << "\n"
      << "kappa_minus = " << fmt(c.params.kappa_minus) << "\n"
      << "kappa_plus = " << fmt(c.params.kappa_plus) << "\n"
      << "kappa_0 = " << fmt(c.params.kappa_0) << "\n"
      << "mode = " << mode_name(c.mode) << "\n\n";
    o << "[initial]\n"
      << "kind = " << kind_name(c.initial_kind) << "\n"
      << "temperature = " << fmt(c.temperature) << "\n"
      << "kernel_radius = " << c.kernel_radius << "\n"
      << "left_c0 = " << fmt_list(c.custom_left.c0) << "\n"
      << "left_c1 = " << fmt_list(c.custom_left.c1) << "\n"
      << "left_shared_driver = " << (c.custom_left.shared_driver ? "true" : "false") << "\n"
      << "right_c0 = " << fmt_list(c.custom_right.c0) << "\n"
      << "right_c1 = " << fmt_list(c.custom_right.c1) << "\n"
      << "right_shared_driver = " << (c.custom_right.shared_driver ? "true" : "false") << "\n"
      << "delta_site = " << c.delta_site << "\n"
      << "delta_channel = " << c.delta_channel << "\n\n";
    o << "[grid]\n"
      << "half_width = " << c.half_width << "\n"
      << "observe_radius = " << c.observe_radius << "\n"
      << "dt = " << fmt(c.dt) << "\n"
      << "dt_internal = " << fmt(c.dt_internal) << "\n"
      << "t_end = " << fmt(c.t_end) << "\n"
      << "theta_points = " << c.theta_points << "\n"
      << "midpoint = " << (c.midpoint ? "true" : "false") << "\n\n";
    o << "[run]\n"
      << "members = " << c.members << "\n"
      << "seed = " << c.seed << "\n"
      << "solver = " << solver_name(c.solver) << "\n"
      << "output = " << c.output << "\n"
      << "format = " << (c.format == TrajectoryFormat::binary ? "binary" : "csv") << "\n"
      << "taus = " << fmt_list(c.taus) << "\n"
      << "mixing_taus = " << fmt_list(c.mixing_taus) << "\n\n";
    o << "[test_functions]\n";
    for (const auto& [name, v] : c.test_functions) {
        o << name << " = center=" << fmt(v.center()) << " width=" << fmt(v.half_width()) << " sites=";
        for (std::size_t i = 0; i < v.weights().size(); ++i) {
            o << (i ? "," : "") << v.weights()[i].first << ":" << fmt(v.weights()[i].second);
        }
        o << "\n";
    }
    return o.str();
}

InitialMeasureSpec RunConfig::initial_spec() const {
    switch (initial_kind) {
        case InitialKind::white_noise: return white_noise_spec();
        case InitialKind::desk: return {desk_half(kernel_radius), desk_half(kernel_radius)};
        case InitialKind::gibbs: return gibbs_spec(temperature, params, kernel_radius);
        case InitialKind::custom: return {custom_left, custom_right};
        case InitialKind::delta: break;
    }
    throw std::logic_error("delta initial data has no random measure");
}

std::optional<LatticeState> RunConfig::fixed_initial() const {
    if (initial_kind != InitialKind::delta) return std::nullopt;
    const long r = std::abs(delta_site);
    LatticeState s(r);
    (delta_channel == 0 ? s.u(delta_site) : s.v(delta_site)) = 1.0;
    return s;
}

const TestFunction& RunConfig::test_function(const std::string& name) const {
    for (const auto& t : test_functions) {
        if (t.name == name) return t.v;
    }
    throw std::out_of_range("no test function named " + name);
}

void validate_config(const RunConfig& c) {
    auto require = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(msg);
    };
    try {
        c.params.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    require(c.dt > 0.0, "dt must be positive");
    require(c.t_end > 0.0 && on_grid(c.t_end, c.dt), "t_end must be a positive multiple of dt");
    require(c.dt_internal > 0.0 && c.dt_internal <= 0.1 / c.params.max_frequency(),
            "dt_internal must lie in (0, 0.1 / a_max]");
    require(c.half_width >= 1, "half_width must be at least 1");
    require(c.observe_radius >= 0 && c.observe_radius <= c.half_width, "observe_radius must lie in [0, half_width]");
    require(c.theta_points >= 64, "theta_points must be at least 64");
    require(c.members >= 1, "members must be at least 1");
    require(c.kernel_radius >= 0, "kernel_radius must be non-negative");
    require(c.delta_channel == 0 || c.delta_channel == 1, "delta_channel must be 0 or 1");
    require(c.solver != Solver::spectral || c.mode == ChainMode::unperturbed,
            "the spectral solver covers the unperturbed chain only");
    if (c.initial_kind == InitialKind::delta) {
        require(std::abs(c.delta_site) <= c.half_width, "delta_site lies outside the window");
    } else {
        try {
            const auto spec = c.initial_spec();
            spec.validate();
            require(spec.support_radius() <= c.half_width, "initial covariance support exceeds the window");
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("initial measure: ") + e.what());
        }
    }
    const long need = required_half_width(c.observe_radius, c.t_end, c.params);
    require(c.half_width >= need, "half_width " + std::to_string(c.half_width) +
                                      " violates the signal-cone rule; need at least " + std::to_string(need));
    for (std::size_t i = 0; i < c.taus.size(); ++i) {
        require(c.taus[i] >= 0.0 && on_grid(c.taus[i], c.dt), "taus must be non-negative multiples of dt");
        require(i == 0 || c.taus[i] > c.taus[i - 1], "taus must be increasing");
    }
    for (std::size_t i = 0; i < c.mixing_taus.size(); ++i) {
        require(c.mixing_taus[i] >= 0.0 && on_grid(c.mixing_taus[i], c.dt),
                "mixing_taus must be non-negative multiples of dt");
        require(i == 0 || c.mixing_taus[i] > c.mixing_taus[i - 1], "mixing_taus must be increasing");
    }
    require(c.mixing_taus.empty() || !c.taus.empty(), "mixing_taus need a base shift from taus");
    std::set<std::string> names;
    for (const auto& [name, v] : c.test_functions) {
        require(names.insert(name).second, "test function " + name + " defined twice");
        require(v.max_abs_site() <= c.observe_radius, "test function " + name + " leaves the observation window");
        require(v.t_begin() >= 0.0, "test function " + name + " starts before t = 0");
    }
    for (const auto& o : config_observables(c).observables) {
        require(o.t_end() <= c.t_end + 1e-9, "observables reach past t_end");
    }
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t config_hash(const RunConfig& config) {
    RunConfig c = config;
    c.output.clear();
    return fnv1a64(serialize_config(c));
}

std::size_t ObservableSet::index(const std::string& name, double shift) const {
    for (std::size_t i = 0; i < keys.size(); ++i) {
        if (keys[i].first == name && std::abs(keys[i].second - shift) < 1e-9) return i;
    }
    throw std::out_of_range("observable " + name + " not in the set");
}

ObservableSet config_observables(const RunConfig& c) {
    ObservableSet set;
    auto add = [&](const NamedTestFunction& f, double shift) {
        for (const auto& k : set.keys) {
            if (k.first == f.name && std::abs(k.second - shift) < 1e-9) return;
        }
        set.keys.emplace_back(f.name, shift);
        set.observables.push_back(Observable::pairing(f.v, shift));
    };
    for (const auto& f : c.test_functions) {
        for (double tau : c.taus) add(f, tau);
    }
    if (!c.taus.empty()) {
        const double tau0 = c.taus.back();
        for (const auto& f : c.test_functions) {
            for (double tau : c.mixing_taus) add(f, tau0 + tau);
        }
    }
    return set;
}

EnsembleSpec ensemble_spec(const RunConfig& c) {
    EnsembleSpec s;
    s.params = c.params;
    if (c.initial_kind == InitialKind::delta) {
        s.fixed_initial = c.fixed_initial();
    } else {
        s.initial = c.initial_spec();
    }
    s.mode = c.mode;
    s.solver = c.solver;
    s.half_width = c.half_width;
    s.observe_radius = c.observe_radius;
    s.dt_record = c.dt;
    s.seed = c.seed;
    s.members = c.members;
    s.dt_internal = c.dt_internal;
    return s;
}

}  // namespace hchain
