#include "hchain/trajectory_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

namespace hchain {

namespace {

constexpr char magic[8] = {'H', 'C', 'H', 'A', 'I', 'N', 'T', 'R'};
constexpr std::uint32_t version = 1;

struct Header {
    ChainParams params;
    long half_width = 0;
    double dt = 0.0;
    SeedLineage lineage;
    Provenance provenance = Provenance::spectral;
};

Header common_header(std::span<const Trajectory> segments) {
    if (segments.empty()) throw std::invalid_argument("no trajectory segments to write");
    const Trajectory& a = segments.front();
    Header h{a.params(), a.half_width(), a.grid().dt, a.lineage(), a.provenance()};
    long last = 0;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const Trajectory& s = segments[i];
        if (!(s.params() == h.params) || s.half_width() != h.half_width || s.grid().dt != h.dt ||
            !(s.lineage() == h.lineage) || s.provenance() != h.provenance || s.size() == 0) {
            throw std::invalid_argument("trajectory segments disagree on their header");
        }
        if (i > 0 && s.grid().first <= last + 1) {
            throw std::invalid_argument("trajectory segments must be ordered and separated by a gap");
        }
        last = s.grid().first + static_cast<long>(s.grid().steps);
    }
    return h;
}

class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void raw(const char* p, std::size_t n) { buf_.append(p, n); }
    const std::string& bytes() const { return buf_; }

private:
    std::string buf_;
};

class ByteReader {
public:
    explicit ByteReader(std::istream& in) : in_(in) {}
    std::uint8_t u8() {
        char c;
        if (!in_.get(c)) throw FormatError("trajectory file is truncated");
        return static_cast<std::uint8_t>(c);
    }
    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        unsigned char b[8];
        if (!in_.read(reinterpret_cast<char*>(b), 8)) throw FormatError("trajectory file is truncated");
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        return v;
    }
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    double f64() { return std::bit_cast<double>(u64()); }

private:
    std::istream& in_;
};

Provenance provenance_from(std::uint64_t v) {
    if (v > static_cast<std::uint64_t>(Provenance::synthetic)) throw FormatError("unknown provenance code");
    return static_cast<Provenance>(v);
}

Provenance provenance_from(const std::string& s) {
    for (auto p : {Provenance::spectral, Provenance::stepping, Provenance::modal, Provenance::synthetic}) {
        if (s == provenance_name(p)) return p;
    }
    throw FormatError("unknown provenance '" + s + "'");
}

struct Row {
    double t;
    long x;
    double u;
    double v;
};

// Groups rows into segments of consecutive grid times with full site blocks.
std::vector<Trajectory> assemble(const Header& h, const std::vector<Row>& rows) {
    if (h.half_width < 0 || !(h.dt > 0.0)) throw FormatError("invalid window or time step");
    const std::size_t width = static_cast<std::size_t>(2 * h.half_width + 1);
    if (rows.empty() || rows.size() % width != 0) throw FormatError("row count is not a whole number of states");
    std::vector<Trajectory> out;
    std::vector<LatticeState> states;
    long first = 0;
    long prev = 0;
    auto flush = [&] {
        if (states.empty()) return;
        const TimeGrid g{h.dt, first, states.size() - 1};
        out.emplace_back(h.params, g, std::move(states), h.provenance, h.lineage);
        states.clear();
    };
    for (std::size_t b = 0; b < rows.size(); b += width) {
        const double t = rows[b].t;
        const long k = std::lround(t / h.dt);
        if (static_cast<double>(k) * h.dt != t) throw FormatError("row time is not on the grid");
        LatticeState s(h.half_width);
        for (std::size_t j = 0; j < width; ++j) {
            const Row& r = rows[b + j];
            if (r.t != t || r.x != -h.half_width + static_cast<long>(j)) {
                throw FormatError("rows must list every site of the window in order");
            }
            s.u(r.x) = r.u;
            s.v(r.x) = r.v;
        }
        if (!states.empty() && k != prev + 1) {
            if (k <= prev) throw FormatError("row times must increase");
            flush();
        }
        if (states.empty()) first = k;
        states.push_back(std::move(s));
        prev = k;
    }
    flush();
    return out;
}

std::string fmt17(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, ptr);
}

template <class T>
T parse_number(std::string_view s, const char* what) {
    T v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw FormatError(std::string("malformed ") + what + " '" + std::string(s) + "'");
    }
    return v;
}

}  // namespace

void write_trajectory_binary(std::ostream& out, std::span<const Trajectory> segments) {
    const Header h = common_header(segments);
    ByteWriter w;
    w.raw(magic, sizeof magic);
    w.u32(version);
    for (double p : {h.params.nu_minus, h.params.nu_plus, h.params.kappa_minus, h.params.kappa_plus, h.params.kappa_0}) {
        w.f64(p);
    }
    w.i64(h.half_width);
    w.f64(h.dt);
    w.u64(h.lineage.master_seed);
    w.u64(h.lineage.member);
    w.u8(static_cast<std::uint8_t>(h.provenance));
    for (int i = 0; i < 7; ++i) w.u8(0);
    std::uint64_t rows = 0;
    for (const auto& s : segments) rows += s.size() * s.state(0).size();
    w.u64(rows);
    for (const auto& s : segments) {
        for (std::size_t k = 0; k < s.size(); ++k) {
            const double t = s.grid().time(k);
            const LatticeState& st = s.state(k);
            for (long x = -h.half_width; x <= h.half_width; ++x) {
                w.f64(t);
                w.i64(x);
                w.f64(st.u(x));
                w.f64(st.v(x));
            }
        }
    }
    out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
    if (!out) throw std::runtime_error("failed to write trajectory");
}

std::vector<Trajectory> read_trajectory_binary(std::istream& in) {
    char m[8];
    if (!in.read(m, 8) || std::memcmp(m, magic, 8) != 0) throw FormatError("not a binary trajectory file");
    ByteReader r(in);
    if (r.u32() != version) throw FormatError("unsupported trajectory file version");
    Header h;
    h.params.nu_minus = r.f64();
    h.params.nu_plus = r.f64();
    h.params.kappa_minus = r.f64();
    h.params.kappa_plus = r.f64();
    h.params.kappa_0 = r.f64();
    h.half_width = r.i64();
    h.dt = r.f64();
    h.lineage.master_seed = r.u64();
    h.lineage.member = r.u64();
    h.provenance = provenance_from(r.u8());
    for (int i = 0; i < 7; ++i) r.u8();
    const std::uint64_t n = r.u64();
    if (n > (std::uint64_t{1} << 36)) throw FormatError("implausible row count");
    std::vector<Row> rows(n);
    for (auto& row : rows) {
        row.t = r.f64();
        row.x = r.i64();
        row.u = r.f64();
        row.v = r.f64();
    }
    if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after trajectory rows");
    return assemble(h, rows);
}

void write_trajectory_csv(std::ostream& out, std::span<const Trajectory> segments) {
    const Header h = common_header(segments);
    std::string s;
    s += "# format=hchain-trajectory\n# version=1\n";
    s += "# nu_minus=" + fmt17(h.params.nu_minus) + "\n";
    s += "# nu_plus=" + fmt17(h.params.nu_plus) + "\n";
    s += "# kappa_minus=" + fmt17(h.params.kappa_minus) + "\n";
    s += "# kappa_plus=" + fmt17(h.params.kappa_plus) + "\n";
    s += "# kappa_0=" + fmt17(h.params.kappa_0) + "\n";
    s += "# half_width=" + std::to_string(h.half_width) + "\n";
    s += "# dt=" + fmt17(h.dt) + "\n";
    s += "# master_seed=" + std::to_string(h.lineage.master_seed) + "\n";
    s += "# member=" + std::to_string(h.lineage.member) + "\n";
    s += std::string("# provenance=") + provenance_name(h.provenance) + "\n";
    s += "t,x,u,v\n";
    for (const auto& seg : segments) {
        for (std::size_t k = 0; k < seg.size(); ++k) {
            const std::string t = fmt17(seg.grid().time(k));
            for (long x = -h.half_width; x <= h.half_width; ++x) {
                s += t + "," + std::to_string(x) + "," + fmt17(seg.state(k).u(x)) + "," + fmt17(seg.state(k).v(x)) + "\n";
            }
        }
    }
    out << s;
    if (!out) throw std::runtime_error("failed to write trajectory");
}

std::vector<Trajectory> read_trajectory_csv(std::istream& in) {
    std::map<std::string, std::string> meta;
    std::string line;
    bool table = false;
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!table) {
            if (line == "t,x,u,v") {
                table = true;
                continue;
            }
            if (line.rfind("# ", 0) != 0) throw FormatError("expected a '# key=value' header line");
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw FormatError("header line without '='");
            meta[line.substr(2, eq - 2)] = line.substr(eq + 1);
            continue;
        }
        std::string_view sv(line);
        std::string_view f[4];
        for (int i = 0; i < 4; ++i) {
            const auto c = sv.find(',');
            if ((i < 3) == (c == std::string_view::npos)) throw FormatError("rows need four fields");
            f[i] = sv.substr(0, c);
            sv = i < 3 ? sv.substr(c + 1) : std::string_view{};
        }
        rows.push_back({parse_number<double>(f[0], "time"), parse_number<long>(f[1], "site"),
                        parse_number<double>(f[2], "displacement"), parse_number<double>(f[3], "velocity")});
    }
    if (!table) throw FormatError("missing t,x,u,v table");
    auto get = [&](const char* key) -> const std::string& {
        const auto it = meta.find(key);
        if (it == meta.end()) throw FormatError(std::string("missing header key ") + key);
        return it->second;
    };
    if (get("format") != "hchain-trajectory" || get("version") != "1") throw FormatError("unsupported CSV header");
    Header h;
    h.params.nu_minus = parse_number<double>(get("nu_minus"), "nu_minus");
    h.params.nu_plus = parse_number<double>(get("nu_plus"), "nu_plus");
    h.params.kappa_minus = parse_number<double>(get("kappa_minus"), "kappa_minus");
    h.params.kappa_plus = parse_number<double>(get("kappa_plus"), "kappa_plus");
    h.params.kappa_0 = parse_number<double>(get("kappa_0"), "kappa_0");
    h.half_width = parse_number<long>(get("half_width"), "half_width");
    h.dt = parse_number<double>(get("dt"), "dt");
    h.lineage.master_seed = parse_number<std::uint64_t>(get("master_seed"), "master_seed");
    h.lineage.member = parse_number<std::uint64_t>(get("member"), "member");
    h.provenance = provenance_from(get("provenance"));
    return assemble(h, rows);
}

void save_trajectory(const std::filesystem::path& path, std::span<const Trajectory> segments,
                     TrajectoryFormat format) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::filesystem::filesystem_error("cannot create trajectory file", path,
                                                      std::make_error_code(std::errc::io_error));
    if (format == TrajectoryFormat::binary) {
        write_trajectory_binary(out, segments);
    } else {
        write_trajectory_csv(out, segments);
    }
    out.close();
    if (!out) throw std::filesystem::filesystem_error("failed to write trajectory file", path,
                                                      std::make_error_code(std::errc::io_error));
}

std::vector<Trajectory> load_trajectory(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::filesystem::filesystem_error("cannot open trajectory file", path,
                                                     std::make_error_code(std::errc::no_such_file_or_directory));
    char first = 0;
    in.get(first);
    in.seekg(0);
    if (first == magic[0]) return read_trajectory_binary(in);
    return read_trajectory_csv(in);
}

}  // namespace hchain
