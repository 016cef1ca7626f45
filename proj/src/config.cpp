#include "nlstorus/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace nlstorus {

double RunConfig::nu_N() const { return nu_n(nu, p, N()); }

long RunConfig::N() const {
    long acc = 1;
    for (int i = 0; i < d; ++i) acc *= n;
    return acc;
}

ConfigError::ConfigError(std::vector<std::string> v)
    : std::runtime_error("invalid configuration: " + [&] {
          std::string s;
          for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "; " : "") + v[i];
          return s;
      }()),
      violations(std::move(v)) {}

namespace {

const char* kKeys[] = {"experiment", "d",     "n",        "theta", "nu",   "p",
                       "gamma",      "eps",   "linf_cap", "count", "steps", "burnin",
                       "thinning",   "seed",  "out",      "tol_scale"};

bool known_key(const std::string& k) {
    for (const char* c : kKeys)
        if (k == c) return true;
    return false;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::vector<std::string> errs;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == '[') continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            errs.push_back("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        std::string key = trim(t.substr(0, eq));
        std::string val = trim(t.substr(eq + 1));
        if (!known_key(key)) {
            errs.push_back("unknown key '" + key + "'");
            continue;
        }
        auto as_double = [&](double& dst) {
            try {
                dst = std::stod(val);
            } catch (...) {
                errs.push_back("key '" + key + "': not a number: '" + val + "'");
            }
        };
        auto as_long = [&](long& dst) {
            try {
                dst = std::stol(val);
            } catch (...) {
                errs.push_back("key '" + key + "': not an integer: '" + val + "'");
            }
        };
        if (key == "experiment") cfg.experiment = val;
        else if (key == "out") cfg.out = val;
        else if (key == "d") { long v = 0; as_long(v); cfg.d = int(v); }
        else if (key == "n") { long v = 0; as_long(v); cfg.n = int(v); }
        else if (key == "theta") as_double(cfg.theta);
        else if (key == "nu") as_double(cfg.nu);
        else if (key == "p") as_double(cfg.p);
        else if (key == "gamma") as_double(cfg.gamma);
        else if (key == "eps") as_double(cfg.eps);
        else if (key == "linf_cap") as_double(cfg.linf_cap);
        else if (key == "count") as_long(cfg.count);
        else if (key == "steps") as_long(cfg.steps);
        else if (key == "burnin") as_long(cfg.burnin);
        else if (key == "thinning") as_long(cfg.thinning);
        else if (key == "tol_scale") as_double(cfg.tol_scale);
        else if (key == "seed") {
            try {
                cfg.seed = std::stoull(val);
            } catch (...) {
                errs.push_back("key 'seed': not an unsigned integer: '" + val + "'");
            }
        }
    }
    if (cfg.d < 1) errs.push_back("key 'd': dimension must be >= 1");
    if (cfg.n < 2) errs.push_back("key 'n': side length must be >= 2");
    if (!(cfg.theta > 0)) errs.push_back("key 'theta': must be positive");
    if (cfg.nu < 0) errs.push_back("key 'nu': must be >= 0");
    if (!(cfg.p > 2)) errs.push_back("key 'p': must be > 2");
    if (!(cfg.gamma > 0 && cfg.gamma <= 1))
        errs.push_back("key 'gamma': must lie in (0, 1]");
    if (!(cfg.eps > 0 && cfg.eps < 1)) errs.push_back("key 'eps': must lie in (0, 1)");
    if (cfg.linf_cap < 0) errs.push_back("key 'linf_cap': must be >= 0");
    if (cfg.count < 1) errs.push_back("key 'count': must be >= 1");
    if (cfg.steps < 1) errs.push_back("key 'steps': must be >= 1");
    if (cfg.burnin < 0) errs.push_back("key 'burnin': must be >= 0");
    if (cfg.thinning < 0) errs.push_back("key 'thinning': must be >= 0");
    if (!(cfg.tol_scale > 0)) errs.push_back("key 'tol_scale': must be positive");
    if (!errs.empty()) throw ConfigError(std::move(errs));
    return cfg;
}

std::string format_double(double v) {
    char buf[64];
    // shortest representation that round-trips
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::stod(buf) == v) return buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream out;
    out << "experiment = " << cfg.experiment << "\n";
    out << "d = " << cfg.d << "\n";
    out << "n = " << cfg.n << "\n";
    out << "theta = " << format_double(cfg.theta) << "\n";
    out << "nu = " << format_double(cfg.nu) << "\n";
    out << "p = " << format_double(cfg.p) << "\n";
    out << "gamma = " << format_double(cfg.gamma) << "\n";
    out << "eps = " << format_double(cfg.eps) << "\n";
    out << "linf_cap = " << format_double(cfg.linf_cap) << "\n";
    out << "count = " << cfg.count << "\n";
    out << "steps = " << cfg.steps << "\n";
    out << "burnin = " << cfg.burnin << "\n";
    out << "thinning = " << cfg.thinning << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "out = " << cfg.out << "\n";
    out << "tol_scale = " << format_double(cfg.tol_scale) << "\n";
    return out.str();
}

namespace {

void put_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<char*>(b), 4);
}

std::uint32_t get_u32(std::ifstream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw SnapshotError("snapshot truncated in header");
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
           (std::uint32_t(b[3]) << 24);
}

void put_f64(std::ofstream& out, double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
    out.write(reinterpret_cast<char*>(b), 8);
}

double get_f64(std::ifstream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw SnapshotError("snapshot truncated in payload");
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= std::uint64_t(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &u, 8);
    return v;
}

}  // namespace

void write_field(const std::string& path, const Field& f) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw SnapshotError("cannot open for writing: " + path);
    out.write("NLSF", 4);
    put_u32(out, 1u);
    put_u32(out, std::uint32_t(f.shape.d));
    put_u32(out, std::uint32_t(f.shape.n));
    for (long i = 0; i < f.shape.N; ++i) {
        put_f64(out, f.v[std::size_t(i)].real());
        put_f64(out, f.v[std::size_t(i)].imag());
    }
    if (!out) throw SnapshotError("write failed: " + path);
}

Field read_field(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SnapshotError("cannot open for reading: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "NLSF", 4) != 0)
        throw SnapshotError("bad magic (not an NLSF snapshot): " + path);
    std::uint32_t version = get_u32(in);
    if (version != 1u)
        throw SnapshotError("unsupported snapshot version " + std::to_string(version));
    std::uint32_t d = get_u32(in), n = get_u32(in);
    if (d < 1 || d > 8 || n < 2) throw SnapshotError("corrupt snapshot header");
    Field f(TorusShape::make(int(d), int(n)));
    for (long i = 0; i < f.shape.N; ++i) {
        double re = get_f64(in);
        double im = get_f64(in);
        f.v[std::size_t(i)] = cplx{re, im};
    }
    return f;
}

}  // namespace nlstorus
