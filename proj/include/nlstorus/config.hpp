#pragma once

// Run configuration (flat key = value documents), canonical echo
// serialization, and the binary field-snapshot format.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlstorus/lattice.hpp"

namespace nlstorus {

struct RunConfig {
    std::string experiment = "";  // subcommand/suite selector
    int d = 3;
    int n = 8;
    double theta = 0.5;
    double nu = 0.0;
    double p = 6.0;
    double gamma = 1.0;
    double eps = 0.02;
    double linf_cap = 0.0;  // 0 = unset
    long count = 1000;
    long steps = 20000;
    long burnin = 5000;
    long thinning = 0;
    std::uint64_t seed = 1;
    std::string out = "";
    double tol_scale = 1.0;  // tolerance override multiplier

    double nu_N() const;  // (2/p)(nu/N)^{(p-2)/2}
    long N() const;
};

struct ConfigError : std::runtime_error {
    std::vector<std::string> violations;
    explicit ConfigError(std::vector<std::string> v);
};

// Parses a UTF-8 key = value document ('#' comments, blank lines allowed).
// Reports every violation at once (unknown keys, out-of-range values).
RunConfig parse_config(const std::string& text);

// Canonical serialization: fixed key order, round-trip stable byte-for-byte.
std::string serialize_config(const RunConfig& cfg);

// ---- field snapshots --------------------------------------------------------
// header: magic "NLSF", version u32, d u32, n u32; then N little-endian
// (re, im) f64 pairs in row-major site order.

struct SnapshotError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void write_field(const std::string& path, const Field& f);
Field read_field(const std::string& path);

// shortest-round-trip decimal formatting used for every numeric artifact
std::string format_double(double v);

}  // namespace nlstorus
