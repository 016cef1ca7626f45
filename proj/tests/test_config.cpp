#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "nlstorus/config.hpp"
#include "nlstorus/rng.hpp"

using namespace nlstorus;

TEST_CASE("minimal config gets defaults and round-trips byte-identically") {
    RunConfig cfg = parse_config("d = 3\nn = 8\ntheta = 0.5\nseed = 7\n");
    CHECK(cfg.d == 3);
    CHECK(cfg.n == 8);
    CHECK(cfg.theta == 0.5);
    CHECK(cfg.seed == 7);
    CHECK(cfg.p == 6.0);     // default
    CHECK(cfg.gamma == 1.0); // default
    std::string echo = serialize_config(cfg);
    RunConfig cfg2 = parse_config(echo);
    CHECK(serialize_config(cfg2) == echo);
}

TEST_CASE("violations are reported together with key names") {
    try {
        parse_config("gamma = 1.5\nwibble = 3\np = 1.0\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        bool saw_gamma = false, saw_unknown = false, saw_p = false;
        for (const std::string& v : e.violations) {
            if (v.find("gamma") != std::string::npos && v.find("(0, 1]") != std::string::npos)
                saw_gamma = true;
            if (v.find("wibble") != std::string::npos) saw_unknown = true;
            if (v.find("'p'") != std::string::npos) saw_p = true;
        }
        CHECK(saw_gamma);
        CHECK(saw_unknown);
        CHECK(saw_p);
    }
}

TEST_CASE("derived nu_N echoes the normalization") {
    RunConfig cfg = parse_config("d = 3\nn = 4\ntheta = 1\nnu = 1\np = 6\n");
    CHECK(cfg.N() == 64);
    CHECK(cfg.nu_N() == doctest::Approx(5.0863e-5).epsilon(1e-3));
}

TEST_CASE("snapshot round trip is bit exact") {
    TorusShape s = TorusShape::make(3, 4);
    Field f(s);
    Rng rng(8, "snap", 0);
    for (auto& z : f.v) z = cplx{rng.gaussian(), rng.gaussian()};
    std::string path = std::filesystem::temp_directory_path() / "nlstorus_test_snap.nlsf";
    write_field(path, f);
    Field g = read_field(path);
    CHECK(g.shape.d == 3);
    CHECK(g.shape.n == 4);
    for (long i = 0; i < s.N; ++i) {
        CHECK(g.v[std::size_t(i)].real() == f.v[std::size_t(i)].real());
        CHECK(g.v[std::size_t(i)].imag() == f.v[std::size_t(i)].imag());
    }
    std::remove(path.c_str());
}

TEST_CASE("snapshot corruption surfaces explicit errors") {
    std::string path = std::filesystem::temp_directory_path() / "nlstorus_test_bad.nlsf";
    {
        std::ofstream out(path, std::ios::binary);
        out << "JUNKxxxxxxxxxxxxxxxx";
    }
    CHECK_THROWS_AS(read_field(path), SnapshotError);
    // corrupt the version field of a valid snapshot
    TorusShape s = TorusShape::make(2, 2);
    Field f(s);
    write_field(path, f);
    {
        std::fstream io(path, std::ios::binary | std::ios::in | std::ios::out);
        io.seekp(4);
        char two[4] = {2, 0, 0, 0};
        io.write(two, 4);
    }
    CHECK_THROWS_WITH_AS(read_field(path), doctest::Contains("version"), SnapshotError);
    // truncation
    std::filesystem::resize_file(path, 24);
    CHECK_THROWS_AS(read_field(path), SnapshotError);
    std::remove(path.c_str());
}

TEST_CASE("format_double round-trips") {
    for (double v : {0.1, 1.0 / 3.0, 2.5e-300, 6.02214076e23, -0.0, 42.0}) {
        CHECK(std::stod(format_double(v)) == v);
    }
}
