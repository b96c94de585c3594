#include <doctest.h>

#include "hypmild/error.hpp"
#include "hypmild/io.hpp"

#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

using namespace hypmild;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("hypmild_test_" + name)).string();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

}  // namespace

TEST_CASE("double formatting round-trips bitwise") {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 2000; ++k) {
        const double x = std::bit_cast<double>(rng());
        if (!std::isfinite(x)) continue;
        CHECK(std::bit_cast<std::uint64_t>(parse_double(format_double(x))) == std::bit_cast<std::uint64_t>(x));
    }
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(HUGE_VAL) == "inf");
    CHECK(std::isinf(parse_double(" inf ")));
    CHECK_THROWS_AS(parse_double("1.5x"), FormatError);
    CHECK_THROWS_AS(parse_double(""), FormatError);
}

TEST_CASE("constants file") {
    const std::string path = temp_path("constants.ini");
    EstimateConstants c{3, 0.67116543210987654, 0.96234567890123456, 4.0};
    emit_constants(c, path);
    const auto back = load_constants(path);
    CHECK(back.d == c.d);
    CHECK(std::bit_cast<std::uint64_t>(back.C) == std::bit_cast<std::uint64_t>(c.C));
    CHECK(std::bit_cast<std::uint64_t>(back.delta_d) == std::bit_cast<std::uint64_t>(c.delta_d));
    CHECK(std::bit_cast<std::uint64_t>(back.p) == std::bit_cast<std::uint64_t>(c.p));

    write_file(path, "[constants]\nd = 3\np = 4\nC = 0.5\n");
    try {
        load_constants(path);
        FAIL("missing key accepted");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("delta_d") != std::string::npos);
    }

    write_file(path, "[constants]\nd = 3\np = 3\nC = 0.5\ndelta_d = 1\n[derived]\ntheta_exp = 1\n");
    try {
        load_constants(path);
        FAIL("theta_exp >= 1 accepted");
    } catch (const PreconditionViolation& e) {
        CHECK(std::string(e.what()).find("theta_exp") != std::string::npos);
    }
    // the invariant is enforced from d and p as well
    write_file(path, "[constants]\nd = 3\np = 2.5\nC = 0.5\ndelta_d = 1\n");
    CHECK_THROWS_WITH_AS(load_constants(path), doctest::Contains("theta_exp"), PreconditionViolation);
    CHECK_THROWS_AS(load_constants(temp_path("does_not_exist.ini")), FormatError);
    std::remove(path.c_str());
}

TEST_CASE("config access") {
    const auto cfg = Config::parse("[experiment]\nname = kernel-check\n[kernel]\nd = 2, 3,4\nt = 0.1,1, 10\nq = inf\n");
    CHECK(cfg.get_string("experiment.name") == "kernel-check");
    CHECK(cfg.get_ints("kernel.d") == std::vector<int>{2, 3, 4});
    CHECK(cfg.get_doubles("kernel.t") == std::vector<double>{0.1, 1.0, 10.0});
    CHECK(std::isinf(cfg.get_double("kernel.q")));
    CHECK(cfg.get_int("grid.panels", 32) == 32);
    CHECK_THROWS_WITH_AS(cfg.get_double("grid.rmax"), doctest::Contains("grid.rmax"), FormatError);
    CHECK_THROWS_AS(cfg.get_int("kernel.t"), FormatError);
    CHECK_THROWS_AS(Config::parse("[a\nb = 1\n"), FormatError);
}

TEST_CASE("csv tables") {
    CsvTable t({"name", "x", "n"});
    t.row() << "a,b" << 1.0 / 3.0 << 7;
    t.row() << "plain" << -2.5 << std::size_t{3};
    CHECK(t.str() == "name,x,n\n\"a,b\",0.33333333333333331,7\nplain,-2.5,3\n");
    t.row() << "short";
    CHECK_THROWS_AS(t.str(), FormatError);

    ConvergenceReport rep;
    rep.diffs = {1.0, 0.5, 0.0};
    rep.ratios = {0.5, 0.0};
    CHECK(convergence_table(rep).str() == "iteration,diff,ratio\n1,1,nan\n2,0.5,0.5\n3,0,0\n");
}
