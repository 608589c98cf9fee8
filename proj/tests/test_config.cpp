#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "qmeas/config.hpp"

using namespace qmeas;

namespace {

const char* kBaseConfig =
    "# two-level system\n"
    "system.e1 = -0.5\n"
    "system.e2 = 0.5\n"
    "system.v = 3.141592653589793\n"
    "system.t1 = 0.25\n"
    "system.t2 = 0.75\n"
    "system.t_total = 1.0\n";

} // namespace

TEST_CASE("run config with fuzziness ratio") {
    std::string text = std::string(kBaseConfig) + "measurement.fuzziness_ratio = 1.25\n";
    auto rc = run_config_from_kv(KeyValueFile::parse_text(text));
    CHECK(rc.scales.fuzziness_ratio == doctest::Approx(1.25).epsilon(1e-12));
    CHECK(rc.scales.t_rabi == doctest::Approx(1.0).epsilon(1e-12));
    // defaults
    CHECK(rc.prior.e_lo == doctest::Approx(-1.0));
    CHECK(rc.prior.e_hi == doctest::Approx(1.0));
    CHECK(rc.prior.dt == doctest::Approx(0.02));
    CHECK(rc.smoothing_window == doctest::Approx(0.5));
}

TEST_CASE("run config with explicit kappa and overrides") {
    std::string text = std::string(kBaseConfig) +
                       "measurement.kappa = 2.5\n"
                       "prior.dt = 0.04\n"
                       "prior.e_lo = -2\n"
                       "prior.e_hi = 2\n"
                       "readout.smoothing_window = 0.4\n"
                       "micro.tau = 0.0001\n"
                       "micro.n_per_series = 64\n";
    auto rc = run_config_from_kv(KeyValueFile::parse_text(text));
    CHECK(rc.system.kappa == doctest::Approx(2.5));
    CHECK(rc.prior.dt == doctest::Approx(0.04));
    CHECK(rc.smoothing_window == doctest::Approx(0.4));
    CHECK(rc.micro_n_per_series == 64);
}

TEST_CASE("kappa and fuzziness ratio are mutually exclusive") {
    std::string both = std::string(kBaseConfig) +
                       "measurement.kappa = 1\nmeasurement.fuzziness_ratio = 2\n";
    CHECK_THROWS_AS(run_config_from_kv(KeyValueFile::parse_text(both)),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_config_from_kv(KeyValueFile::parse_text(kBaseConfig)),
                    std::invalid_argument);
}

TEST_CASE("unknown and malformed keys are rejected") {
    std::string unknown =
        std::string(kBaseConfig) + "measurement.kappa = 1\nsystem.typo = 3\n";
    CHECK_THROWS_AS(run_config_from_kv(KeyValueFile::parse_text(unknown)),
                    std::invalid_argument);
    CHECK_THROWS_AS(KeyValueFile::parse_text("system.e1\n"), std::invalid_argument);
    CHECK_THROWS_AS(KeyValueFile::parse_text("a = 1\na = 2\n"), std::invalid_argument);
    auto kv = KeyValueFile::parse_text("x = notanumber\n");
    CHECK_THROWS_AS(kv.get_double("x"), std::invalid_argument);
}

TEST_CASE("model file: direct probabilities") {
    const char* path = "test_model_direct.cfg";
    {
        std::ofstream out(path);
        out << "p1 = 0.45\np2 = 0.55\ntau = 0.001\nchi = 0.1\n";
    }
    auto mf = load_model_file(path);
    CHECK(mf.model.p1 == doctest::Approx(0.45));
    CHECK(mf.model.p2 == doctest::Approx(0.55));
    CHECK(mf.model.chi == doctest::Approx(0.1));
    CHECK(mf.model.chi_prime == 0.0);
    CHECK_FALSE(mf.g.has_value());
    std::remove(path);
}

TEST_CASE("model file: concrete meter parameters") {
    const char* path = "test_model_concrete.cfg";
    {
        std::ofstream out(path);
        out << "g = 0.1\na_sq = 0.25\nb = 0.2\ntau = 0.001\n";
    }
    auto mf = load_model_file(path);
    CHECK(mf.model.p0() == doctest::Approx(0.2525));
    CHECK(mf.model.delta_p() == doctest::Approx(0.1));
    CHECK(mf.model.chi_prime == doctest::Approx(-0.02));
    CHECK(mf.g == doctest::Approx(0.1));
    std::remove(path);
}

TEST_CASE("model file: mixed forms rejected") {
    const char* path = "test_model_mixed.cfg";
    {
        std::ofstream out(path);
        out << "p1 = 0.4\ng = 0.1\ntau = 0.001\n";
    }
    CHECK_THROWS_AS(load_model_file(path), std::invalid_argument);
    std::remove(path);
}
