#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qmeas/core.hpp"
#include "qmeas/rng.hpp"

using namespace qmeas;

namespace {
SystemConfig symmetric_config(double v, double kappa) {
    SystemConfig c;
    c.e1 = -0.5;
    c.e2 = 0.5;
    c.v_amplitude = v;
    c.t1 = 0.0;
    c.t2 = v > 0.0 ? 0.5 * kPi / v : 0.0;
    c.t_total = 1.0;
    c.kappa = kappa;
    return c;
}
} // namespace

TEST_CASE("derive_scales basics") {
    auto c = symmetric_config(kPi, 0.0);
    auto s = derive_scales(c);
    CHECK(s.delta_e == doctest::Approx(1.0));
    CHECK(s.e0 == doctest::Approx(0.0));
    CHECK(s.t_rabi == doctest::Approx(1.0));
    CHECK(std::isinf(s.t_lr)); // kappa = 0: no measurement
    CHECK(std::isinf(s.fuzziness_ratio));
}

TEST_CASE("fuzziness ratio round-trips through kappa") {
    // moderate fuzziness from Fig. 2: 4 pi T_lr / T_R = 4/3
    const double ratio = 4.0 / 3.0;
    auto c = symmetric_config(kPi, 0.0);
    c.kappa = kappa_for_fuzziness(ratio, 1.0, 1.0);
    auto s = derive_scales(c);
    CHECK(s.fuzziness_ratio == doctest::Approx(ratio).epsilon(1e-12));
    CHECK(s.t_lr == doctest::Approx(ratio / (4.0 * kPi)).epsilon(1e-12));
}

TEST_CASE("t_lr by direct substitution") {
    SystemConfig c;
    c.e1 = -1.0;
    c.e2 = 1.0; // delta_e = 2
    c.v_amplitude = kPi;
    c.t1 = 0.0;
    c.t2 = 0.5;
    c.t_total = 1.0;
    c.kappa = 0.125;
    auto s = derive_scales(c);
    CHECK(s.t_lr == doctest::Approx(2.0).epsilon(1e-14)); // 1/(0.125*4)
}

TEST_CASE("derive_scales rejects inverted levels") {
    auto c = symmetric_config(kPi, 0.1);
    c.e2 = c.e1 - 1.0;
    CHECK_THROWS_AS(derive_scales(c), std::invalid_argument);
}

TEST_CASE("scale consistency: energies x s, kappa / s^2 leaves t_lr fixed") {
    Rng rng(11);
    for (int i = 0; i < 50; ++i) {
        const double de = rng.uniform(0.1, 5.0);
        const double kappa = rng.uniform(0.01, 10.0);
        const double s = rng.uniform(0.2, 8.0);
        SystemConfig a = symmetric_config(kPi, kappa);
        a.e1 = -0.5 * de;
        a.e2 = 0.5 * de;
        SystemConfig b = a;
        b.e1 *= s;
        b.e2 *= s;
        b.kappa = kappa / (s * s);
        CHECK(derive_scales(a).t_lr ==
              doctest::Approx(derive_scales(b).t_lr).epsilon(1e-12));
    }
}

TEST_CASE("fuzziness ratio is monotone decreasing in kappa") {
    double prev = kInf;
    for (double kappa : {0.1, 0.5, 1.0, 5.0, 25.0}) {
        auto s = derive_scales(symmetric_config(kPi, kappa));
        CHECK(s.fuzziness_ratio < prev);
        prev = s.fuzziness_ratio;
    }
}

TEST_CASE("amplitude pair norm and occupation") {
    AmplitudePair p{{0.6, 0.0}, {0.0, 0.8}};
    CHECK(p.norm_sq() == doctest::Approx(1.0));
    CHECK(p.p2() == doctest::Approx(0.64));
    // occupation is invariant under rescaling by any nonzero constant
    AmplitudePair q{p.c1 * std::complex<double>(0.3, -1.7), p.c2 * std::complex<double>(0.3, -1.7)};
    CHECK(q.p2() == doctest::Approx(p.p2()).epsilon(1e-14));
    CHECK_THROWS_AS((AmplitudePair{{0, 0}, {0, 0}}.normalized()), std::invalid_argument);
}

TEST_CASE("pi pulse detection") {
    auto c = symmetric_config(kPi, 0.0); // t2 - t1 = 0.5 = T_R/2
    CHECK(is_pi_pulse(c));
    c.t2 = 0.4;
    CHECK_FALSE(is_pi_pulse(c));
}

TEST_CASE("rng streams are deterministic and distinct") {
    Rng a = Rng::stream(42, 7);
    Rng b = Rng::stream(42, 7);
    Rng c = Rng::stream(42, 8);
    bool distinct = false;
    for (int i = 0; i < 16; ++i) {
        const auto x = a.next();
        CHECK(x == b.next());
        if (x != c.next()) distinct = true;
    }
    CHECK(distinct);
}

TEST_CASE("uniform01 stays in [0,1)") {
    Rng rng(3);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}
