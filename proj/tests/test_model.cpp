#include "doctest.h"
#include "hrg/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

using namespace hrg;

namespace {

// Trapezoid quadrature of f over one period; spectrally accurate for smooth
// periodic integrands, so it serves as an independent route to the cosine
// coefficients of the sine-Gordon site density.
double sg_cosine_moment(double kappa, int q, int grid = 4096) {
    double acc = 0.0;
    for (int i = 0; i < grid; ++i) {
        double z = static_cast<double>(i) / grid;
        acc += std::exp(-kappa * (1.0 - std::cos(2.0 * std::numbers::pi * z))) *
               std::cos(2.0 * std::numbers::pi * q * z);
    }
    return acc / grid;
}

} // namespace

TEST_SUITE("model") {

TEST_CASE("critical coupling matches 2*pi^2/log(b)") {
    CHECK(beta_critical(2) == doctest::Approx(28.477658649975009).epsilon(1e-14));
    CHECK(beta_critical(3) == doctest::Approx(17.967402154320816).epsilon(1e-14));
    CHECK(beta_critical(4) == doctest::Approx(14.238829324987504).epsilon(1e-14));
    CHECK_THROWS_AS(beta_critical(1), std::invalid_argument);
}

TEST_CASE("theta equals 1/b exactly at the critical coupling") {
    for (int b : {2, 3, 4, 7}) {
        ModelConfig cfg = make_config(b, beta_critical(b), 4);
        CHECK(cfg.theta() == doctest::Approx(1.0 / b).epsilon(1e-14));
        CHECK_FALSE(cfg.supercritical());
        ModelConfig warm = make_config(b, beta_critical(b) + 1e-9, 4);
        CHECK(warm.supercritical());
    }
}

TEST_CASE("site measure coefficients per family") {
    auto dg = fourier_coeffs(MeasureSpec::dg(), 5);
    REQUIRE(dg.size() == 6);
    for (double c : dg) CHECK(c == 1.0);

    // Modified-Bessel ratios I_q(kappa)/I_0(kappa), frozen from an
    // independent arbitrary-precision evaluation.
    auto sg1 = fourier_coeffs(MeasureSpec::sine_gordon(1.0), 3);
    CHECK(sg1[1] / sg1[0] == doctest::Approx(0.44638996589653451).epsilon(1e-13));
    CHECK(sg1[2] / sg1[0] == doctest::Approx(0.10722006820693099).epsilon(1e-13));
    CHECK(sg1[3] / sg1[0] == doctest::Approx(0.017509693068810563).epsilon(1e-13));

    auto sg2 = fourier_coeffs(MeasureSpec::sine_gordon(2.0), 2);
    CHECK(sg2[1] / sg2[0] == doctest::Approx(0.69777465796400798).epsilon(1e-13));
    CHECK(sg2[2] / sg2[0] == doctest::Approx(0.30222534203599202).epsilon(1e-13));

    // kappa = 0 degenerates to the free field: only the zero mode survives.
    auto sg0 = fourier_coeffs(MeasureSpec::sine_gordon(0.0), 3);
    CHECK(sg0[0] == 1.0);
    CHECK(sg0[1] == 0.0);
    CHECK(sg0[3] == 0.0);

    auto hc = fourier_coeffs(MeasureSpec::hard_core(0.4), 4);
    CHECK(hc[0] == 1.0);
    CHECK(hc[1] == 0.4);
    CHECK(hc[2] == 0.0);
    CHECK(hc[4] == 0.0);

    auto cc = fourier_coeffs(MeasureSpec::custom_coeffs({1.0, 0.5, 0.1}), 4);
    CHECK(cc[1] == 0.5);
    CHECK(cc[2] == 0.1);
    CHECK(cc[3] == 0.0);
}

TEST_CASE("sine-Gordon series agrees with direct quadrature of the density") {
    for (double kappa : {0.3, 1.0, 2.5, 5.0}) {
        auto a = fourier_coeffs(MeasureSpec::sine_gordon(kappa), 4);
        double m0 = sg_cosine_moment(kappa, 0);
        for (int q = 1; q <= 4; ++q) {
            double want = sg_cosine_moment(kappa, q) / m0;
            CHECK(a[q] / a[0] == doctest::Approx(want).epsilon(1e-11));
        }
    }
}

TEST_CASE("sine-Gordon coefficient ratios decay monotonically") {
    for (double kappa : {0.5, 1.0, 2.0, 5.0}) {
        auto a = fourier_coeffs(MeasureSpec::sine_gordon(kappa), 8);
        for (int q = 0; q + 2 <= 8; ++q)
            CHECK(a[q + 2] / a[q + 1] <= a[q + 1] / a[q] + 1e-12);
    }
}

TEST_CASE("measure validation rejects out-of-range parameters") {
    CHECK_THROWS_AS(fourier_coeffs(MeasureSpec::sine_gordon(-0.1), 2), std::invalid_argument);
    CHECK_THROWS_AS(fourier_coeffs(MeasureSpec::hard_core(0.51), 2), std::invalid_argument);
    CHECK_THROWS_AS(fourier_coeffs(MeasureSpec::hard_core(-0.01), 2), std::invalid_argument);
    CHECK_NOTHROW(fourier_coeffs(MeasureSpec::hard_core(0.5), 2));
    CHECK_THROWS_AS(fourier_coeffs(MeasureSpec::custom_coeffs({}), 2), std::invalid_argument);
    CHECK_THROWS_AS(fourier_coeffs(MeasureSpec::custom_coeffs({0.0, 1.0}), 2), std::invalid_argument);
}

TEST_CASE("measure diagnostics flag loss of strict positivity") {
    auto d_dg = measure_diagnostics(MeasureSpec::dg(), 6);
    CHECK(d_dg.strictly_positive);
    CHECK(d_dg.sup_ratio == doctest::Approx(1.0));

    auto d_hc = measure_diagnostics(MeasureSpec::hard_core(0.3), 6);
    CHECK_FALSE(d_hc.strictly_positive);

    auto d_sg = measure_diagnostics(MeasureSpec::sine_gordon(1.5), 6);
    CHECK(d_sg.strictly_positive);
    CHECK(d_sg.ratio_bounded);
    CHECK(d_sg.sup_ratio < 1.0);
}

TEST_CASE("constant and massive variance profiles") {
    auto c = constant_profile(5);
    REQUIRE(c.size() == 6);
    for (double s : c) CHECK(s == 1.0);

    // b = L^2 with L = 2; the level-0 entry is 1/(m^2 + 1).
    int n = 6;
    double m2 = 0.05;
    auto mp = massive_profile(4, n, m2);
    REQUIRE(mp.size() == static_cast<size_t>(n + 1));
    CHECK(mp[0] == doctest::Approx(1.0 / (m2 + 1.0)).epsilon(1e-14));
    double L = 2.0;
    for (int k = 1; k < n; ++k) {
        double want = std::pow(L, -4.0 * k) * (L * L - 1.0) /
                      ((m2 + std::pow(L, -2.0 * k)) * (m2 + std::pow(L, 2.0 - 2.0 * k)));
        CHECK(mp[k] == doctest::Approx(want).epsilon(1e-13));
    }
    double top = std::pow(L, 2.0 - 4.0 * n) / (m2 * (m2 + std::pow(L, 2.0 - 2.0 * n)));
    CHECK(mp[n] == doctest::Approx(top).epsilon(1e-13));

    // The b = L^2 constraint rejects non-square branching factors.
    CHECK_THROWS_AS(massive_profile(3, 4, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(massive_profile(4, 4, 0.0), std::invalid_argument);
}

TEST_CASE("massive profile at m^2 = L^(-2n) pins the level-0 variance") {
    int n = 5;
    double L = 2.0;
    double m2 = std::pow(L, -2.0 * n);
    auto mp = massive_profile(4, n, m2);
    CHECK(mp[0] == doctest::Approx(1.0 / (1.0 + m2)).epsilon(1e-14));
}

TEST_CASE("conductance profile for the unit-variance b=2 depth-2 model") {
    ModelConfig cfg = make_config(2, 10.0, 2);
    LaplacianProfile p = build_profile(cfg);
    REQUIRE(p.conductance.size() == 3);
    // u_k = sum_{j<=k} b^j sigma_j^2 = 1, 3, 7.
    CHECK(p.partial_sum[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(p.partial_sum[1] == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(p.partial_sum[2] == doctest::Approx(7.0).epsilon(1e-15));
    // c_1 = b^{-1}(1/u_0 - 1/u_1), c_2 = b^{-2}(1/u_1 - 1/u_2), c_3 = 1/u_2.
    CHECK(p.conductance[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(p.conductance[1] == doctest::Approx(1.0 / 21.0).epsilon(1e-15));
    CHECK(p.conductance[2] == doctest::Approx(1.0 / 7.0).epsilon(1e-15));
}

TEST_CASE("variance profile round-trips through the conductance map") {
    ModelConfig cfg = make_config(3, 12.0, 4);
    cfg.sigma_sq = {0.9, 1.3, 0.6, 1.1, 0.8};
    LaplacianProfile p = build_profile(cfg);
    auto back = sigma_from_profile(p);
    REQUIRE(back.size() == cfg.sigma_sq.size());
    for (size_t i = 0; i < back.size(); ++i)
        CHECK(back[i] == doctest::Approx(cfg.sigma_sq[i]).epsilon(1e-12));
}

TEST_CASE("branch depth and ultrametric distance") {
    // b=2, n=3: leaves indexed most-significant-digit first.
    CHECK(branch_depth(0, 0, 2, 3) == 0);
    CHECK(branch_depth(0, 1, 2, 3) == 1);
    CHECK(branch_depth(0, 2, 2, 3) == 2);
    CHECK(branch_depth(0, 3, 2, 3) == 2);
    CHECK(branch_depth(0, 4, 2, 3) == 3);
    CHECK(branch_depth(0, 7, 2, 3) == 3);
    CHECK(branch_depth(5, 7, 2, 3) == 2);
    CHECK(branch_depth(2, 3, 3, 2) == 2);
    CHECK(branch_depth(2, 3, 2, 2) == 1);
    CHECK(hier_distance(0, 4, 2, 3) == doctest::Approx(std::pow(2.0, 1.5)).epsilon(1e-15));
    CHECK(hier_distance(1, 1, 2, 3) == 0.0);
}

TEST_CASE("config validation") {
    ModelConfig cfg = make_config(2, 20.0, 3);
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.sites() == 8);

    ModelConfig bad = cfg;
    bad.b = 1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.beta = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.sigma_sq.pop_back();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.sigma_sq[1] = -0.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.grid_size = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    ModelConfig deep = make_config(2, 20.0, 64);
    CHECK_THROWS_AS(deep.sites(), std::overflow_error);
}

TEST_CASE("config file round trip and strict key checking") {
    const char* path = "test_model_config.json";
    {
        std::ofstream out(path);
        out << R"({
          "b": 3,
          "beta": 18.5,
          "n": 4,
          "measure": {"type": "sine_gordon", "kappa": 1.25},
          "sigma_profile": {"type": "custom", "values": [1.0, 0.9, 0.8, 0.7, 0.6]},
          "q_max": 12,
          "grid_size": 256,
          "seed": 99
        })";
    }
    ModelConfig cfg = load_config(path);
    CHECK(cfg.b == 3);
    CHECK(cfg.beta == doctest::Approx(18.5));
    CHECK(cfg.n == 4);
    CHECK(cfg.measure.kind == MeasureSpec::Kind::SineGordon);
    CHECK(cfg.measure.kappa == doctest::Approx(1.25));
    CHECK(cfg.sigma_sq.size() == 5);
    CHECK(cfg.sigma_sq[4] == doctest::Approx(0.6));
    CHECK(cfg.q_max == 12);
    CHECK(cfg.grid_size == 256);
    CHECK(cfg.seed == 99);
    std::remove(path);

    {
        std::ofstream out(path);
        out << R"({"b": 2, "beta": 20.0, "n": 3, "betaa": 1.0})";
    }
    CHECK_THROWS_AS(load_config(path), std::invalid_argument);
    std::remove(path);

    {
        std::ofstream out(path);
        out << R"({"b": 4, "beta": 20.0, "n": 3,
                   "sigma_profile": {"type": "massive", "m2": 0.05}})";
    }
    ModelConfig mc = load_config(path);
    CHECK(mc.sigma_sq[0] == doctest::Approx(1.0 / 1.05).epsilon(1e-14));
    std::remove(path);

    CHECK_THROWS_AS(load_config("no_such_config_file.json"), std::invalid_argument);
}

} // TEST_SUITE
