#include "doctest.h"
#include "hrg/chain.hpp"
#include "hrg/model.hpp"
#include "hrg/observables.hpp"
#include "hrg/oracle.hpp"
#include "hrg/rgflow.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

using namespace hrg;

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

double beta_from_btheta(double btheta, int b) {
    return -2.0 * std::numbers::pi * std::numbers::pi / std::log(btheta / b);
}

// Column-normalized one-step kernel K(z_row | cond_col) on the grid, density
// e^{-b v(z)} wrapped_gauss(z - cond; var).
std::vector<std::vector<double>> kernel_matrix(const PeriodicFunction& v,
                                               double var, int b) {
    const int G = v.grid_size();
    std::vector<std::vector<double>> K(G, std::vector<double>(G));
    for (int c = 0; c < G; ++c) {
        double norm = 0.0;
        for (int z = 0; z < G; ++z) {
            K[z][c] = std::exp(-b * v[z]) *
                      wrapped_gauss(static_cast<double>(z - c) / G, var);
            norm += K[z][c];
        }
        for (int z = 0; z < G; ++z) K[z][c] /= norm;
    }
    return K;
}

} // namespace

TEST_SUITE("chain") {

TEST_CASE("wrapped gaussian: mass, symmetry, validation") {
    for (double var : {0.004, 0.05, 1.0, 30.0}) {
        const int G = 256;
        double mass = 0.0;
        for (int j = 0; j < G; ++j)
            mass += wrapped_gauss(static_cast<double>(j) / G, var);
        CHECK(mass / G == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(wrapped_gauss(0.3, 0.1) == doctest::Approx(wrapped_gauss(-0.3, 0.1)).epsilon(1e-15));
    CHECK(wrapped_gauss(1.3, 0.1) == doctest::Approx(wrapped_gauss(0.3, 0.1)).epsilon(1e-15));
    CHECK_THROWS_AS(wrapped_gauss(0.0, 0.0), std::invalid_argument);
}

TEST_CASE("stationary density is a fixed point of the one-step kernel") {
    const int b = 2;
    const double theta = 1.05 / 2.0;
    const double beta = beta_from_btheta(1.05, b);
    StarData star = star_data(b, theta);
    REQUIRE_FALSE(star.trivial);

    MarginalDensity nu{star.nu_star, 5};
    MarginalDensity out = propagate_density(nu, star.v_star, 1.0 / beta, b);
    REQUIRE(out.rho.size() == nu.rho.size());
    for (size_t j = 0; j < out.rho.size(); ++j)
        CHECK(out.rho[j] == doctest::Approx(nu.rho[j]).epsilon(1e-8));
}

TEST_CASE("chain construction invariants") {
    ModelConfig cfg = make_config(2, 30.0, 8);
    ChainLevels chain = build_chain(cfg);
    REQUIRE(chain.rho.size() == 9);
    for (int k = 1; k <= 8; ++k) {
        double mean = 0.0;
        for (double x : chain.rho[k].rho) mean += x;
        mean /= static_cast<double>(chain.rho[k].rho.size());
        CHECK(mean == doctest::Approx(1.0).epsilon(1e-12));
        for (double x : chain.rho[k].rho) CHECK(x >= 0.0);
        CHECK(chain.rho[k].level == k);
    }
    REQUIRE(chain.s.size() == 10);
    CHECK(chain.s[0] == 0.0);
    for (int k = 0; k <= 8; ++k)
        CHECK(chain.s[k + 1] ==
              doctest::Approx(chain.s[k] / cfg.b + cfg.sigma_sq[k]).epsilon(1e-14));

    PeriodicFunction one{std::vector<double>(cfg.grid_size, 1.0)};
    for (int k = 1; k <= 9; ++k)
        CHECK(level_expectation(chain, k, one) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(level_expectation(chain, 0, one), std::invalid_argument);
}

TEST_CASE("free-field chain: exact covariance ladder and charge formula") {
    // kappa = 0 site measure drops every potential; everything is Gaussian.
    ModelConfig cfg = make_config(3, 11.0, 5, MeasureSpec::sine_gordon(0.0));
    cfg.sigma_sq = {0.8, 1.25, 0.65, 1.4, 0.95, 1.1};
    ChainLevels chain = build_chain(cfg);

    auto inc = covariance_increments(chain);
    REQUIRE(inc.size() == 6);
    for (int i = 0; i <= 5; ++i)
        CHECK(inc[i] == doctest::Approx(cfg.sigma_sq[i] / cfg.beta).epsilon(1e-12));

    std::vector<double> cov(6);
    for (int k = 0; k <= 5; ++k) {
        double want = 0.0;
        for (int i = k; i <= 5; ++i) want += cfg.sigma_sq[i] / cfg.beta;
        cov[k] = covariance_exact(chain, k);
        CHECK(cov[k] == doctest::Approx(want).epsilon(1e-12));
    }

    // Gaussian pair charge: exp(-4 pi^2 a^2 (C(0) - C(k))).
    double alpha = 0.17;
    for (int k = 1; k <= 5; ++k) {
        double want = std::exp(-kTau * kTau * alpha * alpha * (cov[0] - cov[k]));
        CHECK(charge_correlation_exact(chain, alpha, k) ==
              doctest::Approx(want).epsilon(1e-9));
    }
    CHECK(charge_correlation_exact(chain, alpha, 0) == 1.0);
    double want_single = std::exp(-0.5 * kTau * kTau * alpha * alpha * cov[0]);
    CHECK(single_charge_exact(chain, alpha) == doctest::Approx(want_single).epsilon(1e-9));
}

TEST_CASE("chain matches the brute-force Gibbs enumeration") {
    ModelConfig cfg = make_config(2, 10.0, 2);
    std::vector<GibbsObservable> obs = {
        {0, 0, 0.0}, {0, 1, 0.0}, {0, 2, 0.0},
        {0, 1, 0.1}, {0, 2, 0.1}, {0, 1, 0.3}, {0, 2, 0.3},
        {0, 0, 0.1}, {0, 0, 0.3},
    };
    GibbsResult g = gibbs_brute(cfg, 6, obs);
    ChainLevels chain = build_chain(cfg);

    CHECK(covariance_exact(chain, 0) == doctest::Approx(g.values[0].covariance).epsilon(1e-9));
    CHECK(covariance_exact(chain, 1) == doctest::Approx(g.values[1].covariance).epsilon(1e-9));
    CHECK(covariance_exact(chain, 2) == doctest::Approx(g.values[2].covariance).epsilon(1e-8));

    CHECK(charge_correlation_exact(chain, 0.1, 1) == doctest::Approx(g.values[3].charge).epsilon(1e-9));
    CHECK(charge_correlation_exact(chain, 0.1, 2) == doctest::Approx(g.values[4].charge).epsilon(1e-9));
    CHECK(charge_correlation_exact(chain, 0.3, 1) == doctest::Approx(g.values[5].charge).epsilon(1e-9));
    CHECK(charge_correlation_exact(chain, 0.3, 2) == doctest::Approx(g.values[6].charge).epsilon(1e-9));

    CHECK(single_charge_exact(chain, 0.1) == doctest::Approx(g.values[7].charge).epsilon(1e-9));
    CHECK(single_charge_exact(chain, 0.3) == doctest::Approx(g.values[8].charge).epsilon(1e-9));
}

TEST_CASE("conditional moment identities of the one-step kernel") {
    ModelConfig cfg = make_config(2, beta_from_btheta(1.05, 2), 6);
    cfg.grid_size = 256;
    ChainLevels chain = build_chain(cfg);
    const int k = 3;
    const int G = cfg.grid_size;
    const double var = cfg.sigma_sq[k] / cfg.beta;
    auto K = kernel_matrix(chain.pots[k - 1].v, var, cfg.b);

    // E[v'_{k-1}(phi_k) | phi_{k+1} = z] = v'_k(z) / b.
    for (int c = 0; c < G; c += 17) {
        double acc = 0.0;
        for (int z = 0; z < G; ++z) acc += K[z][c] * chain.pots[k - 1].v1[z];
        CHECK(acc == doctest::Approx(chain.pots[k].v1[c] / cfg.b).epsilon(1e-8));
    }

    // E[phi_k - phi_{k+1} | phi_{k+1} = z] = -(sigma_k^2/beta) v'_k(z), with the
    // first moment taken over the unwrapped displacement.
    auto wrapped_first = [&](double t) {
        t -= std::round(t);
        double acc = 0.0;
        for (int j = -40; j <= 40; ++j) {
            double u = t + j;
            acc += u * std::exp(-u * u / (2.0 * var)) /
                   std::sqrt(kTau * var);
        }
        return acc;
    };
    for (int c = 0; c < G; c += 31) {
        double num = 0.0, den = 0.0;
        for (int z = 0; z < G; ++z) {
            double w = std::exp(-cfg.b * chain.pots[k - 1].v[z]);
            double t = static_cast<double>(z - c) / G;
            num += w * wrapped_first(t);
            den += w * wrapped_gauss(t, var);
        }
        double want = -var * chain.pots[k].v1[c];
        CHECK(num / den == doctest::Approx(want).epsilon(1e-7));
    }
}

TEST_CASE("charge weight recursion structure") {
    ModelConfig cfg = make_config(2, 20.0, 24);
    ChainLevels chain = build_chain(cfg);
    double alpha = 0.2;

    ChargeWeights w1 = init_charge_weights(cfg, alpha);
    double theta0 = cfg.theta_level(0);
    CHECK(w1.at(0) == doctest::Approx(std::pow(theta0, alpha * alpha)).epsilon(1e-12));
    CHECK(w1.at(1) == doctest::Approx(std::pow(theta0, (1 + alpha) * (1 + alpha))).epsilon(1e-12));
    CHECK(w1.at(-1) == doctest::Approx(std::pow(theta0, (1 - alpha) * (1 - alpha))).epsilon(1e-12));
    CHECK(w1.at(1) != doctest::Approx(w1.at(-1)).epsilon(1e-6));   // asymmetric

    auto levels = run_charge_weights(chain, alpha);
    REQUIRE(levels.size() == 26);
    CHECK(levels[1].at(0) == doctest::Approx(w1.at(0)).epsilon(1e-14));

    // Subcritically gamma -> delta, so the zero-mode ratio approaches
    // theta^{alpha^2}.
    double ratio = levels[24].w0() / levels[23].w0();
    CHECK(ratio == doctest::Approx(std::pow(cfg.theta(), alpha * alpha)).epsilon(1e-4));

    CHECK_THROWS_AS(init_charge_weights(cfg, 0.5), std::invalid_argument);
}

TEST_CASE("level table is consistent with its sources") {
    ModelConfig cfg = make_config(2, beta_from_btheta(1.05, 2), 12);
    ChainLevels chain = build_chain(cfg);
    double alpha = 0.2;
    auto table = chain_level_table(chain, alpha);
    auto inc = covariance_increments(chain);
    auto wl = run_charge_weights(chain, alpha);
    REQUIRE(table.size() >= 12);

    for (const auto& row : table) {
        int k = row.k;
        CHECK(row.increment == doctest::Approx(inc[k]).epsilon(1e-12));
        CHECK(row.w0 == doctest::Approx(wl[k].w0()).epsilon(1e-12));
        if (k + 1 < static_cast<int>(wl.size()))
            CHECK(row.w0_ratio == doctest::Approx(wl[k + 1].w0() / wl[k].w0()).epsilon(1e-12));
        CHECK(row.tv_to_nu_star >= 0.0);
    }

    CHECK(table[0].k == 1);
}

TEST_CASE("deep chain has an interior stationary window") {
    // Two competing transients: near the leaves the level kernels still
    // differ from the limit kernel, near the root the anchor at 0 is still
    // felt. In between the marginal must sit on the stationary density.
    ModelConfig cfg = make_config(2, beta_from_btheta(1.05, 2), 100);
    ChainLevels chain = build_chain(cfg);
    auto table = chain_level_table(chain, 0.0);
    double best = 1.0;
    int best_k = -1;
    for (const auto& row : table)
        if (row.tv_to_nu_star < best) {
            best = row.tv_to_nu_star;
            best_k = row.k;
        }
    CHECK(best < 1e-3);
    CHECK(best_k > 10);
    CHECK(best_k < 95);
    CHECK(table.front().tv_to_nu_star > 10.0 * best);
    CHECK(table.back().tv_to_nu_star > 10.0 * best);
}

} // TEST_SUITE
