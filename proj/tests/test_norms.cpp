/// @file test_norms.cpp
/// @brief Weight function properties and the analytic/Sobolev norms.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hsv/norms.hpp"

#include <random>

using namespace hsv;

namespace {

NormParams params(double nu = 1e-2) {
    NormParams p;
    p.nu = nu;
    p.gamma = 2.0;
    return p;
}

SpectralField random_field(const GridPtr& g, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    SpectralField f(g, 3);
    for (int m = 0; m < g->n_modes(); ++m)
        for (int c = 0; c < 3; ++c) {
            const cplx a(n(rng), n(rng)), b(n(rng), n(rng));
            const double s = 0.3 + std::abs(n(rng));
            for (int j = 0; j < g->Nz(); ++j) {
                const double z = g->z(j);
                f.at(m, c, j) = (a + b * z) * std::exp(-z * z / s);
            }
        }
    return f;
}

}  // namespace

TEST_CASE("weight examples and errors") {
    CHECK(weight_w(0.5, 0.01) == doctest::Approx(0.5));
    CHECK(weight_w(0.0, 0.04) == doctest::Approx(0.2));
    CHECK(weight_w(1.2, 1e-4) == 1.0);
    CHECK_THROWS_AS(weight_w(-0.1, 0.01), std::invalid_argument);
    CHECK_THROWS_AS(weight_w(0.1, 0.0), std::invalid_argument);
}

TEST_CASE("weight properties on random samples") {
    const double mu0 = 0.5;
    // Frozen constants for the exponential property: sup_s max(1, s) e^{-s} = 1.
    const double C = 1.0, Cp = 1.0;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int i = 0; i < 10000; ++i) {
        const double nu = std::pow(10.0, -4.0 * U(rng));
        const double y = (1.0 + mu0) * U(rng);
        const double z = (1.0 + mu0) * U(rng);
        const double wy = weight_w(y, nu), wz = weight_w(z, nu);
        if (y <= z) CHECK(wy <= wz);
        if (y / 2 <= z) CHECK(wy <= 2.0 * wz);
        CHECK(wy >= std::sqrt(nu));
        CHECK(wy <= 1.0);
        if (y <= 1.0) CHECK(y <= wy);
        CHECK(y <= (1.0 + mu0) * wy);
        CHECK(wy * std::exp(-y / (C * std::sqrt(nu))) <= Cp * std::sqrt(nu) * (1.0 + 1e-14));
    }
}

TEST_CASE("parameter validation and mu grid") {
    NormParams p = params();
    CHECK_NOTHROW(p.validate());
    const auto g0 = p.mu_grid(0.0);
    CHECK(g0.back() == doctest::Approx(p.mu0 - 1e-3));
    for (size_t i = 1; i < g0.size(); ++i) CHECK(g0[i] > g0[i - 1]);
    const auto g1 = p.mu_grid(p.t_max());
    CHECK(g1.back() == doctest::Approx(p.mu0 / 2 - 1e-3));
    CHECK_THROWS_AS(p.mu_grid(p.t_max() * 1.01), std::invalid_argument);
    CHECK_THROWS_AS(p.mu_grid(-0.1), std::invalid_argument);
    p.a = 0.5;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = params();
    p.mu_samples = 4;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("closed-form single-mode values") {
    const auto g = make_grid(1, 128, 4.0, 1e-2, 0.5);
    const NormParams p = params(0.04);
    const double mu = 0.5 - 1e-9;

    SpectralField f(g, 3);
    CHECK(norm_X_mu(f, 0.25, p).total == 0.0);
    CHECK(cumulative_norm(f, 0.0, p).triple == 0.0);

    const int m0 = g->index(0, 0);
    for (int j = 0; j < g->Nz(); ++j) f.at(m0, 2, j) = 1.0;
    const auto x = norm_X_mu(f, 0.25, p);
    CHECK(x.frak == doctest::Approx(1.0));
    CHECK(x.bar == 0.0);

    SpectralField b(g, 3);
    b.at(g->index(1, 0), 0, 0) = 1.0;
    CHECK(norm_X_mu(b, mu, p).bar == doctest::Approx(std::exp(0.125 * 1.5) * 0.2).epsilon(1e-8));
    CHECK_THROWS_AS(norm_X_mu(b, 0.5, p), std::invalid_argument);

    // L1 of a constant over [0, 1 + mu], doubled by (1 + |xi|) at |xi| = 1
    const auto r0 = cumulative_norm(f, 0.0, p);
    for (const auto& row : r0.rows) CHECK(row.Y_mu == doctest::Approx(1.0 + row.mu));
    SpectralField f1(g, 3);
    for (int j = 0; j < g->Nz(); ++j) f1.at(g->index(1, 0), 2, j) = 1.0;
    const auto r1 = cumulative_norm(f1, 0.0, p);
    for (size_t i = 0; i < r1.rows.size(); ++i) CHECK(r1.rows[i].Y_mu == doctest::Approx(2.0 * r0.rows[i].Y_mu));
}

TEST_CASE("S of an indicator on [1, 2]") {
    const auto g = make_grid(1, 1024, 4.0, 1.0, 0.5);
    SpectralField f(g, 3);
    const int m0 = g->index(0, 0);
    for (int j = 0; j < g->Nz(); ++j)
        if (g->z(j) >= 1.0 && g->z(j) <= 2.0) f.at(m0, 0, j) = 1.0;
    const auto s = norm_S_and_Z(f, 0.0);
    CHECK(s.S_mu == doctest::Approx(std::sqrt(7.0 / 3.0)).epsilon(1e-2));
    CHECK(s.Z >= s.S);
    CHECK(s.Z_phi >= s.S_phi);
    CHECK_THROWS_AS(norm_S_and_Z(f, 3.5), std::invalid_argument);
    CHECK(cutoff_psi(0.2) == 0.0);
    CHECK(cutoff_psi(0.6) == 1.0);
    CHECK(cutoff_psi(0.375) == doctest::Approx(0.5));
}

TEST_CASE("homogeneity, subadditivity and monotonicity on random fields") {
    const auto g = make_grid(1, 32, 3.0, 1e-2, 0.5);
    NormParams p = params();
    p.mu_samples = 8;
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    for (int i = 0; i < 100; ++i) {
        const auto f = random_field(g, rng);
        const auto h = random_field(g, rng);
        const double c = U(rng);
        const double t = p.t_max() * (i % 5) / 4.0;
        const auto rf = cumulative_norm(f, t, p);
        const auto rh = cumulative_norm(h, t, p);
        const auto rs = cumulative_norm(f + h, t, p);
        const auto rc = cumulative_norm(c * f, t, p);
        const double tol = 1e-12;
        CHECK(rc.X_t == doctest::Approx(std::abs(c) * rf.X_t).epsilon(tol));
        CHECK(rc.Y_t == doctest::Approx(std::abs(c) * rf.Y_t).epsilon(tol));
        CHECK(rc.Z == doctest::Approx(std::abs(c) * rf.Z).epsilon(tol));
        CHECK(rc.triple == doctest::Approx(std::abs(c) * rf.triple).epsilon(tol));
        CHECK(rs.X_t <= (rf.X_t + rh.X_t) * (1 + tol));
        CHECK(rs.Y_t <= (rf.Y_t + rh.Y_t) * (1 + tol));
        CHECK(rs.Z <= (rf.Z + rh.Z) * (1 + tol));
        CHECK(rs.S <= (rf.S + rh.S) * (1 + tol));
        CHECK(rs.triple <= (rf.triple + rh.triple) * (1 + tol));
        CHECK(rf.triple == doctest::Approx(rf.X_t + rf.Y_t + rf.Z));
        CHECK(rf.triple >= rf.X_t);
        CHECK(rf.triple >= rf.Z);
        for (size_t k = 1; k < rf.rows.size(); ++k) {
            CHECK(rf.rows[k].X_mu >= rf.rows[k - 1].X_mu);
            CHECK(rf.rows[k].Xbar_mu >= rf.rows[k - 1].Xbar_mu);
        }
        if (i < 10) {
            double prev = 1e300;
            for (int s = 0; s <= 4; ++s) {
                const double x = norm_X_of_t(f, p.t_max() * s / 4.0, p);
                CHECK(x <= prev * (1 + tol));
                prev = x;
            }
        }
    }
}

TEST_CASE("real-trace value is stable under vertical refinement") {
    const NormParams p = params();
    std::vector<double> v;
    for (int nz : {256, 512}) {
        const auto g = make_grid(2, nz, 4.0, 1e-2, 0.5);
        v.push_back(norm_X_mu(make_initial_data("single-roll", 1.0, g), 0.25, p).bar);
    }
    CHECK(std::isfinite(v[0]));
    CHECK(std::abs(v[1] - v[0]) <= 1e-3 * v[1]);
}

TEST_CASE("spectral decay of a geometric sequence") {
    const auto g = make_grid(4, 24, 3.0, 1e-2, 0.5);
    SpectralField f(g, 3);
    for (int a = -4; a <= 4; ++a) {
        const int m = g->index(a, 0);
        for (int j = 0; j < g->Nz(); ++j) f.at(m, 0, j) = std::exp(-0.7 * std::abs(a)) * std::exp(-g->z(j));
    }
    CHECK(spectral_decay_rate(f) == doctest::Approx(0.7).epsilon(1e-9));
    CHECK(spectral_decay_rate(SpectralField(g, 3)) == 0.0);
}
