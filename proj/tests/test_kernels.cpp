/// @file test_kernels.cpp
/// @brief Closed-form kernels, their discrete operators and the residual fit.
///
/// PURPOSE: the three half-space kernels must reproduce a Crank-Nicolson
/// solution of the same boundary value problem, satisfy their wall
/// conditions, conserve mass where they should, and compose as a semigroup.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

#include <random>

using namespace hsv;

TEST_CASE("closed-form values") {
    CHECK(heat_neumann({0.1, 0.01, 0.0, 0.0, 0.0}) == doctest::Approx(2.0 / std::sqrt(4 * M_PI * 0.001)));
    CHECK(heat_neumann({0.1, 0.01, 0.0, 0.0, 0.0}) == doctest::Approx(17.8412).epsilon(1e-5));
    CHECK(heat_dirichlet({0.1, 0.01, 0.0, 1.0, 1.0}) == doctest::Approx(8.9206).epsilon(1e-5));
    CHECK(heat_dirichlet({0.3, 0.02, 2.0, 0.0, 0.7}) == 0.0);
    CHECK(robin_g1({0.2, 0.01, 0.0, 0.3, 0.1}) == heat_neumann({0.2, 0.01, 0.0, 0.3, 0.1}));
    CHECK_THROWS_AS(heat_neumann({0.0, 0.01, 0.0, 0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(robin_g1({-1.0, 0.01, 1.0, 0.0, 0.0}), std::invalid_argument);
    // no overflow where k (z + zbar) is huge
    const double r = robin_residual({0.5, 0.01, 400.0, 2.0, 2.0});
    CHECK(std::isfinite(r));
    CHECK(r >= 0.0);
}

TEST_CASE("positivity and symmetry on random queries") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int s = 0; s < 2000; ++s) {
        const KernelQuery q{std::pow(10.0, -3 + 3 * u(rng)), std::pow(10.0, -3 + 3 * u(rng)), 20 * u(rng),
                            3 * u(rng), 3 * u(rng)};
        const KernelQuery qs{q.t, q.nu, q.xi_mag, q.zbar, q.z};
        CHECK(heat_neumann(q) >= 0.0);
        CHECK(heat_dirichlet(q) >= 0.0);
        CHECK(robin_g1(q) >= 0.0);
        CHECK(heat_neumann(q) == doctest::Approx(heat_neumann(qs)));
        CHECK(robin_g1(q) == doctest::Approx(robin_g1(qs)));
    }
}

TEST_CASE("wall conditions converge at first order under refinement") {
    const double hs[] = {1e-3, 5e-4, 2.5e-4};
    for (double k : {1.0, 4.0}) {
        std::vector<double> eN, eR;
        for (double h : hs) {
            const KernelQuery q0{0.05, 0.01, k, 0.0, 0.07};
            KernelQuery q1 = q0;
            q1.z = h;
            eN.push_back(std::abs((heat_neumann(q1) - heat_neumann(q0)) / h));
            eR.push_back(std::abs((robin_g1(q1) - robin_g1(q0)) / h + k * robin_g1(q0)));
        }
        CHECK(eN[0] / eN[1] > 1.8);
        CHECK(eN[1] / eN[2] > 1.8);
        CHECK(eR[0] / eR[1] > 1.8);
        CHECK(eR[1] / eR[2] > 1.8);
        // second-order central check, relative to the kernel's peak
        const double h = 1e-6;
        const double gmax = robin_g1({0.05, 0.01, k, 0.07, 0.07});
        const double dR = (robin_g1({0.05, 0.01, k, h, 0.07}) - robin_g1({0.05, 0.01, k, 0.0, 0.07})) / h;
        CHECK(std::abs(dR + k * robin_g1({0.05, 0.01, k, 0.0, 0.07})) < 1e-3 * gmax);
    }
}

TEST_CASE("Neumann mass equals the damping factor") {
    const auto g = make_grid(1, 256, 4.0, 1e-2, 0.5);
    for (double k : {0.0, 1.0, 3.0}) {
        const KernelQuery base{0.1, 0.01, k, 0.4, 0.0};
        double mass = 0.0;
        const auto w = g->quad_weights();
        for (int j = 0; j < g->Nz(); ++j) {
            KernelQuery q = base;
            q.zbar = g->z(j);
            mass += w[static_cast<size_t>(j)] * heat_neumann(q);
        }
        CHECK(mass == doctest::Approx(std::exp(-0.01 * k * k * 0.1)).epsilon(1e-4));
    }
}

TEST_CASE("kernel evolution matches Crank-Nicolson") {
    const auto g = make_grid(1, 256, 4.0, 1e-2, 0.5);
    CHECK(oracle::kernel_vs_crank_nicolson(KernelKind::Neumann, 0.01, 0.0, 0.1, g) < 1e-3);
    CHECK(oracle::kernel_vs_crank_nicolson(KernelKind::Dirichlet, 0.01, 0.0, 0.1, g) < 1e-3);
    CHECK(oracle::kernel_vs_crank_nicolson(KernelKind::Robin, 0.01, 1.0, 0.1, g) < 1e-3);
    CHECK(oracle::kernel_vs_crank_nicolson(KernelKind::Robin, 0.01, 5.0, 0.1, g) < 1e-3);
}

TEST_CASE("semigroup property") {
    const auto g = make_grid(1, 256, 4.0, 1e-2, 0.5);
    std::vector<cplx> f(static_cast<size_t>(g->Nz()));
    for (int j = 0; j < g->Nz(); ++j) f[static_cast<size_t>(j)] = g->z(j) * std::exp(-4.0 * (g->z(j) - 0.5) * (g->z(j) - 0.5));
    for (auto kind : {KernelKind::Neumann, KernelKind::Dirichlet, KernelKind::Robin}) {
        const auto two = evolve_profile(*g, kind, 0.01, 2.0, 0.05, evolve_profile(*g, kind, 0.01, 2.0, 0.03, f));
        const auto one = evolve_profile(*g, kind, 0.01, 2.0, 0.08, f);
        std::vector<double> a, b;
        for (size_t j = 0; j < one.size(); ++j) {
            a.push_back(two[j].real());
            b.push_back(one[j].real());
        }
        CHECK(oracle::rel_l2(*g, a, b) < 1e-3);
    }
}

TEST_CASE("residual bound fit") {
    const auto f2 = fit_residual_bound(1e-2);
    const auto f3 = fit_residual_bound(1e-3);
    CHECK(f2.theta > 0.0);
    CHECK(f3.theta > 0.0);
    CHECK(f2.C > 0.0);
    CHECK(std::abs(f2.theta - f3.theta) <= 0.2 * std::max(f2.theta, f3.theta));
    CHECK(residual_bound_constant(1e-2, f2.theta) == doctest::Approx(f2.C));
    MESSAGE("theta(1e-2) = " << f2.theta << ", theta(1e-3) = " << f3.theta);
}

TEST_CASE("step propagator classes") {
    const auto g = make_grid(2, 64, 4.0, 1e-2, 0.5);
    StokesPropagator P(g, 1e-2, 1e-3, 4);
    // |xi|^2 in {0,1,2,4,5,8}
    CHECK(P.n_classes() == 6);
    CHECK(P.for_mode(g->index(1, 2)).k == doctest::Approx(std::sqrt(5.0)));
    CHECK(&P.for_mode(g->index(1, 2)) == &P.for_mode(g->index(-2, 1)));
    // A + Bm integrates G over the step: for a smooth profile it is close to dt * G(dt/2)
    const auto& sk = P.for_mode(g->index(1, 0));
    std::vector<cplx> f(static_cast<size_t>(g->Nz())), x(f.size()), y(f.size());
    for (int j = 0; j < g->Nz(); ++j) f[static_cast<size_t>(j)] = std::exp(-(g->z(j) - 1) * (g->z(j) - 1));
    sk.A_h.apply(f, x);
    sk.B_h.apply_add(f, x, 1.0);
    const int mid = g->Nz() / 2;
    CHECK(x[static_cast<size_t>(mid)].real() == doctest::Approx(1e-3 * f[static_cast<size_t>(mid)].real()).epsilon(1e-3));
    // bA + bB = int_0^dt G(tau, z, 0) dtau; at the wall this is ~ 2 sqrt(dt/(pi nu)) for small k
    CHECK(sk.bA[0] + sk.bB[0] == doctest::Approx(2.0 * std::sqrt(1e-3 / (M_PI * 1e-2))).epsilon(2e-2));
}
