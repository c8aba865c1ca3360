/// @file test_nonlinear.cpp
/// @brief Dealiased products and the vortex nonlinearity against naive oracles.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hsv/nonlinear.hpp"

#include <cmath>
#include <random>

using namespace hsv;

namespace {

SpectralField random_scalar(const GridPtr& g, unsigned seed, int band) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    SpectralField f(g, 1);
    for (int m = 0; m < g->n_modes(); ++m) {
        if (g->mode(m).linf() > band) continue;
        for (auto& v : f.profile(m, 0)) v = cplx(nd(rng), nd(rng));
    }
    f.symmetrize();
    return f;
}

double rel_l2(const SpectralField& a, const SpectralField& b) {
    const auto w = a.grid().quad_weights();
    double num = 0, den = 0;
    for (int m = 0; m < a.grid().n_modes(); ++m)
        for (int c = 0; c < a.ncomp(); ++c)
            for (int j = 0; j < a.grid().Nz(); ++j) {
                num += w[static_cast<size_t>(j)] * std::norm(a.at(m, c, j) - b.at(m, c, j));
                den += w[static_cast<size_t>(j)] * std::norm(b.at(m, c, j));
            }
    return std::sqrt(num / den);
}

// Naive collocation: evaluate each factor by explicit sums on the 3K grid,
// multiply pointwise, and project back by explicit sums.
struct Naive {
    GridPtr g;
    int M;
    std::vector<std::vector<double>> phys(const SpectralField& f, int c) const {
        std::vector<std::vector<double>> out(static_cast<size_t>(g->Nz()), std::vector<double>(static_cast<size_t>(M * M)));
        for (int j = 0; j < g->Nz(); ++j)
            for (int p = 0; p < M; ++p)
                for (int q = 0; q < M; ++q) {
                    cplx s = 0;
                    for (int m = 0; m < g->n_modes(); ++m) {
                        const Mode xi = g->mode(m);
                        s += f.at(m, c, j) * std::polar(1.0, 2 * M_PI * (xi.xi1 * p + xi.xi2 * q) / M);
                    }
                    out[static_cast<size_t>(j)][static_cast<size_t>(p * M + q)] = s.real();
                }
        return out;
    }
    void back(const std::vector<std::vector<double>>& ph, SpectralField& out, int c, int bound) const {
        for (int m = 0; m < g->n_modes(); ++m) {
            const Mode xi = g->mode(m);
            for (int j = 0; j < g->Nz(); ++j) {
                cplx s = 0;
                if (xi.linf() <= bound)
                    for (int p = 0; p < M; ++p)
                        for (int q = 0; q < M; ++q)
                            s += ph[static_cast<size_t>(j)][static_cast<size_t>(p * M + q)] *
                                 std::polar(1.0, -2 * M_PI * (xi.xi1 * p + xi.xi2 * q) / M);
                out.at(m, c, j) = s / double(M * M);
            }
        }
    }
};

}  // namespace

TEST_CASE("product of single modes") {
    const auto g = make_grid(3, 20, 4.0, 1e-2, 0.5);
    SpectralField f(g, 1);
    for (int j = 0; j < g->Nz(); ++j) {
        f.at(g->index(1, 0), 0, j) = g->z(j);
        f.at(g->index(-1, 0), 0, j) = g->z(j);
    }
    const auto p = spectral_product(f, f);
    for (int m = 0; m < g->n_modes(); ++m) {
        const Mode xi = g->mode(m);
        for (int j = 0; j < g->Nz(); ++j) {
            const double z2 = g->z(j) * g->z(j);
            const double expect = xi.is_zero() ? 2 * z2 : (std::abs(xi.xi1) == 2 && xi.xi2 == 0 ? z2 : 0.0);
            CHECK(std::abs(p.at(m, 0, j) - expect) < 1e-13 * (1 + z2));
        }
    }
    // constant mean mode scales the other factor
    SpectralField c(g, 1);
    for (int j = 0; j < g->Nz(); ++j) c.at(g->index(0, 0), 0, j) = 3.0;
    const auto r = random_scalar(g, 1, 2);
    CHECK((spectral_product(c, r) - 3.0 * r).max_abs() < 1e-13);
}

TEST_CASE("FFT product equals direct convolution and collocation") {
    const auto g = make_grid(4, 16, 4.0, 1e-2, 0.5);
    const auto a = random_scalar(g, 2, 4), b = random_scalar(g, 3, 4);
    const auto fast = spectral_product(a, b);
    const auto direct = spectral_product_direct(a, b);
    CHECK(rel_l2(fast, direct) < 1e-12);
    Naive nv{g, 12};
    auto pa = nv.phys(a, 0);
    const auto pb = nv.phys(b, 0);
    for (size_t j = 0; j < pa.size(); ++j)
        for (size_t q = 0; q < pa[j].size(); ++q) pa[j][q] *= pb[j][q];
    SpectralField col(g, 1);
    nv.back(pa, col, 0, 2);
    CHECK(rel_l2(fast, col) < 1e-12);
    CHECK(fast.reality_defect() < 1e-14);
    // inputs supported in |xi| <= K/3 see no mask
    const auto lo1 = random_scalar(g, 4, 1), lo2 = random_scalar(g, 5, 1);
    const auto full = spectral_product_direct(lo1, lo2);
    CHECK(rel_l2(spectral_product(lo1, lo2), full) < 1e-12);
    CHECK_THROWS_AS(spectral_product(a, SpectralField(make_grid(4, 20, 4.0, 1e-2, 0.5), 1)), std::invalid_argument);
}

TEST_CASE("nonlinearity against physical-space collocation") {
    const auto g = make_grid(4, 128, 4.0, 1e-2, 0.5);
    const auto w = make_initial_data("single-roll", 1.0, g);
    NonlinearOperator op(g);
    const auto N = op.N(w);
    // oracle: omega . grad u - u . grad omega with u3 d_z omega
    const auto vel = op.biot_savart().recover(w);
    Naive nv{g, 12};
    SpectralField ref(g, 3);
    std::vector<std::vector<std::vector<double>>> W, U;
    for (int c = 0; c < 3; ++c) {
        W.push_back(nv.phys(w, c));
        U.push_back(nv.phys(vel.u, c));
    }
    for (int i = 0; i < 3; ++i) {
        auto acc = W[0];
        for (auto& r : acc) std::fill(r.begin(), r.end(), 0.0);
        for (int j = 0; j < 3; ++j) {
            const auto G = nv.phys(vel.grad, 3 * i + j);
            SpectralField dwi(g, 1);
            for (int m = 0; m < g->n_modes(); ++m) {
                const Mode xi = g->mode(m);
                const auto dz = ddz(*g, w.profile(m, i));
                for (int k = 0; k < g->Nz(); ++k) {
                    const cplx v = w.at(m, i, k);
                    dwi.at(m, 0, k) = j == 0 ? cplx(0, xi.xi1) * v : j == 1 ? cplx(0, xi.xi2) * v : dz[static_cast<size_t>(k)];
                }
            }
            const auto D = nv.phys(dwi, 0);
            for (size_t z = 0; z < acc.size(); ++z)
                for (size_t q = 0; q < acc[z].size(); ++q) acc[z][q] += W[static_cast<size_t>(j)][z][q] * G[z][q] - U[static_cast<size_t>(j)][z][q] * D[z][q];
        }
        nv.back(acc, ref, i, 2);
    }
    CHECK(N.max_abs() > 1e-3);
    CHECK(rel_l2(N, ref) < 1e-6);
    CHECK(N.reality_defect() < 1e-14 * (1 + N.max_abs()));
    // quadratic scaling and decomposition consistency
    const auto N3 = op.N(3.0 * w);
    CHECK((N3 - 9.0 * N).max_abs() <= 1e-12 * N3.max_abs());
    CHECK((op.N_undecomposed(w) - N).max_abs() <= 1e-12 * N.max_abs());
}

TEST_CASE("trivial cases and shear") {
    const auto g = make_grid(2, 64, 4.0, 1e-3, 0.5);
    CHECK(nonlinearity_N(SpectralField(g, 3)).max_abs() == 0.0);
    const auto N = nonlinearity_N(make_initial_data("shear", 1.0, g));
    CHECK(N.is_finite());
    CHECK(N.max_abs() < 1e-14);
    // sharp boundary-layer shear at nu = 1e-3 stays finite
    SpectralField s(g, 3);
    for (int j = 0; j < g->Nz(); ++j) s.at(g->index(0, 0), 0, j) = std::exp(-g->z(j) / std::sqrt(1e-3)) / std::sqrt(1e-3);
    s.at(g->index(1, 0), 2, 3) = 0.1;
    s.at(g->index(-1, 0), 2, 3) = 0.1;
    CHECK(nonlinearity_N(s).is_finite());
}

TEST_CASE("boundary data") {
    const auto g = make_grid(2, 256, 4.0, 1e-2, 0.5);
    SpectralField N(g, 3);
    CHECK(boundary_data_B(N, N)[static_cast<size_t>(g->index(1, 0))][0] == cplx(0, 0));
    for (int j = 0; j < g->Nz(); ++j) {
        N.at(g->index(1, 0), 0, j) = std::exp(-g->z(j));
        N.at(g->index(-1, 0), 0, j) = std::exp(-g->z(j));
    }
    const auto B = boundary_data_B(N, N);
    const double exact = 0.5 * (1 - std::exp(-8.0));
    CHECK(std::abs(B[static_cast<size_t>(g->index(1, 0))][0] - exact) <= 1e-4 * exact);
    CHECK(std::abs(B[static_cast<size_t>(g->index(1, 0))][1]) == 0.0);
    const auto w = make_initial_data("single-roll", 1.0, g);
    const auto Bw = boundary_data_B(w, nonlinearity_N(w));
    for (int m = 0; m < g->n_modes(); ++m)
        for (int c = 0; c < 2; ++c)
            CHECK(std::abs(Bw[static_cast<size_t>(g->negated(m))][static_cast<size_t>(c)] - std::conj(Bw[static_cast<size_t>(m)][static_cast<size_t>(c)])) < 1e-14);
}
