#include "hsv/nonlinear.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>
#include <stdexcept>

namespace hsv {

namespace {

std::mutex& fftw_planner_mutex() {
    static std::mutex mu;
    return mu;
}

int wrap(int i, int M) { return ((i % M) + M) % M; }

}  // namespace

struct ProductPlan::Impl {
    int Nz = 0, M = 0, Mh = 0;
    double* real = nullptr;
    fftw_complex* spec = nullptr;
    fftw_plan c2r = nullptr, r2c = nullptr;

    ~Impl() {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        if (c2r) fftw_destroy_plan(c2r);
        if (r2c) fftw_destroy_plan(r2c);
        fftw_free(real);
        fftw_free(spec);
    }
};

ProductPlan::ProductPlan(GridPtr grid) : grid_(std::move(grid)), impl_(std::make_unique<Impl>()) {
    if (!grid_) throw std::invalid_argument("ProductPlan: null grid");
    const int K = grid_->K();
    M_ = 3 * K;
    if (M_ < 2) M_ = 2;
    D_ = (2 * K) / 3;
    Impl& I = *impl_;
    I.Nz = grid_->Nz();
    I.M = M_;
    I.Mh = M_ / 2 + 1;
    const size_t nreal = static_cast<size_t>(I.Nz) * static_cast<size_t>(M_) * static_cast<size_t>(M_);
    const size_t nspec = static_cast<size_t>(I.Nz) * static_cast<size_t>(M_) * static_cast<size_t>(I.Mh);
    I.real = fftw_alloc_real(nreal);
    I.spec = fftw_alloc_complex(nspec);
    if (!I.real || !I.spec) throw std::bad_alloc();
    const int n[2] = {M_, M_};
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    // FFTW_ESTIMATE keeps the chosen algorithm, and so the bits, reproducible.
    I.c2r = fftw_plan_many_dft_c2r(2, n, I.Nz, I.spec, nullptr, 1, M_ * I.Mh, I.real, nullptr, 1, M_ * M_,
                                   FFTW_ESTIMATE);
    I.r2c = fftw_plan_many_dft_r2c(2, n, I.Nz, I.real, nullptr, 1, M_ * M_, I.spec, nullptr, 1, M_ * I.Mh,
                                   FFTW_ESTIMATE);
    if (!I.c2r || !I.r2c) throw std::runtime_error("ProductPlan: FFTW planning failed");
}

ProductPlan::~ProductPlan() = default;

std::vector<double> ProductPlan::to_physical(const SpectralField& f, int c) const {
    const Grid& g = *grid_;
    if (!f.grid().same_as(g)) throw std::invalid_argument("ProductPlan: grid mismatch");
    Impl& I = *impl_;
    const size_t slab = static_cast<size_t>(M_) * static_cast<size_t>(I.Mh);
    std::memset(I.spec, 0, sizeof(fftw_complex) * slab * static_cast<size_t>(I.Nz));
    const int K = g.K();
    for (int a = -K; a <= K; ++a) {
        for (int b = 0; b <= K; ++b) {
            const int m = g.index(a, b);
            const auto p = f.profile(m, c);
            const size_t off = static_cast<size_t>(wrap(a, M_)) * static_cast<size_t>(I.Mh) + static_cast<size_t>(b);
            for (int j = 0; j < I.Nz; ++j) {
                fftw_complex& s = I.spec[static_cast<size_t>(j) * slab + off];
                s[0] = p[static_cast<size_t>(j)].real();
                s[1] = p[static_cast<size_t>(j)].imag();
            }
        }
    }
    fftw_execute(I.c2r);
    const size_t n = static_cast<size_t>(I.Nz) * static_cast<size_t>(M_) * static_cast<size_t>(M_);
    return std::vector<double>(I.real, I.real + n);
}

void ProductPlan::to_spectral(const std::vector<double>& phys, SpectralField& out, int c) const {
    const Grid& g = *grid_;
    Impl& I = *impl_;
    const size_t n = static_cast<size_t>(I.Nz) * static_cast<size_t>(M_) * static_cast<size_t>(M_);
    if (phys.size() != n) throw std::invalid_argument("ProductPlan: physical buffer size mismatch");
    std::memcpy(I.real, phys.data(), sizeof(double) * n);
    fftw_execute(I.r2c);
    const double scale = 1.0 / (static_cast<double>(M_) * M_);
    const size_t slab = static_cast<size_t>(M_) * static_cast<size_t>(I.Mh);
    for (int m = 0; m < g.n_modes(); ++m) {
        const Mode xi = g.mode(m);
        auto p = out.profile(m, c);
        if (!kept(xi)) {
            std::fill(p.begin(), p.end(), cplx{});
            continue;
        }
        const bool flip = xi.xi2 < 0 || (xi.xi2 == 0 && xi.xi1 < 0);
        const int a = flip ? -xi.xi1 : xi.xi1;
        const int b = flip ? -xi.xi2 : xi.xi2;
        const size_t off = static_cast<size_t>(wrap(a, M_)) * static_cast<size_t>(I.Mh) + static_cast<size_t>(b);
        for (int j = 0; j < I.Nz; ++j) {
            const fftw_complex& s = I.spec[static_cast<size_t>(j) * slab + off];
            const cplx v(s[0] * scale, s[1] * scale);
            p[static_cast<size_t>(j)] = flip ? std::conj(v) : v;
        }
    }
}

std::vector<std::pair<int, int>> ProductPlan::pairing(int m) const {
    const Grid& g = *grid_;
    const Mode xi = g.mode(m);
    std::vector<std::pair<int, int>> out;
    for (int e = 0; e < g.n_modes(); ++e) {
        const Mode eta = g.mode(e);
        const int r = g.index(xi.xi1 - eta.xi1, xi.xi2 - eta.xi2);
        if (r >= 0) out.emplace_back(e, r);
    }
    return out;
}

namespace {

void check_scalar_pair(const SpectralField& f, const SpectralField& g) {
    if (f.empty() || g.empty()) throw std::invalid_argument("spectral_product: empty field");
    if (!f.grid().same_as(g.grid())) throw std::invalid_argument("spectral_product: grid mismatch");
}

}  // namespace

SpectralField spectral_product(const SpectralField& f, const SpectralField& g) {
    check_scalar_pair(f, g);
    ProductPlan plan(f.grid_ptr());
    auto a = plan.to_physical(f, 0);
    const auto b = plan.to_physical(g, 0);
    for (size_t i = 0; i < a.size(); ++i) a[i] *= b[i];
    SpectralField out(f.grid_ptr(), 1);
    plan.to_spectral(a, out, 0);
    return out;
}

SpectralField spectral_product_direct(const SpectralField& f, const SpectralField& g) {
    check_scalar_pair(f, g);
    ProductPlan plan(f.grid_ptr());
    const Grid& gr = f.grid();
    SpectralField out(f.grid_ptr(), 1);
    for (int m = 0; m < gr.n_modes(); ++m) {
        if (!plan.kept(gr.mode(m))) continue;
        auto o = out.profile(m, 0);
        for (const auto& [e, r] : plan.pairing(m)) {
            const auto pf = f.profile(e, 0);
            const auto pg = g.profile(r, 0);
            for (size_t j = 0; j < o.size(); ++j) o[j] += pf[j] * pg[j];
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

NonlinearOperator::NonlinearOperator(GridPtr grid) : grid_(grid), bs_(grid), plan_(grid) {}

SpectralField NonlinearOperator::N(const SpectralField& omega) const { return assemble(omega, true); }

SpectralField NonlinearOperator::N_undecomposed(const SpectralField& omega) const { return assemble(omega, false); }

SpectralField NonlinearOperator::assemble(const SpectralField& omega, bool decomposed) const {
    const Grid& g = *grid_;
    const auto vel = bs_.recover(omega, true);
    const int n = g.Nz();

    // Horizontal derivatives of omega and its vertical factor.
    SpectralField dw(grid_, 9);  // index 3*i + j: d_j omega_i, with j = 2 the vertical factor
    for (int m = 0; m < g.n_modes(); ++m) {
        const Mode xi = g.mode(m);
        const cplx i1(0, xi.xi1), i2(0, xi.xi2);
        for (int c = 0; c < 3; ++c) {
            const auto w = omega.profile(m, c);
            const auto d = ddz(g, w);
            for (int j = 0; j < n; ++j) {
                const auto u = static_cast<size_t>(j);
                dw.at(m, 3 * c, j) = i1 * w[u];
                dw.at(m, 3 * c + 1, j) = i2 * w[u];
                dw.at(m, 3 * c + 2, j) = decomposed ? g.z(j) * d[u] : d[u];
            }
        }
    }

    std::array<std::vector<double>, 3> W, U;
    for (int c = 0; c < 3; ++c) W[static_cast<size_t>(c)] = plan_.to_physical(omega, c);
    U[0] = plan_.to_physical(vel.u, 0);
    U[1] = plan_.to_physical(vel.u, 1);
    U[2] = decomposed ? plan_.to_physical(vel.u3z, 0) : plan_.to_physical(vel.u, 2);

    SpectralField out(grid_, 3);
    for (int i = 0; i < 3; ++i) {
        std::vector<double> acc(W[0].size(), 0.0);
        for (int j = 0; j < 3; ++j) {
            // stretching: omega_j d_j u_i
            const auto G = plan_.to_physical(vel.grad, 3 * i + j);
            const auto& w = W[static_cast<size_t>(j)];
            for (size_t q = 0; q < acc.size(); ++q) acc[q] += w[q] * G[q];
        }
        for (int j = 0; j < 3; ++j) {
            // advection: u_j d_j omega_i (vertical part as (u3/z)(z d_z omega_i))
            const auto D = plan_.to_physical(dw, 3 * i + j);
            const auto& u = U[static_cast<size_t>(j)];
            for (size_t q = 0; q < acc.size(); ++q) acc[q] -= u[q] * D[q];
        }
        plan_.to_spectral(acc, out, i);
    }
    return out;
}

std::vector<std::array<cplx, 2>> NonlinearOperator::boundary_data(const SpectralField& N) const {
    const Grid& g = *grid_;
    if (N.empty() || N.ncomp() < 2 || !N.grid().same_as(g)) throw std::invalid_argument("boundary_data: grid mismatch");
    std::vector<std::array<cplx, 2>> B(static_cast<size_t>(g.n_modes()));
    for (int m = 0; m < g.n_modes(); ++m) {
        const Mode xi = g.mode(m);
        const int k2 = xi.xi1 * xi.xi1 + xi.xi2 * xi.xi2;
        for (int c = 0; c < 2; ++c) B[static_cast<size_t>(m)][static_cast<size_t>(c)] = bs_.transforms(N.profile(m, c), k2).U[0];
    }
    return B;
}

SpectralField nonlinearity_N(const SpectralField& omega) {
    if (omega.empty()) throw std::invalid_argument("nonlinearity_N: empty field");
    return NonlinearOperator(omega.grid_ptr()).N(omega);
}

std::vector<std::array<cplx, 2>> boundary_data_B(const SpectralField& omega, const SpectralField& N) {
    if (omega.empty() || N.empty() || !omega.grid().same_as(N.grid()))
        throw std::invalid_argument("boundary_data_B: grid mismatch");
    return NonlinearOperator(omega.grid_ptr()).boundary_data(N);
}

}  // namespace hsv
