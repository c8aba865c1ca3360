#include "hsv/field.hpp"

#include "hsv/biot_savart.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hsv {

double Mode::magnitude() const { return std::hypot(static_cast<double>(xi1), static_cast<double>(xi2)); }

int Mode::linf() const { return std::max(std::abs(xi1), std::abs(xi2)); }

namespace {

// Fornberg weights for the first derivative at x0 from nodes x.
std::vector<double> first_derivative_weights(const std::vector<double>& x, double x0) {
    const int n = static_cast<int>(x.size());
    std::vector<std::vector<double>> c(static_cast<size_t>(n), std::vector<double>(2, 0.0));
    double c1 = 1.0;
    double c4 = x[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, 1);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[static_cast<size_t>(i)] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[static_cast<size_t>(i)] - x[static_cast<size_t>(j)];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) {
                    c[static_cast<size_t>(i)][static_cast<size_t>(k)] =
                        c1 * (k * c[static_cast<size_t>(i - 1)][static_cast<size_t>(k - 1)] -
                              c5 * c[static_cast<size_t>(i - 1)][static_cast<size_t>(k)]) / c2;
                }
                c[static_cast<size_t>(i)][0] = -c1 * c5 * c[static_cast<size_t>(i - 1)][0] / c2;
            }
            for (int k = mn; k >= 1; --k) {
                c[static_cast<size_t>(j)][static_cast<size_t>(k)] =
                    (c4 * c[static_cast<size_t>(j)][static_cast<size_t>(k)] -
                     k * c[static_cast<size_t>(j)][static_cast<size_t>(k - 1)]) / c3;
            }
            c[static_cast<size_t>(j)][0] = c4 * c[static_cast<size_t>(j)][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) w[static_cast<size_t>(i)] = c[static_cast<size_t>(i)][1];
    return w;
}

double first_cell(double Z_max, int Nz, double beta) {
    if (beta < 1e-10) return Z_max / (Nz - 1);
    return Z_max * std::expm1(beta / (Nz - 1)) / std::expm1(beta);
}

double node_at(double Z_max, double beta, double s) {
    if (beta < 1e-10) return Z_max * s;
    return Z_max * std::expm1(beta * s) / std::expm1(beta);
}

// Smallest beta >= 0 with g(beta) true; g is monotone in beta.
template <class Pred>
double smallest_beta(Pred ok) {
    if (ok(0.0)) return 0.0;
    double lo = 0.0;
    double hi = 1.0;
    while (!ok(hi)) {
        hi *= 2.0;
        if (hi > 700.0) throw std::invalid_argument("make_grid: cannot grade mesh to resolve nu_min");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? hi : lo) = mid;
    }
    return hi;
}

}  // namespace

GridPtr make_grid(int K, int Nz, double Z_max, double nu_min, double mu0, double c_grade) {
    if (K < 1) throw std::invalid_argument("make_grid: K must be >= 1");
    if (Nz < 16) throw std::invalid_argument("make_grid: Nz must be >= 16");
    if (!(mu0 > 0.0)) throw std::invalid_argument("make_grid: mu0 must be positive");
    if (!(Z_max > 1.0 + mu0))
        throw std::invalid_argument("make_grid: Z_max must exceed 1 + mu0");
    if (!(nu_min > 0.0 && nu_min <= 1.0)) throw std::invalid_argument("make_grid: nu_min must lie in (0, 1]");
    if (!(c_grade > 0.0)) throw std::invalid_argument("make_grid: c_grade must be positive");

    const double sq = std::sqrt(nu_min);
    const double h_target = c_grade * std::min(sq, 1.0 / Nz);
    const double layer = 10.0 * sq;
    const int layer_nodes = (Nz + 3) / 4;

    const double beta_cell = smallest_beta([&](double b) { return first_cell(Z_max, Nz, b) <= h_target; });
    const double beta_layer = smallest_beta([&](double b) {
        if (layer >= Z_max) return true;
        // node index layer_nodes-1 must sit inside [0, layer]
        const double s = static_cast<double>(layer_nodes - 1) / (Nz - 1);
        return node_at(Z_max, b, s) <= layer;
    });

    auto g = std::shared_ptr<Grid>(new Grid());
    g->K_ = K;
    g->Z_max_ = Z_max;
    g->mu0_ = mu0;
    g->nu_min_ = nu_min;
    g->beta_ = std::max(beta_cell, beta_layer);
    g->c_grade_ = c_grade;

    g->z_.resize(static_cast<size_t>(Nz));
    for (int j = 0; j < Nz; ++j) {
        g->z_[static_cast<size_t>(j)] = node_at(Z_max, g->beta_, static_cast<double>(j) / (Nz - 1));
    }
    g->z_.front() = 0.0;
    g->z_.back() = Z_max;

    g->w_.assign(static_cast<size_t>(Nz), 0.0);
    for (int j = 0; j + 1 < Nz; ++j) {
        const double h = g->z_[static_cast<size_t>(j + 1)] - g->z_[static_cast<size_t>(j)];
        g->w_[static_cast<size_t>(j)] += 0.5 * h;
        g->w_[static_cast<size_t>(j + 1)] += 0.5 * h;
    }

    // d/dz = (1/z'(s)) d/ds with a 7-point stencil in the uniform coordinate s.
    const double ds = 1.0 / (Nz - 1);
    const int W = Grid::kStencilWidth;
    g->stencil_start_.resize(static_cast<size_t>(Nz));
    g->stencil_w_.resize(static_cast<size_t>(Nz * W));
    for (int j = 0; j < Nz; ++j) {
        const int start = std::clamp(j - W / 2, 0, Nz - W);
        std::vector<double> x(static_cast<size_t>(W));
        for (int q = 0; q < W; ++q) x[static_cast<size_t>(q)] = static_cast<double>(start + q - j);
        const auto wts = first_derivative_weights(x, 0.0);
        const double s = static_cast<double>(j) / (Nz - 1);
        const double dzds = g->beta_ < 1e-10 ? Z_max
                                             : Z_max * g->beta_ * std::exp(g->beta_ * s) / std::expm1(g->beta_);
        g->stencil_start_[static_cast<size_t>(j)] = start;
        for (int q = 0; q < W; ++q) {
            g->stencil_w_[static_cast<size_t>(j * W + q)] = wts[static_cast<size_t>(q)] / (ds * dzds);
        }
    }
    return g;
}

Mode Grid::mode(int m) const {
    const int n = modes_per_side();
    return Mode{m / n - K_, m % n - K_};
}

int Grid::index(int xi1, int xi2) const {
    if (std::abs(xi1) > K_ || std::abs(xi2) > K_) return -1;
    return (xi1 + K_) * modes_per_side() + (xi2 + K_);
}

std::span<const double> Grid::stencil(int j) const {
    return std::span<const double>(stencil_w_).subspan(static_cast<size_t>(j * kStencilWidth), kStencilWidth);
}

bool Grid::same_as(const Grid& o) const {
    return K_ == o.K_ && z_ == o.z_ && mu0_ == o.mu0_;
}

// ---------------------------------------------------------------------------

SpectralField::SpectralField(GridPtr grid, int ncomp) : grid_(std::move(grid)), ncomp_(ncomp) {
    if (!grid_) throw std::invalid_argument("SpectralField: null grid");
    if (ncomp < 1) throw std::invalid_argument("SpectralField: ncomp must be >= 1");
    data_.assign(static_cast<size_t>(grid_->n_modes()) * static_cast<size_t>(ncomp) *
                     static_cast<size_t>(grid_->Nz()),
                 cplx{});
}

std::span<cplx> SpectralField::profile(int m, int c) {
    return std::span<cplx>(data_).subspan(offset(m, c), static_cast<size_t>(grid_->Nz()));
}

std::span<const cplx> SpectralField::profile(int m, int c) const {
    return std::span<const cplx>(data_).subspan(offset(m, c), static_cast<size_t>(grid_->Nz()));
}

SpectralField SpectralField::component(int c) const {
    SpectralField out(grid_, 1);
    for (int m = 0; m < grid_->n_modes(); ++m) {
        std::ranges::copy(profile(m, c), out.profile(m, 0).begin());
    }
    return out;
}

void SpectralField::set_component(int c, const SpectralField& scalar) {
    for (int m = 0; m < grid_->n_modes(); ++m) {
        std::ranges::copy(scalar.profile(m, 0), profile(m, c).begin());
    }
}

namespace {
void check_compatible(const SpectralField& a, const SpectralField& b) {
    if (a.ncomp() != b.ncomp() || !a.grid().same_as(b.grid()))
        throw std::invalid_argument("SpectralField: incompatible operands");
}
}  // namespace

SpectralField& SpectralField::operator+=(const SpectralField& o) {
    check_compatible(*this, o);
    for (size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
    check_compatible(*this, o);
    for (size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
}

SpectralField& SpectralField::operator*=(double s) {
    for (auto& v : data_) v *= s;
    return *this;
}

SpectralField& SpectralField::operator*=(cplx s) {
    for (auto& v : data_) v *= s;
    return *this;
}

double SpectralField::max_abs() const {
    double m = 0.0;
    for (const auto& v : data_) m = std::max(m, std::abs(v));
    return m;
}

bool SpectralField::is_finite() const {
    return std::ranges::all_of(data_, [](const cplx& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

double SpectralField::reality_defect() const {
    double d = 0.0;
    for (int m = 0; m < grid_->n_modes(); ++m) {
        const int mn = grid_->negated(m);
        for (int c = 0; c < ncomp_; ++c) {
            auto p = profile(m, c);
            auto q = profile(mn, c);
            for (size_t j = 0; j < p.size(); ++j) d = std::max(d, std::abs(q[j] - std::conj(p[j])));
        }
    }
    return d;
}

void SpectralField::symmetrize() {
    for (int m = 0; m < grid_->n_modes(); ++m) {
        const int mn = grid_->negated(m);
        if (mn < m) continue;
        for (int c = 0; c < ncomp_; ++c) {
            auto p = profile(m, c);
            auto q = profile(mn, c);
            for (size_t j = 0; j < p.size(); ++j) {
                const cplx avg = 0.5 * (p[j] + std::conj(q[j]));
                p[j] = avg;
                q[j] = std::conj(avg);
            }
        }
    }
}

void PhysParams::validate() const {
    if (!(nu > 0.0 && nu <= 1.0)) throw std::invalid_argument("PhysParams: nu must lie in (0, 1]");
    if (!(mu0 > 0.0)) throw std::invalid_argument("PhysParams: mu0 must be positive");
    if (!(gamma >= 0.0)) throw std::invalid_argument("PhysParams: gamma must be non-negative");
    if (!(eps0 > 0.0 && eps0 < 1.0)) throw std::invalid_argument("PhysParams: eps0 must lie in (0, 1)");
    if (!(a > 0.0 && a < 0.5)) throw std::invalid_argument("PhysParams: a must lie in (0, 1/2)");
    if (!(theta0 > 0.0)) throw std::invalid_argument("PhysParams: theta0 must be positive");
}

// ---------------------------------------------------------------------------

void ddz(const Grid& grid, std::span<const cplx> f, std::span<cplx> out) {
    const int Nz = grid.Nz();
    for (int j = 0; j < Nz; ++j) {
        const int s0 = grid.stencil_start(j);
        const auto w = grid.stencil(j);
        cplx acc{};
        for (int q = 0; q < Grid::kStencilWidth; ++q) acc += w[static_cast<size_t>(q)] * f[static_cast<size_t>(s0 + q)];
        out[static_cast<size_t>(j)] = acc;
    }
}

std::vector<cplx> ddz(const Grid& grid, std::span<const cplx> f) {
    std::vector<cplx> out(f.size());
    ddz(grid, f, out);
    return out;
}

namespace {

cplx ipow(cplx base, int n) {
    cplx r{1.0, 0.0};
    for (int i = 0; i < n; ++i) r *= base;
    return r;
}

SpectralField apply_derivative(const SpectralField& f, const MultiIndex& alpha, bool conormal) {
    for (int a : alpha) {
        if (a < 0) throw std::invalid_argument("derivative: negative multi-index");
    }
    const Grid& g = f.grid();
    const int Nz = g.Nz();
    SpectralField out(f.grid_ptr(), f.ncomp());
    std::vector<cplx> tmp(static_cast<size_t>(Nz));
    for (int m = 0; m < g.n_modes(); ++m) {
        const Mode xi = g.mode(m);
        const cplx mult = ipow(cplx(0.0, xi.xi1), alpha[0]) * ipow(cplx(0.0, xi.xi2), alpha[1]);
        for (int c = 0; c < f.ncomp(); ++c) {
            auto src = f.profile(m, c);
            auto dst = out.profile(m, c);
            for (int j = 0; j < Nz; ++j) dst[static_cast<size_t>(j)] = mult * src[static_cast<size_t>(j)];
            for (int r = 0; r < alpha[2]; ++r) {
                ddz(g, dst, tmp);
                for (int j = 0; j < Nz; ++j) {
                    dst[static_cast<size_t>(j)] = conormal ? g.z(j) * tmp[static_cast<size_t>(j)] : tmp[static_cast<size_t>(j)];
                }
            }
        }
    }
    return out;
}

}  // namespace

SpectralField conormal_derivative(const SpectralField& f, const MultiIndex& alpha) {
    if (alpha[0] + alpha[1] + alpha[2] > 2)
        throw std::invalid_argument("conormal_derivative: |alpha| must be <= 2");
    return apply_derivative(f, alpha, true);
}

SpectralField plain_derivative(const SpectralField& f, const MultiIndex& alpha) {
    return apply_derivative(f, alpha, false);
}

SpectralField horizontal_weight(const SpectralField& f, int power) {
    SpectralField out = f;
    const Grid& g = f.grid();
    for (int m = 0; m < g.n_modes(); ++m) {
        const double s = std::pow(1.0 + g.mode(m).magnitude(), power);
        for (int c = 0; c < f.ncomp(); ++c) {
            for (auto& v : out.profile(m, c)) v *= s;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Presets. Each non-shear preset is u_0 = curl A with A_xi(z) = a_xi * phi(z),
// phi(z) = z^2 exp(-z^2), so phi(0) = phi'(0) = 0 gives u_0 = 0 on the wall.

namespace {

struct PotentialMode {
    Mode xi;
    std::array<cplx, 3> a;
};

std::vector<PotentialMode> potential_modes(const std::string& preset) {
    if (preset == "single-roll") {
        // A = phi(z) cos(y) (1 + cos(x)/2) e_x : a streamwise roll with
        // spanwise modulation, so that stretching is active.
        return {
            {{0, 1}, {0.5, 0.0, 0.0}},   {{0, -1}, {0.5, 0.0, 0.0}},  {{1, 1}, {0.125, 0.0, 0.0}},
            {{1, -1}, {0.125, 0.0, 0.0}}, {{-1, 1}, {0.125, 0.0, 0.0}}, {{-1, -1}, {0.125, 0.0, 0.0}},
        };
    }
    if (preset == "shear-wave") {
        // A = phi(z) cos(x) e_x, i.e. u = (0, phi'(z) cos x, 0).
        return {{{1, 0}, {0.5, 0.0, 0.0}}, {{-1, 0}, {0.5, 0.0, 0.0}}};
    }
    return {};
}

struct Phi {
    double v, d1, d2, d3;
};

Phi phi_at(double z) {
    const double e = std::exp(-z * z);
    const double z2 = z * z;
    return {z2 * e, (2.0 * z - 2.0 * z * z2) * e, (2.0 - 10.0 * z2 + 4.0 * z2 * z2) * e,
            (-24.0 * z + 36.0 * z * z2 - 8.0 * z * z2 * z2) * e};
}

void check_preset(const std::string& preset) {
    const auto& names = preset_names();
    if (std::ranges::find(names, preset) == names.end())
        throw std::invalid_argument("unknown preset: " + preset);
}

}  // namespace

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"single-roll", "shear", "shear-wave"};
    return names;
}

SpectralField initial_velocity(const std::string& preset, double amplitude, const GridPtr& grid) {
    check_preset(preset);
    SpectralField u(grid, 3);
    if (amplitude == 0.0) return u;
    if (preset == "shear") {
        // omega_1 = amp exp(-z^2) on the mean mode, u_2 = -int_0^z omega_1
        const int m0 = grid->index(0, 0);
        for (int j = 0; j < grid->Nz(); ++j) {
            u.at(m0, 1, j) = -amplitude * 0.5 * std::sqrt(M_PI) * std::erf(grid->z(j));
        }
        return u;
    }
    for (const auto& pm : potential_modes(preset)) {
        const int m = grid->index(pm.xi);
        if (m < 0) continue;
        const cplx i1(0.0, pm.xi.xi1);
        const cplx i2(0.0, pm.xi.xi2);
        const auto& a = pm.a;
        for (int j = 0; j < grid->Nz(); ++j) {
            const Phi p = phi_at(grid->z(j));
            // u = curl(a phi) = (i xi2 a3 phi - a2 phi', a1 phi' - i xi1 a3 phi, (i xi1 a2 - i xi2 a1) phi)
            u.at(m, 0, j) += amplitude * (i2 * a[2] * p.v - a[1] * p.d1);
            u.at(m, 1, j) += amplitude * (a[0] * p.d1 - i1 * a[2] * p.v);
            u.at(m, 2, j) += amplitude * ((i1 * a[1] - i2 * a[0]) * p.v);
        }
    }
    return u;
}

SpectralField make_initial_data(const std::string& preset, double amplitude, const GridPtr& grid) {
    check_preset(preset);
    SpectralField w(grid, 3);
    if (amplitude == 0.0) return w;
    if (preset == "shear") {
        const int m0 = grid->index(0, 0);
        for (int j = 0; j < grid->Nz(); ++j) {
            const double z = grid->z(j);
            w.at(m0, 0, j) = amplitude * std::exp(-z * z);
        }
        return w;
    }
    for (const auto& pm : potential_modes(preset)) {
        const int m = grid->index(pm.xi);
        if (m < 0) continue;
        const cplx i1(0.0, pm.xi.xi1);
        const cplx i2(0.0, pm.xi.xi2);
        const auto& a = pm.a;
        for (int j = 0; j < grid->Nz(); ++j) {
            const Phi p = phi_at(grid->z(j));
            // u and its z-derivative, component-wise in terms of phi, phi', phi''
            const cplx u1 = i2 * a[2] * p.v - a[1] * p.d1;
            const cplx u2 = a[0] * p.d1 - i1 * a[2] * p.v;
            const cplx u3 = (i1 * a[1] - i2 * a[0]) * p.v;
            const cplx du1 = i2 * a[2] * p.d1 - a[1] * p.d2;
            const cplx du2 = a[0] * p.d2 - i1 * a[2] * p.d1;
            // omega = curl u
            w.at(m, 0, j) += amplitude * (i2 * u3 - du2);
            w.at(m, 1, j) += amplitude * (du1 - i1 * u3);
            w.at(m, 2, j) += amplitude * (i1 * u2 - i2 * u1);
        }
    }
    impose_discrete_noslip(w);
    return w;
}

}  // namespace hsv
