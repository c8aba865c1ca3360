#include "hsv/kernels.hpp"

#include "quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hsv {

namespace {

void check_query(const KernelQuery& q) {
    if (!(q.t > 0.0)) throw std::invalid_argument("kernel: t must be positive");
    if (!(q.nu > 0.0)) throw std::invalid_argument("kernel: nu must be positive");
    if (q.xi_mag < 0.0 || q.z < 0.0 || q.zbar < 0.0) throw std::invalid_argument("kernel: negative argument");
}

double gauss_norm(double nu, double t) { return 1.0 / std::sqrt(4.0 * M_PI * nu * t); }

double residual_value(double t, double nu, double k, double a) {
    if (k == 0.0) return 0.0;
    const double sq = std::sqrt(nu * t);
    return k * std::exp(-k * a + detail::log_erfc(a / (2.0 * sq) - k * sq));
}

}  // namespace

double heat_neumann(const KernelQuery& q) {
    check_query(q);
    const double d = 4.0 * q.nu * q.t;
    return gauss_norm(q.nu, q.t) *
           (std::exp(-(q.z - q.zbar) * (q.z - q.zbar) / d) + std::exp(-(q.z + q.zbar) * (q.z + q.zbar) / d)) *
           std::exp(-q.nu * q.xi_mag * q.xi_mag * q.t);
}

double heat_dirichlet(const KernelQuery& q) {
    check_query(q);
    const double d = 4.0 * q.nu * q.t;
    return gauss_norm(q.nu, q.t) *
           (std::exp(-(q.z - q.zbar) * (q.z - q.zbar) / d) - std::exp(-(q.z + q.zbar) * (q.z + q.zbar) / d)) *
           std::exp(-q.nu * q.xi_mag * q.xi_mag * q.t);
}

double robin_residual(const KernelQuery& q) {
    check_query(q);
    return residual_value(q.t, q.nu, q.xi_mag, q.z + q.zbar);
}

double robin_g1(const KernelQuery& q) { return heat_neumann(q) + robin_residual(q); }

double kernel_value(KernelKind kind, const KernelQuery& q) {
    switch (kind) {
        case KernelKind::Neumann: return heat_neumann(q);
        case KernelKind::Dirichlet: return heat_dirichlet(q);
        case KernelKind::Robin: return robin_g1(q);
    }
    return 0.0;
}

double kernel_trace(KernelKind kind, double t, double nu, double k, double z) {
    if (kind == KernelKind::Dirichlet) return 0.0;
    const double g = 2.0 * gauss_norm(nu, t) * std::exp(-z * z / (4.0 * nu * t)) * std::exp(-nu * k * k * t);
    return kind == KernelKind::Robin ? g + residual_value(t, nu, k, z) : g;
}

// ---------------------------------------------------------------------------

void DenseMatrix::apply(std::span<const cplx> f, std::span<cplx> out) const {
    std::fill(out.begin(), out.begin() + n_, cplx{});
    apply_add(f, out, 1.0);
}

void DenseMatrix::apply_add(std::span<const cplx> f, std::span<cplx> out, double s) const {
    const double* fp = reinterpret_cast<const double*>(f.data());
    const bool ranged = !lo_.empty();
    for (int i = 0; i < n_; ++i) {
        const double* r = a_.data() + static_cast<size_t>(i) * static_cast<size_t>(n_);
        const int j0 = ranged ? lo_[static_cast<size_t>(i)] : 0;
        const int j1 = ranged ? hi_[static_cast<size_t>(i)] : n_;
        double re = 0.0, im = 0.0;
        for (int j = j0; j < j1; ++j) {
            re += r[j] * fp[2 * j];
            im += r[j] * fp[2 * j + 1];
        }
        out[static_cast<size_t>(i)] += s * cplx(re, im);
    }
}

void DenseMatrix::compress() {
    lo_.assign(static_cast<size_t>(n_), 0);
    hi_.assign(static_cast<size_t>(n_), 0);
    for (int i = 0; i < n_; ++i) {
        const double* r = a_.data() + static_cast<size_t>(i) * static_cast<size_t>(n_);
        int a = 0, b = n_;
        while (a < n_ && r[a] == 0.0) ++a;
        while (b > a && r[b - 1] == 0.0) --b;
        lo_[static_cast<size_t>(i)] = a;
        hi_[static_cast<size_t>(i)] = b;
    }
}

DenseMatrix& DenseMatrix::axpy(double s, const DenseMatrix& o) {
    if (o.n_ != n_) throw std::invalid_argument("DenseMatrix::axpy: size mismatch");
    for (size_t i = 0; i < a_.size(); ++i) a_[i] += s * o.a_[i];
    lo_.clear();
    hi_.clear();
    return *this;
}

namespace {

// Which parts of a kernel to integrate.
struct Parts {
    bool direct = false;
    int image = 0;  // +1 even, -1 odd, 0 none
    bool residual = false;
    bool damp = true;  // multiply Gaussian parts by e^{-nu k^2 tau}
};

Parts parts_for(KernelKind kind) {
    switch (kind) {
        case KernelKind::Neumann: return {true, 1, false, true};
        case KernelKind::Dirichlet: return {true, -1, false, true};
        case KernelKind::Robin: return {true, 1, true, true};
    }
    return {};
}

// Hermite-basis integrals of kernel pieces, accumulated into value and slope matrices.
class HermiteAccumulator {
public:
    explicit HermiteAccumulator(const Grid& g) : g_(g), n_(g.Nz()), Mv_(n_), Md_(n_) {}

    // Adds int_lo^hi fn(zbar) H(zbar) dzbar into row i, subcells <= scale/2.
    template <class Fn>
    void add(int i, double lo, double hi, double scale, Fn&& fn) {
        const auto z = g_.z();
        lo = std::max(lo, 0.0);
        hi = std::min(hi, g_.Z_max());
        if (!(hi > lo)) return;
        const auto& gl = detail::gauss_legendre(8);
        int j = static_cast<int>(std::upper_bound(z.begin(), z.end(), lo) - z.begin()) - 1;
        j = std::clamp(j, 0, n_ - 2);
        for (; j < n_ - 1 && z[static_cast<size_t>(j)] < hi; ++j) {
            const double z0 = z[static_cast<size_t>(j)];
            const double h = z[static_cast<size_t>(j + 1)] - z0;
            const double a = std::max(lo, z0);
            const double b = std::min(hi, z0 + h);
            if (!(b > a)) continue;
            const int nsub = std::max(1, static_cast<int>(std::ceil((b - a) / (0.5 * scale))));
            const double sub = (b - a) / nsub;
            double v0 = 0.0, v1 = 0.0, d0 = 0.0, d1 = 0.0;
            for (int s = 0; s < nsub; ++s) {
                const double sa = a + s * sub;
                for (size_t q = 0; q < gl.x.size(); ++q) {
                    const double zb = sa + sub * gl.x[q];
                    const double wq = sub * gl.w[q] * fn(zb);
                    const double th = (zb - z0) / h;
                    const double th2 = th * th, th3 = th2 * th;
                    v0 += wq * (2.0 * th3 - 3.0 * th2 + 1.0);
                    v1 += wq * (-2.0 * th3 + 3.0 * th2);
                    d0 += wq * h * (th3 - 2.0 * th2 + th);
                    d1 += wq * h * (th3 - th2);
                }
            }
            Mv_(i, j) += v0;
            Mv_(i, j + 1) += v1;
            Md_(i, j) += d0;
            Md_(i, j + 1) += d1;
        }
    }

    // Mv + Md * Dz
    DenseMatrix finish() const {
        DenseMatrix out = Mv_;
        for (int i = 0; i < n_; ++i) {
            for (int j = 0; j < n_; ++j) {
                const double d = Md_(i, j);
                if (d == 0.0) continue;
                const int s0 = g_.stencil_start(j);
                const auto w = g_.stencil(j);
                for (int q = 0; q < Grid::kStencilWidth; ++q) out(i, s0 + q) += d * w[static_cast<size_t>(q)];
            }
        }
        return out;
    }

private:
    const Grid& g_;
    int n_;
    DenseMatrix Mv_, Md_;
};

// Exponent cutoff: pieces are dropped where they fall below e^{-40} of their peak.
constexpr double kCut = 40.0;

DenseMatrix build_matrix(const Grid& grid, const Parts& parts, double nu, double k, std::span<const double> taus,
                         std::span<const double> weights) {
    if (taus.size() != weights.size()) throw std::invalid_argument("kernel_matrix: taus/weights size mismatch");
    if (!(nu > 0.0)) throw std::invalid_argument("kernel_matrix: nu must be positive");
    HermiteAccumulator acc(grid);
    for (size_t m = 0; m < taus.size(); ++m) {
        const double tau = taus[m];
        const double wgt = weights[m];
        if (!(tau > 0.0)) throw std::invalid_argument("kernel_matrix: tau must be positive");
        if (wgt == 0.0) continue;
        const double sq = std::sqrt(nu * tau);
        const double d = 4.0 * nu * tau;
        const double W = 2.0 * sq * std::sqrt(kCut);
        const double c = wgt * gauss_norm(nu, tau) * (parts.damp ? std::exp(-nu * k * k * tau) : 1.0);
        const double amax = k > 0.0 ? std::min(kCut / k, 2.0 * sq * (std::sqrt(kCut) + k * sq)) : 0.0;
        for (int i = 0; i < grid.Nz(); ++i) {
            const double zi = grid.z(i);
            if (parts.direct) {
                acc.add(i, zi - W, zi + W, sq, [&](double zb) { return c * std::exp(-(zi - zb) * (zi - zb) / d); });
            }
            if (parts.image != 0 && zi < W) {
                const double s = c * parts.image;
                acc.add(i, 0.0, W - zi, sq, [&](double zb) { return s * std::exp(-(zi + zb) * (zi + zb) / d); });
            }
            if (parts.residual && k > 0.0 && zi < amax) {
                acc.add(i, 0.0, amax - zi, std::min(sq, 1.0 / k),
                        [&](double zb) { return wgt * residual_value(tau, nu, k, zi + zb); });
            }
        }
    }
    DenseMatrix out = acc.finish();
    out.compress();
    return out;
}

}  // namespace

DenseMatrix kernel_matrix(const Grid& grid, KernelKind kind, double nu, double k, std::span<const double> taus,
                          std::span<const double> weights) {
    if (k < 0.0) throw std::invalid_argument("kernel_matrix: negative |xi|");
    return build_matrix(grid, parts_for(kind), nu, k, taus, weights);
}

DenseMatrix kernel_matrix(const Grid& grid, KernelKind kind, double nu, double k, double tau) {
    const double t[1] = {tau};
    const double w[1] = {1.0};
    return kernel_matrix(grid, kind, nu, k, t, w);
}

std::vector<cplx> evolve_profile(const Grid& grid, KernelKind kind, double nu, double k, double t,
                                 std::span<const cplx> f) {
    std::vector<cplx> out(f.size());
    kernel_matrix(grid, kind, nu, k, t).apply(f, out);
    return out;
}

std::pair<std::vector<double>, std::vector<double>> wall_source_vectors(const Grid& grid, KernelKind kind,
                                                                        double nu, double k, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("wall_source_vectors: dt must be positive");
    std::vector<double> a(static_cast<size_t>(grid.Nz()), 0.0), b(a);
    if (kind == KernelKind::Dirichlet) return {a, b};
    const auto& gl = detail::gauss_legendre(16);
    // geometric panels in sigma toward 0 resolve the sharp e^{-z^2/(4 nu sigma^2)} onset
    const double smax = std::sqrt(dt);
    constexpr int kPanels = 24;
    for (int i = 0; i < grid.Nz(); ++i) {
        const double zi = grid.z(i);
        double ia = 0.0, ib = 0.0;
        for (int p = 0; p < kPanels; ++p) {
            const double hi = smax * std::ldexp(1.0, -p);
            const double lo = p == kPanels - 1 ? 0.0 : 0.5 * hi;
            for (size_t q = 0; q < gl.x.size(); ++q) {
                const double sig = lo + (hi - lo) * gl.x[q];
                const double tau = sig * sig;
                const double g = 2.0 * sig * kernel_trace(kind, tau, nu, k, zi) * (hi - lo) * gl.w[q];
                // tau = dt - s: phi = 1 - s/dt = tau/dt, and s/dt = 1 - tau/dt
                ia += g * (tau / dt);
                ib += g * (1.0 - tau / dt);
            }
        }
        a[static_cast<size_t>(i)] = ia;
        b[static_cast<size_t>(i)] = ib;
    }
    return {a, b};
}

// ---------------------------------------------------------------------------

StokesPropagator::StokesPropagator(GridPtr grid, double nu, double dt, int s_substeps)
    : grid_(std::move(grid)), nu_(nu), dt_(dt), s_substeps_(s_substeps) {
    if (!grid_) throw std::invalid_argument("StokesPropagator: null grid");
    if (!(nu > 0.0)) throw std::invalid_argument("StokesPropagator: nu must be positive");
    if (!(dt > 0.0)) throw std::invalid_argument("StokesPropagator: dt must be positive");
    if (s_substeps < 1) throw std::invalid_argument("StokesPropagator: s_substeps must be >= 1");
    const Grid& g = *grid_;

    // Midpoint rule in s; tau_m = dt - s_m.
    const int S = s_substeps;
    std::vector<double> taus(static_cast<size_t>(S)), wa(taus.size()), wb(taus.size());
    for (int m = 0; m < S; ++m) {
        const double s = (m + 0.5) * dt / S;
        taus[static_cast<size_t>(m)] = dt - s;
        wa[static_cast<size_t>(m)] = dt / S * (1.0 - s / dt);
        wb[static_cast<size_t>(m)] = dt / S * (s / dt);
    }
    const double one[1] = {1.0};
    const double tdt[1] = {dt};

    // Undamped Gaussian parts are shared across |xi|; only e^{-nu k^2 tau} differs.
    const Parts plus{true, 1, false, false};
    const Parts minus{true, -1, false, false};
    const Parts resid{false, 0, true, false};
    const DenseMatrix Gp = build_matrix(g, plus, nu, 0.0, tdt, one);
    const DenseMatrix Gm = build_matrix(g, minus, nu, 0.0, tdt, one);
    std::vector<DenseMatrix> Pp, Pm;
    for (int m = 0; m < S; ++m) {
        const double t1[1] = {taus[static_cast<size_t>(m)]};
        Pp.push_back(build_matrix(g, plus, nu, 0.0, t1, one));
        Pm.push_back(build_matrix(g, minus, nu, 0.0, t1, one));
    }

    std::map<int, int> by_k2;
    mode_class_.resize(static_cast<size_t>(g.n_modes()));
    for (int m = 0; m < g.n_modes(); ++m) {
        const Mode xi = g.mode(m);
        const int k2 = xi.xi1 * xi.xi1 + xi.xi2 * xi.xi2;
        auto it = by_k2.find(k2);
        if (it == by_k2.end()) it = by_k2.emplace(k2, -1).first;
        (void)it;
    }
    int next = 0;
    for (auto& [k2, cls] : by_k2) cls = next++;
    for (int m = 0; m < g.n_modes(); ++m) {
        const Mode xi = g.mode(m);
        mode_class_[static_cast<size_t>(m)] = by_k2.at(xi.xi1 * xi.xi1 + xi.xi2 * xi.xi2);
    }

    classes_.resize(by_k2.size());
    const int n = g.Nz();
    for (const auto& [k2, cls] : by_k2) {
        StepKernels& sk = classes_[static_cast<size_t>(cls)];
        const double k = std::sqrt(static_cast<double>(k2));
        sk.k = k;
        const double ddt = std::exp(-nu * k * k * dt);
        sk.G_h = DenseMatrix(n);
        sk.A_h = DenseMatrix(n);
        sk.B_h = DenseMatrix(n);
        sk.G_v = DenseMatrix(n);
        sk.A_v = DenseMatrix(n);
        sk.B_v = DenseMatrix(n);
        sk.G_h.axpy(ddt, Gp);
        sk.G_v.axpy(ddt, Gm);
        for (int m = 0; m < S; ++m) {
            const double dm = std::exp(-nu * k * k * taus[static_cast<size_t>(m)]);
            sk.A_h.axpy(wa[static_cast<size_t>(m)] * dm, Pp[static_cast<size_t>(m)]);
            sk.B_h.axpy(wb[static_cast<size_t>(m)] * dm, Pp[static_cast<size_t>(m)]);
            sk.A_v.axpy(wa[static_cast<size_t>(m)] * dm, Pm[static_cast<size_t>(m)]);
            sk.B_v.axpy(wb[static_cast<size_t>(m)] * dm, Pm[static_cast<size_t>(m)]);
        }
        const KernelKind hkind = k2 == 0 ? KernelKind::Neumann : KernelKind::Robin;
        if (k2 != 0) {
            sk.G_h.axpy(1.0, build_matrix(g, resid, nu, k, tdt, one));
            sk.A_h.axpy(1.0, build_matrix(g, resid, nu, k, taus, wa));
            sk.B_h.axpy(1.0, build_matrix(g, resid, nu, k, taus, wb));
        }
        for (DenseMatrix* M : {&sk.G_h, &sk.A_h, &sk.B_h, &sk.G_v, &sk.A_v, &sk.B_v}) M->compress();
        auto [a, b] = wall_source_vectors(g, hkind, nu, k, dt);
        sk.bA = std::move(a);
        sk.bB = std::move(b);
    }
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> logspace(double a, double b, int n) {
    std::vector<double> v(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] = std::pow(10.0, a + (b - a) * i / (n - 1));
    return v;
}

struct FitSample {
    double logR;
    double logb, b_a;        // log b, b (z+zbar)
    double log_pref, a2_nt;  // -1/2 log(nu t) - nu k^2 t/8, (z+zbar)^2/(nu t)
};

std::vector<FitSample> fit_samples(double nu, std::span<const double> xi_mags) {
    static const double default_xi[] = {1.0, 4.0, 16.0};
    if (xi_mags.empty()) xi_mags = default_xi;
    const auto ts = logspace(-3.0, 0.0, 13);
    auto zs = logspace(-4.0, std::log10(4.0), 25);
    zs.insert(zs.begin(), 0.0);
    std::vector<FitSample> out;
    for (double k : xi_mags) {
        const double b = k + 1.0 / std::sqrt(nu);
        for (double t : ts) {
            const double sq = std::sqrt(nu * t);
            for (double z : zs) {
                for (double zb : zs) {
                    const double a = z + zb;
                    const double logR = std::log(k) - k * a + detail::log_erfc(a / (2.0 * sq) - k * sq);
                    out.push_back({logR, std::log(b), b * a, -0.5 * std::log(nu * t) - nu * k * k * t / 8.0,
                                   a * a / (nu * t)});
                }
            }
        }
    }
    return out;
}

double log_constant(const std::vector<FitSample>& s, double theta) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& q : s) {
        const double l1 = q.logb - theta * q.b_a;
        const double l2 = q.log_pref - theta * q.a2_nt;
        const double hi = std::max(l1, l2);
        const double lb = hi + std::log1p(std::exp(std::min(l1, l2) - hi));
        worst = std::max(worst, q.logR - lb);
    }
    return worst;
}

}  // namespace

double residual_bound_constant(double nu, double theta, std::span<const double> xi_mags) {
    if (!(nu > 0.0) || !(theta > 0.0)) throw std::invalid_argument("residual_bound_constant: bad arguments");
    return std::exp(log_constant(fit_samples(nu, xi_mags), theta));
}

ResidualFit fit_residual_bound(double nu, std::span<const double> xi_mags) {
    if (!(nu > 0.0 && nu <= 1.0)) throw std::invalid_argument("fit_residual_bound: nu must lie in (0, 1]");
    const auto s = fit_samples(nu, xi_mags);
    constexpr double kStep = 0.005;
    const double floor_log = log_constant(s, kStep);
    ResidualFit fit;
    fit.nu = nu;
    fit.samples = s.size();
    fit.C_floor = std::exp(floor_log);
    fit.theta = kStep;
    fit.C = fit.C_floor;
    for (int i = 2; i <= 600; ++i) {
        const double th = kStep * i;
        const double lc = log_constant(s, th);
        if (lc > floor_log + std::log(1.25)) break;
        fit.theta = th;
        fit.C = std::exp(lc);
    }
    return fit;
}

}  // namespace hsv
