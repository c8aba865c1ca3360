#include "hsv/biot_savart.hpp"

#include "quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace hsv {

BiotSavart::BiotSavart(GridPtr grid) : grid_(std::move(grid)) {
    if (!grid_) throw std::invalid_argument("BiotSavart: null grid");
    const int K = grid_->K();
    for (int a = 0; a <= K; ++a) {
        for (int b = 0; b <= a; ++b) {
            const int k2 = a * a + b * b;
            if (tables_.count(k2)) continue;
            const double k = std::sqrt(static_cast<double>(k2));
            const auto& gl = detail::gauss_legendre(16);
            const int n = grid_->Nz();
            Table t;
            t.decay.resize(static_cast<size_t>(n - 1));
            t.edge = t.m00 = t.m10 = t.m01 = t.m11 = t.decay;
            t.e2.resize(static_cast<size_t>(n));
            t.em1z.resize(static_cast<size_t>(n));
            for (int j = 0; j + 1 < n; ++j) {
                const double z0 = grid_->z(j);
                const double h = grid_->z(j + 1) - z0;
                const double x = k * h;
                double m00 = 0, m10 = 0, m01 = 0, m11 = 0;
                for (size_t q = 0; q < gl.x.size(); ++q) {
                    const double th = gl.x[q];
                    const double e = std::exp(-x * th) * gl.w[q];
                    const double th2 = th * th, th3 = th2 * th;
                    m00 += e * (2 * th3 - 3 * th2 + 1);
                    m10 += e * (th3 - 2 * th2 + th);
                    m01 += e * (-2 * th3 + 3 * th2);
                    m11 += e * (th3 - th2);
                }
                const auto u = static_cast<size_t>(j);
                t.decay[u] = std::exp(-x);
                t.edge[u] = std::exp(-k * (2 * z0 + h));
                t.m00[u] = m00;
                t.m10[u] = m10;
                t.m01[u] = m01;
                t.m11[u] = m11;
            }
            for (int j = 0; j < n; ++j) {
                const double z = grid_->z(j);
                t.e2[static_cast<size_t>(j)] = std::exp(-2 * k * z);
                t.em1z[static_cast<size_t>(j)] = z > 0 ? -std::expm1(-2 * k * z) / z : 2 * k;
            }
            tables_.emplace(k2, std::move(t));
        }
    }
}

const BiotSavart::Table& BiotSavart::table(int k2) const {
    auto it = tables_.find(k2);
    if (it == tables_.end()) throw std::invalid_argument("BiotSavart: |xi|^2 not on grid");
    return it->second;
}

ExpTransforms BiotSavart::transforms(std::span<const cplx> g, int k2) const {
    const Table& t = table(k2);
    const int n = grid_->Nz();
    if (static_cast<int>(g.size()) != n) throw std::invalid_argument("BiotSavart: profile length mismatch");
    const auto d = ddz(*grid_, g);
    ExpTransforms r;
    r.L.assign(static_cast<size_t>(n), cplx{});
    r.M = r.U = r.V = r.L;
    std::vector<cplx> P(static_cast<size_t>(n - 1)), Q(P.size());
    for (int j = 0; j + 1 < n; ++j) {
        const auto u = static_cast<size_t>(j);
        const double h = grid_->z(j + 1) - grid_->z(j);
        // P = int_0^h e^{-k s} H, Q = int_0^h e^{-k (h - s)} H
        P[u] = h * (g[u] * t.m00[u] + h * d[u] * t.m10[u] + g[u + 1] * t.m01[u] + h * d[u + 1] * t.m11[u]);
        Q[u] = h * (g[u] * t.m01[u] - h * d[u] * t.m11[u] + g[u + 1] * t.m00[u] - h * d[u + 1] * t.m10[u]);
    }
    for (int j = 0; j + 1 < n; ++j) {
        const auto u = static_cast<size_t>(j);
        r.L[u + 1] = t.decay[u] * r.L[u] + Q[u];
        r.M[u + 1] = t.decay[u] * r.M[u] + t.edge[u] * P[u];
    }
    for (int j = n - 2; j >= 0; --j) {
        const auto u = static_cast<size_t>(j);
        r.U[u] = t.decay[u] * r.U[u + 1] + P[u];
    }
    for (int j = 0; j < n; ++j) r.V[static_cast<size_t>(j)] = t.e2[static_cast<size_t>(j)] * r.U[static_cast<size_t>(j)];
    return r;
}

ModeProfile BiotSavart::grad_inv_laplacian(const ModeProfile& w, int dir, WallCondition wall) const {
    if (w.xi.is_zero()) throw std::invalid_argument("grad_inv_laplacian: xi = 0 has no inverse");
    if (dir < 1 || dir > 3) throw std::invalid_argument("grad_inv_laplacian: dir must be 1, 2 or 3");
    if (grid_->index(w.xi) < 0) throw std::invalid_argument("grad_inv_laplacian: mode outside grid");
    const int k2 = w.xi.xi1 * w.xi.xi1 + w.xi.xi2 * w.xi.xi2;
    const double k = std::sqrt(static_cast<double>(k2));
    const auto T = transforms(w.values, k2);
    const double s = wall == WallCondition::Dirichlet ? -1.0 : 1.0;
    ModeProfile out{w.xi, std::vector<cplx>(w.values.size())};
    for (size_t j = 0; j < out.values.size(); ++j) {
        const cplx lm = T.L[j] + s * T.M[j];
        if (dir == 3) {
            out.values[j] = 0.5 * (-lm + T.U[j] - s * T.V[j]);
        } else {
            const double xd = dir == 1 ? w.xi.xi1 : w.xi.xi2;
            out.values[j] = cplx(0.0, 0.5 * xd / k) * (lm + T.U[j] + s * T.V[j]);
        }
    }
    return out;
}

double reality_tolerance(const SpectralField& f) { return 1e-10 * std::max(1.0, f.max_abs()); }

BiotSavart::Velocity BiotSavart::recover(const SpectralField& omega, bool with_gradient) const {
    if (omega.empty() || omega.ncomp() != 3) throw std::invalid_argument("recover: omega must have 3 components");
    if (!omega.grid().same_as(*grid_)) throw std::invalid_argument("recover: grid mismatch");
    if (omega.reality_defect() > reality_tolerance(omega))
        throw std::invalid_argument("recover: omega violates reality symmetry");
    const Grid& g = *grid_;
    const int n = g.Nz();
    Velocity v{SpectralField(grid_, 3), with_gradient ? SpectralField(grid_, 9) : SpectralField(),
               SpectralField(grid_, 1)};
    for (int m = 0; m < g.n_modes(); ++m) {
        const Mode xi = g.mode(m);
        const int k2 = xi.xi1 * xi.xi1 + xi.xi2 * xi.xi2;
        auto u1 = v.u.profile(m, 0), u2 = v.u.profile(m, 1), u3 = v.u.profile(m, 2);
        auto w1 = omega.profile(m, 0), w2 = omega.profile(m, 1);
        if (k2 == 0) {
            // mean flow: d_z u_h = (w2, -w1), u_h(0) = 0, u3 = 0
            const auto T1 = transforms(w1, 0);
            const auto T2 = transforms(w2, 0);
            for (int j = 0; j < n; ++j) {
                const auto u = static_cast<size_t>(j);
                u1[u] = T2.L[u];
                u2[u] = -T1.L[u];
                u3[u] = 0.0;
                if (with_gradient) {
                    v.grad.at(m, 2, j) = w2[u];
                    v.grad.at(m, 5, j) = -w1[u];
                }
            }
            continue;
        }
        const double k = std::sqrt(static_cast<double>(k2));
        const cplx i1(0.0, xi.xi1), i2(0.0, xi.xi2);
        const auto T1 = transforms(w1, k2);
        const auto T2 = transforms(w2, k2);
        const auto T3 = transforms(omega.profile(m, 2), k2);
        const Table& tb = table(k2);
        for (int j = 0; j < n; ++j) {
            const auto u = static_cast<size_t>(j);
            const cplx W1 = (T1.L[u] - T1.M[u] + T1.U[u] - T1.V[u]) / (2 * k);
            const cplx W2 = (T2.L[u] - T2.M[u] + T2.U[u] - T2.V[u]) / (2 * k);
            const cplx W3 = (T3.L[u] + T3.M[u] + T3.U[u] + T3.V[u]) / (2 * k);
            const cplx dW1 = 0.5 * (-T1.L[u] + T1.M[u] + T1.U[u] + T1.V[u]);
            const cplx dW2 = 0.5 * (-T2.L[u] + T2.M[u] + T2.U[u] + T2.V[u]);
            const cplx dW3 = 0.5 * (-T3.L[u] - T3.M[u] + T3.U[u] - T3.V[u]);
            u1[u] = i2 * W3 - dW2;
            u2[u] = dW1 - i1 * W3;
            u3[u] = j == 0 ? cplx{} : i1 * W2 - i2 * W1;
            // P_D/z = [(L - M)/z + (-expm1(-2kz)/z) U] / (2k); the z = 0 limit is U(0)
            const double z = g.z(j);
            const cplx W1z = j == 0 ? T1.U[u] : ((T1.L[u] - T1.M[u]) / z + tb.em1z[u] * T1.U[u]) / (2 * k);
            const cplx W2z = j == 0 ? T2.U[u] : ((T2.L[u] - T2.M[u]) / z + tb.em1z[u] * T2.U[u]) / (2 * k);
            v.u3z.at(m, 0, j) = i1 * W2z - i2 * W1z;
            if (with_gradient) {
                // d_z^2 P = k^2 P - g
                const cplx ddW1 = k * k * W1 - w1[u];
                const cplx ddW2 = k * k * W2 - w2[u];
                const cplx g0 = u1[u], g1 = u2[u], g2 = u3[u];
                v.grad.at(m, 0, j) = i1 * g0;
                v.grad.at(m, 1, j) = i2 * g0;
                v.grad.at(m, 2, j) = i2 * dW3 - ddW2;
                v.grad.at(m, 3, j) = i1 * g1;
                v.grad.at(m, 4, j) = i2 * g1;
                v.grad.at(m, 5, j) = ddW1 - i1 * dW3;
                v.grad.at(m, 6, j) = i1 * g2;
                v.grad.at(m, 7, j) = i2 * g2;
                v.grad.at(m, 8, j) = i1 * dW2 - i2 * dW1;
            }
        }
    }
    return v;
}

namespace {
BiotSavart::Velocity recover_once(const SpectralField& omega, bool grad) {
    if (omega.empty()) throw std::invalid_argument("velocity recovery: empty field");
    return BiotSavart(omega.grid_ptr()).recover(omega, grad);
}
}  // namespace

ModeProfile grad_inv_laplacian(const GridPtr& grid, const ModeProfile& w, int dir) {
    return BiotSavart(grid).grad_inv_laplacian(w, dir);
}

SpectralField velocity_from_vorticity(const SpectralField& omega) { return recover_once(omega, false).u; }

SpectralField velocity_gradient(const SpectralField& omega) { return recover_once(omega, true).grad; }

SpectralField u3_over_z(const SpectralField& omega) { return recover_once(omega, false).u3z; }

void impose_discrete_noslip(SpectralField& omega) {
    if (omega.empty() || omega.ncomp() != 3) throw std::invalid_argument("impose_discrete_noslip: omega must have 3 components");
    const Grid& g = omega.grid();
    const BiotSavart bs(omega.grid_ptr());
    const SpectralField u = bs.recover(omega, false).u;
    std::vector<cplx> p(static_cast<size_t>(g.Nz()));
    for (int j = 0; j < g.Nz(); ++j) {
        const double z = g.z(j);
        p[static_cast<size_t>(j)] = z * z * std::exp(-z * z);
    }
    for (int m = 0; m < g.n_modes(); ++m) {
        const Mode xi = g.mode(m);
        const int k2 = xi.xi1 * xi.xi1 + xi.xi2 * xi.xi2;
        if (k2 == 0) continue;
        const double k = std::sqrt(static_cast<double>(k2));
        // A transverse profile alpha xi^perp p / k moves u_h(0) by -alpha P xi / k.
        const double P = bs.transforms(p, k2).U[0].real();
        const cplx alpha = (static_cast<double>(xi.xi1) * u.at(m, 0, 0) + static_cast<double>(xi.xi2) * u.at(m, 1, 0)) / (P * k);
        for (int j = 0; j < g.Nz(); ++j) {
            const cplx d = alpha * p[static_cast<size_t>(j)] / k;
            omega.at(m, 0, j) -= static_cast<double>(xi.xi2) * d;
            omega.at(m, 1, j) += static_cast<double>(xi.xi1) * d;
        }
    }
}

}  // namespace hsv
