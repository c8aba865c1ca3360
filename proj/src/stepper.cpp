#include "hsv/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace hsv {

namespace {

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

}  // namespace

void StepConfig::validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("StepConfig: dt must be positive");
    if (!(picard_tol > 0.0 && picard_tol <= 1e-6)) throw std::invalid_argument("StepConfig: picard_tol must lie in (0, 1e-6]");
    if (picard_max < 1) throw std::invalid_argument("StepConfig: picard_max must be >= 1");
    if (s_substeps < 2) throw std::invalid_argument("StepConfig: s_substeps must be >= 2");
    if (!(tol_div > 0.0)) throw std::invalid_argument("StepConfig: tol_div must be positive");
    if (snapshot_every < 1) throw std::invalid_argument("StepConfig: snapshot_every must be >= 1");
    if (!(noslip_tol > 0.0)) throw std::invalid_argument("StepConfig: noslip_tol must be positive");
    if (!(tail_tol > 0.0)) throw std::invalid_argument("StepConfig: tail_tol must be positive");
}

double kinetic_energy(const SpectralField& u) {
    const Grid& g = u.grid();
    const auto w = g.quad_weights();
    double e = 0.0;
    for (int m = 0; m < g.n_modes(); ++m)
        for (int c = 0; c < u.ncomp(); ++c) {
            const auto p = u.profile(m, c);
            for (size_t j = 0; j < p.size(); ++j) e += w[j] * std::norm(p[j]);
        }
    return 0.5 * e;
}

double noslip_residual(const SpectralField& u) {
    double r = 0.0;
    for (int m = 0; m < u.grid().n_modes(); ++m)
        r = std::max(r, std::sqrt(std::norm(u.at(m, 0, 0)) + std::norm(u.at(m, 1, 0))));
    return r;
}

double tail_fraction(const SpectralField& omega) {
    const Grid& g = omega.grid();
    const auto w = g.quad_weights();
    const double z0 = g.Z_max() - 1.0;
    double tail = 0.0, total = 0.0;
    for (int m = 0; m < g.n_modes(); ++m)
        for (int c = 0; c < omega.ncomp(); ++c) {
            const auto p = omega.profile(m, c);
            for (int j = 0; j < g.Nz(); ++j) {
                const double v = w[static_cast<size_t>(j)] * std::norm(p[static_cast<size_t>(j)]);
                total += v;
                if (g.z(j) >= z0) tail += v;
            }
        }
    return total > 0.0 ? tail / total : 0.0;
}

void restore_divergence_free(SpectralField& omega) {
    const Grid& g = omega.grid();
    for (int m = 0; m < g.n_modes(); ++m) {
        const Mode xi = g.mode(m);
        const double x1 = xi.xi1, x2 = xi.xi2, k2 = x1 * x1 + x2 * x2;
        if (k2 == 0.0) continue;
        const auto d3 = ddz(g, omega.profile(m, 2));
        auto w1 = omega.profile(m, 0);
        auto w2 = omega.profile(m, 1);
        for (size_t j = 0; j < w1.size(); ++j) {
            // replace xi . omega_h by i d_z omega_3, keep the transverse part
            const cplx e = (x1 * w1[j] + x2 * w2[j] - cplx(0, 1) * d3[j]) / k2;
            w1[j] -= x1 * e;
            w2[j] -= x2 * e;
        }
    }
}

// ---------------------------------------------------------------------------

NavierStokesStepper::NavierStokesStepper(GridPtr grid, double nu, const StepConfig& cfg)
    : grid_(grid), nu_(nu), cfg_(cfg), prop_(grid, nu, cfg.dt, cfg.s_substeps), nl_(grid) {
    cfg.validate();
}

void NavierStokesStepper::apply_linear(const SpectralField& w, const SpectralField& N,
                                       const std::vector<std::array<cplx, 2>>& B, bool end_weights,
                                       SpectralField& out) const {
    const Grid& g = *grid_;
    for (int m = 0; m < g.n_modes(); ++m) {
        const StepKernels& sk = prop_.for_mode(m);
        for (int c = 0; c < 3; ++c) {
            auto o = out.profile(m, c);
            const bool h = c < 2;
            if (!end_weights) {
                (h ? sk.G_h : sk.G_v).apply(w.profile(m, c), o);
                (h ? sk.A_h : sk.A_v).apply_add(N.profile(m, c), o, 1.0);
            } else {
                (h ? sk.B_h : sk.B_v).apply_add(N.profile(m, c), o, 1.0);
            }
            if (h) {
                const cplx b = B[static_cast<size_t>(m)][static_cast<size_t>(c)];
                const auto& vec = end_weights ? sk.bB : sk.bA;
                for (size_t j = 0; j < o.size(); ++j) o[j] -= vec[j] * b;
            }
        }
    }
}

SpectralField NavierStokesStepper::step(const SpectralField& omega_t) {
    const Grid& g = *grid_;
    if (!omega_t.grid().same_as(g) || omega_t.ncomp() != 3) throw std::invalid_argument("step: field/grid mismatch");
    const SpectralField N0 = nl_.N(omega_t);
    if (!N0.is_finite()) throw NumericalError("nonlinearity produced NaN/Inf; the grid is under-resolved");
    const auto B0 = nl_.boundary_data(N0);

    // C = G(dt) w_t + A N_t - bA B_t
    SpectralField C(grid_, 3);
    apply_linear(omega_t, N0, B0, false, C);

    // linear predictor G(dt) w_t
    SpectralField cur(grid_, 3);
    for (int m = 0; m < g.n_modes(); ++m) {
        const StepKernels& sk = prop_.for_mode(m);
        for (int c = 0; c < 3; ++c) (c < 2 ? sk.G_h : sk.G_v).apply(omega_t.profile(m, c), cur.profile(m, c));
    }
    restore_divergence_free(cur);
    for (int it = 1; it <= cfg_.picard_max; ++it) {
        const SpectralField N = nl_.N(cur);
        if (!N.is_finite()) throw NumericalError("nonlinearity produced NaN/Inf; the grid is under-resolved");
        SpectralField next = C;
        apply_linear(cur, N, nl_.boundary_data(N), true, next);
        restore_divergence_free(next);
        const double scale = next.max_abs();
        const double diff = (next - cur).max_abs();
        cur = std::move(next);
        if (diff <= cfg_.picard_tol * scale) {
            last_iterations_ = it;
            return cur;
        }
    }
    throw NumericalError("Picard iteration did not converge in " + std::to_string(cfg_.picard_max) +
                         " iterations; reduce dt");
}

SpectralField duhamel_step(const SpectralField& omega_t, double /*t*/, double dt, const PhysParams& params,
                           const StepConfig& cfg) {
    params.validate();
    StepConfig c = cfg;
    c.dt = dt;
    NavierStokesStepper s(omega_t.grid_ptr(), params.nu, c);
    return s.step(omega_t);
}

// ---------------------------------------------------------------------------

namespace {

int step_count(double T, double dt) {
    if (!(T >= 0.0 && T <= 1.0)) throw std::invalid_argument("solver: T must lie in [0, 1]");
    if (T == 0.0) return 0;
    return std::max(1, static_cast<int>(std::ceil(T / dt - 1e-9)));
}

struct Recorder {
    const StepConfig& cfg;
    const BiotSavart& bs;
    Trajectory traj;
    bool check_noslip;

    void record(double t, const SpectralField& w, bool snapshot) {
        const SpectralField u = bs.recover(w, false).u;
        const double e = kinetic_energy(u);
        const double ns = noslip_residual(u);
        const double umax = u.max_abs();
        traj.max_u = std::max(traj.max_u, umax);
        traj.step_t.push_back(t);
        traj.step_energy.push_back(e);
        traj.step_noslip.push_back(ns);
        if (!w.is_finite()) throw NumericalError("vorticity became non-finite at t = " + sci(t));
        if (!snapshot) return;
        if (check_noslip && ns > cfg.noslip_tol * umax)
            throw NumericalError("no-slip residual " + sci(ns) + " exceeds noslip_tol * max|u| = " +
                                 sci(cfg.noslip_tol * umax) + " at t = " + sci(t));
        const double tail = tail_fraction(w);
        if (tail > cfg.tail_tol)
            throw NumericalError("vorticity tail fraction " + sci(tail) + " near Z_max exceeds tail_tol " +
                                 sci(cfg.tail_tol) + "; increase Z_max");
        traj.snapshots.push_back({t, w, u, ns, e});
    }
};

}  // namespace

Trajectory solve_navier_stokes(const SpectralField& omega0, double T, const PhysParams& params,
                               const StepConfig& cfg) {
    params.validate();
    cfg.validate();
    if (omega0.empty() || omega0.ncomp() != 3) throw std::invalid_argument("solve_navier_stokes: omega0 must have 3 components");
    const int n = step_count(T, cfg.dt);
    StepConfig c = cfg;
    if (n > 0) c.dt = T / n;
    NavierStokesStepper stepper(omega0.grid_ptr(), params.nu, c);
    Recorder rec{c, stepper.nonlinear().biot_savart(), {}, true};
    SpectralField w = omega0;
    rec.record(0.0, w, true);
    rec.traj.step_picard_iterations.push_back(0);
    for (int s = 1; s <= n; ++s) {
        w = stepper.step(w);
        rec.traj.step_picard_iterations.push_back(stepper.last_iterations());
        rec.record(s * c.dt, w, s % c.snapshot_every == 0 || s == n);
    }
    return std::move(rec.traj);
}

Trajectory solve_euler(const SpectralField& omega0, double T, const StepConfig& cfg) {
    cfg.validate();
    if (omega0.empty() || omega0.ncomp() != 3) throw std::invalid_argument("solve_euler: omega0 must have 3 components");
    const int n = step_count(T, cfg.dt);
    StepConfig c = cfg;
    if (n > 0) c.dt = T / n;
    const GridPtr& g = omega0.grid_ptr();
    NonlinearOperator nl(g);
    Recorder rec{c, nl.biot_savart(), {}, false};
    const double min_dz = g->z(1) - g->z(0);
    SpectralField w = omega0;
    rec.record(0.0, w, true);
    rec.traj.step_picard_iterations.push_back(0);
    for (int s = 1; s <= n; ++s) {
        // CFL: sup_z sum_xi |u_xi(z)| bounds the physical speed
        const SpectralField u = nl.biot_savart().recover(w, false).u;
        double umax = 0.0;
        for (int j = 0; j < g->Nz(); ++j) {
            double sum = 0.0;
            for (int m = 0; m < g->n_modes(); ++m)
                sum += std::sqrt(std::norm(u.at(m, 0, j)) + std::norm(u.at(m, 1, j)) + std::norm(u.at(m, 2, j)));
            umax = std::max(umax, sum);
        }
        if (umax * c.dt / min_dz > 1.0)
            throw NumericalError("Euler CFL violated: max|u| dt / min dz = " + sci(umax * c.dt / min_dz) +
                                 "; reduce dt or coarsen the wall grading");
        const double h = c.dt;
        const SpectralField k1 = nl.N(w);
        const SpectralField k2 = nl.N(w + (0.5 * h) * k1);
        const SpectralField k3 = nl.N(w + (0.5 * h) * k2);
        const SpectralField k4 = nl.N(w + h * k3);
        w += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        rec.traj.step_picard_iterations.push_back(0);
        rec.record(s * c.dt, w, s % c.snapshot_every == 0 || s == n);
    }
    return std::move(rec.traj);
}

// ---------------------------------------------------------------------------

double near_wall_dissipation(const SpectralField& grad_u, double zc) {
    const Grid& g = grad_u.grid();
    if (!(zc >= g.z(1))) throw std::invalid_argument("near-wall layer is thinner than the first cell; refine the mesh");
    double total = 0.0;
    for (int m = 0; m < g.n_modes(); ++m) {
        for (int c = 0; c < grad_u.ncomp(); ++c) {
            const auto p = grad_u.profile(m, c);
            for (int j = 0; j + 1 < g.Nz() && g.z(j) < zc; ++j) {
                const double a = g.z(j);
                const double h = g.z(j + 1) - a;
                const double f0 = std::norm(p[static_cast<size_t>(j)]);
                if (g.z(j + 1) <= zc) {
                    total += 0.5 * h * (f0 + std::norm(p[static_cast<size_t>(j + 1)]));
                } else {
                    const double th = (zc - a) / h;
                    const cplx v = (1.0 - th) * p[static_cast<size_t>(j)] + th * p[static_cast<size_t>(j + 1)];
                    total += 0.5 * (zc - a) * (f0 + std::norm(v));
                }
            }
        }
    }
    return total;
}

double kato_dissipation(const Trajectory& traj, double c, double nu) {
    if (traj.snapshots.size() < 2) throw std::invalid_argument("kato_dissipation: need at least two snapshots");
    if (!(c > 0.0 && nu > 0.0)) throw std::invalid_argument("kato_dissipation: c and nu must be positive");
    const GridPtr& g = traj.snapshots.front().omega.grid_ptr();
    BiotSavart bs(g);
    std::vector<double> f;
    for (const auto& s : traj.snapshots) f.push_back(nu * near_wall_dissipation(bs.recover(s.omega).grad, c * nu));
    double total = 0.0;
    for (size_t i = 1; i < f.size(); ++i)
        total += 0.5 * (traj.snapshots[i].t - traj.snapshots[i - 1].t) * (f[i] + f[i - 1]);
    return total;
}

}  // namespace hsv
