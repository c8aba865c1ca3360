#include "hsv/norms.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace hsv {

void NormParams::validate() const {
    if (!(mu0 > 0.0)) throw std::invalid_argument("NormParams: mu0 must be positive");
    if (!(gamma > 0.0)) throw std::invalid_argument("NormParams: gamma must be positive");
    if (!(eps0 > 0.0)) throw std::invalid_argument("NormParams: eps0 must be positive");
    if (!(a > 0.0 && a < 0.5)) throw std::invalid_argument("NormParams: a must lie in (0, 1/2)");
    if (!(nu > 0.0 && nu <= 1.0)) throw std::invalid_argument("NormParams: nu must lie in (0, 1]");
    if (mu_samples < 8) throw std::invalid_argument("NormParams: mu_samples must be >= 8");
}

std::vector<double> NormParams::mu_grid(double t) const {
    validate();
    if (!(t >= 0.0 && t <= t_max() * (1.0 + 1e-12)))
        throw std::invalid_argument("norms: t must lie in [0, mu0 / (2 gamma)]");
    const double top = mu0 - gamma * t;
    const double end = top - 1e-3;
    std::vector<double> out;
    for (int i = 1; i < mu_samples; ++i) {
        const double mu = mu0 * i / mu_samples;
        if (mu < end) out.push_back(mu);
    }
    if (end > 0.0) out.push_back(end);
    return out;
}

NormParams norm_params_from(const PhysParams& phys, int mu_samples) {
    NormParams p;
    p.mu0 = phys.mu0;
    p.gamma = phys.gamma;
    p.eps0 = phys.eps0;
    p.a = phys.a;
    p.nu = phys.nu;
    p.mu_samples = mu_samples;
    return p;
}

double weight_w(double z, double nu) {
    if (!(z >= 0.0)) throw std::invalid_argument("weight_w: z must be >= 0");
    if (!(nu > 0.0 && nu <= 1.0)) throw std::invalid_argument("weight_w: nu must lie in (0, 1]");
    return z <= 1.0 ? std::max(std::sqrt(nu), z) : 1.0;
}

double cutoff_psi(double z) {
    auto f = [](double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; };
    const double s = (z - 0.25) / 0.25;
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    return f(s) / (f(s) + f(1.0 - s));
}

namespace {

const std::vector<MultiIndex>& low_order_alphas() {
    static const std::vector<MultiIndex> a = {
        {0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {2, 0, 0},
        {0, 2, 0}, {0, 0, 2}, {1, 1, 0}, {1, 0, 1}, {0, 1, 1},
    };
    return a;
}

int order(const MultiIndex& a) { return a[0] + a[1] + a[2]; }

void require_vector(const SpectralField& f, const char* who) {
    if (f.empty() || f.ncomp() != 3) throw std::invalid_argument(std::string(who) + ": field must have 3 components");
}

double horizontal_mag(const SpectralField& f, int m, int j) {
    return std::sqrt(std::norm(f.at(m, 0, j)) + std::norm(f.at(m, 1, j)));
}

/// int_0^zc of the piecewise-linear interpolant of v on the grid.
double integral_to(const Grid& g, const std::vector<double>& v, double zc) {
    double s = 0.0;
    for (int j = 0; j + 1 < g.Nz() && g.z(j) < zc; ++j) {
        const double a = g.z(j), b = g.z(j + 1);
        const double va = v[static_cast<size_t>(j)], vb = v[static_cast<size_t>(j + 1)];
        if (b <= zc) {
            s += 0.5 * (b - a) * (va + vb);
        } else {
            const double th = (zc - a) / (b - a);
            s += 0.5 * (zc - a) * (va + (1.0 - th) * va + th * vb);
        }
    }
    return s;
}

double integral_from(const Grid& g, const std::vector<double>& v, double zc) {
    return integral_to(g, v, g.Z_max()) - integral_to(g, v, zc);
}

/// sum_xi |z f_xi|_{L2(z >= zc)}
double s_tail(const SpectralField& f, double zc) {
    const Grid& g = f.grid();
    std::vector<double> q(static_cast<size_t>(g.Nz()));
    double out = 0.0;
    for (int m = 0; m < g.n_modes(); ++m) {
        for (int j = 0; j < g.Nz(); ++j) {
            double s = 0.0;
            for (int c = 0; c < f.ncomp(); ++c) s += std::norm(f.at(m, c, j));
            q[static_cast<size_t>(j)] = g.z(j) * g.z(j) * s;
        }
        out += std::sqrt(std::max(0.0, integral_from(g, q, zc)));
    }
    return out;
}

}  // namespace

XNorm norm_X_mu(const SpectralField& f, double mu, const NormParams& p) {
    require_vector(f, "norm_X_mu");
    if (!(mu > 0.0 && mu < p.mu0)) throw std::invalid_argument("norm_X_mu: mu must lie in (0, mu0)");
    const Grid& g = f.grid();
    const double top = 1.0 + mu;
    XNorm out;
    for (int m = 0; m < g.n_modes(); ++m) {
        const double k = g.mode(m).magnitude();
        double sh = 0.0, s3 = 0.0;
        for (int j = 0; j < g.Nz() && g.z(j) <= top; ++j) {
            const double z = g.z(j);
            const double e = std::exp(p.eps0 * std::max(0.0, top - z) * k);
            sh = std::max(sh, e * weight_w(z, p.nu) * horizontal_mag(f, m, j));
            s3 = std::max(s3, e * std::abs(f.at(m, 2, j)));
        }
        out.bar += sh;
        out.frak += s3;
    }
    out.total = out.bar + out.frak;
    return out;
}

namespace {

struct XSums {
    std::vector<MuRow> rows;
    double X_t = 0.0, Xbar_t = 0.0, Xfrak_t = 0.0, Y_t = 0.0;
};

XSums mu_tables(const SpectralField& f, double t, const NormParams& p) {
    const auto mus = p.mu_grid(t);
    const Grid& g = f.grid();
    const auto& alphas = low_order_alphas();
    std::vector<SpectralField> D;
    for (const auto& a : alphas) D.push_back(conormal_derivative(f, a));

    // Cumulative-ready moduli of (1 + |xi|) D^alpha f for the L1 parts.
    std::vector<std::vector<std::array<std::vector<double>, 2>>> mod(alphas.size());
    for (size_t ai = 0; ai < alphas.size(); ++ai) {
        mod[ai].resize(static_cast<size_t>(g.n_modes()));
        for (int m = 0; m < g.n_modes(); ++m) {
            const double s = 1.0 + g.mode(m).magnitude();
            auto& pr = mod[ai][static_cast<size_t>(m)];
            pr[0].resize(static_cast<size_t>(g.Nz()));
            pr[1].resize(static_cast<size_t>(g.Nz()));
            for (int j = 0; j < g.Nz(); ++j) {
                pr[0][static_cast<size_t>(j)] = s * horizontal_mag(D[ai], m, j);
                pr[1][static_cast<size_t>(j)] = s * std::abs(D[ai].at(m, 2, j));
            }
        }
    }

    XSums out;
    for (double mu : mus) {
        MuRow r;
        r.mu = mu;
        const double gap = p.mu0 - mu - p.gamma * t;
        const double wx = std::pow(gap, 0.5 + p.a);
        const double wy = std::pow(gap, p.a);
        double bar = 0.0, frak = 0.0;
        for (size_t ai = 0; ai < alphas.size(); ++ai) {
            const XNorm x = norm_X_mu(D[ai], mu, p);
            double y = 0.0;
            for (int m = 0; m < g.n_modes(); ++m)
                for (int c = 0; c < 2; ++c) y += integral_to(g, mod[ai][static_cast<size_t>(m)][static_cast<size_t>(c)], 1.0 + mu);
            const bool high = order(alphas[ai]) == 2;
            r.X_sum += (high ? wx : 1.0) * x.total;
            bar += (high ? wx : 1.0) * x.bar;
            frak += (high ? wx : 1.0) * x.frak;
            r.Y_sum += (high ? wy : 1.0) * y;
            if (ai == 0) {
                r.X_mu = x.total;
                r.Xbar_mu = x.bar;
                r.Xfrak_mu = x.frak;
                r.Y_mu = y;
            }
        }
        r.S_mu = s_tail(f, 1.0 + mu);
        if (r.X_sum >= out.X_t) {
            out.X_t = r.X_sum;
            out.Xbar_t = bar;
            out.Xfrak_t = frak;
        }
        out.Y_t = std::max(out.Y_t, r.Y_sum);
        out.rows.push_back(r);
    }
    return out;
}

}  // namespace

double norm_X_of_t(const SpectralField& f, double t, const NormParams& p) {
    require_vector(f, "norm_X_of_t");
    return mu_tables(f, t, p).X_t;
}

YNorm norm_Y(const SpectralField& f, double t, const NormParams& p) {
    require_vector(f, "norm_Y");
    const XSums s = mu_tables(f, t, p);
    YNorm out;
    for (const auto& r : s.rows) {
        out.mu.push_back(r.mu);
        out.Y_mu.push_back(r.Y_sum);
    }
    out.Y_t = s.Y_t;
    return out;
}

SZNorm norm_S_and_Z(const SpectralField& f, double mu) {
    if (f.empty()) throw std::invalid_argument("norm_S_and_Z: empty field");
    const Grid& g = f.grid();
    if (!(g.Z_max() > 1.0 + mu)) throw std::invalid_argument("norm_S_and_Z: grid ends below 1 + mu");
    constexpr int kMax = 5;
    const size_t nz = static_cast<size_t>(g.Nz());
    SZNorm out;
    // I[m][k] = int_{z >= 1/2} z^2 |dz^k f_xi|^2, Iphi with phi(z)^2 instead.
    std::vector<std::array<double, kMax + 1>> I(static_cast<size_t>(g.n_modes())), Iphi(I.size());
    std::vector<double> phi2(nz), z2(nz), q(nz), qphi(nz);
    for (size_t j = 0; j < nz; ++j) {
        const double z = g.z(static_cast<int>(j));
        z2[j] = z * z;
        phi2[j] = std::pow(z * cutoff_psi(z), 2);
    }
    for (int m = 0; m < g.n_modes(); ++m) {
        std::vector<std::vector<cplx>> d(static_cast<size_t>(f.ncomp()));
        for (int c = 0; c < f.ncomp(); ++c) {
            const auto p = f.profile(m, c);
            d[static_cast<size_t>(c)].assign(p.begin(), p.end());
        }
        for (int k = 0; k <= kMax; ++k) {
            if (k > 0)
                for (auto& v : d) v = ddz(g, v);
            for (size_t j = 0; j < nz; ++j) {
                double s = 0.0;
                for (const auto& v : d) s += std::norm(v[j]);
                q[j] = z2[j] * s;
                qphi[j] = phi2[j] * s;
            }
            I[static_cast<size_t>(m)][static_cast<size_t>(k)] = integral_from(g, q, 0.5);
            Iphi[static_cast<size_t>(m)][static_cast<size_t>(k)] = integral_to(g, qphi, g.Z_max());
        }
    }
    auto s_of = [&](const std::vector<std::array<double, kMax + 1>>& tab, int a1, int a2, int a3) {
        double s = 0.0;
        for (int m = 0; m < g.n_modes(); ++m) {
            const Mode xi = g.mode(m);
            const double mult = std::pow(static_cast<double>(xi.xi1), 2 * a1) * std::pow(static_cast<double>(xi.xi2), 2 * a2);
            s += mult * tab[static_cast<size_t>(m)][static_cast<size_t>(a3)];
        }
        return std::sqrt(std::max(0.0, s));
    };
    out.S_mu = s_tail(f, 1.0 + mu);
    out.S = s_of(I, 0, 0, 0);
    out.S_phi = s_of(Iphi, 0, 0, 0);
    for (int a1 = 0; a1 <= kMax; ++a1)
        for (int a2 = 0; a1 + a2 <= kMax; ++a2)
            for (int a3 = 0; a1 + a2 + a3 <= kMax; ++a3) {
                out.Z += s_of(I, a1, a2, a3);
                out.Z_phi += s_of(Iphi, a1, a2, a3);
            }
    return out;
}

double spectral_decay_rate(const SpectralField& f) {
    if (f.empty()) throw std::invalid_argument("spectral_decay_rate: empty field");
    const Grid& g = f.grid();
    const auto w = g.quad_weights();
    std::vector<double> mass(static_cast<size_t>(g.n_modes()), 0.0);
    double top = 0.0;
    for (int m = 0; m < g.n_modes(); ++m) {
        for (int c = 0; c < f.ncomp(); ++c) {
            const auto p = f.profile(m, c);
            for (size_t j = 0; j < p.size(); ++j) mass[static_cast<size_t>(m)] += w[j] * std::abs(p[j]);
        }
        top = std::max(top, mass[static_cast<size_t>(m)]);
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int n = 0;
    double kmin = 1e300, kmax = -1.0;
    for (int m = 0; m < g.n_modes(); ++m) {
        const double s = mass[static_cast<size_t>(m)];
        if (!(s > 1e-12 * top)) continue;
        const double x = g.mode(m).magnitude(), y = std::log(s);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        kmin = std::min(kmin, x);
        kmax = std::max(kmax, x);
        ++n;
    }
    if (n < 2 || kmax - kmin < 1e-12) return 0.0;
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return -slope;
}

NormReport cumulative_norm(const SpectralField& f, double t, const NormParams& p) {
    require_vector(f, "cumulative_norm");
    const XSums s = mu_tables(f, t, p);
    const SZNorm sz = norm_S_and_Z(f, p.mu0);
    NormReport r;
    r.t = t;
    r.X_t = s.X_t;
    r.Xbar_t = s.Xbar_t;
    r.Xfrak_t = s.Xfrak_t;
    r.Y_t = s.Y_t;
    r.Z = sz.Z;
    r.S = sz.S;
    r.S_phi = sz.S_phi;
    r.Z_phi = sz.Z_phi;
    r.triple = r.X_t + r.Y_t + r.Z;
    r.decay_rate = spectral_decay_rate(f);
    r.rows = s.rows;
    return r;
}

}  // namespace hsv
