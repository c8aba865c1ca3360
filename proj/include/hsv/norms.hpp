/// @file norms.hpp
/// @brief Weighted analytic and Sobolev norms of a vorticity field, evaluated
///        on the real trace z in [0, Z_max].

#pragma once

#include "hsv/field.hpp"

#include <vector>

namespace hsv {

struct NormParams {
    double mu0 = 0.5;
    double gamma = 1.0;
    double eps0 = 0.125;
    double a = 0.25;
    double nu = 1e-2;
    int mu_samples = 32;

    /// Throws std::invalid_argument if an invariant is violated.
    void validate() const;
    /// Largest admissible time mu0 / (2 gamma).
    double t_max() const { return mu0 / (2.0 * gamma); }
    /// Fixed absolute grid mu0 * i / mu_samples below mu0 - gamma t, plus a
    /// point 1e-3 under that endpoint. Throws for t outside [0, t_max()].
    std::vector<double> mu_grid(double t) const;
};

NormParams norm_params_from(const PhysParams& phys, int mu_samples = 32);

/// max(sqrt(nu), z) on [0, 1], 1 beyond. Throws for z < 0 or nu outside (0, 1].
double weight_w(double z, double nu);

struct XNorm {
    double total = 0.0;
    double bar = 0.0;   ///< weighted horizontal part
    double frak = 0.0;  ///< unweighted vertical part
};

/// sum_xi sup_{z <= 1 + mu} e^{eps0 (1 + mu - z)_+ |xi|} w(z) |f_h,xi(z)|, plus the
/// same without w for f_3. The horizontal pair is reduced by its Euclidean
/// length before the sup. f must have 3 components. Throws for mu outside (0, mu0).
XNorm norm_X_mu(const SpectralField& f, double mu, const NormParams& p);

struct MuRow {
    double mu = 0.0;
    double X_mu = 0.0;     ///< |f|_{X_mu}
    double Xbar_mu = 0.0;
    double Xfrak_mu = 0.0;
    double X_sum = 0.0;    ///< derivative sum whose sup over mu is |f|_{X(t)}
    double Y_mu = 0.0;     ///< |(1 + |grad_h|) f|_{Y_mu}
    double Y_sum = 0.0;
    double S_mu = 0.0;
};

/// sup over the mu grid of
///   sum_{|alpha| <= 1} |D^alpha f|_{X_mu} + (mu0 - mu - gamma t)^{1/2 + a} sum_{|alpha| = 2} |D^alpha f|_{X_mu}.
double norm_X_of_t(const SpectralField& f, double t, const NormParams& p);

struct YNorm {
    std::vector<double> mu;
    std::vector<double> Y_mu;   ///< derivative sum at each mu
    double Y_t = 0.0;
};

/// L1 norms on [0, 1 + mu] with the multiplier (1 + |xi|); second conormal
/// derivatives carry (mu0 - mu - gamma t)^a.
YNorm norm_Y(const SpectralField& f, double t, const NormParams& p);

struct SZNorm {
    double S_mu = 0.0;   ///< sum_xi |z f_xi|_{L2(z >= 1 + mu)}
    double S = 0.0;      ///< (sum_xi |z f_xi|^2_{L2(z >= 1/2)})^{1/2}
    double Z = 0.0;      ///< sum_{|alpha| <= 5} S(grad^alpha f)
    double S_phi = 0.0;  ///< S with z 1{z >= 1/2} replaced by phi(z) = z psi(z)
    double Z_phi = 0.0;
};

/// Throws std::invalid_argument if the grid ends below 1 + mu.
SZNorm norm_S_and_Z(const SpectralField& f, double mu);

/// Smooth ramp: 0 below 1/4, 1 above 1/2.
double cutoff_psi(double z);

/// Least-squares decay rate r in sum_z |f_xi| ~ C e^{-r |xi|} over modes with
/// non-negligible mass. 0 when fewer than two distinct |xi| carry mass.
double spectral_decay_rate(const SpectralField& f);

struct NormReport {
    double t = 0.0;
    double X_t = 0.0, Y_t = 0.0, Z = 0.0, S = 0.0, triple = 0.0;
    double Xbar_t = 0.0, Xfrak_t = 0.0;  ///< the X(t) sup split by component group
    double S_phi = 0.0, Z_phi = 0.0;
    double decay_rate = 0.0;
    std::vector<MuRow> rows;
};

/// |||f|||_t = |f|_{X(t)} + |f|_{Y(t)} + |f|_Z with per-mu tables.
NormReport cumulative_norm(const SpectralField& f, double t, const NormParams& p);

}  // namespace hsv
