/// @file kernels.hpp
/// @brief One-dimensional Green's functions in z for the per-mode Stokes system
///        and their discretization as integral operators on the graded mesh.
///
/// For a horizontal mode of magnitude k = |xi| the linear problem is
///   f_t = nu f_zz - nu k^2 f,  z > 0,
/// with either Neumann, Dirichlet, or Robin (d_z + k) f = 0 at the wall.
/// All kernels use the normalization (4 pi nu t)^{-1/2}.

#pragma once

#include "hsv/field.hpp"

#include <map>
#include <span>
#include <vector>

namespace hsv {

struct KernelQuery {
    double t = 0.0;
    double nu = 0.0;
    double xi_mag = 0.0;
    double z = 0.0;
    double zbar = 0.0;
};

/// Half-space heat kernel with the even image, times e^{-nu k^2 t}.
/// Throws std::invalid_argument for t <= 0 or nu <= 0.
double heat_neumann(const KernelQuery& q);

/// Half-space heat kernel with the odd image, times e^{-nu k^2 t}.
double heat_dirichlet(const KernelQuery& q);

/// Robin part R = G1 - heat_neumann:
///   k e^{-k(z+zbar)} erfc((z+zbar)/(2 sqrt(nu t)) - k sqrt(nu t)).
/// Positive, bounded by 2k e^{-k(z+zbar)}, never overflows.
double robin_residual(const KernelQuery& q);

/// Green's function for (d_z + k) f = 0 at z = 0.
double robin_g1(const KernelQuery& q);

enum class KernelKind { Neumann, Dirichlet, Robin };

double kernel_value(KernelKind kind, const KernelQuery& q);

/// Trace G(t, z, 0) of a kernel at the wall source point.
double kernel_trace(KernelKind kind, double t, double nu, double k, double z);

// ---------------------------------------------------------------------------
// Discrete operators

/// Dense square matrix, row-major.
class DenseMatrix {
public:
    DenseMatrix() = default;
    explicit DenseMatrix(int n) : n_(n), a_(static_cast<size_t>(n) * static_cast<size_t>(n), 0.0) {}

    int size() const { return n_; }
    double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * static_cast<size_t>(n_) + static_cast<size_t>(j)]; }
    double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * static_cast<size_t>(n_) + static_cast<size_t>(j)]; }
    std::span<const double> row(int i) const {
        return std::span<const double>(a_).subspan(static_cast<size_t>(i) * static_cast<size_t>(n_), static_cast<size_t>(n_));
    }

    /// out = A f (overwrite) or out += s A f.
    void apply(std::span<const cplx> f, std::span<cplx> out) const;
    void apply_add(std::span<const cplx> f, std::span<cplx> out, double s) const;

    DenseMatrix& axpy(double s, const DenseMatrix& o);

    /// Records the nonzero column range of each row; apply() then skips the
    /// zero tails. Call after the last modification.
    void compress();

private:
    int n_ = 0;
    std::vector<double> a_;
    std::vector<int> lo_, hi_;
};

/// f -> [z_i -> sum_m w_m int_0^Zmax G(tau_m, z_i, zbar) f(zbar) dzbar]
///
/// f is represented by its cubic Hermite interpolant with nodal slopes from
/// the grid's d/dz stencil. Kernel-times-basis integrals use 8-point
/// Gauss-Legendre on subcells no wider than half the kernel's length scale,
/// restricted to where the kernel exceeds e^{-40} of its peak.
DenseMatrix kernel_matrix(const Grid& grid, KernelKind kind, double nu, double k, std::span<const double> taus,
                          std::span<const double> weights);

DenseMatrix kernel_matrix(const Grid& grid, KernelKind kind, double nu, double k, double tau);

/// Evolves one profile by the kernel over time t.
std::vector<cplx> evolve_profile(const Grid& grid, KernelKind kind, double nu, double k, double t,
                                 std::span<const cplx> f);

/// Wall-source integrals int_0^dt phi(s) G(dt - s, z_i, 0) ds for
/// phi = 1 - s/dt (first) and phi = s/dt (second). Computed in sigma = sqrt(dt - s),
/// which removes the (dt - s)^{-1/2} singularity at z = 0.
std::pair<std::vector<double>, std::vector<double>> wall_source_vectors(const Grid& grid, KernelKind kind,
                                                                        double nu, double k, double dt);

/// All matrices one Duhamel step needs for one mode magnitude k.
/// With N, B linear in s over the step:
///   G  = G(dt),
///   A  = sum_m (dt/S)(1 - s_m/dt) G(dt - s_m),   Bm = sum_m (dt/S)(s_m/dt) G(dt - s_m),
///   bA, bB = wall_source_vectors (horizontal kernel only).
struct StepKernels {
    double k = 0.0;
    DenseMatrix G_h, A_h, B_h;  ///< horizontal components (Robin, Neumann at k = 0)
    DenseMatrix G_v, A_v, B_v;  ///< vertical component (Dirichlet)
    std::vector<double> bA, bB;
};

/// Step kernels for every distinct |xi| on the grid, built once per (nu, dt).
class StokesPropagator {
public:
    StokesPropagator(GridPtr grid, double nu, double dt, int s_substeps);

    const Grid& grid() const { return *grid_; }
    double nu() const { return nu_; }
    double dt() const { return dt_; }
    int s_substeps() const { return s_substeps_; }
    /// Kernels for grid mode m.
    const StepKernels& for_mode(int m) const { return classes_[static_cast<size_t>(mode_class_[static_cast<size_t>(m)])]; }
    int n_classes() const { return static_cast<int>(classes_.size()); }

private:
    GridPtr grid_;
    double nu_, dt_;
    int s_substeps_;
    std::vector<int> mode_class_;
    std::vector<StepKernels> classes_;
};

// ---------------------------------------------------------------------------
// Residual bound diagnostic

/// Fit of |R| <= C b e^{-theta b (z+zbar)} + C (nu t)^{-1/2} e^{-theta (z+zbar)^2/(nu t)} e^{-nu k^2 t/8},
/// b = k + nu^{-1/2}, on a log-spaced query grid. theta is the largest value
/// whose best constant C(theta) stays within 25% of C at the smallest theta.
struct ResidualFit {
    double nu = 0.0;
    double theta = 0.0;
    double C = 0.0;
    double C_floor = 0.0;  ///< C at the smallest theta tried
    size_t samples = 0;
};

ResidualFit fit_residual_bound(double nu, std::span<const double> xi_mags = {});

/// Smallest C making the bound hold on the fit grid for a given theta.
double residual_bound_constant(double nu, double theta, std::span<const double> xi_mags = {});

}  // namespace hsv
