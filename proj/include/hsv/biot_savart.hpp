/// @file biot_savart.hpp
/// @brief Per-mode velocity recovery u = curl (-Delta)^{-1} omega.
///
/// For a mode of magnitude k the one-sided exponential transforms
///   L(z) = int_0^z e^{-k(z-s)} g,   M(z) = e^{-kz} int_0^z e^{-ks} g,
///   U(z) = int_z^inf e^{-k(s-z)} g, V(z) = e^{-2kz} U(z)
/// give the Dirichlet and Neumann inverses of (k^2 - d_z^2):
///   P_D = (L - M + U - V)/(2k),  P_N = (L + M + U + V)/(2k).
/// The vector potential is W = (P_D w1, P_D w2, P_N w3); this choice makes
/// curl W reproduce a no-slip velocity whose vorticity is w.

#pragma once

#include "hsv/field.hpp"

#include <map>
#include <vector>

namespace hsv {

struct ModeProfile {
    Mode xi;
    std::vector<cplx> values;
};

enum class WallCondition { Dirichlet, Neumann };

/// Exponential transforms of one profile, on the grid nodes.
struct ExpTransforms {
    std::vector<cplx> L, M, U, V;
};

/// Transform tables for every distinct |xi| of a grid. The profile is
/// interpolated by cubic Hermite cells with sixth-order nodal slopes; cell
/// moments of e^{-k s} against the basis use 16-point Gauss-Legendre.
class BiotSavart {
public:
    explicit BiotSavart(GridPtr grid);

    const Grid& grid() const { return *grid_; }

    /// k = 0 is allowed: then L is the running integral and U the tail integral.
    ExpTransforms transforms(std::span<const cplx> g, int k2) const;

    /// (i/2)(xi_dir/k)[(L -+ M) + (U -+ V)] for dir 1, 2 and
    /// (1/2)[-(L -+ M) + (U +- V)] for dir 3; upper signs for Dirichlet.
    /// Throws std::invalid_argument for xi = 0 or dir outside 1..3.
    ModeProfile grad_inv_laplacian(const ModeProfile& w, int dir, WallCondition wall = WallCondition::Dirichlet) const;

    struct Velocity {
        SpectralField u;     ///< 3 components
        SpectralField grad;  ///< 9 components, index 3*i + j holds d_j u_i (0-based)
        SpectralField u3z;   ///< u_3 / z, with the z = 0 limit d_z u_3(0)
    };

    /// Throws std::invalid_argument when omega is not Hermitian-symmetric
    /// or not a 3-component field on this grid.
    Velocity recover(const SpectralField& omega, bool with_gradient = true) const;

private:
    struct Table {
        std::vector<double> decay;    // e^{-k h_j}
        std::vector<double> edge;     // e^{-k (2 z_j + h_j)}
        std::vector<double> m00, m10, m01, m11;  // int_0^1 e^{-k h theta} basis(theta) dtheta
        std::vector<double> e2;       // e^{-2 k z_j}
        std::vector<double> em1z;     // -expm1(-2 k z_j)/z_j, with limit 2k at z = 0
    };
    const Table& table(int k2) const;

    GridPtr grid_;
    std::map<int, Table> tables_;
};

ModeProfile grad_inv_laplacian(const GridPtr& grid, const ModeProfile& w, int dir);

SpectralField velocity_from_vorticity(const SpectralField& omega);

/// 9-component gradient, index 3*i + j holds d_j u_i.
SpectralField velocity_gradient(const SpectralField& omega);

SpectralField u3_over_z(const SpectralField& omega);

/// Adds to omega_h, mode by mode, the transverse profile that cancels the
/// recovered u_h(0). Divergence, omega_3 and omega_h(0) are unchanged. This
/// removes the no-slip defect that truncating the domain at Z_max leaves.
void impose_discrete_noslip(SpectralField& omega);

/// Tolerance used to accept Hermitian symmetry of the input vorticity.
double reality_tolerance(const SpectralField& f);

}  // namespace hsv
