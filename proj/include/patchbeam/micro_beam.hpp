#pragma once

#include <span>
#include <vector>

#include "patchbeam/array2d.hpp"
#include "patchbeam/hetero_field.hpp"
#include "patchbeam/system.hpp"

namespace patchbeam {

/// Staggered micro-grid of a 2D beam.
///
/// Site map (cell units): u, du at (x_{i+1/2}, y_j) for rows j = 1..ny-1;
/// v, dv at (x_i, y_{j+1/2}) for rows j = 0..ny-1; sxx, syy at (x_i, y_j);
/// sxy at (x_{i+1/2}, y_{j+1/2}). The free surfaces carry the outermost v
/// and shear rows; ghost u rows sit at y_0 and y_ny.
///
/// A periodic grid has nx columns per family. A patch grid (x_periodic =
/// false) has nx + 1 columns per family: columns 0 and nx are edge columns
/// whose values are supplied from outside; only columns 1..nx-1 evolve.
struct StaggeredGrid {
    int nx = 0;
    int ny = 0;
    double dx = 1.0;
    double dy = 1.0;
    bool x_periodic = true;

    [[nodiscard]] int columns() const noexcept { return x_periodic ? nx : nx + 1; }
    [[nodiscard]] int u_rows() const noexcept { return ny - 1; }
    [[nodiscard]] int v_rows() const noexcept { return ny; }
    [[nodiscard]] int first_evolved() const noexcept { return x_periodic ? 0 : 1; }
    [[nodiscard]] int end_evolved() const noexcept { return nx; }
    [[nodiscard]] int evolved_columns() const noexcept { return x_periodic ? nx : nx - 1; }
    /// Number of evolved scalars: displacement plus velocity of both families.
    [[nodiscard]] int dof() const noexcept {
        return 2 * (u_rows() + v_rows()) * evolved_columns();
    }

    [[nodiscard]] double u_x(int i) const noexcept { return (i + 0.5) * dx; }
    [[nodiscard]] double u_y(int r) const noexcept { return (r + 1) * dy; }
    [[nodiscard]] double v_x(int i) const noexcept { return i * dx; }
    [[nodiscard]] double v_y(int r) const noexcept { return (r + 0.5) * dy; }

    void validate() const;
};

struct BeamState {
    Array2D u, v, du, dv;
    double t = 0.0;

    /// All-zero state. Patch grids get NaN edge columns so that a forgotten
    /// edge fill is caught by acceleration_rhs.
    [[nodiscard]] static BeamState zeros(const StaggeredGrid& grid);
};

/// Displacements extended by one ghost row beyond each free surface:
/// u rows 0..ny map to y_0..y_ny, v rows 0..ny+1 map to y_{-1/2}..y_{ny+1/2}.
struct GhostedDisplacement {
    Array2D u, v;
};

/// Stresses: sxx, syy on ny+1 normal rows; sxy on ny shear rows. Entries
/// whose stencil leaves a patch are NaN.
struct StressField {
    Array2D sxx, syy, sxy;
};

struct Energy {
    double kinetic = 0.0;
    double strain = 0.0;
    [[nodiscard]] double total() const noexcept { return kinetic + strain; }
};

[[nodiscard]] GhostedDisplacement apply_free_surface(const StaggeredGrid& grid,
                                                     const BeamState& state,
                                                     const ElasticityField& field);

[[nodiscard]] StressField compute_stresses(const StaggeredGrid& grid,
                                           const GhostedDisplacement& disp,
                                           const ElasticityField& field);

/// Time derivative of the state: (du, dv, ddu, ddv) stored in the u, v, du,
/// dv slots of the returned BeamState. Edge columns of a patch grid carry
/// zeros; they are not dynamical.
[[nodiscard]] BeamState acceleration_rhs(const StaggeredGrid& grid, const BeamState& state,
                                         const ElasticityField& field, double kappa);

/// Kinetic and strain energy at unit density. Strain is summed over the
/// normal rows 1..ny-1 and shear rows 1..ny-2, the stress points not
/// pinned to zero by the free surface. On a patch grid only the stress
/// points of the evolved columns count, so the edges add nothing.
[[nodiscard]] Energy energy(const StaggeredGrid& grid, const BeamState& state,
                            const ElasticityField& field);

/// kappa * <velocity, Laplacian(velocity)> * dx * dy, the exact rate of
/// energy change of the semi-discrete system. Never positive.
[[nodiscard]] double dissipation_rate(const StaggeredGrid& grid, const BeamState& state,
                                      double kappa);

/// Flattening of the evolved columns: u, v, du, dv blocks, each row-major.
[[nodiscard]] std::vector<double> pack(const StaggeredGrid& grid, const BeamState& state);
void pack_into(const StaggeredGrid& grid, const BeamState& state, std::span<double> out);
/// Writes evolved entries of `flat` into `state`; edge columns are untouched.
void unpack_into(const StaggeredGrid& grid, std::span<const double> flat, BeamState& state);

void check_field_matches(const StaggeredGrid& grid, const ElasticityField& field);

/// Flat-vector RHS of the periodic full-domain beam.
[[nodiscard]] RhsFn make_full_rhs(StaggeredGrid grid, ElasticityField field, double kappa);

}  // namespace patchbeam
