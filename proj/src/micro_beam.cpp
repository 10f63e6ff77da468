#include "patchbeam/micro_beam.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "patchbeam/error.hpp"

namespace patchbeam {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Column lookup with periodic wrap; returns -1 when a patch stencil leaves
// the patch.
struct Columns {
    int n;
    bool periodic;
    [[nodiscard]] int operator()(int c) const noexcept {
        if (periodic) return ((c % n) + n) % n;
        return (c < 0 || c >= n) ? -1 : c;
    }
};

void check_shape(const Array2D& a, int cols, int rows, const char* name) {
    PATCHBEAM_REQUIRE(a.cols() == cols && a.rows() == rows, dimension,
                      std::string("array ") + name + " has shape " + std::to_string(a.cols()) +
                          "x" + std::to_string(a.rows()) + ", expected " +
                          std::to_string(cols) + "x" + std::to_string(rows));
}

void check_state(const StaggeredGrid& grid, const BeamState& s) {
    const int cols = grid.columns();
    check_shape(s.u, cols, grid.u_rows(), "u");
    check_shape(s.du, cols, grid.u_rows(), "du");
    check_shape(s.v, cols, grid.v_rows(), "v");
    check_shape(s.dv, cols, grid.v_rows(), "dv");
}

// Graph Laplacian of one velocity family: periodic or edge-supplied in x,
// zero-flux across the free surfaces.
double laplacian_at(const Array2D& a, const Columns& col, int c, int r, double dx, double dy) {
    const double centre = a(c, r);
    const double lx = (a(col(c + 1), r) - 2.0 * centre + a(col(c - 1), r)) / (dx * dx);
    double ly = 0.0;
    if (r > 0) ly += a(c, r - 1) - centre;
    if (r + 1 < a.rows()) ly += a(c, r + 1) - centre;
    return lx + ly / (dy * dy);
}

}  // namespace

void StaggeredGrid::validate() const {
    PATCHBEAM_REQUIRE(nx >= 2 && ny >= 2, parameter, "grid needs nx >= 2 and ny >= 2");
    PATCHBEAM_REQUIRE(dx > 0.0 && dy > 0.0, parameter, "grid spacings must be positive");
}

BeamState BeamState::zeros(const StaggeredGrid& grid) {
    const int cols = grid.columns();
    BeamState s{Array2D(cols, grid.u_rows()), Array2D(cols, grid.v_rows()),
                Array2D(cols, grid.u_rows()), Array2D(cols, grid.v_rows()), 0.0};
    if (!grid.x_periodic) {
        for (Array2D* a : {&s.u, &s.v, &s.du, &s.dv}) {
            for (int r = 0; r < a->rows(); ++r) {
                (*a)(0, r) = kNaN;
                (*a)(grid.nx, r) = kNaN;
            }
        }
    }
    return s;
}

void check_field_matches(const StaggeredGrid& grid, const ElasticityField& field) {
    PATCHBEAM_REQUIRE(field.cols() == grid.columns() && field.ny() == grid.ny, dimension,
                      "elasticity field does not match the grid (" + std::to_string(field.cols()) +
                          "x" + std::to_string(field.ny()) + " vs " +
                          std::to_string(grid.columns()) + "x" + std::to_string(grid.ny) + ")");
}

GhostedDisplacement apply_free_surface(const StaggeredGrid& grid, const BeamState& state,
                                       const ElasticityField& field) {
    grid.validate();
    check_state(grid, state);
    check_field_matches(grid, field);
    const int cols = grid.columns();
    const int ny = grid.ny;
    const Columns col{cols, grid.x_periodic};
    const double ratio = grid.dy / grid.dx;

    GhostedDisplacement g{Array2D(cols, ny + 1), Array2D(cols, ny + 2)};
    for (int c = 0; c < cols; ++c) {
        for (int r = 0; r < grid.u_rows(); ++r) g.u(c, r + 1) = state.u(c, r);
        for (int r = 0; r < grid.v_rows(); ++r) g.v(c, r + 1) = state.v(c, r);
    }

    // Ghost u: zero shear stress on the outermost shear rows.
    for (int c = 0; c < cols; ++c) {
        const int cr = col(c + 1);
        if (cr < 0) {
            g.u(c, 0) = kNaN;
            g.u(c, ny) = kNaN;
            continue;
        }
        g.u(c, 0) = g.u(c, 1) + ratio * (state.v(cr, 0) - state.v(c, 0));
        g.u(c, ny) = g.u(c, ny - 1) - ratio * (state.v(cr, ny - 1) - state.v(c, ny - 1));
    }

    // Ghost v: zero normal stress syy on the boundary normal rows.
    const Array2D& lam = field.lambda_n();
    const Array2D& mu = field.mu_n();
    for (int c = 0; c < cols; ++c) {
        const int cl = col(c - 1);
        if (cl < 0) {
            g.v(c, 0) = kNaN;
            g.v(c, ny + 1) = kNaN;
            continue;
        }
        const double w0 = lam(c, 0) / (lam(c, 0) + 2.0 * mu(c, 0));
        const double w1 = lam(c, ny) / (lam(c, ny) + 2.0 * mu(c, ny));
        g.v(c, 0) = g.v(c, 1) + ratio * w0 * (g.u(c, 0) - g.u(cl, 0));
        g.v(c, ny + 1) = g.v(c, ny) - ratio * w1 * (g.u(c, ny) - g.u(cl, ny));
    }
    return g;
}

StressField compute_stresses(const StaggeredGrid& grid, const GhostedDisplacement& g,
                             const ElasticityField& field) {
    const int cols = grid.columns();
    const int ny = grid.ny;
    check_shape(g.u, cols, ny + 1, "ghosted u");
    check_shape(g.v, cols, ny + 2, "ghosted v");
    check_field_matches(grid, field);
    const Columns col{cols, grid.x_periodic};
    const double dx = grid.dx;
    const double dy = grid.dy;

    StressField s{Array2D(cols, ny + 1, kNaN), Array2D(cols, ny + 1, kNaN), Array2D(cols, ny, kNaN)};
    const Array2D& lam = field.lambda_n();
    const Array2D& mun = field.mu_n();
    for (int j = 0; j <= ny; ++j) {
        for (int c = 0; c < cols; ++c) {
            const int cl = col(c - 1);
            if (cl < 0) continue;
            const double exx = (g.u(c, j) - g.u(cl, j)) / dx;
            const double eyy = (g.v(c, j + 1) - g.v(c, j)) / dy;
            const double l = lam(c, j);
            const double p = l + 2.0 * mun(c, j);
            s.sxx(c, j) = p * exx + l * eyy;
            s.syy(c, j) = l * exx + p * eyy;
        }
    }
    const Array2D& mus = field.mu_s();
    for (int j = 0; j < ny; ++j) {
        for (int c = 0; c < cols; ++c) {
            const int cr = col(c + 1);
            if (cr < 0) continue;
            const double gamma = (g.u(c, j + 1) - g.u(c, j)) / dy + (g.v(cr, j + 1) - g.v(c, j + 1)) / dx;
            s.sxy(c, j) = mus(c, j) * gamma;
        }
    }
    return s;
}

BeamState acceleration_rhs(const StaggeredGrid& grid, const BeamState& state,
                           const ElasticityField& field, double kappa) {
    grid.validate();
    check_state(grid, state);
    if (!grid.x_periodic) {
        for (const Array2D* a : {&state.u, &state.v, &state.du, &state.dv}) {
            for (int r = 0; r < a->rows(); ++r) {
                PATCHBEAM_REQUIRE(std::isfinite((*a)(0, r)) && std::isfinite((*a)(grid.nx, r)),
                                  coupling_contract,
                                  "patch edge columns were not filled before the micro RHS call");
            }
        }
    }

    const GhostedDisplacement g = apply_free_surface(grid, state, field);
    const StressField s = compute_stresses(grid, g, field);
    const int cols = grid.columns();
    const Columns col{cols, grid.x_periodic};
    const double dx = grid.dx;
    const double dy = grid.dy;

    BeamState d{Array2D(cols, grid.u_rows()), Array2D(cols, grid.v_rows()),
                Array2D(cols, grid.u_rows()), Array2D(cols, grid.v_rows()), state.t};

    for (int c = grid.first_evolved(); c < grid.end_evolved(); ++c) {
        const int cr = col(c + 1);
        const int cl = col(c - 1);
        for (int r = 0; r < grid.u_rows(); ++r) {
            d.u(c, r) = state.du(c, r);
            double a = (s.sxx(cr, r + 1) - s.sxx(c, r + 1)) / dx + (s.sxy(c, r + 1) - s.sxy(c, r)) / dy;
            if (kappa != 0.0) a += kappa * laplacian_at(state.du, col, c, r, dx, dy);
            d.du(c, r) = a;
        }
        for (int r = 0; r < grid.v_rows(); ++r) {
            d.v(c, r) = state.dv(c, r);
            double a = (s.sxy(c, r) - s.sxy(cl, r)) / dx + (s.syy(c, r + 1) - s.syy(c, r)) / dy;
            if (kappa != 0.0) a += kappa * laplacian_at(state.dv, col, c, r, dx, dy);
            d.dv(c, r) = a;
        }
    }
    return d;
}

Energy energy(const StaggeredGrid& grid, const BeamState& state, const ElasticityField& field) {
    const GhostedDisplacement g = apply_free_surface(grid, state, field);
    const int cols = grid.columns();
    const int ny = grid.ny;
    const Columns col{cols, grid.x_periodic};
    const double dx = grid.dx;
    const double dy = grid.dy;

    Energy e;
    for (int c = grid.first_evolved(); c < grid.end_evolved(); ++c) {
        for (int r = 0; r < grid.u_rows(); ++r) e.kinetic += state.du(c, r) * state.du(c, r);
        for (int r = 0; r < grid.v_rows(); ++r) e.kinetic += state.dv(c, r) * state.dv(c, r);
    }
    e.kinetic *= 0.5 * dx * dy;

    const Array2D& lam = field.lambda_n();
    const Array2D& mun = field.mu_n();
    const Array2D& mus = field.mu_s();
    double w = 0.0;
    for (int c = grid.first_evolved(); c < grid.end_evolved(); ++c) {
        const int cl = col(c - 1);
        const int cr = col(c + 1);
        {
            for (int j = 1; j < ny; ++j) {
                const double exx = (g.u(c, j) - g.u(cl, j)) / dx;
                const double eyy = (g.v(c, j + 1) - g.v(c, j)) / dy;
                const double l = lam(c, j);
                const double p = l + 2.0 * mun(c, j);
                w += p * (exx * exx + eyy * eyy) + 2.0 * l * exx * eyy;
            }
        }
        {
            for (int j = 1; j + 1 < ny; ++j) {
                const double gamma =
                    (g.u(c, j + 1) - g.u(c, j)) / dy + (g.v(cr, j + 1) - g.v(c, j + 1)) / dx;
                w += mus(c, j) * gamma * gamma;
            }
        }
    }
    e.strain = 0.5 * w * dx * dy;
    return e;
}

double dissipation_rate(const StaggeredGrid& grid, const BeamState& state, double kappa) {
    const Columns col{grid.columns(), grid.x_periodic};
    double sum = 0.0;
    for (int c = grid.first_evolved(); c < grid.end_evolved(); ++c) {
        for (int r = 0; r < grid.u_rows(); ++r)
            sum += state.du(c, r) * laplacian_at(state.du, col, c, r, grid.dx, grid.dy);
        for (int r = 0; r < grid.v_rows(); ++r)
            sum += state.dv(c, r) * laplacian_at(state.dv, col, c, r, grid.dx, grid.dy);
    }
    return kappa * sum * grid.dx * grid.dy;
}

void pack_into(const StaggeredGrid& grid, const BeamState& state, std::span<double> out) {
    PATCHBEAM_REQUIRE(out.size() == static_cast<std::size_t>(grid.dof()), dimension,
                      "flat state has the wrong length");
    std::size_t k = 0;
    for (const Array2D* a : {&state.u, &state.v, &state.du, &state.dv})
        for (int r = 0; r < a->rows(); ++r)
            for (int c = grid.first_evolved(); c < grid.end_evolved(); ++c) out[k++] = (*a)(c, r);
}

std::vector<double> pack(const StaggeredGrid& grid, const BeamState& state) {
    std::vector<double> out(static_cast<std::size_t>(grid.dof()));
    pack_into(grid, state, out);
    return out;
}

void unpack_into(const StaggeredGrid& grid, std::span<const double> flat, BeamState& state) {
    PATCHBEAM_REQUIRE(flat.size() == static_cast<std::size_t>(grid.dof()), dimension,
                      "flat state has the wrong length");
    check_state(grid, state);
    std::size_t k = 0;
    for (Array2D* a : {&state.u, &state.v, &state.du, &state.dv})
        for (int r = 0; r < a->rows(); ++r)
            for (int c = grid.first_evolved(); c < grid.end_evolved(); ++c) (*a)(c, r) = flat[k++];
}

}  // namespace patchbeam

namespace patchbeam {

RhsFn make_full_rhs(StaggeredGrid grid, ElasticityField field, double kappa) {
    grid.validate();
    PATCHBEAM_REQUIRE(grid.x_periodic, parameter, "full-domain RHS needs a periodic grid");
    check_field_matches(grid, field);
    return [grid, field = std::move(field), kappa, scratch = BeamState::zeros(grid)](
               std::span<const double> x, std::span<double> dxdt) mutable {
        unpack_into(grid, x, scratch);
        pack_into(grid, acceleration_rhs(grid, scratch, field, kappa), dxdt);
    };
}

}  // namespace patchbeam
