#include "patchbeam/patch_scheme.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "patchbeam/error.hpp"

namespace patchbeam {

std::string Coupling::name() const {
    switch (kind) {
        case CouplingKind::spectral: return "spectral";
        case CouplingKind::polynomial: return "polynomial(" + std::to_string(degree) + ")";
        case CouplingKind::periodic_wrap: return "periodic_wrap";
    }
    return "unknown";
}

void PatchConfig::validate(int period_x) const {
    PATCHBEAM_REQUIRE(ny >= 2, parameter, "patches need ny >= 2");
    PATCHBEAM_REQUIRE(spacing_cells >= 2, geometry, "patch spacing must be at least two cells");
    if (coupling.kind == CouplingKind::periodic_wrap) {
        PATCHBEAM_REQUIRE(n_patches == 1 && n_sub == spacing_cells + 1, geometry,
                          "periodic wrap needs a single patch with n_sub = spacing + 1");
        return;
    }
    PATCHBEAM_REQUIRE(n_patches >= 3, parameter, "interpolating coupling needs at least 3 patches");
    if (coupling.kind == CouplingKind::spectral) {
        PATCHBEAM_REQUIRE(n_patches % 2 == 1 || coupling.nyquist_cosine, parameter,
                          "spectral coupling with even N needs the Nyquist cosine treatment");
    } else {
        PATCHBEAM_REQUIRE(coupling.degree >= 0 && coupling.degree % 2 == 0, parameter,
                          "polynomial coupling degree must be even");
        PATCHBEAM_REQUIRE(coupling.degree < n_patches, stencil,
                          "polynomial degree " + std::to_string(coupling.degree) +
                              " needs more than that many patches");
    }
    PATCHBEAM_REQUIRE(n_sub >= 2 && n_sub % 2 == 0, geometry,
                      "n_sub must be even so each family has a single centre column");
    PATCHBEAM_REQUIRE(n_sub < spacing_cells, geometry,
                      "patches overlap: n_sub=" + std::to_string(n_sub) +
                          " cells is not less than the spacing of " +
                          std::to_string(spacing_cells) + " cells");
    PATCHBEAM_REQUIRE(spacing_cells % period_x == 0, periodicity,
                      "patch spacing is not a whole number of heterogeneity periods");
    PATCHBEAM_REQUIRE((n_sub / 2) % period_x == 0, periodicity,
                      "centre-to-edge distance n_sub/2=" + std::to_string(n_sub / 2) +
                          " is not a whole number of heterogeneity periods (" +
                          std::to_string(period_x) + ")");
}

std::vector<double> spectral_edge_values(std::span<const double> values, double shift,
                                         double spacing, bool nyquist_cosine) {
    using cplx = std::complex<double>;
    const int n = static_cast<int>(values.size());
    PATCHBEAM_REQUIRE(n >= 1, parameter, "spectral interpolation needs at least one value");
    PATCHBEAM_REQUIRE(n % 2 == 1 || nyquist_cosine, parameter,
                      "spectral interpolation with even N needs the Nyquist cosine treatment");
    const double two_pi = 2.0 * std::numbers::pi;
    const double domain = n * spacing;

    std::vector<cplx> modes(static_cast<std::size_t>(n));
    for (int m = 0; m < n; ++m) {
        cplx acc = 0.0;
        for (int k = 0; k < n; ++k) acc += values[k] * std::polar(1.0, -two_pi * m * k / n);
        const int signed_m = (2 * m <= n) ? m : m - n;
        const double wavenumber = two_pi * signed_m / domain;
        if (n % 2 == 0 && 2 * m == n)
            acc *= std::cos(wavenumber * shift);
        else
            acc *= std::polar(1.0, wavenumber * shift);
        modes[m] = acc;
    }
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        cplx acc = 0.0;
        for (int m = 0; m < n; ++m) acc += modes[m] * std::polar(1.0, two_pi * m * k / n);
        out[k] = acc.real() / n;
    }
    return out;
}

std::vector<double> lagrange_weights(std::span<const double> nodes, double x) {
    const std::size_t n = nodes.size();
    std::vector<double> w(n, 1.0);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t m = 0; m < n; ++m)
            if (m != j) w[j] *= (x - nodes[m]) / (nodes[j] - nodes[m]);
    return w;
}

std::vector<double> polynomial_edge_values(std::span<const double> values, double shift,
                                           double spacing, int degree, bool periodic) {
    const int n = static_cast<int>(values.size());
    PATCHBEAM_REQUIRE(degree >= 0 && degree % 2 == 0, parameter,
                      "polynomial coupling degree must be even");
    PATCHBEAM_REQUIRE(degree < n, stencil,
                      "polynomial degree " + std::to_string(degree) + " needs more than " +
                          std::to_string(n) + " patches");
    const int half = degree / 2;
    std::vector<double> out(static_cast<std::size_t>(n));
    std::vector<double> nodes(static_cast<std::size_t>(degree + 1));
    for (int k = 0; k < n; ++k) {
        const int start = periodic ? k - half : std::clamp(k - half, 0, n - 1 - degree);
        for (int d = 0; d <= degree; ++d) nodes[d] = (start + d - k) * spacing;
        const std::vector<double> w = lagrange_weights(nodes, shift);
        double acc = 0.0;
        for (int d = 0; d <= degree; ++d) acc += w[d] * values[((start + d) % n + n) % n];
        out[k] = acc;
    }
    return out;
}

Eigen::MatrixXd edge_operator(const Coupling& coupling, int n_patches, double shift,
                              double spacing) {
    Eigen::MatrixXd op(n_patches, n_patches);
    std::vector<double> unit(static_cast<std::size_t>(n_patches), 0.0);
    for (int j = 0; j < n_patches; ++j) {
        std::fill(unit.begin(), unit.end(), 0.0);
        unit[j] = 1.0;
        const std::vector<double> col =
            coupling.kind == CouplingKind::spectral
                ? spectral_edge_values(unit, shift, spacing, coupling.nyquist_cosine)
                : polynomial_edge_values(unit, shift, spacing, coupling.degree);
        for (int k = 0; k < n_patches; ++k) op(k, j) = col[k];
    }
    return op;
}

PatchSet::PatchSet(PatchConfig config, const ElasticityField& full_field, double dx, double dy)
    : config_(config) {
    config_.validate(full_field.period_x());
    PATCHBEAM_REQUIRE(full_field.cols() == config_.full_nx() && full_field.ny() == config_.ny,
                      dimension,
                      "field is " + std::to_string(full_field.cols()) + "x" +
                          std::to_string(full_field.ny()) + " but the patch layout spans " +
                          std::to_string(config_.full_nx()) + "x" + std::to_string(config_.ny));
    grid_ = StaggeredGrid{config_.n_sub, config_.ny, dx, dy, false};
    grid_.validate();
    for (int k = 0; k < size(); ++k) {
        fields_.push_back(full_field.window(first_column(k), grid_.columns()));
        states_.push_back(BeamState::zeros(grid_));
    }
    if (config_.coupling.kind != CouplingKind::periodic_wrap) {
        left_op_ = edge_operator(config_.coupling, size(), left_shift(), spacing());
        right_op_ = edge_operator(config_.coupling, size(), right_shift(), spacing());
    }
}

int PatchSet::first_column(int k) const noexcept {
    return k * config_.spacing_cells - config_.n_sub / 2;
}

double PatchSet::left_shift() const noexcept {
    return grid_.v_x(0) - grid_.v_x(centre_column());
}

double PatchSet::right_shift() const noexcept {
    return grid_.v_x(config_.n_sub) - grid_.v_x(centre_column());
}

int PatchSet::full_dof() const noexcept {
    StaggeredGrid full{config_.full_nx(), config_.ny, grid_.dx, grid_.dy, true};
    return full.dof();
}

void PatchSet::fill_edges() {
    const int n = config_.n_sub;
    if (config_.coupling.kind == CouplingKind::periodic_wrap) {
        BeamState& s = states_.front();
        for (Array2D* a : {&s.u, &s.v, &s.du, &s.dv}) {
            for (int r = 0; r < a->rows(); ++r) {
                (*a)(0, r) = (*a)(n - 1, r);
                (*a)(n, r) = (*a)(1, r);
            }
        }
        return;
    }

    const int centre = centre_column();
    Eigen::VectorXd centres(size());
    auto fill_array = [&](Array2D BeamState::*member) {
        const int rows = (states_.front().*member).rows();
        for (int r = 0; r < rows; ++r) {
            for (int k = 0; k < size(); ++k) centres[k] = (states_[k].*member)(centre, r);
            const Eigen::VectorXd left = left_op_ * centres;
            const Eigen::VectorXd right = right_op_ * centres;
            for (int k = 0; k < size(); ++k) {
                (states_[k].*member)(0, r) = left[k];
                (states_[k].*member)(n, r) = right[k];
            }
        }
    };
    fill_array(&BeamState::u);
    fill_array(&BeamState::v);
    fill_array(&BeamState::du);
    fill_array(&BeamState::dv);
}

void PatchSet::restrict_from(const StaggeredGrid& full_grid, const BeamState& full) {
    PATCHBEAM_REQUIRE(full_grid.x_periodic && full_grid.nx == config_.full_nx() &&
                          full_grid.ny == config_.ny,
                      dimension, "full-domain grid does not match the patch layout");
    const int nx = full_grid.nx;
    for (int k = 0; k < size(); ++k) {
        BeamState& s = states_[k];
        const int first = first_column(k);
        for (int c = 0; c < grid_.columns(); ++c) {
            const int src = ((first + c) % nx + nx) % nx;
            for (int r = 0; r < grid_.u_rows(); ++r) {
                s.u(c, r) = full.u(src, r);
                s.du(c, r) = full.du(src, r);
            }
            for (int r = 0; r < grid_.v_rows(); ++r) {
                s.v(c, r) = full.v(src, r);
                s.dv(c, r) = full.dv(src, r);
            }
        }
        s.t = full.t;
    }
}

void PatchSet::pack_into(std::span<double> out) const {
    PATCHBEAM_REQUIRE(out.size() == static_cast<std::size_t>(dof()), dimension,
                      "flat patch state has the wrong length");
    const auto per = static_cast<std::size_t>(grid_.dof());
    for (int k = 0; k < size(); ++k) patchbeam::pack_into(grid_, states_[k], out.subspan(k * per, per));
}

void PatchSet::unpack_from(std::span<const double> flat) {
    PATCHBEAM_REQUIRE(flat.size() == static_cast<std::size_t>(dof()), dimension,
                      "flat patch state has the wrong length");
    const auto per = static_cast<std::size_t>(grid_.dof());
    for (int k = 0; k < size(); ++k) unpack_into(grid_, flat.subspan(k * per, per), states_[k]);
}

void PatchSet::rhs(std::span<const double> x, std::span<double> dxdt, double kappa) {
    unpack_from(x);
    fill_edges();
    PATCHBEAM_REQUIRE(dxdt.size() == static_cast<std::size_t>(dof()), dimension,
                      "flat patch derivative has the wrong length");
    const auto per = static_cast<std::size_t>(grid_.dof());
    for (int k = 0; k < size(); ++k) {
        const BeamState d = acceleration_rhs(grid_, states_[k], fields_[k], kappa);
        patchbeam::pack_into(grid_, d, dxdt.subspan(k * per, per));
    }
}

RhsFn make_patched_rhs(PatchSet set, double kappa) {
    return [set = std::move(set), kappa](std::span<const double> x, std::span<double> dxdt) mutable {
        set.rhs(x, dxdt, kappa);
    };
}

}  // namespace patchbeam
