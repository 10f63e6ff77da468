#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "patchbeam/hetero_field.hpp"
#include "patchbeam/micro_beam.hpp"
#include "patchbeam/system.hpp"

namespace patchbeam {

enum class CouplingKind {
    spectral,       ///< trigonometric interpolation through all patch centres
    polynomial,     ///< Lagrange interpolation through the degree+1 nearest centres
    periodic_wrap,  ///< single patch closed on itself; reproduces the full domain
};

struct Coupling {
    CouplingKind kind = CouplingKind::spectral;
    int degree = 2;               ///< polynomial only; even
    bool nyquist_cosine = false;  ///< spectral with even N: shift the Nyquist mode by cos(k delta)

    [[nodiscard]] static Coupling spectral() { return {}; }
    [[nodiscard]] static Coupling polynomial(int p) { return {CouplingKind::polynomial, p, false}; }
    [[nodiscard]] static Coupling periodic_wrap() { return {CouplingKind::periodic_wrap, 0, false}; }
    [[nodiscard]] std::string name() const;
};

/// Layout of N congruent patches on a periodic beam of length N * H.
///
/// `spacing_cells` is H in micro-cells and `n_sub` the number of cells
/// between the two edge columns of a patch, so each node family has
/// n_sub + 1 columns with a single centre column at n_sub / 2. For
/// macroscale exactness over heterogeneity of period p the centre-to-edge
/// distance n_sub / 2 must be a multiple of p, as must `spacing_cells`.
struct PatchConfig {
    int n_patches = 5;
    int spacing_cells = 32;
    int n_sub = 8;
    int ny = 4;
    Coupling coupling;

    [[nodiscard]] double ratio() const noexcept {
        return static_cast<double>(n_sub) / static_cast<double>(spacing_cells);
    }
    [[nodiscard]] int full_nx() const noexcept { return n_patches * spacing_cells; }
    void validate(int period_x) const;
};

/// Trigonometric interpolant through (k H, values[k]) evaluated at k H + shift,
/// by DFT, per-mode phase exp(i kappa_m shift) and inverse DFT.
[[nodiscard]] std::vector<double> spectral_edge_values(std::span<const double> values, double shift,
                                                       double spacing, bool nyquist_cosine = false);

/// Degree-p Lagrange interpolant through the p+1 centres nearest to patch k,
/// evaluated at k H + shift. A periodic stencil wraps around the ring; the
/// aperiodic variant clamps the stencil inside [0, N).
[[nodiscard]] std::vector<double> polynomial_edge_values(std::span<const double> values,
                                                         double shift, double spacing, int degree,
                                                         bool periodic = true);

/// Weights w_j of the Lagrange interpolant through `nodes` at `x`.
[[nodiscard]] std::vector<double> lagrange_weights(std::span<const double> nodes, double x);

/// Dense N x N operator mapping centre values to edge values at `shift`.
[[nodiscard]] Eigen::MatrixXd edge_operator(const Coupling& coupling, int n_patches, double shift,
                                            double spacing);

class PatchSet {
public:
    PatchSet(PatchConfig config, const ElasticityField& full_field, double dx, double dy);

    [[nodiscard]] const PatchConfig& config() const noexcept { return config_; }
    [[nodiscard]] int size() const noexcept { return config_.n_patches; }
    [[nodiscard]] const StaggeredGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] const ElasticityField& field(int k) const { return fields_.at(k); }
    [[nodiscard]] BeamState& state(int k) { return states_.at(k); }
    [[nodiscard]] const BeamState& state(int k) const { return states_.at(k); }

    [[nodiscard]] double spacing() const noexcept { return config_.spacing_cells * grid_.dx; }
    [[nodiscard]] double centre_x(int k) const noexcept { return k * spacing(); }
    /// Full-domain column index of patch column 0 (unwrapped).
    [[nodiscard]] int first_column(int k) const noexcept;
    [[nodiscard]] int centre_column() const noexcept { return config_.n_sub / 2; }
    /// Centre-to-edge offsets, identical for both families.
    [[nodiscard]] double left_shift() const noexcept;
    [[nodiscard]] double right_shift() const noexcept;

    [[nodiscard]] int dof() const noexcept { return size() * grid_.dof(); }
    [[nodiscard]] int full_dof() const noexcept;
    [[nodiscard]] double dof_ratio() const noexcept {
        return static_cast<double>(dof()) / static_cast<double>(full_dof());
    }

    /// Interpolate every row of u, v, du, dv from the centre columns into
    /// the edge columns of every patch.
    void fill_edges();

    /// Copy a full-domain state onto every patch, edges included.
    void restrict_from(const StaggeredGrid& full_grid, const BeamState& full);

    void pack_into(std::span<double> out) const;
    void unpack_from(std::span<const double> flat);

    /// fill_edges followed by the unmodified micro RHS on each patch.
    void rhs(std::span<const double> x, std::span<double> dxdt, double kappa);

private:
    PatchConfig config_;
    StaggeredGrid grid_;
    std::vector<ElasticityField> fields_;
    std::vector<BeamState> states_;
    Eigen::MatrixXd left_op_, right_op_;
};

[[nodiscard]] inline PatchSet make_patches(const PatchConfig& config, const ElasticityField& field,
                                           double dx, double dy) {
    return PatchSet(config, field, dx, dy);
}

/// Owns a copy of the patch set as scratch; the returned function is not
/// re-entrant.
[[nodiscard]] RhsFn make_patched_rhs(PatchSet set, double kappa);

}  // namespace patchbeam
