#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "patchbeam/config.hpp"
#include "patchbeam/integrator.hpp"
#include "patchbeam/io.hpp"
#include "patchbeam/patch_scheme.hpp"
#include "patchbeam/spectra.hpp"

namespace patchbeam {

/// Largest system handed to the dense eigensolver.
inline constexpr int kDenseEigenCap = 10000;

/// The configured field file if set, otherwise a fresh draw from the recipe.
[[nodiscard]] ElasticityField obtain_field(const SimConfig& cfg);

/// Sinusoidal compression plus bending on a periodic grid of length `length`.
[[nodiscard]] BeamState initial_state(const StaggeredGrid& grid, const InitialCondition& ic,
                                      double length);

struct SpectrumRun {
    std::vector<cplx> eigenvalues;
    Classification classification;
    int dof = 0;
    double invariance_residual = 0.0;
    int zero_count = 0;        ///< |lambda| < 1e-6
    double max_abs_re = 0.0;
    double dof_ratio = 1.0;    ///< patched / full; 1 for the full domain
};

/// Jacobian spectrum (rigid translations deflated) of the configured mode.
[[nodiscard]] SpectrumRun run_spectrum(const SimConfig& cfg, const ElasticityField& field);

[[nodiscard]] MacroReference full_reference(const SimConfig& cfg, const ElasticityField& field);

struct CompareRow {
    double r = 0.0;
    int n_sub = 0;
    int dof = 0;
    Comparison comparison;
    double gap_ratio = 0.0;
};

/// Patch spectrum at ratio r against a full-domain macro reference.
/// Throws a pairing failure when the sets cannot be matched.
[[nodiscard]] CompareRow compare_ratio(const SimConfig& cfg, const ElasticityField& field,
                                       const MacroReference& reference, double r);

struct ConvergenceRow {
    int n_patches = 0;
    double spacing = 0.0;  ///< H
    double ratio = 0.0;
    double err_compression = 0.0;
    double err_bending = 0.0;
};

struct ConvergenceResult {
    std::vector<ConvergenceRow> rows;
    double slope = 0.0;     ///< of log(err_compression) against log(H)
    double residual = 0.0;  ///< RMS residual of the fit in log space
    bool at_floor = false;  ///< every error below the round-off floor; slope meaningless
};

inline constexpr double kRoundOffFloor = 1e-9;

/// Macroscale error against the Bloch reference at the fundamental
/// wavenumber, for each patch count in cfg.convergence.n_list with fixed
/// beam resolution and patch width. Patch eigenvalues at that wavenumber
/// come from the block-circulant patch Jacobian, so each branch is compared
/// with its own reference mode.
[[nodiscard]] ConvergenceResult run_convergence(const SimConfig& cfg);

/// Least-squares slope and RMS residual of y against x.
[[nodiscard]] std::pair<double, double> fit_line(const std::vector<double>& x,
                                                 const std::vector<double>& y);

struct EnergySample {
    int step = 0;
    double t = 0.0;
    double kinetic = 0.0;
    double strain = 0.0;
    [[nodiscard]] double total() const noexcept { return kinetic + strain; }
};

struct SimulationResult {
    IntegrationResult integration;
    std::vector<EnergySample> energy;
};

/// Receives each emitted frame as snapshot segments in full-beam columns.
using FrameWriter = std::function<void(int frame, int step, double t,
                                       const std::vector<SnapshotSegment>& segments)>;

/// Integrates the configured mode from the default initial condition.
[[nodiscard]] SimulationResult run_simulation(const SimConfig& cfg, const ElasticityField& field,
                                              const FrameWriter& writer = {});

}  // namespace patchbeam
