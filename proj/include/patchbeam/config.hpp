#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "patchbeam/hetero_field.hpp"
#include "patchbeam/integrator.hpp"
#include "patchbeam/micro_beam.hpp"
#include "patchbeam/patch_scheme.hpp"

namespace patchbeam {

enum class RunMode { full, patch };

struct GeometryConfig {
    double length = 6.283185307179586;  // one wavelength of the fundamental mode is 2 pi
    double width = 0.2;
};

/// u = compression * sin(2 pi x / L), v = bending * sin(2 pi x / L), both
/// uniform across the section, zero velocities.
struct InitialCondition {
    double compression = 0.1;
    double bending = 0.1;
};

struct CompareConfig {
    std::vector<double> ratios{0.5, 0.25, 0.125};
};

/// Convergence runs keep the beam (nx cells over the same length) and the
/// patch width n_sub fixed while the patch count, and with it H, varies.
struct ConvergenceConfig {
    std::vector<int> n_list{5, 7, 9};
    int nx = 1260;
    int n_sub = 16;
};

struct SimConfig {
    GeometryConfig geometry;
    HeterogeneityParams heterogeneity;  ///< nx and ny are taken from the patch layout
    double kappa = 0.001;
    PatchConfig patch{5, 64, 16, 7, Coupling::spectral()};
    IntegratorConfig integrator{std::nullopt, 10.0, 0.2, 0};
    RunMode mode = RunMode::patch;
    std::filesystem::path output = "out";
    std::optional<std::filesystem::path> field_file;
    bool field_binary = false;
    InitialCondition initial;
    CompareConfig compare;
    ConvergenceConfig convergence;

    [[nodiscard]] int nx() const noexcept { return patch.full_nx(); }
    [[nodiscard]] double dx() const noexcept { return geometry.length / nx(); }
    [[nodiscard]] double dy() const noexcept { return geometry.width / patch.ny; }
    [[nodiscard]] StaggeredGrid full_grid() const { return {nx(), patch.ny, dx(), dy(), true}; }

    /// Copy the grid size into the heterogeneity recipe.
    void sync();
    /// Throws a config error naming the offending setting.
    void validate() const;
};

/// Reads TOML (by extension .toml) or JSON. Unknown keys are rejected.
[[nodiscard]] SimConfig load_config(const std::filesystem::path& path);
[[nodiscard]] SimConfig config_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json config_to_json(const SimConfig& cfg);

[[nodiscard]] RunMode parse_mode(const std::string& s);
[[nodiscard]] std::string mode_name(RunMode m);
/// "spectral", "polynomial" (with `degree`), "periodic_wrap".
[[nodiscard]] Coupling parse_coupling(const std::string& s, int degree);

/// Switch to a single patch wrapping the whole beam onto itself.
void use_periodic_wrap(PatchConfig& patch);

/// Set n_sub = r * spacing_cells; throws a config error unless exact.
void set_ratio(PatchConfig& patch, double r);

}  // namespace patchbeam
