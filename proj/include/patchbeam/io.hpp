#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "patchbeam/hetero_field.hpp"
#include "patchbeam/micro_beam.hpp"
#include "patchbeam/patch_scheme.hpp"
#include "patchbeam/spectra.hpp"

namespace patchbeam {

/// FNV-1a over the raw bytes of lambda_n, mu_n, lambda_s, mu_s, in that order.
[[nodiscard]] std::uint64_t field_hash(const ElasticityField& field);
[[nodiscard]] std::string hex64(std::uint64_t v);

/// Field export: `header` (JSON: params, dims, period, order) plus a sibling
/// data file with the four Lame arrays, family order lambda_n, mu_n,
/// lambda_s, mu_s, each row-major with j outer and i inner. CSV files hold
/// one line per value (family, i, j, value); binary files are raw
/// little-endian doubles.
void write_field(const std::filesystem::path& header, const ElasticityField& field,
                 const HeterogeneityParams& params, bool binary);
[[nodiscard]] ElasticityField read_field(const std::filesystem::path& header);

/// One block of columns of a snapshot: grid columns [first, end) of `state`
/// are written with full-beam column index (column_offset + c) mod wrap_nx.
struct SnapshotSegment {
    const StaggeredGrid* grid;
    const BeamState* state;
    int first = 0;
    int end = 0;
    int column_offset = 0;
};

/// CSV with columns family,i,j,x,y,value (families u, v, du, dv; j is the
/// row of the family) and a JSON sidecar `<csv>.json` with t, grid dims and kappa.
void write_snapshot(const std::filesystem::path& csv, std::span<const SnapshotSegment> segments,
                    int wrap_nx, const StaggeredGrid& full_grid, double t, double kappa);

/// Whole-beam segment and per-patch interior segments.
[[nodiscard]] std::vector<SnapshotSegment> full_segments(const StaggeredGrid& grid,
                                                         const BeamState& state);
[[nodiscard]] std::vector<SnapshotSegment> patch_segments(const PatchSet& set);

[[nodiscard]] nlohmann::json patch_layout_json(const PatchSet& set);

/// Re, Im, class (macro or micro).
void write_spectrum_csv(const std::filesystem::path& csv, std::span<const cplx> eigs,
                        const Classification& cls);
/// Re_full, Im_full, Re_patch, Im_patch, abs_error.
void write_comparison_csv(const std::filesystem::path& csv, const Comparison& cmp);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
[[nodiscard]] nlohmann::json read_json(const std::filesystem::path& path);

/// Creates parent directories; throws an I/O error when the file cannot be opened.
[[nodiscard]] std::ofstream open_output(const std::filesystem::path& path,
                                        bool binary = false);

}  // namespace patchbeam
