#pragma once

#include <cstdint>
#include <optional>

#include "patchbeam/array2d.hpp"

namespace patchbeam {

/// Recipe for a random, x-periodic heterogeneous modulus field.
///
/// Young's modulus is log-normal with median `e_median` and log-standard
/// deviation ln(spread_factor)/4 unless `sigma_log` overrides it, so the
/// central 95% of draws spans roughly `spread_factor`. Poisson's ratio is
/// uniform on [nu_min, nu_max]. Draws are iid per stress point of one
/// x-period and tiled along the beam.
struct HeterogeneityParams {
    std::uint64_t seed = 42;
    double spread_factor = 10.0;
    double nu_min = 0.25;
    double nu_max = 0.35;
    int period_x = 4;
    int nx = 160;
    int ny = 7;
    double e_median = 1.0;
    std::optional<double> sigma_log;

    [[nodiscard]] double log_sigma() const;
    [[nodiscard]] double nu_mean() const noexcept { return 0.5 * (nu_min + nu_max); }
    void validate() const;
};

/// Young's modulus and Poisson ratio at both stress-point families.
/// Normal-stress points have ny+1 rows, shear points ny rows; both have
/// nx columns.
struct RawModuli {
    Array2D e_normal, nu_normal;
    Array2D e_shear, nu_shear;

    bool operator==(const RawModuli&) const = default;
};

struct LamePair {
    double lambda;
    double mu;
};

/// Heterogeneous Lamé parameters on the staggered grid.
///
/// Column i of the normal family sits at x_i (the v columns), column i of
/// the shear family at x_{i+1/2} (the u columns). Row j of the normal
/// family is y_j, j = 0..ny; row j of the shear family is y_{j+1/2}.
class ElasticityField {
public:
    ElasticityField() = default;
    ElasticityField(RawModuli raw, int period_x, double e_median, double nu_mean);

    /// Rebuild from stored Lame arrays, keeping them bit-exact; E and nu are
    /// recovered by inverting the Lame map.
    [[nodiscard]] static ElasticityField from_lame(Array2D lambda_n, Array2D mu_n, Array2D lambda_s,
                                                   Array2D mu_s, int period_x, double e_median,
                                                   double nu_mean);

    [[nodiscard]] int cols() const noexcept { return lambda_n_.cols(); }
    [[nodiscard]] int ny() const noexcept { return lambda_s_.rows(); }
    [[nodiscard]] int period_x() const noexcept { return period_x_; }
    [[nodiscard]] double e_median() const noexcept { return e_median_; }
    [[nodiscard]] double nu_mean() const noexcept { return nu_mean_; }

    [[nodiscard]] const Array2D& lambda_n() const noexcept { return lambda_n_; }
    [[nodiscard]] const Array2D& mu_n() const noexcept { return mu_n_; }
    [[nodiscard]] const Array2D& lambda_s() const noexcept { return lambda_s_; }
    [[nodiscard]] const Array2D& mu_s() const noexcept { return mu_s_; }
    [[nodiscard]] const RawModuli& raw() const noexcept { return raw_; }

    /// Multiply every modulus (E, lambda, mu and the nominal median) by s.
    [[nodiscard]] ElasticityField scaled(double s) const;

    /// Columns [first, first + ncols) with periodic wrap; used to hand each
    /// patch its in-phase restriction of the beam's field.
    [[nodiscard]] ElasticityField window(int first, int ncols) const;

    /// Largest P-wave modulus lambda + 2 mu over the normal points.
    [[nodiscard]] double max_p_modulus() const;
    [[nodiscard]] double min_modulus() const;

    bool operator==(const ElasticityField&) const = default;

private:
    RawModuli raw_;
    Array2D lambda_n_, mu_n_, lambda_s_, mu_s_;
    int period_x_ = 1;
    double e_median_ = 1.0;
    double nu_mean_ = 0.3;
};

[[nodiscard]] RawModuli sample_raw_moduli(const HeterogeneityParams& params);

[[nodiscard]] LamePair lame_from_moduli(double e, double nu);

/// Rescale so the nominal plane-strain compression speed
/// sqrt(E_med / (1 - nu_mean^2)) is one at unit density.
[[nodiscard]] ElasticityField nondimensionalise(const ElasticityField& field);

/// Sample and nondimensionalise in one step.
[[nodiscard]] ElasticityField make_field(const HeterogeneityParams& params);

/// Constant field, mainly for tests and homogeneous reference runs.
[[nodiscard]] ElasticityField homogeneous_field(int nx, int ny, double e, double nu);

}  // namespace patchbeam
