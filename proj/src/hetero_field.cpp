#include "patchbeam/hetero_field.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "patchbeam/error.hpp"

namespace patchbeam {

double HeterogeneityParams::log_sigma() const {
    if (sigma_log) return *sigma_log;
    return std::log(spread_factor) / 4.0;
}

void HeterogeneityParams::validate() const {
    PATCHBEAM_REQUIRE(nu_min > 0.0 && nu_min <= nu_max && nu_max < 0.5, parameter,
                      "Poisson bounds must satisfy 0 < nu_min <= nu_max < 0.5");
    PATCHBEAM_REQUIRE(period_x >= 1, parameter, "period_x must be at least 1");
    PATCHBEAM_REQUIRE(nx >= 2 && ny >= 2, parameter, "grid needs nx >= 2 and ny >= 2");
    PATCHBEAM_REQUIRE(nx % period_x == 0, parameter,
                      "period_x=" + std::to_string(period_x) + " does not divide nx=" +
                          std::to_string(nx));
    PATCHBEAM_REQUIRE(spread_factor >= 1.0, parameter, "spread_factor must be >= 1");
    PATCHBEAM_REQUIRE(e_median > 0.0, parameter, "e_median must be positive");
    PATCHBEAM_REQUIRE(log_sigma() >= 0.0, parameter, "sigma_log must be non-negative");
}

LamePair lame_from_moduli(double e, double nu) {
    PATCHBEAM_REQUIRE(nu < 0.5, parameter, "singular Poisson ratio (nu >= 0.5)");
    PATCHBEAM_REQUIRE(nu > 0.0 && e > 0.0, parameter, "need E > 0 and nu > 0");
    return {nu * e / ((1.0 + nu) * (1.0 - 2.0 * nu)), e / (2.0 * (1.0 + nu))};
}

namespace {

// One x-period of iid draws, tiled to the full width.
void sample_family(std::mt19937_64& rng, const HeterogeneityParams& p, int rows, Array2D& e,
                   Array2D& nu) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double ln_med = std::log(p.e_median);
    const double sig = p.log_sigma();

    Array2D e_cell(p.period_x, rows), nu_cell(p.period_x, rows);
    for (int j = 0; j < rows; ++j) {
        for (int i = 0; i < p.period_x; ++i) {
            const double z = gauss(rng);
            const double w = unif(rng);
            e_cell(i, j) = sig == 0.0 ? p.e_median : std::exp(ln_med + sig * z);
            nu_cell(i, j) = p.nu_min == p.nu_max ? p.nu_min : p.nu_min + (p.nu_max - p.nu_min) * w;
        }
    }
    e = Array2D(p.nx, rows);
    nu = Array2D(p.nx, rows);
    for (int j = 0; j < rows; ++j) {
        for (int i = 0; i < p.nx; ++i) {
            e(i, j) = e_cell(i % p.period_x, j);
            nu(i, j) = nu_cell(i % p.period_x, j);
        }
    }
}

Array2D map2(const Array2D& a, const Array2D& b, double (*f)(double, double)) {
    Array2D out(a.cols(), a.rows());
    for (int j = 0; j < a.rows(); ++j)
        for (int i = 0; i < a.cols(); ++i) out(i, j) = f(a(i, j), b(i, j));
    return out;
}

double lambda_of(double e, double nu) { return lame_from_moduli(e, nu).lambda; }
double mu_of(double e, double nu) { return lame_from_moduli(e, nu).mu; }

Array2D scaled_copy(const Array2D& a, double s) {
    Array2D out = a;
    for (double& x : out.flat()) x *= s;
    return out;
}

Array2D window_copy(const Array2D& a, int first, int ncols) {
    Array2D out(ncols, a.rows());
    const int n = a.cols();
    for (int j = 0; j < a.rows(); ++j) {
        for (int c = 0; c < ncols; ++c) {
            const int src = ((first + c) % n + n) % n;
            out(c, j) = a(src, j);
        }
    }
    return out;
}

}  // namespace

RawModuli sample_raw_moduli(const HeterogeneityParams& params) {
    params.validate();
    std::mt19937_64 rng(params.seed);
    RawModuli raw;
    sample_family(rng, params, params.ny + 1, raw.e_normal, raw.nu_normal);
    sample_family(rng, params, params.ny, raw.e_shear, raw.nu_shear);
    return raw;
}

ElasticityField::ElasticityField(RawModuli raw, int period_x, double e_median, double nu_mean)
    : raw_(std::move(raw)), period_x_(period_x), e_median_(e_median), nu_mean_(nu_mean) {
    PATCHBEAM_REQUIRE(raw_.e_normal.same_shape(raw_.nu_normal) &&
                          raw_.e_shear.same_shape(raw_.nu_shear) &&
                          raw_.e_normal.cols() == raw_.e_shear.cols() &&
                          raw_.e_normal.rows() == raw_.e_shear.rows() + 1,
                      dimension, "inconsistent modulus array shapes");
    lambda_n_ = map2(raw_.e_normal, raw_.nu_normal, lambda_of);
    mu_n_ = map2(raw_.e_normal, raw_.nu_normal, mu_of);
    lambda_s_ = map2(raw_.e_shear, raw_.nu_shear, lambda_of);
    mu_s_ = map2(raw_.e_shear, raw_.nu_shear, mu_of);
}

ElasticityField ElasticityField::from_lame(Array2D lambda_n, Array2D mu_n, Array2D lambda_s,
                                           Array2D mu_s, int period_x, double e_median,
                                           double nu_mean) {
    PATCHBEAM_REQUIRE(lambda_n.same_shape(mu_n) && lambda_s.same_shape(mu_s) &&
                          lambda_n.cols() == lambda_s.cols() &&
                          lambda_n.rows() == lambda_s.rows() + 1,
                      dimension, "inconsistent Lame array shapes");
    PATCHBEAM_REQUIRE(period_x >= 1 && lambda_n.cols() % period_x == 0, periodicity,
                      "period_x does not divide the field width");
    auto young = [](double l, double m) { return m * (3.0 * l + 2.0 * m) / (l + m); };
    auto poisson = [](double l, double m) { return l / (2.0 * (l + m)); };
    ElasticityField f;
    f.raw_ = {map2(lambda_n, mu_n, +young), map2(lambda_n, mu_n, +poisson),
              map2(lambda_s, mu_s, +young), map2(lambda_s, mu_s, +poisson)};
    f.lambda_n_ = std::move(lambda_n);
    f.mu_n_ = std::move(mu_n);
    f.lambda_s_ = std::move(lambda_s);
    f.mu_s_ = std::move(mu_s);
    f.period_x_ = period_x;
    f.e_median_ = e_median;
    f.nu_mean_ = nu_mean;
    return f;
}

ElasticityField ElasticityField::scaled(double s) const {
    ElasticityField f = *this;
    f.raw_.e_normal = scaled_copy(raw_.e_normal, s);
    f.raw_.e_shear = scaled_copy(raw_.e_shear, s);
    f.lambda_n_ = scaled_copy(lambda_n_, s);
    f.mu_n_ = scaled_copy(mu_n_, s);
    f.lambda_s_ = scaled_copy(lambda_s_, s);
    f.mu_s_ = scaled_copy(mu_s_, s);
    f.e_median_ = e_median_ * s;
    return f;
}

ElasticityField ElasticityField::window(int first, int ncols) const {
    ElasticityField f;
    f.raw_.e_normal = window_copy(raw_.e_normal, first, ncols);
    f.raw_.nu_normal = window_copy(raw_.nu_normal, first, ncols);
    f.raw_.e_shear = window_copy(raw_.e_shear, first, ncols);
    f.raw_.nu_shear = window_copy(raw_.nu_shear, first, ncols);
    f.lambda_n_ = window_copy(lambda_n_, first, ncols);
    f.mu_n_ = window_copy(mu_n_, first, ncols);
    f.lambda_s_ = window_copy(lambda_s_, first, ncols);
    f.mu_s_ = window_copy(mu_s_, first, ncols);
    f.period_x_ = period_x_;
    f.e_median_ = e_median_;
    f.nu_mean_ = nu_mean_;
    return f;
}

double ElasticityField::max_p_modulus() const {
    double m = 0.0;
    for (int j = 0; j < lambda_n_.rows(); ++j)
        for (int i = 0; i < lambda_n_.cols(); ++i)
            m = std::max(m, lambda_n_(i, j) + 2.0 * mu_n_(i, j));
    return m;
}

double ElasticityField::min_modulus() const {
    double m = lambda_n_.flat().empty() ? 0.0 : lambda_n_.flat()[0];
    for (const Array2D* a : {&lambda_n_, &mu_n_, &lambda_s_, &mu_s_})
        for (double x : a->flat()) m = std::min(m, x);
    return m;
}

ElasticityField nondimensionalise(const ElasticityField& field) {
    const double nu = field.nu_mean();
    const double target = 1.0 - nu * nu;
    const double s = target / field.e_median();
    if (s == 1.0) return field;
    return field.scaled(s);
}

ElasticityField make_field(const HeterogeneityParams& params) {
    return nondimensionalise(ElasticityField(sample_raw_moduli(params), params.period_x,
                                             params.e_median, params.nu_mean()));
}

ElasticityField homogeneous_field(int nx, int ny, double e, double nu) {
    RawModuli raw{Array2D(nx, ny + 1, e), Array2D(nx, ny + 1, nu), Array2D(nx, ny, e),
                  Array2D(nx, ny, nu)};
    return ElasticityField(std::move(raw), 1, e, nu);
}

}  // namespace patchbeam
