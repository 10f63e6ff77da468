#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "patchbeam/error.hpp"
#include "patchbeam/hetero_field.hpp"
#include "patchbeam/spectra.hpp"

using namespace patchbeam;

namespace {

HeterogeneityParams small_params() {
    HeterogeneityParams p;
    p.nx = 16;
    p.ny = 4;
    return p;
}

std::vector<double> all_e(const RawModuli& raw) {
    std::vector<double> e(raw.e_normal.flat().begin(), raw.e_normal.flat().end());
    e.insert(e.end(), raw.e_shear.flat().begin(), raw.e_shear.flat().end());
    return e;
}

double percentile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

void expect_kind(ErrorKind kind, auto&& fn) {
    try {
        fn();
        ADD_FAILURE() << "no exception";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), kind) << e.what();
    }
}

}  // namespace

TEST(HeteroField, IdenticalParamsGiveBitIdenticalFields) {
    EXPECT_EQ(make_field(small_params()), make_field(small_params()));
    HeterogeneityParams other = small_params();
    other.seed = 43;
    EXPECT_FALSE(make_field(small_params()) == make_field(other));
}

TEST(HeteroField, ExactlyPeriodicAndPositive) {
    const ElasticityField f = make_field(small_params());
    const int p = f.period_x();
    for (const Array2D* a : {&f.lambda_n(), &f.mu_n(), &f.lambda_s(), &f.mu_s()}) {
        for (int j = 0; j < a->rows(); ++j)
            for (int i = 0; i + p < a->cols(); ++i) EXPECT_EQ((*a)(i + p, j), (*a)(i, j));
    }
    EXPECT_GT(f.min_modulus(), 0.0);
}

TEST(HeteroField, UnitSpreadGivesMedianEverywhere) {
    HeterogeneityParams p = small_params();
    p.spread_factor = 1.0;
    p.e_median = 2.5;
    const RawModuli raw = sample_raw_moduli(p);
    for (double e : all_e(raw)) EXPECT_EQ(e, 2.5);
}

TEST(HeteroField, DegeneratePoissonRange) {
    HeterogeneityParams p = small_params();
    p.nu_min = p.nu_max = 0.3;
    const RawModuli raw = sample_raw_moduli(p);
    for (double nu : raw.nu_normal.flat()) EXPECT_EQ(nu, 0.3);
    for (double nu : raw.nu_shear.flat()) EXPECT_EQ(nu, 0.3);
}

TEST(HeteroField, PoissonWithinBounds) {
    const RawModuli raw = sample_raw_moduli(small_params());
    for (double nu : raw.nu_normal.flat()) {
        EXPECT_GE(nu, 0.25);
        EXPECT_LE(nu, 0.35);
    }
}

// 10^4 draws in one period: 3 normal rows and 2 shear rows of 2000 columns.
TEST(HeteroField, LogNormalSpreadMonteCarlo) {
    HeterogeneityParams p;
    p.seed = 42;
    p.nx = 2000;
    p.period_x = 2000;
    p.ny = 2;
    const std::vector<double> e = all_e(sample_raw_moduli(p));
    ASSERT_EQ(e.size(), 10000u);
    const double ratio = percentile(e, 0.975) / percentile(e, 0.025);
    EXPECT_GE(ratio, 5.0);
    EXPECT_LE(ratio, 20.0);

    double mean = 0.0;
    for (double x : e) mean += std::log(x);
    mean /= static_cast<double>(e.size());
    double var = 0.0;
    for (double x : e) var += (std::log(x) - mean) * (std::log(x) - mean);
    const double sd = std::sqrt(var / static_cast<double>(e.size() - 1));
    EXPECT_NEAR(sd, std::log(10.0) / 4.0, 0.03 * std::log(10.0) / 4.0);
    EXPECT_NEAR(mean, 0.0, 0.02);
}

TEST(HeteroField, DefaultGridModulusRangeAcrossSeeds) {
    std::vector<double> ratios;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        HeterogeneityParams p;
        p.seed = seed;
        p.nx = 320;
        p.ny = 7;
        const std::vector<double> e = all_e(sample_raw_moduli(p));
        ratios.push_back(*std::max_element(e.begin(), e.end()) /
                         *std::min_element(e.begin(), e.end()));
    }
    EXPECT_GE(percentile(ratios, 0.05), 3.0);
    EXPECT_LE(percentile(ratios, 0.95), 50.0);
    EXPECT_GE(ratios[41], 3.0);  // seed 42
    EXPECT_LE(ratios[41], 50.0);
}

TEST(HeteroField, LameFromModuli) {
    LamePair a = lame_from_moduli(1.0, 0.25);
    EXPECT_NEAR(a.lambda, 0.4, 1e-15);
    EXPECT_NEAR(a.mu, 0.4, 1e-15);
    a = lame_from_moduli(1.0, 0.35);
    EXPECT_NEAR(a.lambda, 0.35 / (1.35 * 0.3), 1e-15);
    EXPECT_NEAR(a.lambda, 0.8641975308641975, 1e-15);
    EXPECT_NEAR(a.mu, 0.37037037037037035, 1e-15);
    EXPECT_NEAR(lame_from_moduli(2.7, 0.35).mu, 1.0, 1e-15);
    expect_kind(ErrorKind::parameter, [] { (void)lame_from_moduli(1.0, 0.5); });
    expect_kind(ErrorKind::parameter, [] { (void)lame_from_moduli(1.0, 0.7); });
}

TEST(HeteroField, StoredLameMatchesStoredModuli) {
    const ElasticityField f = make_field(small_params());
    const RawModuli& raw = f.raw();
    for (int j = 0; j < raw.e_normal.rows(); ++j) {
        for (int i = 0; i < raw.e_normal.cols(); ++i) {
            const LamePair l = lame_from_moduli(raw.e_normal(i, j), raw.nu_normal(i, j));
            EXPECT_NEAR(l.lambda, f.lambda_n()(i, j), 1e-15 * l.lambda);
            EXPECT_NEAR(l.mu, f.mu_n()(i, j), 1e-15 * l.mu);
        }
    }
}

TEST(HeteroField, InvalidParamsRejected) {
    auto bad = [](auto edit) {
        HeterogeneityParams p = small_params();
        edit(p);
        expect_kind(ErrorKind::parameter, [&] { (void)sample_raw_moduli(p); });
    };
    bad([](HeterogeneityParams& p) { p.nu_max = 0.5; });
    bad([](HeterogeneityParams& p) { p.nu_min = 0.4; p.nu_max = 0.3; });
    bad([](HeterogeneityParams& p) { p.nu_min = 0.0; });
    bad([](HeterogeneityParams& p) { p.period_x = 3; });
    bad([](HeterogeneityParams& p) { p.period_x = 0; });
    bad([](HeterogeneityParams& p) { p.spread_factor = 0.5; });
}

TEST(HeteroField, NondimensionaliseFixedPointAndScaleInvariance) {
    HeterogeneityParams p = small_params();
    p.e_median = 1.0 - p.nu_mean() * p.nu_mean();
    const ElasticityField raw(sample_raw_moduli(p), p.period_x, p.e_median, p.nu_mean());
    EXPECT_EQ(nondimensionalise(raw), raw);

    HeterogeneityParams q = small_params();
    const ElasticityField f(sample_raw_moduli(q), q.period_x, q.e_median, q.nu_mean());
    EXPECT_EQ(nondimensionalise(f.scaled(2.0)), nondimensionalise(f));
    EXPECT_DOUBLE_EQ(nondimensionalise(f).e_median(), 1.0 - 0.09);
}

TEST(HeteroField, WindowIsInPhaseRestriction) {
    const ElasticityField f = make_field(small_params());
    EXPECT_EQ(f.window(4, 9), f.window(0, 9));
    EXPECT_EQ(f.window(-4, 9), f.window(12, 9));
    const ElasticityField w = f.window(14, 5);
    EXPECT_EQ(w.mu_s()(0, 1), f.mu_s()(14, 1));
    EXPECT_EQ(w.mu_s()(2, 1), f.mu_s()(0, 1));
}

TEST(HeteroField, FromLameKeepsLameArraysExact) {
    const ElasticityField f = make_field(small_params());
    const ElasticityField g = ElasticityField::from_lame(f.lambda_n(), f.mu_n(), f.lambda_s(),
                                                         f.mu_s(), f.period_x(), f.e_median(),
                                                         f.nu_mean());
    EXPECT_EQ(g.lambda_n(), f.lambda_n());
    EXPECT_EQ(g.mu_s(), f.mu_s());
    for (std::size_t k = 0; k < f.raw().e_normal.size(); ++k)
        EXPECT_NEAR(g.raw().e_normal.flat()[k], f.raw().e_normal.flat()[k],
                    1e-13 * f.raw().e_normal.flat()[k]);
    for (std::size_t k = 0; k < f.raw().nu_shear.size(); ++k)
        EXPECT_NEAR(g.raw().nu_shear.flat()[k], f.raw().nu_shear.flat()[k], 1e-14);
}

// After rescaling, the homogeneous beam at the median modulus carries the
// fundamental compression wave at unit speed: omega = 2 pi / L for L = 2 pi.
TEST(HeteroField, NondimensionalCompressionSpeedIsOne) {
    const ElasticityField het = testing_helpers::recipe_field(64, 4, 42);
    const ElasticityField hom = homogeneous_field(64, 4, het.e_median(), het.nu_mean());
    const double length = 2.0 * std::numbers::pi;
    const StaggeredGrid g{64, 4, length / 64, 0.2 / 4, true};
    const Eigen::MatrixXd jac = assemble_jacobian(make_full_rhs(g, hom, 0.0), g.dof());
    Eigen::EigenSolver<Eigen::MatrixXd> es(jac);
    const int u_size = g.u_rows() * g.nx;
    double best_share = 0.0, omega = 0.0;
    for (int k = 0; k < jac.rows(); ++k) {
        const double w = es.eigenvalues()[k].imag();
        if (w < 0.3 || w > 2.0) continue;
        const Eigen::VectorXcd vec = es.eigenvectors().col(k);
        const double u_energy = vec.head(u_size).squaredNorm();
        const double share = u_energy / (u_energy + vec.segment(u_size, g.v_rows() * g.nx).squaredNorm());
        if (share > best_share) {
            best_share = share;
            omega = w;
        }
    }
    EXPECT_GT(best_share, 0.9);
    EXPECT_NEAR(omega, 1.0, 0.1);
}
