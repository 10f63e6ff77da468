#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "oracles.hpp"
#include "patchbeam/config.hpp"
#include "patchbeam/error.hpp"
#include "patchbeam/patch_scheme.hpp"
#include "patchbeam/spectra.hpp"

using namespace patchbeam;
using testing_helpers::random_state;
using testing_helpers::recipe_field;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void expect_kind(ErrorKind kind, const std::function<void()>& fn) {
    try {
        fn();
        ADD_FAILURE() << "no exception";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), kind) << e.what();
    }
}

struct SmallLayout {
    PatchConfig cfg{5, 8, 4, 3, Coupling::spectral()};
    int period = 2;
    double dx = 0.1;
    double dy = 0.05;
    ElasticityField field = recipe_field(cfg.full_nx(), cfg.ny, 11, period);
};

// Coupled operator built from per-patch oracle stencils and explicit edge
// weights weight(k, l, shift).
Eigen::MatrixXd block_oracle(const PatchSet& set, double kappa,
                             const std::function<double(int, int, double)>& weight) {
    const StaggeredGrid& g = set.grid();
    const int n = g.nx;
    const int width = n - 1;
    const int per = g.dof();
    const int np = set.size();
    const int centre = set.centre_column();
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(np * per, np * per);

    const int rows_of[4] = {g.ny - 1, g.ny, g.ny - 1, g.ny};
    int offset_of[4];
    offset_of[0] = 0;
    for (int a = 1; a < 4; ++a) offset_of[a] = offset_of[a - 1] + rows_of[a - 1] * width;
    auto unknown = [&](int patch, int a, int r, int c) {
        return patch * per + offset_of[a] + r * width + (c - 1);
    };

    for (int k = 0; k < np; ++k) {
        for (int a = 0; a < 4; ++a) {
            for (int r = 0; r < rows_of[a]; ++r) {
                for (int c = 0; c <= n; ++c) {
                    BeamState s = BeamState::zeros(g);
                    for (Array2D* arr : {&s.u, &s.v, &s.du, &s.dv})
                        for (double& x : arr->flat()) x = 0.0;
                    Array2D* arrays[4] = {&s.u, &s.v, &s.du, &s.dv};
                    (*arrays[a])(c, r) = 1.0;
                    const Eigen::VectorXd col =
                        oracle::flatten(g, oracle::acceleration(g, s, set.field(k), kappa));
                    if (c > 0 && c < n) {
                        jac.block(k * per, unknown(k, a, r, c), per, 1) += col;
                        continue;
                    }
                    const double shift = c == 0 ? set.left_shift() : set.right_shift();
                    for (int l = 0; l < np; ++l)
                        jac.block(k * per, unknown(l, a, r, centre), per, 1) += weight(k, l, shift) * col;
                }
            }
        }
    }
    return jac;
}

}  // namespace

TEST(PatchScheme, LayoutValidation) {
    const int period = 4;
    auto check = [&](PatchConfig c, ErrorKind kind) {
        expect_kind(kind, [&] { c.validate(period); });
    };
    check({5, 32, 32, 4, Coupling::spectral()}, ErrorKind::geometry);   // overlap
    check({5, 32, 40, 4, Coupling::spectral()}, ErrorKind::geometry);
    check({5, 32, 7, 4, Coupling::spectral()}, ErrorKind::geometry);    // no single centre
    check({5, 32, 4, 4, Coupling::spectral()}, ErrorKind::periodicity); // half-width 2
    check({5, 30, 8, 4, Coupling::spectral()}, ErrorKind::periodicity);
    check({4, 32, 8, 4, Coupling::spectral()}, ErrorKind::parameter);
    check({5, 32, 8, 4, Coupling::polynomial(6)}, ErrorKind::stencil);
    check({5, 32, 8, 4, Coupling::polynomial(3)}, ErrorKind::parameter);
    check({2, 32, 8, 4, Coupling::spectral()}, ErrorKind::parameter);
    EXPECT_NO_THROW(PatchConfig({5, 32, 8, 4, Coupling::spectral()}).validate(period));
    Coupling even = Coupling::spectral();
    even.nyquist_cosine = true;
    EXPECT_NO_THROW(PatchConfig({4, 32, 8, 4, even}).validate(period));
}

TEST(PatchScheme, DofRatioTracksPatchFraction) {
    const ElasticityField f = recipe_field(320, 7, 42);
    const PatchSet set({5, 64, 16, 7, Coupling::spectral()}, f, 0.02, 0.03);
    EXPECT_NEAR(set.dof_ratio(), 0.25, 0.1 * 0.25);
    EXPECT_DOUBLE_EQ(set.dof_ratio(), 15.0 / 64.0);

    // Widest patches a period-1 medium allows.
    const ElasticityField g1 = recipe_field(80, 4, 1, 1);
    const PatchSet wide({5, 16, 14, 4, Coupling::spectral()}, g1, 0.1, 0.05);
    EXPECT_NEAR(wide.dof_ratio(), 13.0 / 16.0, 1e-15);

    PatchConfig wrap{5, 16, 0, 4, Coupling::spectral()};
    use_periodic_wrap(wrap);
    const PatchSet whole(wrap, g1, 0.1, 0.05);
    EXPECT_DOUBLE_EQ(whole.dof_ratio(), 1.0);
}

TEST(PatchScheme, SevenNodesPerEdgeForFourCellsAcross) {
    const ElasticityField f = recipe_field(160, 4, 42);
    const PatchSet set({5, 32, 8, 4, Coupling::spectral()}, f, 0.1, 0.05);
    EXPECT_EQ(set.grid().u_rows() + set.grid().v_rows(), 7);
}

TEST(PatchScheme, SpectralShiftExamples) {
    const int n = 5;
    const double h = 1.3;
    const std::vector<double> constant(n, 2.5);
    for (double d : {0.0, 0.4, -0.65})
        for (double x : spectral_edge_values(constant, d, h)) EXPECT_NEAR(x, 2.5, 1e-14);

    std::vector<double> c(n);
    for (int k = 0; k < n; ++k) c[k] = std::cos(kTwoPi * k / n);
    const std::vector<double> out = spectral_edge_values(c, h / 2, h);
    for (int k = 0; k < n; ++k) EXPECT_NEAR(out[k], std::cos(kTwoPi * (k + 0.5) / n), 1e-14);

    const std::vector<double> r{0.3, -1.2, 4.4, 0.01, 2.0};
    const std::vector<double> same = spectral_edge_values(r, 0.0, h);
    for (int k = 0; k < n; ++k) EXPECT_NEAR(same[k], r[k], 1e-14);

    expect_kind(ErrorKind::parameter, [] {
        (void)spectral_edge_values(std::vector<double>(4, 1.0), 0.1, 1.0);
    });
}

// Every resolvable trigonometric mode is shifted exactly.
TEST(PatchScheme, SpectralReproducesResolvableModes) {
    for (int n : {3, 5, 7, 9}) {
        const double h = 0.7;
        const double domain = n * h;
        for (int m = 0; m <= (n - 1) / 2; ++m) {
            for (double phase : {0.0, 0.9}) {
                std::vector<double> c(n);
                for (int k = 0; k < n; ++k) c[k] = std::cos(kTwoPi * m * k * h / domain + phase);
                for (double d : {-0.3 * h, 0.125 * h, 0.5 * h}) {
                    const std::vector<double> out = spectral_edge_values(c, d, h);
                    for (int k = 0; k < n; ++k)
                        EXPECT_NEAR(out[k], std::cos(kTwoPi * m * (k * h + d) / domain + phase), 1e-12);
                }
            }
        }
    }
}

TEST(PatchScheme, EvenCountNyquistCosine) {
    const int n = 6;
    std::vector<double> c(n);
    for (int k = 0; k < n; ++k) c[k] = std::cos(kTwoPi * k / n) + 0.5;
    const std::vector<double> out = spectral_edge_values(c, 0.25, 1.0, true);
    for (int k = 0; k < n; ++k) EXPECT_NEAR(out[k], std::cos(kTwoPi * (k + 0.25) / n) + 0.5, 1e-13);
}

TEST(PatchScheme, PolynomialExamples) {
    const int n = 7;
    const double h = 0.9;
    const std::vector<double> constant(n, -1.5);
    for (int p : {0, 2, 4, 6})
        for (double x : polynomial_edge_values(constant, 0.3, h, p)) EXPECT_NEAR(x, -1.5, 1e-13);

    std::vector<double> lin(n);
    for (int k = 0; k < n; ++k) lin[k] = k * h;
    for (int p : {2, 4, 6}) {
        const std::vector<double> out = polynomial_edge_values(lin, 0.35, h, p, false);
        for (int k = 0; k < n; ++k) EXPECT_NEAR(out[k], k * h + 0.35, 1e-13);
    }
    expect_kind(ErrorKind::stencil, [&] { (void)polynomial_edge_values(lin, 0.1, h, 8); });
}

// Degree-p fill reproduces every polynomial of degree <= p in the aperiodic harness.
TEST(PatchScheme, PolynomialReproducesLowDegreeProfiles) {
    const int n = 9;
    const double h = 0.6;
    for (int p : {2, 4, 6, 8}) {
        for (int deg = 0; deg <= p; ++deg) {
            auto f = [&](double x) { return std::pow(x - 1.1, deg) + 0.5 * x; };
            std::vector<double> c(n);
            for (int k = 0; k < n; ++k) c[k] = f(k * h);
            for (double d : {-0.5 * h, 0.25 * h}) {
                const std::vector<double> out = polynomial_edge_values(c, d, h, p, false);
                for (int k = 0; k < n; ++k)
                    EXPECT_NEAR(out[k], f(k * h + d), 1e-11 * (1.0 + std::abs(f(k * h + d))))
                        << "p " << p << " deg " << deg;
            }
        }
    }
}

TEST(PatchScheme, PolynomialMatchesLagrangeOracle) {
    const int n = 9;
    const double h = kTwoPi / n;
    std::vector<double> c(n);
    for (int k = 0; k < n; ++k) c[k] = std::sin(kTwoPi * k / n);
    const double d = h / 4;
    double err[2] = {0.0, 0.0};
    for (int which = 0; which < 2; ++which) {
        const int p = which == 0 ? 2 : 4;
        const std::vector<double> out = polynomial_edge_values(c, d, h, p);
        for (int k = 0; k < n; ++k) {
            std::vector<double> xs, ys;
            for (int o = -p / 2; o <= p / 2; ++o) {
                xs.push_back((k + o) * h);
                ys.push_back(std::sin(kTwoPi * (k + o) / n));
            }
            EXPECT_NEAR(out[k], oracle::lagrange(xs, ys, k * h + d), 1e-14);
            err[which] = std::max(err[which], std::abs(out[k] - std::sin(k * h + d)));
        }
    }
    EXPECT_LT(err[1], err[0]);
}

TEST(PatchScheme, LagrangeWeightsSumToOne) {
    const std::vector<double> nodes{-2.0, -1.0, 0.0, 1.0, 2.0};
    double sum = 0.0;
    for (double w : lagrange_weights(nodes, 0.37)) sum += w;
    EXPECT_NEAR(sum, 1.0, 1e-15);
}

TEST(PatchScheme, IdenticalPatchesFillWithOwnCentre) {
    SmallLayout lay;
    PatchSet set(lay.cfg, lay.field, lay.dx, lay.dy);
    const BeamState s = random_state(set.grid(), 3);
    for (int k = 0; k < set.size(); ++k) set.state(k) = s;
    set.fill_edges();
    const int c = set.centre_column();
    for (int k = 0; k < set.size(); ++k) {
        const BeamState& t = set.state(k);
        for (int r = 0; r < set.grid().v_rows(); ++r) {
            EXPECT_NEAR(t.v(0, r), s.v(c, r), 1e-14);
            EXPECT_NEAR(t.dv(set.grid().nx, r), s.dv(c, r), 1e-14);
        }
        for (int r = 0; r < set.grid().u_rows(); ++r) EXPECT_NEAR(t.u(0, r), s.u(c, r), 1e-14);
    }
}

TEST(PatchScheme, PerturbingOneCentreReachesEveryPatch) {
    SmallLayout lay;
    PatchSet set(lay.cfg, lay.field, lay.dx, lay.dy);
    for (int k = 0; k < set.size(); ++k) set.state(k) = random_state(set.grid(), 10 + k);
    set.fill_edges();
    std::vector<double> before;
    for (int k = 0; k < set.size(); ++k) before.push_back(set.state(k).u(0, 1));
    set.state(2).u(set.centre_column(), 1) += 1.0;
    set.fill_edges();
    for (int k = 0; k < set.size(); ++k) EXPECT_NE(set.state(k).u(0, 1), before[k]) << k;
}

TEST(PatchScheme, SingleModeEdgesCarryExactPhase) {
    SmallLayout lay;
    PatchSet set(lay.cfg, lay.field, lay.dx, lay.dy);
    const double domain = set.size() * set.spacing();
    const int c = set.centre_column();
    for (int k = 0; k < set.size(); ++k) {
        BeamState s = BeamState::zeros(set.grid());
        for (double& x : s.u.flat()) x = 0.0;
        for (double& x : s.v.flat()) x = 0.0;
        for (double& x : s.du.flat()) x = 0.0;
        for (double& x : s.dv.flat()) x = 0.0;
        for (int r = 0; r < set.grid().v_rows(); ++r)
            s.v(c, r) = std::cos(kTwoPi * 2 * set.centre_x(k) / domain + 0.3 * r);
        set.state(k) = s;
    }
    set.fill_edges();
    for (int k = 0; k < set.size(); ++k) {
        for (int r = 0; r < set.grid().v_rows(); ++r) {
            const double xl = set.centre_x(k) + set.left_shift();
            const double xr = set.centre_x(k) + set.right_shift();
            EXPECT_NEAR(set.state(k).v(0, r), std::cos(kTwoPi * 2 * xl / domain + 0.3 * r), 1e-13);
            EXPECT_NEAR(set.state(k).v(set.grid().nx, r), std::cos(kTwoPi * 2 * xr / domain + 0.3 * r),
                        1e-13);
        }
    }
}

TEST(PatchScheme, RigidAndZeroStatesAreStationary) {
    SmallLayout lay;
    PatchSet set(lay.cfg, lay.field, lay.dx, lay.dy);
    std::vector<double> x(static_cast<std::size_t>(set.dof()), 0.0), d(x.size());
    set.rhs(x, d, 0.001);
    for (double v : d) EXPECT_EQ(v, 0.0);

    const int per = set.grid().dof();
    const int u_block = set.grid().u_rows() * (set.grid().nx - 1);
    const int v_block = set.grid().v_rows() * (set.grid().nx - 1);
    for (int k = 0; k < set.size(); ++k) {
        for (int i = 0; i < u_block; ++i) x[k * per + i] = 0.8;
        for (int i = 0; i < v_block; ++i) x[k * per + u_block + i] = -0.3;
    }
    set.rhs(x, d, 0.001);
    for (double v : d) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(PatchScheme, PatchedRhsMatchesAssembledBlockOracle) {
    SmallLayout lay;
    const PatchSet set(lay.cfg, lay.field, lay.dx, lay.dy);
    const double h = set.spacing();
    const int np = set.size();
    const double kappa = 0.001;
    const Eigen::MatrixXd ref = block_oracle(set, kappa, [&](int k, int l, double shift) {
        return oracle::trig_weight(np, k, l, shift, h);
    });
    const Eigen::MatrixXd jac = assemble_jacobian(make_patched_rhs(set, kappa), set.dof());
    EXPECT_LE((jac - ref).lpNorm<Eigen::Infinity>(), 1e-12 * ref.lpNorm<Eigen::Infinity>());

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXd x(set.dof());
    for (double& v : x) v = u(rng);
    PatchSet scratch = set;
    Eigen::VectorXd d(set.dof());
    scratch.rhs(std::span<const double>(x.data(), x.size()), std::span<double>(d.data(), d.size()), kappa);
    EXPECT_LE((d - ref * x).lpNorm<Eigen::Infinity>(), 1e-12 * (ref * x).lpNorm<Eigen::Infinity>());
}

TEST(PatchScheme, PolynomialPatchedRhsMatchesBlockOracle) {
    SmallLayout lay;
    lay.cfg.coupling = Coupling::polynomial(2);
    const PatchSet set(lay.cfg, lay.field, lay.dx, lay.dy);
    const double h = set.spacing();
    const int np = set.size();
    const Eigen::MatrixXd ref = block_oracle(set, 0.0, [&](int k, int l, double shift) {
        std::vector<double> xs, ys;
        for (int o = -1; o <= 1; ++o) {
            xs.push_back(o * h);
            ys.push_back(((k + o) % np + np) % np == l ? 1.0 : 0.0);
        }
        return oracle::lagrange(xs, ys, shift);
    });
    const Eigen::MatrixXd jac = assemble_jacobian(make_patched_rhs(set, 0.0), set.dof());
    EXPECT_LE((jac - ref).lpNorm<Eigen::Infinity>(), 1e-12 * ref.lpNorm<Eigen::Infinity>());
}

// One patch closed on itself is the full periodic beam.
TEST(PatchScheme, PeriodicWrapReproducesFullDomain) {
    const int nx = 16;
    const ElasticityField f = recipe_field(nx, 4, 8);
    const StaggeredGrid full{nx, 4, 0.2, 0.05, true};
    PatchConfig pc{1, nx, 0, 4, Coupling::spectral()};
    use_periodic_wrap(pc);
    PatchSet set(pc, f, full.dx, full.dy);
    const BeamState s = random_state(full, 4);
    set.restrict_from(full, s);
    std::vector<double> x(static_cast<std::size_t>(set.dof())), d(x.size());
    set.pack_into(x);
    set.rhs(x, d, 0.001);
    BeamState dp = BeamState::zeros(set.grid());
    unpack_into(set.grid(), d, dp);
    const BeamState ref = acceleration_rhs(full, s, f, 0.001);
    const StaggeredGrid& pg = set.grid();
    for (int c = pg.first_evolved(); c < pg.end_evolved(); ++c) {
        const int src = ((set.first_column(0) + c) % nx + nx) % nx;
        for (int r = 0; r < pg.u_rows(); ++r) {
            EXPECT_EQ(dp.u(c, r), ref.u(src, r));
            EXPECT_EQ(dp.du(c, r), ref.du(src, r));
        }
        for (int r = 0; r < pg.v_rows(); ++r) {
            EXPECT_EQ(dp.v(c, r), ref.v(src, r));
            EXPECT_EQ(dp.dv(c, r), ref.dv(src, r));
        }
    }
    EXPECT_EQ(pg.evolved_columns(), nx);
}

TEST(PatchScheme, RotatingPatchLabelsCommutes) {
    SmallLayout lay;
    PatchSet set(lay.cfg, lay.field, lay.dx, lay.dy);
    const int per = set.grid().dof();
    const int np = set.size();
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> x(static_cast<std::size_t>(set.dof())), xr(x.size()), d(x.size()), dr(x.size());
    for (double& v : x) v = u(rng);
    auto rotate = [&](const std::vector<double>& a, std::vector<double>& b) {
        for (int k = 0; k < np; ++k)
            std::copy_n(a.begin() + k * per, per, b.begin() + ((k + 1) % np) * per);
    };
    rotate(x, xr);
    set.rhs(x, d, 0.001);
    set.rhs(xr, dr, 0.001);
    std::vector<double> d_rot(x.size());
    rotate(d, d_rot);
    for (std::size_t i = 0; i < d.size(); ++i) EXPECT_NEAR(dr[i], d_rot[i], 1e-12);
}

TEST(PatchScheme, FieldMismatchIsDimensionError) {
    SmallLayout lay;
    const ElasticityField wrong = recipe_field(48, 3, 1, 2);
    expect_kind(ErrorKind::dimension, [&] { PatchSet s(lay.cfg, wrong, lay.dx, lay.dy); });
}
