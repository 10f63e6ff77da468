#include "patchbeam/spectra.hpp"

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "patchbeam/error.hpp"

namespace patchbeam {

namespace {

void require_finite_square(const Eigen::MatrixXd& m) {
    PATCHBEAM_REQUIRE(m.rows() == m.cols(), dimension, "eigensolve needs a square matrix");
    PATCHBEAM_REQUIRE(m.allFinite(), numerical_breakdown, "matrix has non-finite entries");
}

std::vector<cplx> dgeev_values(Eigen::MatrixXd a) {
    const auto n = static_cast<lapack_int>(a.rows());
    if (n == 0) return {};
    std::vector<double> wr(n), wi(n);
    double dummy = 0.0;
    const lapack_int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', n, a.data(), n, wr.data(),
                                          wi.data(), &dummy, 1, &dummy, 1);
    PATCHBEAM_REQUIRE(info == 0, numerical_breakdown,
                      "dgeev failed to converge (info=" + std::to_string(info) + ")");
    std::vector<cplx> out(n);
    for (lapack_int i = 0; i < n; ++i) out[i] = {wr[i], wi[i]};
    return out;
}

std::vector<cplx> zgeev_values(Eigen::MatrixXcd a) {
    const auto n = static_cast<lapack_int>(a.rows());
    if (n == 0) return {};
    std::vector<lapack_complex_double> w(n);
    lapack_complex_double dummy{};
    const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, a.data(), n, w.data(),
                                          &dummy, 1, &dummy, 1);
    PATCHBEAM_REQUIRE(info == 0, numerical_breakdown,
                      "zgeev failed to converge (info=" + std::to_string(info) + ")");
    return {w.begin(), w.end()};
}

// Eigenvalues of `a` plus right eigenvectors for those accepted by `pick`.
struct SelectedEigen {
    std::vector<cplx> all;
    std::vector<cplx> picked;
    Eigen::MatrixXcd vectors;
};

template <class Pick>
SelectedEigen hessenberg_select(Eigen::MatrixXd a, Pick pick) {
    const auto n = static_cast<lapack_int>(a.rows());
    SelectedEigen out;
    if (n == 0) return out;
    std::vector<double> tau(std::max<lapack_int>(1, n - 1));
    lapack_int info = LAPACKE_dgehrd(LAPACK_COL_MAJOR, n, 1, n, a.data(), n, tau.data());
    PATCHBEAM_REQUIRE(info == 0, numerical_breakdown, "Hessenberg reduction failed");

    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    for (lapack_int j = 0; j < n; ++j)
        for (lapack_int i = 0; i <= std::min(j + 1, n - 1); ++i) h(i, j) = a(i, j);

    std::vector<double> wr(n), wi(n);
    {
        Eigen::MatrixXd t = h;
        double dummy = 0.0;
        info = LAPACKE_dhseqr(LAPACK_COL_MAJOR, 'E', 'N', n, 1, n, t.data(), n, wr.data(),
                              wi.data(), &dummy, 1);
        PATCHBEAM_REQUIRE(info == 0, numerical_breakdown,
                          "Hessenberg QR failed to converge (info=" + std::to_string(info) + ")");
    }
    out.all.resize(n);
    for (lapack_int i = 0; i < n; ++i) out.all[i] = {wr[i], wi[i]};

    std::vector<lapack_logical> select(n, 0);
    lapack_int columns = 0;
    std::vector<lapack_int> picked_index;
    for (lapack_int i = 0; i < n; ++i) {
        if (wi[i] < 0.0) continue;  // the partner of a pair is reconstructed by conjugation
        if (!pick(out.all[i])) continue;
        select[i] = 1;
        picked_index.push_back(i);
        columns += wi[i] > 0.0 ? 2 : 1;
    }
    if (columns == 0) return out;

    Eigen::MatrixXd vr(n, columns);
    std::vector<lapack_int> ifaill(columns), ifailr(columns);
    lapack_int used = 0;
    std::vector<double> wr_work = wr;
    double dummy = 0.0;
    info = LAPACKE_dhsein(LAPACK_COL_MAJOR, 'R', 'N', 'N', select.data(), n, h.data(), n,
                          wr_work.data(), wi.data(), &dummy, 1, vr.data(), n, columns, &used,
                          ifaill.data(), ifailr.data());
    PATCHBEAM_REQUIRE(info >= 0, numerical_breakdown, "inverse iteration rejected its input");
    info = LAPACKE_dormhr(LAPACK_COL_MAJOR, 'L', 'N', n, columns, 1, n, a.data(), n, tau.data(),
                          vr.data(), n);
    PATCHBEAM_REQUIRE(info == 0, numerical_breakdown, "eigenvector back-transform failed");

    out.vectors.resize(n, static_cast<Eigen::Index>(picked_index.size()) * 2);
    lapack_int col = 0;
    Eigen::Index k = 0;
    for (lapack_int i : picked_index) {
        if (wi[i] > 0.0) {
            Eigen::VectorXcd v(n);
            v.real() = vr.col(col);
            v.imag() = vr.col(col + 1);
            out.picked.push_back(out.all[i]);
            out.vectors.col(k++) = v;
            out.picked.push_back(std::conj(out.all[i]));
            out.vectors.col(k++) = v.conjugate();
            col += 2;
        } else {
            out.picked.push_back(out.all[i]);
            out.vectors.col(k++) = vr.col(col).cast<cplx>();
            col += 1;
        }
    }
    out.vectors.conservativeResize(n, k);
    return out;
}

// Orthogonal change of basis that puts span(basis) first.
struct Deflation {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr;
    Eigen::MatrixXd transformed;  // Q^T J Q
    Eigen::MatrixXd small;        // leading k x k block, rounding-level entries zeroed
    double residual = 0.0;
    int k = 0;
};

Deflation deflate(const Eigen::MatrixXd& j, const Eigen::MatrixXd& basis, double max_residual) {
    PATCHBEAM_REQUIRE(basis.rows() == j.rows(), dimension, "deflation basis has the wrong length");
    Deflation d;
    d.k = static_cast<int>(basis.cols());
    d.qr.compute(basis);
    const auto q = d.qr.householderQ();
    d.transformed = j;
    d.transformed.applyOnTheLeft(q.adjoint());
    d.transformed.applyOnTheRight(q);

    const int n = static_cast<int>(j.rows());
    const double scale = std::max(j.norm(), std::numeric_limits<double>::min());
    d.residual = d.transformed.bottomLeftCorner(n - d.k, d.k).norm() / scale;
    PATCHBEAM_REQUIRE(d.residual <= max_residual, numerical_breakdown,
                      "deflation subspace is not invariant (relative residual " +
                          std::to_string(d.residual) + ")");
    d.small = d.transformed.topLeftCorner(d.k, d.k);
    for (Eigen::Index c = 0; c < d.small.cols(); ++c)
        for (Eigen::Index r = 0; r < d.small.rows(); ++r)
            if (std::abs(d.small(r, c)) <= max_residual * scale) d.small(r, c) = 0.0;
    return d;
}

std::vector<cplx> small_eigs(const Eigen::MatrixXd& m) {
    if (m.rows() == 0) return {};
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
    PATCHBEAM_REQUIRE(es.info() == Eigen::Success, numerical_breakdown,
                      "small eigensolve failed");
    std::vector<cplx> out(es.eigenvalues().begin(), es.eigenvalues().end());
    return out;
}

}  // namespace

Eigen::MatrixXd assemble_jacobian(const RhsFn& rhs, int dim, double zero_tol) {
    PATCHBEAM_REQUIRE(dim > 0, dimension, "Jacobian dimension must be positive");
    std::vector<double> x(static_cast<std::size_t>(dim), 0.0), f0(x.size()), f(x.size());
    rhs(x, f0);
    double norm0 = 0.0;
    for (double v : f0) norm0 = std::max(norm0, std::abs(v));
    PATCHBEAM_REQUIRE(norm0 <= zero_tol, nonhomogeneous,
                      "rhs(0) is not zero (max |f(0)| = " + std::to_string(norm0) + ")");
    Eigen::MatrixXd jac(dim, dim);
    for (int j = 0; j < dim; ++j) {
        x[j] = 1.0;
        rhs(x, f);
        x[j] = 0.0;
        for (int i = 0; i < dim; ++i) jac(i, j) = f[i] - f0[i];
    }
    return jac;
}

void sort_spectrum(std::vector<cplx>& eigs) {
    std::stable_sort(eigs.begin(), eigs.end(), [](const cplx& a, const cplx& b) {
        if (a.real() != b.real()) return a.real() > b.real();
        if (std::abs(a.imag()) != std::abs(b.imag())) return std::abs(a.imag()) < std::abs(b.imag());
        return a.imag() > b.imag();
    });
}

std::vector<cplx> eigen_spectrum(const Eigen::MatrixXd& matrix) {
    require_finite_square(matrix);
    std::vector<cplx> eigs = dgeev_values(matrix);
    sort_spectrum(eigs);
    return eigs;
}

DeflationResult eigen_spectrum_deflated(const Eigen::MatrixXd& matrix, const Eigen::MatrixXd& basis,
                                        double max_residual) {
    require_finite_square(matrix);
    const Deflation d = deflate(matrix, basis, max_residual);
    const int n = static_cast<int>(matrix.rows());
    DeflationResult res;
    res.invariance_residual = d.residual;
    res.deflated = d.k;
    res.eigenvalues = small_eigs(d.small);
    const std::vector<cplx> rest =
        dgeev_values(d.transformed.bottomRightCorner(n - d.k, n - d.k));
    res.eigenvalues.insert(res.eigenvalues.end(), rest.begin(), rest.end());
    sort_spectrum(res.eigenvalues);
    return res;
}

Eigen::MatrixXd rigid_translation_basis(const StaggeredGrid& grid, int n_copies) {
    const int cols = grid.evolved_columns();
    const int nu = grid.u_rows() * cols;
    const int nv = grid.v_rows() * cols;
    const int per = grid.dof();
    Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(per) * n_copies, 4);
    for (int k = 0; k < n_copies; ++k) {
        const int o = k * per;
        basis.block(o, 0, nu, 1).setOnes();
        basis.block(o + nu, 1, nv, 1).setOnes();
        basis.block(o + nu + nv, 2, nu, 1).setOnes();
        basis.block(o + 2 * nu + nv, 3, nv, 1).setOnes();
    }
    return basis;
}

Classification classify_spectrum(std::span<const cplx> eigs, int macro_count, double warn_ratio,
                                 double imaginary_tol) {
    const int n = static_cast<int>(eigs.size());
    PATCHBEAM_REQUIRE(macro_count >= 0 && macro_count <= n, parameter,
                      "macro count " + std::to_string(macro_count) + " exceeds spectrum size " +
                          std::to_string(n));
    Classification c;
    double max_re = 0.0;
    for (const cplx& e : eigs) max_re = std::max(max_re, std::abs(e.real()));
    c.by_imaginary = max_re <= imaginary_tol;
    auto distance = [&](const cplx& e) {
        return c.by_imaginary ? std::abs(e.imag()) : std::abs(e.real());
    };

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const double da = distance(eigs[a]);
        const double db = distance(eigs[b]);
        if (da != db) return da < db;
        return std::abs(eigs[a]) < std::abs(eigs[b]);
    });
    c.macro.assign(order.begin(), order.begin() + macro_count);
    c.micro.assign(order.begin() + macro_count, order.end());
    std::sort(c.macro.begin(), c.macro.end());
    std::sort(c.micro.begin(), c.micro.end());

    for (int i : c.macro) c.macro_extent = std::max(c.macro_extent, distance(eigs[i]));
    c.micro_max_re = -std::numeric_limits<double>::infinity();
    for (int i : c.micro) c.micro_max_re = std::max(c.micro_max_re, eigs[i].real());
    c.macro_min_re = std::numeric_limits<double>::infinity();
    for (int i : c.macro) c.macro_min_re = std::min(c.macro_min_re, eigs[i].real());
    c.micro_extent = std::numeric_limits<double>::infinity();
    for (int i : c.micro) c.micro_extent = std::min(c.micro_extent, distance(eigs[i]));
    if (c.micro.empty()) c.micro_extent = std::numeric_limits<double>::infinity();
    c.gap_ratio = c.macro_extent > 0.0 ? c.micro_extent / c.macro_extent
                                       : std::numeric_limits<double>::infinity();
    c.ambiguous = c.gap_ratio < warn_ratio;
    return c;
}

Comparison compare_macro_eigenvalues(std::span<const cplx> patch_macro,
                                     std::span<const cplx> full_macro, double fail_distance) {
    const std::size_t np = patch_macro.size();
    const std::size_t nf = full_macro.size();
    std::vector<bool> used_p(np, false), used_f(nf, false);
    Comparison cmp;
    for (std::size_t round = 0; round < std::min(np, nf); ++round) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bp = 0, bf = 0;
        for (std::size_t i = 0; i < np; ++i) {
            if (used_p[i]) continue;
            for (std::size_t j = 0; j < nf; ++j) {
                if (used_f[j]) continue;
                const double d = std::abs(patch_macro[i] - full_macro[j]);
                if (d < best) {
                    best = d;
                    bp = i;
                    bf = j;
                }
            }
        }
        used_p[bp] = used_f[bf] = true;
        cmp.pairs.push_back({patch_macro[bp], full_macro[bf], best});
        cmp.max_error = std::max(cmp.max_error, best);
    }

    std::ostringstream bad;
    for (const EigenPair& p : cmp.pairs)
        if (p.error > fail_distance) bad << " " << p.patch << "~" << p.full << " (" << p.error << ")";
    for (std::size_t i = 0; i < np; ++i)
        if (!used_p[i]) bad << " unpaired patch " << patch_macro[i];
    for (std::size_t j = 0; j < nf; ++j)
        if (!used_f[j]) bad << " unpaired full " << full_macro[j];
    PATCHBEAM_REQUIRE(bad.str().empty(), pairing_failure,
                      "macro eigenvalue pairing failed:" + bad.str());
    std::sort(cmp.pairs.begin(), cmp.pairs.end(), [](const EigenPair& a, const EigenPair& b) {
        if (std::abs(a.full.imag()) != std::abs(b.full.imag()))
            return std::abs(a.full.imag()) < std::abs(b.full.imag());
        return a.full.imag() > b.full.imag();
    });
    return cmp;
}

double macro_fraction(const Eigen::VectorXcd& x, const StaggeredGrid& grid, int period_x,
                      int max_wavenumber) {
    PATCHBEAM_REQUIRE(grid.x_periodic, parameter, "macro projection needs the periodic full grid");
    PATCHBEAM_REQUIRE(x.size() == grid.dof(), dimension, "eigenvector length does not match grid");
    PATCHBEAM_REQUIRE(grid.nx % period_x == 0, periodicity, "period does not divide the grid");
    const int nx = grid.nx;
    const int blocks = nx / period_x;
    const double total = x.squaredNorm();
    if (total == 0.0) return 0.0;

    const int lines = static_cast<int>(x.size()) / nx;  // (array, row) pairs, each nx long
    double macro = 0.0;
    for (int m = -max_wavenumber; m <= max_wavenumber; ++m) {
        if (2 * std::abs(m) >= blocks && m < 0) continue;  // aliased onto a positive m
        std::vector<cplx> phase(blocks);
        for (int b = 0; b < blocks; ++b)
            phase[b] = std::polar(1.0, -2.0 * std::numbers::pi * m * b / blocks);
        for (int line = 0; line < lines; ++line) {
            for (int rho = 0; rho < period_x; ++rho) {
                cplx acc = 0.0;
                for (int b = 0; b < blocks; ++b)
                    acc += x[static_cast<Eigen::Index>(line) * nx + b * period_x + rho] * phase[b];
                macro += std::norm(acc) / blocks;
            }
        }
    }
    return macro / total;
}

MacroReference full_macro_reference(const Eigen::MatrixXd& jacobian, const StaggeredGrid& grid,
                                    int period_x, int n_patches,
                                    const MacroReferenceOptions& options) {
    require_finite_square(jacobian);
    PATCHBEAM_REQUIRE(jacobian.rows() == grid.dof(), dimension,
                      "Jacobian does not match the full-domain grid");
    const int max_m = (n_patches - 1) / 2;
    const int n = static_cast<int>(jacobian.rows());
    auto in_band = [&](const cplx& e) { return std::abs(e.real()) < options.slow_band; };

    MacroReference ref;
    if (!options.deflate_rigid) {
        SelectedEigen sel = hessenberg_select(jacobian, in_band);
        ref.spectrum = sel.all;
        ref.candidates = static_cast<int>(sel.picked.size());
        for (Eigen::Index i = 0; i < sel.vectors.cols(); ++i) {
            const double f = macro_fraction(sel.vectors.col(i), grid, period_x, max_m);
            if (f >= options.min_fraction) {
                ref.eigenvalues.push_back(sel.picked[i]);
                ref.fractions.push_back(f);
            }
        }
    } else {
        const Deflation d = deflate(jacobian, rigid_translation_basis(grid), 1e-12);
        const int k = d.k;
        for (const cplx& z : small_eigs(d.small)) {
            ref.eigenvalues.push_back(z);  // uniform translations: block wavenumber zero
            ref.fractions.push_back(1.0);
        }
        SelectedEigen sel = hessenberg_select(d.transformed.bottomRightCorner(n - k, n - k), in_band);
        ref.spectrum = small_eigs(d.small);
        ref.spectrum.insert(ref.spectrum.end(), sel.all.begin(), sel.all.end());
        ref.candidates = static_cast<int>(sel.picked.size());

        const Eigen::MatrixXcd a11 = d.small.cast<cplx>();
        const Eigen::MatrixXcd a12 = d.transformed.topRightCorner(k, n - k).cast<cplx>();
        const auto q = d.qr.householderQ();
        for (Eigen::Index i = 0; i < sel.vectors.cols(); ++i) {
            const cplx lambda = sel.picked[i];
            const Eigen::VectorXcd y2 = sel.vectors.col(i);
            const Eigen::MatrixXcd shifted =
                lambda * Eigen::MatrixXcd::Identity(k, k) - a11;
            const Eigen::VectorXcd y1 = shifted.fullPivLu().solve(a12 * y2);
            Eigen::VectorXd re(n), im(n);
            re << y1.real(), y2.real();
            im << y1.imag(), y2.imag();
            re.applyOnTheLeft(q);
            im.applyOnTheLeft(q);
            Eigen::VectorXcd x(n);
            x.real() = re;
            x.imag() = im;
            const double f = macro_fraction(x, grid, period_x, max_m);
            if (f >= options.min_fraction) {
                ref.eigenvalues.push_back(lambda);
                ref.fractions.push_back(f);
            }
        }
    }
    sort_spectrum(ref.spectrum);
    return ref;
}

std::vector<cplx> block_circulant_eigenvalues(const Eigen::MatrixXd& matrix, int n_blocks, int m,
                                             double tol) {
    require_finite_square(matrix);
    PATCHBEAM_REQUIRE(n_blocks > 0 && matrix.rows() % n_blocks == 0, dimension,
                      "matrix size is not a multiple of the block count");
    const Eigen::Index b = matrix.rows() / n_blocks;
    const double scale = std::max(matrix.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    double worst = 0.0;
    for (int r = 1; r < n_blocks; ++r)
        for (int d = 0; d < n_blocks; ++d) {
            const int c = (r + d) % n_blocks;
            worst = std::max(worst, (matrix.block(r * b, c * b, b, b) - matrix.block(0, d * b, b, b))
                                        .cwiseAbs()
                                        .maxCoeff());
        }
    PATCHBEAM_REQUIRE(worst <= tol * scale, nonhomogeneous,
                      "matrix is not block circulant (relative defect " +
                          std::to_string(worst / scale) + ")");
    Eigen::MatrixXcd symbol = Eigen::MatrixXcd::Zero(b, b);
    for (int d = 0; d < n_blocks; ++d)
        symbol += matrix.block(0, d * b, b, b).cast<cplx>() *
                  std::polar(1.0, 2.0 * std::numbers::pi * m * d / n_blocks);
    std::vector<cplx> out = zgeev_values(std::move(symbol));
    sort_spectrum(out);
    return out;
}

BlochSymbol::BlochSymbol(int ny, double dx, double dy, const ElasticityField& one_period,
                         double kappa) {
    const int p = one_period.cols();
    PATCHBEAM_REQUIRE(one_period.ny() == ny, dimension, "cell field has the wrong height");
    const StaggeredGrid grid{3 * p, ny, dx, dy, true};
    const ElasticityField field = one_period.window(0, 3 * p);
    const Eigen::MatrixXd jac = assemble_jacobian(make_full_rhs(grid, field, kappa), grid.dof());

    // Flat index -> (block, local index within a one-period layout).
    const int lines = grid.dof() / grid.nx;
    const int local = lines * p;
    std::vector<int> block(grid.dof()), loc(grid.dof());
    for (int line = 0; line < lines; ++line)
        for (int c = 0; c < grid.nx; ++c) {
            block[line * grid.nx + c] = c / p;
            loc[line * grid.nx + c] = line * p + c % p;
        }
    for (auto& b : blocks_) b = Eigen::MatrixXd::Zero(local, local);
    for (int i = 0; i < grid.dof(); ++i) {
        if (block[i] != 1) continue;
        for (int j = 0; j < grid.dof(); ++j) blocks_[block[j]](loc[i], loc[j]) += jac(i, j);
    }
}

Eigen::MatrixXcd BlochSymbol::symbol(double theta) const {
    const cplx back = std::polar(1.0, -theta);
    const cplx ahead = std::polar(1.0, theta);
    return blocks_[0].cast<cplx>() * back + blocks_[1].cast<cplx>() + blocks_[2].cast<cplx>() * ahead;
}

std::vector<cplx> BlochSymbol::eigenvalues(int m, int n_blocks) const {
    const double theta = 2.0 * std::numbers::pi * m / n_blocks;
    std::vector<cplx> out = zgeev_values(symbol(theta));
    sort_spectrum(out);
    return out;
}

std::vector<cplx> BlochSymbol::slowest(int m, int n_blocks, int count) const {
    std::vector<cplx> e = eigenvalues(m, n_blocks);
    std::stable_sort(e.begin(), e.end(), [](const cplx& a, const cplx& b) { return std::abs(a) < std::abs(b); });
    e.resize(std::min<std::size_t>(e.size(), static_cast<std::size_t>(count)));
    sort_spectrum(e);
    return e;
}

}  // namespace patchbeam
