#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "patchbeam/hetero_field.hpp"
#include "patchbeam/micro_beam.hpp"
#include "patchbeam/system.hpp"

namespace patchbeam {

using cplx = std::complex<double>;

/// Dense Jacobian of a linear homogeneous RHS: column j = f(e_j) - f(0).
/// Throws a nonhomogeneous-system error when |f(0)| exceeds `zero_tol`.
[[nodiscard]] Eigen::MatrixXd assemble_jacobian(const RhsFn& rhs, int dim, double zero_tol = 1e-12);

/// Order used for every reported spectrum: real part descending, then
/// |imaginary part| ascending, then imaginary part descending.
void sort_spectrum(std::vector<cplx>& eigs);

/// All eigenvalues of a dense real matrix, sorted per sort_spectrum.
[[nodiscard]] std::vector<cplx> eigen_spectrum(const Eigen::MatrixXd& matrix);

/// Exactly invariant subspace removed before an eigensolve. The rigid
/// translations of the beam make a nilpotent (Jordan) block whose
/// eigenvalues a dense solver can only resolve to sqrt(eps * |J|); removing
/// the block leaves those eigenvalues at exactly zero.
struct DeflationResult {
    std::vector<cplx> eigenvalues;  ///< whole spectrum, sorted
    double invariance_residual = 0.0;  ///< |J Q1 - Q1 (Q1^T J Q1)| / |J|
    int deflated = 0;
};

/// Eigenvalues of `matrix` with the span of `basis` deflated. The span must
/// be invariant under the matrix to `max_residual` (relative); the deflated
/// block's eigenvalues are computed from the small projected matrix.
[[nodiscard]] DeflationResult eigen_spectrum_deflated(const Eigen::MatrixXd& matrix,
                                                      const Eigen::MatrixXd& basis,
                                                      double max_residual = 1e-12);

/// The four-dimensional invariant subspace of rigid translation: uniform u,
/// uniform v, and uniform du, dv (which the RHS maps onto the former).
[[nodiscard]] Eigen::MatrixXd rigid_translation_basis(const StaggeredGrid& grid, int n_copies = 1);

struct Classification {
    std::vector<int> macro;  ///< indices into the classified spectrum
    std::vector<int> micro;
    double gap_ratio = 0.0;  ///< min micro distance / max nonzero macro distance
    double macro_extent = 0.0;
    double micro_extent = 0.0;
    double micro_max_re = 0.0;  ///< rightmost micro eigenvalue
    double macro_min_re = 0.0;  ///< leftmost macro eigenvalue
    bool by_imaginary = false;  ///< spectrum is purely imaginary; ordered by |Im| instead
    bool ambiguous = false;     ///< gap_ratio below the warning threshold
};

/// Macro set = the `macro_count` eigenvalues closest to the imaginary axis
/// (or, for a purely imaginary spectrum, closest to zero); micro = the rest.
[[nodiscard]] Classification classify_spectrum(std::span<const cplx> eigs, int macro_count,
                                               double warn_ratio = 5.0,
                                               double imaginary_tol = 1e-8);

struct EigenPair {
    cplx patch;
    cplx full;
    double error = 0.0;
};

struct Comparison {
    std::vector<EigenPair> pairs;
    double max_error = 0.0;
};

/// Greedy nearest-neighbour pairing (globally closest pair first). Throws a
/// pairing-failure error listing every pair farther apart than `fail_distance`.
[[nodiscard]] Comparison compare_macro_eigenvalues(std::span<const cplx> patch_macro,
                                                   std::span<const cplx> full_macro,
                                                   double fail_distance = 1e-3);

/// Fraction of the energy of a full-domain state vector (flat layout of
/// `grid`) carried by block wavenumbers |m| <= max_wavenumber, from a DFT
/// over consecutive blocks of `period_x` columns.
[[nodiscard]] double macro_fraction(const Eigen::VectorXcd& x, const StaggeredGrid& grid,
                                    int period_x, int max_wavenumber);

struct MacroReference {
    std::vector<cplx> eigenvalues;  ///< selected macro eigenvalues, sorted
    std::vector<double> fractions;  ///< their macro_fraction
    std::vector<cplx> spectrum;     ///< the complete full-domain spectrum
    int candidates = 0;             ///< eigenvectors examined
};

struct MacroReferenceOptions {
    double min_fraction = 0.99;
    double slow_band = 0.1;          ///< |Re lambda| below this is slow
    bool deflate_rigid = true;
};

/// Full-domain macroscale reference: eigenvalues in the slow band whose
/// eigenvectors put at least `min_fraction` of their energy on block
/// wavenumbers |m| <= (N-1)/2. Eigenvectors are only computed for slow-band
/// candidates (Hessenberg reduction, inverse iteration, back-transform).
[[nodiscard]] MacroReference full_macro_reference(const Eigen::MatrixXd& jacobian,
                                                  const StaggeredGrid& grid, int period_x,
                                                  int n_patches,
                                                  const MacroReferenceOptions& options = {});

/// Eigenvalues of a block-circulant matrix restricted to block wavenumber m:
/// those of sum_d C_d exp(2 pi i m d / n_blocks), where C_d couples block 0 to
/// block d. Throws when the matrix is not block circulant to `tol` (relative).
[[nodiscard]] std::vector<cplx> block_circulant_eigenvalues(const Eigen::MatrixXd& matrix,
                                                            int n_blocks, int m,
                                                            double tol = 1e-12);

/// Bloch route to the full-domain spectrum: the periodic Jacobian is block
/// circulant over heterogeneity periods, so its eigenvalues at block
/// wavenumber m are those of the small symbol matrix sum_d B_d exp(i theta d),
/// theta = 2 pi m / n_blocks. `cell_field` is one period wide.
class BlochSymbol {
public:
    BlochSymbol(int ny, double dx, double dy, const ElasticityField& one_period, double kappa);

    [[nodiscard]] int size() const noexcept { return static_cast<int>(blocks_[0].rows()); }
    [[nodiscard]] Eigen::MatrixXcd symbol(double theta) const;
    [[nodiscard]] std::vector<cplx> eigenvalues(int m, int n_blocks) const;
    /// The `count` eigenvalues of smallest modulus at wavenumber m.
    [[nodiscard]] std::vector<cplx> slowest(int m, int n_blocks, int count) const;

private:
    Eigen::MatrixXd blocks_[3];  ///< coupling to the block at offset -1, 0, +1
};

}  // namespace patchbeam
