#pragma once

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "geouio/subspace.hpp"

namespace geouio {

using Complex = std::complex<double>;

/// Moore-Penrose pseudoinverse with the policy's rank cut.
Matrix pseudo_inverse(const Matrix& m, const TolerancePolicy& tol = {}, double scale = 0.0);

/// Eigenvalues sorted by (real, imag) so that spectra can be compared entrywise.
Eigen::VectorXcd sorted_eigenvalues(const Matrix& m);

/// max Re(lambda); -inf for an empty matrix.
double spectral_abscissa(const Matrix& m);

/// Induced matrix 1-norm (max column abs sum) and inf-norm (max row abs sum); 0 when empty.
double norm_1(const Matrix& m);
double norm_inf(const Matrix& m);
/// Spectral norm; 0 when empty.
double norm_2(const Matrix& m);

/// Block diagonal assembly; zero-size blocks contribute their nonzero extent only.
Matrix block_diagonal(const std::vector<Matrix>& blocks);

/// Real Schur form m = Z T Z^T whose leading block carries exactly the eigenvalues
/// accepted by `select` (complex pairs move together).
struct OrderedSchur {
    Matrix t;
    Matrix z;
    Index leading_dim = 0;
};
OrderedSchur ordered_real_schur(const Matrix& m, const std::function<bool(Complex)>& select);

/// Orthonormal basis of the invariant subspace of m for the selected eigenvalues.
Matrix invariant_subspace(const Matrix& m, const std::function<bool(Complex)>& select);

/// Output-injection pole placement for the pair (c, a).
///
/// Returns Y such that the spectrum of a + Y c consists of `targets` (one per
/// observable mode, taken in order) together with the unobservable modes of (c, a),
/// which no Y can move.  The observable part is placed with a Sylvester-equation
/// method using a seeded random parameter matrix, so the result is deterministic.
struct PolePlacement {
    Matrix gain;
    Index observable_dim = 0;
    Eigen::VectorXcd fixed_modes;
};
PolePlacement place_output_injection(const Matrix& a, const Matrix& c, const std::vector<double>& targets,
                                     const TolerancePolicy& tol = {});

}  // namespace geouio
