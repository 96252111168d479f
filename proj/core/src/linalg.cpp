#include "geouio/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <lapacke.h>

namespace geouio {

Matrix pseudo_inverse(const Matrix& m, const TolerancePolicy& tol, double scale) {
    if (m.size() == 0) return Matrix::Zero(m.cols(), m.rows());
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    const double cut = tol.rel_rank_tol * static_cast<double>(std::max(m.rows(), m.cols())) * std::max(s(0), scale);
    Vector inv = Vector::Zero(s.size());
    for (Index i = 0; i < s.size(); ++i) {
        if (s(i) > cut) inv(i) = 1.0 / s(i);
    }
    Index r = 0;
    while (r < s.size() && s(r) > cut) ++r;
    if (r > 0) RankAudit::note(s(r - 1) / std::max(s(0), scale));
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Eigen::VectorXcd sorted_eigenvalues(const Matrix& m) {
    if (m.size() == 0) return Eigen::VectorXcd(0);
    Eigen::EigenSolver<Matrix> es(m, false);
    Eigen::VectorXcd ev = es.eigenvalues();
    std::sort(ev.data(), ev.data() + ev.size(), [](const Complex& x, const Complex& y) {
        if (x.real() != y.real()) return x.real() < y.real();
        return x.imag() < y.imag();
    });
    return ev;
}

double spectral_abscissa(const Matrix& m) {
    if (m.size() == 0) return -std::numeric_limits<double>::infinity();
    Eigen::EigenSolver<Matrix> es(m, false);
    return es.eigenvalues().real().maxCoeff();
}

double norm_1(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    return m.cwiseAbs().colwise().sum().maxCoeff();
}

double norm_inf(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    return m.cwiseAbs().rowwise().sum().maxCoeff();
}

double norm_2(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

Matrix block_diagonal(const std::vector<Matrix>& blocks) {
    Index rows = 0;
    Index cols = 0;
    for (const auto& b : blocks) {
        rows += b.rows();
        cols += b.cols();
    }
    Matrix out = Matrix::Zero(rows, cols);
    Index r = 0;
    Index c = 0;
    for (const auto& b : blocks) {
        out.block(r, c, b.rows(), b.cols()) = b;
        r += b.rows();
        c += b.cols();
    }
    return out;
}

namespace {

// dgees takes a plain function pointer; the active predicate is parked here for the call.
thread_local const std::function<bool(Complex)>* active_select = nullptr;

lapack_logical select_trampoline(const double* re, const double* im) {
    return (*active_select)(Complex(*re, *im)) ? 1 : 0;
}

}  // namespace

OrderedSchur ordered_real_schur(const Matrix& m, const std::function<bool(Complex)>& select) {
    if (m.rows() != m.cols()) throw DimensionMismatch("ordered_real_schur: matrix is not square");
    const lapack_int n = static_cast<lapack_int>(m.rows());
    OrderedSchur out;
    out.t = m;
    out.z = Matrix::Identity(n, n);
    if (n == 0) return out;

    std::vector<double> wr(static_cast<std::size_t>(n)), wi(static_cast<std::size_t>(n));
    lapack_int sdim = 0;
    active_select = &select;
    const lapack_int info = LAPACKE_dgees(LAPACK_COL_MAJOR, 'V', 'S', select_trampoline, n, out.t.data(), n,
                                          &sdim, wr.data(), wi.data(), out.z.data(), n);
    active_select = nullptr;
    // info == n + 2 means a complex pair straddled the selection after reordering; the
    // pair is then kept together, which is what we want.
    if (info != 0 && info != n + 2) {
        throw Error("ordered_real_schur: dgees failed, info = " + std::to_string(info));
    }
    out.leading_dim = sdim;
    return out;
}

Matrix invariant_subspace(const Matrix& m, const std::function<bool(Complex)>& select) {
    const OrderedSchur schur = ordered_real_schur(m, select);
    return schur.z.leftCols(schur.leading_dim);
}

namespace {

// Controllable subspace of (a, b) by orthonormal Krylov growth.
Subspace reachable_subspace(const Matrix& a, const Matrix& b, const TolerancePolicy& tol) {
    Subspace reach = image(b, tol);
    for (Index k = 0; k < a.rows(); ++k) {
        const Subspace next = sum(reach, map_subspace(a, reach, tol), tol);
        if (next.dim() == reach.dim()) break;
        reach = next;
    }
    return reach;
}

// State feedback k with eig(a - b k) = targets for a controllable pair.
Matrix place_controllable(const Matrix& a, const Matrix& b, const std::vector<double>& targets) {
    const Index n = a.rows();
    const Index m = b.cols();
    std::mt19937_64 rng(0x5eed5eedULL);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);

    for (int attempt = 0; attempt < 64; ++attempt) {
        // Jitter targets slightly on retries in case one collides with an open-loop eigenvalue.
        std::vector<double> lambda(targets.begin(), targets.begin() + n);
        for (Index j = 0; j < n; ++j) lambda[j] -= 1e-3 * attempt * static_cast<double>(j + 1) / n;

        Matrix g(m, n);
        for (Index i = 0; i < m; ++i)
            for (Index j = 0; j < n; ++j) g(i, j) = dist(rng);

        Matrix x(n, n);
        bool ok = true;
        for (Index j = 0; j < n && ok; ++j) {
            const Matrix shifted = a - lambda[j] * Matrix::Identity(n, n);
            Eigen::FullPivLU<Matrix> lu(shifted);
            if (!lu.isInvertible()) {
                ok = false;
                break;
            }
            x.col(j) = lu.solve(b * g.col(j));
        }
        if (!ok) continue;
        Eigen::JacobiSVD<Matrix> svd(x);
        const Vector& s = svd.singularValues();
        if (s(n - 1) <= 1e-10 * s(0)) continue;

        const Matrix k = g * x.inverse();
        const Eigen::VectorXcd placed = sorted_eigenvalues(a - b * k);
        std::vector<double> want(lambda);
        std::sort(want.begin(), want.end());
        double err = 0.0;
        for (Index j = 0; j < n; ++j) {
            err = std::max(err, std::abs(placed(j) - Complex(want[j], 0.0)) / (1.0 + std::abs(want[j])));
        }
        if (err <= 1e-6) return k;
    }
    throw SpectrumUnassignable("pole placement did not converge", sorted_eigenvalues(a));
}

}  // namespace

PolePlacement place_output_injection(const Matrix& a, const Matrix& c, const std::vector<double>& targets,
                                     const TolerancePolicy& tol) {
    const Index q = a.rows();
    if (a.cols() != q || c.cols() != q) throw DimensionMismatch("place_output_injection: inconsistent dimensions");

    PolePlacement out;
    out.gain = Matrix::Zero(q, c.rows());
    if (q == 0) {
        out.fixed_modes = Eigen::VectorXcd(0);
        return out;
    }

    // Dual state-feedback problem: (a^T, c^T).
    const Matrix ad = a.transpose();
    const Matrix bd = c.transpose();
    const Subspace reach = reachable_subspace(ad, bd, tol);
    const Index nc = reach.dim();
    out.observable_dim = nc;

    const Matrix tc = reach.basis();
    const Matrix tu = orth_complement(reach).basis();
    out.fixed_modes = sorted_eigenvalues(tu.transpose() * ad * tu);
    if (nc == 0) return out;
    if (static_cast<Index>(targets.size()) < nc) {
        throw SpectrumUnassignable("fewer pole targets than observable modes", sorted_eigenvalues(a));
    }

    const Matrix a11 = tc.transpose() * ad * tc;
    const Matrix b1 = tc.transpose() * bd;
    const Matrix k1 = place_controllable(a11, b1, targets);
    const Matrix k = k1 * tc.transpose();
    out.gain = -k.transpose();
    return out;
}

}  // namespace geouio
