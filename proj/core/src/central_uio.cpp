#include "geouio/central_uio.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace geouio {

namespace {

Matrix select_columns(const Matrix& m, const std::vector<Index>& cols) {
    Matrix out(m.rows(), static_cast<Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Index>(k)) = m.col(cols[k]);
    return out;
}

Vector select_entries(const Vector& v, const std::vector<Index>& idx) {
    Vector out(static_cast<Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) out(static_cast<Index>(k)) = v(idx[k]);
    return out;
}

}  // namespace

void LinSystem::validate() const {
    if (A.rows() == 0 || A.rows() != A.cols()) throw DimensionMismatch("system: A must be square and nonempty");
    if (B.rows() != A.rows()) throw DimensionMismatch("system: B must have n rows");
    if (C.cols() != A.cols()) throw DimensionMismatch("system: C must have n columns");
    if (!A.allFinite() || !B.allFinite() || !C.allFinite()) throw ConfigError("system: non-finite matrix entry");
}

void InputPartition::validate(Index m) const {
    std::set<Index> seen;
    for (const auto* list : {&known_cols, &unknown_cols}) {
        for (Index k : *list) {
            if (k < 0 || k >= m) throw ConfigError("input partition: column index " + std::to_string(k) + " out of range");
            if (!seen.insert(k).second) throw ConfigError("input partition: column " + std::to_string(k) + " listed twice");
        }
    }
    if (static_cast<Index>(seen.size()) != m) throw ConfigError("input partition: not every column of B is assigned");
}

Matrix InputPartition::known(const Matrix& b) const { return select_columns(b, known_cols); }
Matrix InputPartition::unknown(const Matrix& b) const { return select_columns(b, unknown_cols); }
Vector InputPartition::known(const Vector& u) const { return select_entries(u, known_cols); }
Vector InputPartition::unknown(const Vector& u) const { return select_entries(u, unknown_cols); }

bool check_uio_condition(const GeometricDecomposition& decomp, const LinMap& c, const TolerancePolicy& tol) {
    return intersect(decomp.W_g_star, kernel(c, tol), tol).is_zero();
}

bool is_detectable(const Matrix& a, const Matrix& c, double alpha, const TolerancePolicy& tol) {
    const Index n = a.rows();
    if (n == 0) return true;
    Eigen::EigenSolver<Matrix> es(a, false);
    const Eigen::VectorXcd ev = es.eigenvalues();
    const double scale = std::max(1.0, a.norm());
    for (Index i = 0; i < ev.size(); ++i) {
        if (ev(i).real() < alpha - 1e-8 * std::max(1.0, std::abs(ev(i)))) continue;  // same tie rule as SpectralPartition
        Eigen::MatrixXcd pbh(n + c.rows(), n);
        pbh.topRows(n) = ev(i) * Eigen::MatrixXcd::Identity(n, n) - a.cast<Complex>();
        pbh.bottomRows(c.rows()) = c.cast<Complex>();
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pbh);
        const Vector s = svd.singularValues();
        const double cut = tol.rel_rank_tol * static_cast<double>(pbh.rows()) * std::max(s(0), scale);
        Index rank = 0;
        while (rank < s.size() && s(rank) > cut) ++rank;
        if (rank > 0) RankAudit::note(s(rank - 1) / std::max(s(0), scale));
        if (rank < n) return false;
    }
    return true;
}

ClassicalConditions classical_rank_condition(const LinSystem& sys, const InputPartition& part,
                                             const SpectralPartition& spectral, const TolerancePolicy& tol) {
    const Matrix bbar = part.unknown(sys.B);
    const Matrix cb = sys.C * bbar;
    // Round-off in the product must not count as rank.
    const double scale = norm_2(sys.C) * norm_2(bbar);
    ClassicalConditions out;
    out.rank_condition = numerical_rank(cb, tol, scale) == numerical_rank(bbar, tol);
    const Index n = sys.n();
    const Matrix a1 = (Matrix::Identity(n, n) - bbar * pseudo_inverse(cb, tol, scale) * sys.C) * sys.A;
    out.detectable = is_detectable(a1, sys.C, spectral.alpha, tol);
    return out;
}

OutputReconstruction solve_output_reconstruction(const Matrix& p, const Matrix& c, const TolerancePolicy& tol) {
    if (p.cols() != c.cols()) throw DimensionMismatch("solve_output_reconstruction: column counts differ");
    const Index n = p.cols();
    Matrix stacked(p.rows() + c.rows(), n);
    stacked << p, c;
    if (numerical_rank(stacked, tol) < n) {
        throw NotSolvable("solve_output_reconstruction: rows of P and C do not span R^n");
    }
    const Matrix x = pseudo_inverse(stacked, tol);
    OutputReconstruction out{x.leftCols(p.rows()), x.rightCols(c.rows())};
    const double residual = (out.E * p + out.F * c - Matrix::Identity(n, n)).norm();
    if (residual > tol.abs_residual_tol) {
        throw NotSolvable("solve_output_reconstruction: residual " + std::to_string(residual));
    }
    return out;
}

CentralizedObserver synthesize_centralized_uio(const LinSystem& sys, const InputPartition& part,
                                               const SpectralPartition& spectral, const TolerancePolicy& tol) {
    sys.validate();
    part.validate(sys.m());
    spectral.validate();

    CentralizedObserver obs;
    obs.decomp = decompose(sys.A, sys.C, part.unknown(sys.B), spectral, tol);
    const Subspace blind = intersect(obs.decomp.W_g_star, kernel(sys.C, tol), tol);
    if (!blind.is_zero()) {
        throw ExistenceFailed("existence condition violated: W_g* ∩ Ker C has dimension " +
                                  std::to_string(blind.dim()) + " (these states are neither measured nor decoupled)",
                              ExistenceCondition::KernelIntersection, blind.basis());
    }

    StabilizingFriend fr;
    try {
        fr = stabilizing_friend(sys.A, sys.C, obs.decomp.W_g_star, spectral, tol, obs.decomp.L0);
    } catch (const SpectrumUnassignable& e) {
        throw ExistenceFailed(std::string("quotient spectrum could not be assigned: ") + e.what(),
                              ExistenceCondition::SpectrumAssignment, Matrix(), e.offending());
    }

    obs.L = fr.L;
    obs.Abar_L = fr.Abar;
    obs.P_Wg = obs.decomp.P_Wg;
    obs.z_dim = obs.P_Wg.rows();
    obs.B_known = part.known(sys.B);
    const OutputReconstruction ef = solve_output_reconstruction(obs.P_Wg, sys.C, tol);
    obs.E = ef.E;
    obs.F = ef.F;
    return obs;
}

Vector observer_rhs(const CentralizedObserver& obs, const Vector& z, const Vector& y, const Vector& u_known) {
    Vector dz = obs.Abar_L * z - obs.P_Wg * (obs.L * y);
    if (obs.B_known.cols() > 0) dz += obs.P_Wg * (obs.B_known * u_known);
    return dz;
}

Vector estimate(const CentralizedObserver& obs, const Vector& z, const Vector& y) {
    return obs.E * z + obs.F * y;
}

CentralResiduals centralized_residuals(const CentralizedObserver& obs, const LinSystem& sys,
                                       const InputPartition& part) {
    const Index n = sys.n();
    const Matrix a_l = sys.A + obs.L * sys.C;
    CentralResiduals r;
    r.reconstruction = (obs.E * obs.P_Wg + obs.F * sys.C - Matrix::Identity(n, n)).norm();
    r.input_decoupling = (obs.P_Wg * part.unknown(sys.B)).norm();
    r.commutation = (obs.Abar_L * obs.P_Wg - obs.P_Wg * a_l).norm();
    r.friend_invariance = obs.decomp.W_g_star.is_zero() ? 0.0 : (obs.P_Wg * a_l * obs.decomp.W_g_star.basis()).norm();
    r.spectral_abscissa = spectral_abscissa(obs.Abar_L);
    return r;
}

}  // namespace geouio
