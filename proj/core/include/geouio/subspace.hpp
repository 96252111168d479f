#pragma once

// Numerical subspace algebra over R^n.
//
// A Subspace is held as an orthonormal basis (n x k, k may be 0). Every rank
// decision cuts singular values at rel_rank_tol * max(rows, cols) * max(sigma_max, scale);
// `scale` lets callers that project a product (P*M, A*V) reject round-off that
// would otherwise look like a full-rank matrix of tiny norm.

#include <Eigen/Dense>

#include "geouio/errors.hpp"

namespace geouio {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Matrix of a linear map R^n -> R^p (rows = codomain, cols = domain).
using LinMap = Eigen::MatrixXd;

struct TolerancePolicy {
    double rel_rank_tol = 1e-10;
    double abs_residual_tol = 1e-9;

    /// Throws ConfigError unless both tolerances are finite and strictly positive.
    void validate() const;

    /// Defaults, with rel_rank_tol overridden by $GEO_UIO_TOL when set.
    static TolerancePolicy from_env();
};

class Subspace {
public:
    /// The zero subspace of R^n.
    explicit Subspace(Index ambient_dim = 0, double tol = TolerancePolicy{}.rel_rank_tol);

    /// Wraps a basis the caller guarantees to be orthonormal.
    static Subspace from_orthonormal(Matrix basis, double tol = TolerancePolicy{}.rel_rank_tol);

    static Subspace zero(Index n) { return Subspace(n); }
    static Subspace full(Index n);

    Index ambient_dim() const noexcept { return ambient_; }
    Index dim() const noexcept { return basis_.cols(); }
    const Matrix& basis() const noexcept { return basis_; }
    double tol() const noexcept { return tol_; }

    bool is_zero() const noexcept { return dim() == 0; }
    bool is_full() const noexcept { return dim() == ambient_; }

    /// Orthogonal projector onto the subspace (n x n).
    Matrix projector() const { return basis_ * basis_.transpose(); }

private:
    Index ambient_ = 0;
    Matrix basis_;
    double tol_ = 0.0;
};

/// Numerical rank of a matrix under the policy.  scale >= 0 is a floor for sigma_max.
Index numerical_rank(const Matrix& m, const TolerancePolicy& tol = {}, double scale = 0.0);

/// Smallest singular value retained by the rank decision divided by max(sigma_max, scale);
/// 1 for a zero-rank decision.  Used to flag rank decisions that sit close to the cut.
double rank_gap(const Matrix& m, const TolerancePolicy& tol = {}, double scale = 0.0);

/// While alive, collects the rank gap (as defined for rank_gap) of every rank decision
/// made on this thread.  Scopes nest; the innermost one receives the notes.
class RankAudit {
public:
    RankAudit();
    ~RankAudit();
    RankAudit(const RankAudit&) = delete;
    RankAudit& operator=(const RankAudit&) = delete;

    double min_gap() const { return min_gap_; }
    Index decisions() const { return decisions_; }

    /// Called by rank-deciding code; a no-op when no audit is active.
    static void note(double gap);

private:
    RankAudit* previous_;
    double min_gap_ = 1.0;
    Index decisions_ = 0;
};

Subspace image(const LinMap& m, const TolerancePolicy& tol = {}, double scale = 0.0);
Subspace kernel(const LinMap& m, const TolerancePolicy& tol = {}, double scale = 0.0);

/// A * V.
Subspace map_subspace(const LinMap& a, const Subspace& v, const TolerancePolicy& tol = {});

Subspace sum(const Subspace& v, const Subspace& w, const TolerancePolicy& tol = {});
Subspace intersect(const Subspace& v, const Subspace& w, const TolerancePolicy& tol = {});
Subspace orth_complement(const Subspace& v);

/// {x : M x in S}.
Subspace preimage(const LinMap& m, const Subspace& s, const TolerancePolicy& tol = {});

/// Orthonormal-row chart of X/W: rows span W^perp, so Ker P = W.
LinMap canonical_projection(const Subspace& w);

/// Matrix of the map induced by A on X/W in the chart P; throws InvarianceViolated if A W is not in W.
LinMap induced_map(const LinMap& a, const Subspace& w, const LinMap& p, const TolerancePolicy& tol = {});

/// Largest column residual of W's basis after projection onto V.
double containment_residual(const Subspace& v, const Subspace& w);

bool contains(const Subspace& v, const Subspace& w, const TolerancePolicy& tol = {});
bool equal(const Subspace& v, const Subspace& w, const TolerancePolicy& tol = {});

/// Residual of A W ⊆ W: ||P_{W^perp} A basis(W)||_F.
double invariance_residual(const LinMap& a, const Subspace& w);

/// Unobservable subspace <Ker C | A> = Ker C ∩ A^{-1} Ker C ∩ ... ∩ A^{-(n-1)} Ker C.
Subspace unobservable_subspace(const LinMap& a, const LinMap& c, const TolerancePolicy& tol = {});

}  // namespace geouio
