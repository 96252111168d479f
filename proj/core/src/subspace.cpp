#include "geouio/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

namespace geouio {

namespace {

struct Svd {
    Vector sigma;
    Matrix u;  // full
    Matrix v;  // full
};

Svd full_svd(const Matrix& m) {
    Svd out;
    const Index rows = m.rows();
    const Index cols = m.cols();
    if (rows == 0 || cols == 0) {
        out.sigma = Vector(0);
        out.u = Matrix::Identity(rows, rows);
        out.v = Matrix::Identity(cols, cols);
        return out;
    }
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    out.sigma = svd.singularValues();
    out.u = svd.matrixU();
    out.v = svd.matrixV();
    return out;
}

double rank_threshold(const Vector& sigma, Index rows, Index cols, const TolerancePolicy& tol,
                      double scale) {
    const double smax = sigma.size() > 0 ? sigma(0) : 0.0;
    return tol.rel_rank_tol * static_cast<double>(std::max(rows, cols)) * std::max(smax, scale);
}

thread_local RankAudit* active_audit = nullptr;

Index rank_from(const Vector& sigma, double threshold) {
    Index r = 0;
    while (r < sigma.size() && sigma(r) > threshold) ++r;
    return r;
}

// Rank decision plus audit note.
Index decide_rank(const Vector& sigma, Index rows, Index cols, const TolerancePolicy& tol, double scale) {
    const Index r = rank_from(sigma, rank_threshold(sigma, rows, cols, tol, scale));
    if (r > 0) RankAudit::note(sigma(r - 1) / std::max(sigma(0), scale));
    return r;
}

void require_same_ambient(const Subspace& v, const Subspace& w, const char* op) {
    if (v.ambient_dim() != w.ambient_dim()) {
        throw DimensionMismatch(std::string(op) + ": ambient dimensions differ (" +
                                std::to_string(v.ambient_dim()) + " vs " +
                                std::to_string(w.ambient_dim()) + ")");
    }
}

}  // namespace

void TolerancePolicy::validate() const {
    if (!(std::isfinite(rel_rank_tol) && rel_rank_tol > 0.0)) {
        throw ConfigError("rel_rank_tol must be a finite positive number");
    }
    if (!(std::isfinite(abs_residual_tol) && abs_residual_tol > 0.0)) {
        throw ConfigError("abs_residual_tol must be a finite positive number");
    }
}

TolerancePolicy TolerancePolicy::from_env() {
    TolerancePolicy tol;
    if (const char* env = std::getenv("GEO_UIO_TOL"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const double value = std::strtod(env, &end);
        if (end == env || *end != '\0') {
            throw ConfigError(std::string("GEO_UIO_TOL is not a number: ") + env);
        }
        tol.rel_rank_tol = value;
        tol.validate();
    }
    return tol;
}

Subspace::Subspace(Index ambient_dim, double tol)
    : ambient_(ambient_dim), basis_(ambient_dim, 0), tol_(tol) {}

Subspace Subspace::from_orthonormal(Matrix basis, double tol) {
    Subspace s(basis.rows(), tol);
    s.basis_ = std::move(basis);
    return s;
}

Subspace Subspace::full(Index n) { return from_orthonormal(Matrix::Identity(n, n)); }

RankAudit::RankAudit() : previous_(active_audit) { active_audit = this; }
RankAudit::~RankAudit() { active_audit = previous_; }

void RankAudit::note(double gap) {
    if (active_audit == nullptr) return;
    active_audit->min_gap_ = std::min(active_audit->min_gap_, gap);
    ++active_audit->decisions_;
}

Index numerical_rank(const Matrix& m, const TolerancePolicy& tol, double scale) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(m);
    return decide_rank(svd.singularValues(), m.rows(), m.cols(), tol, scale);
}

double rank_gap(const Matrix& m, const TolerancePolicy& tol, double scale) {
    if (m.size() == 0) return 1.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    const Vector& sigma = svd.singularValues();
    const Index r = rank_from(sigma, rank_threshold(sigma, m.rows(), m.cols(), tol, scale));
    if (r == 0) return 1.0;
    return sigma(r - 1) / std::max(sigma(0), scale);
}

Subspace image(const LinMap& m, const TolerancePolicy& tol, double scale) {
    const Svd svd = full_svd(m);
    const Index r = decide_rank(svd.sigma, m.rows(), m.cols(), tol, scale);
    return Subspace::from_orthonormal(svd.u.leftCols(r), tol.rel_rank_tol);
}

Subspace kernel(const LinMap& m, const TolerancePolicy& tol, double scale) {
    const Svd svd = full_svd(m);
    const Index r = decide_rank(svd.sigma, m.rows(), m.cols(), tol, scale);
    return Subspace::from_orthonormal(svd.v.rightCols(m.cols() - r), tol.rel_rank_tol);
}

Subspace map_subspace(const LinMap& a, const Subspace& v, const TolerancePolicy& tol) {
    if (a.cols() != v.ambient_dim()) {
        throw DimensionMismatch("map_subspace: map domain does not match subspace ambient dimension");
    }
    if (v.is_zero()) return Subspace(a.rows(), tol.rel_rank_tol);
    const double scale = a.size() > 0 ? a.norm() : 0.0;
    return image(a * v.basis(), tol, scale);
}

Subspace sum(const Subspace& v, const Subspace& w, const TolerancePolicy& tol) {
    require_same_ambient(v, w, "sum");
    if (v.is_zero()) return w;
    if (w.is_zero()) return v;
    Matrix stacked(v.ambient_dim(), v.dim() + w.dim());
    stacked << v.basis(), w.basis();
    return image(stacked, tol, 1.0);
}

Subspace orth_complement(const Subspace& v) {
    const Index n = v.ambient_dim();
    if (v.is_zero()) return Subspace::from_orthonormal(Matrix::Identity(n, n), v.tol());
    if (v.is_full()) return Subspace(n, v.tol());
    const Svd svd = full_svd(v.basis());
    return Subspace::from_orthonormal(svd.u.rightCols(n - v.dim()), v.tol());
}

Subspace intersect(const Subspace& v, const Subspace& w, const TolerancePolicy& tol) {
    require_same_ambient(v, w, "intersect");
    if (v.is_zero() || w.is_zero()) return Subspace(v.ambient_dim(), tol.rel_rank_tol);
    if (v.is_full()) return w;
    if (w.is_full()) return v;
    return orth_complement(sum(orth_complement(v), orth_complement(w), tol));
}

Subspace preimage(const LinMap& m, const Subspace& s, const TolerancePolicy& tol) {
    if (m.rows() != s.ambient_dim()) {
        throw DimensionMismatch("preimage: map codomain does not match subspace ambient dimension");
    }
    const Subspace perp = orth_complement(s);
    if (perp.is_zero()) return Subspace::full(m.cols());
    const double scale = m.size() > 0 ? m.norm() : 0.0;
    return kernel(perp.basis().transpose() * m, tol, scale);
}

LinMap canonical_projection(const Subspace& w) { return orth_complement(w).basis().transpose(); }

double invariance_residual(const LinMap& a, const Subspace& w) {
    if (w.is_zero() || w.is_full()) return 0.0;
    const LinMap p = canonical_projection(w);
    return (p * a * w.basis()).norm();
}

LinMap induced_map(const LinMap& a, const Subspace& w, const LinMap& p, const TolerancePolicy& tol) {
    if (a.rows() != a.cols() || a.cols() != w.ambient_dim() || p.cols() != a.cols()) {
        throw DimensionMismatch("induced_map: inconsistent dimensions");
    }
    const double residual = w.is_zero() ? 0.0 : (p * a * w.basis()).norm();
    const double bound = tol.abs_residual_tol * std::max(1.0, a.norm());
    if (residual > bound) {
        throw InvarianceViolated("induced_map: subspace is not invariant (residual " +
                                     std::to_string(residual) + ")",
                                 residual);
    }
    // p has orthonormal rows, so p^T is a right inverse.
    return p * a * p.transpose();
}

double containment_residual(const Subspace& v, const Subspace& w) {
    require_same_ambient(v, w, "contains");
    if (w.is_zero()) return 0.0;
    const Matrix r = w.basis() - v.basis() * (v.basis().transpose() * w.basis());
    return r.colwise().norm().maxCoeff();
}

bool contains(const Subspace& v, const Subspace& w, const TolerancePolicy& tol) {
    return containment_residual(v, w) <= tol.abs_residual_tol;
}

bool equal(const Subspace& v, const Subspace& w, const TolerancePolicy& tol) {
    return v.dim() == w.dim() && contains(v, w, tol) && contains(w, v, tol);
}

Subspace unobservable_subspace(const LinMap& a, const LinMap& c, const TolerancePolicy& tol) {
    const Index n = a.rows();
    const Subspace ker_c = kernel(c, tol);
    // Nested recursion S <- Ker C cap A^-1 S; stops once the dimension stalls.
    Subspace result = ker_c;
    for (Index k = 1; k < n && !result.is_zero(); ++k) {
        const Subspace next = intersect(ker_c, preimage(a, result, tol), tol);
        const bool stalled = next.dim() == result.dim();
        result = next;
        if (stalled) break;
    }
    return result;
}

}  // namespace geouio
