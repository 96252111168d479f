#include "geouio/geometric.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace geouio {

namespace {

double map_scale(const LinMap& a) { return std::max(1.0, a.size() > 0 ? a.norm() : 0.0); }

void require_square_system(const LinMap& a, const LinMap& c, Index ambient, const char* op) {
    if (a.rows() != a.cols() || c.cols() != a.cols() || ambient != a.rows()) {
        throw DimensionMismatch(std::string(op) + ": inconsistent dimensions");
    }
}

}  // namespace

std::vector<double> SpectralPartition::targets(Index count) const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    for (Index k = 0; k < count; ++k) {
        if (k < static_cast<Index>(pole_targets.size())) {
            out.push_back(pole_targets[static_cast<std::size_t>(k)]);
        } else if (pole_targets.empty()) {
            out.push_back(alpha - 1.0 - 0.5 * static_cast<double>(k));
        } else {
            // Continue past the configured list with the default spacing.
            out.push_back(out.back() - 0.5);
        }
    }
    return out;
}

void SpectralPartition::validate() const {
    if (!std::isfinite(alpha)) throw ConfigError("spectral alpha must be finite");
    if (!(std::isfinite(margin) && margin >= 0.0)) throw ConfigError("spectral margin must be finite and >= 0");
    for (double t : pole_targets) {
        if (!(std::isfinite(t) && t < alpha - margin)) {
            throw ConfigError("pole target " + std::to_string(t) + " is not below alpha - margin");
        }
    }
}

std::vector<Subspace> conditioned_invariant_iterates(const LinMap& a, const LinMap& c, const Subspace& bbar,
                                                     const TolerancePolicy& tol) {
    require_square_system(a, c, bbar.ambient_dim(), "infimal_conditioned_invariant");
    const Subspace ker_c = kernel(c, tol);
    std::vector<Subspace> iterates{bbar};
    for (Index k = 0; k <= a.rows(); ++k) {
        const Subspace& w = iterates.back();
        Subspace next = sum(bbar, map_subspace(a, intersect(w, ker_c, tol), tol), tol);
        if (next.dim() == w.dim()) break;
        iterates.push_back(std::move(next));
    }
    return iterates;
}

Subspace infimal_conditioned_invariant(const LinMap& a, const LinMap& c, const Subspace& bbar,
                                       const TolerancePolicy& tol) {
    return conditioned_invariant_iterates(a, c, bbar, tol).back();
}

std::vector<Subspace> unobservability_iterates(const LinMap& a, const LinMap& c, const Subspace& w_star,
                                               const TolerancePolicy& tol) {
    require_square_system(a, c, w_star.ambient_dim(), "infimal_unobservability_subspace");
    const Subspace ker_c = kernel(c, tol);
    std::vector<Subspace> iterates{Subspace::full(a.rows())};
    for (Index k = 0; k <= a.rows(); ++k) {
        const Subspace& s = iterates.back();
        Subspace next = sum(w_star, intersect(preimage(a, s, tol), ker_c, tol), tol);
        if (next.dim() == s.dim()) break;
        iterates.push_back(std::move(next));
    }
    return iterates;
}

Subspace infimal_unobservability_subspace(const LinMap& a, const LinMap& c, const Subspace& w_star,
                                          const TolerancePolicy& tol) {
    return unobservability_iterates(a, c, w_star, tol).back();
}

double conditioned_invariance_residual(const LinMap& a, const LinMap& c, const Subspace& w,
                                       const TolerancePolicy& tol) {
    const Subspace inside = intersect(w, kernel(c, tol), tol);
    if (inside.is_zero() || w.is_full()) return 0.0;
    return (canonical_projection(w) * a * inside.basis()).norm();
}

LinMap friend_gain(const LinMap& a, const LinMap& c, const Subspace& w, const TolerancePolicy& tol) {
    require_square_system(a, c, w.ambient_dim(), "friend_gain");
    const Index n = a.rows();
    LinMap l = LinMap::Zero(n, c.rows());
    if (w.is_zero() || w.is_full()) return l;

    const double bound = tol.abs_residual_tol * map_scale(a);
    const double pre = conditioned_invariance_residual(a, c, w, tol);
    if (pre > bound) {
        throw NotConditionedInvariant("friend_gain: A (W ∩ Ker C) is not contained in W (residual " +
                                          std::to_string(pre) + ")",
                                      pre);
    }
    const LinMap q = canonical_projection(w);
    const Matrix g = c * w.basis();
    const Matrix r = q * a * w.basis();
    l = -q.transpose() * r * pseudo_inverse(g, tol);

    const double post = (q * (a + l * c) * w.basis()).norm();
    if (post > bound) {
        throw NotConditionedInvariant("friend_gain: least-squares friend leaves residual " + std::to_string(post),
                                      post);
    }
    return l;
}

LinMap common_friend(const LinMap& a, const LinMap& c, std::span<const Subspace> spaces,
                     const TolerancePolicy& tol) {
    const Index n = a.rows();
    const Index p = c.rows();
    // vec(Q L G) = (G^T ⊗ Q) vec(L), column-major vec.
    Index equations = 0;
    for (const auto& w : spaces) {
        require_square_system(a, c, w.ambient_dim(), "common_friend");
        if (!w.is_zero() && !w.is_full()) equations += (n - w.dim()) * w.dim();
    }
    if (equations == 0 || p == 0) {
        for (const auto& w : spaces) {
            const double r = invariance_residual(a, w);
            if (r > tol.abs_residual_tol * map_scale(a)) {
                throw NotConditionedInvariant("common_friend: no output available to make subspace invariant", r);
            }
        }
        return LinMap::Zero(n, p);
    }

    Matrix system = Matrix::Zero(equations, n * p);
    Vector rhs(equations);
    Index row = 0;
    for (const auto& w : spaces) {
        if (w.is_zero() || w.is_full()) continue;
        const LinMap q = canonical_projection(w);
        const Matrix g = c * w.basis();
        const Matrix r = q * a * w.basis();
        const Index qr = q.rows();
        const Index k = w.dim();
        for (Index col = 0; col < k; ++col) {
            for (Index j = 0; j < p; ++j) {
                system.block(row + col * qr, j * n, qr, n) = g(j, col) * q;
            }
        }
        rhs.segment(row, qr * k) = -Eigen::Map<const Vector>(r.data(), qr * k);
        row += qr * k;
    }
    const Vector x = pseudo_inverse(system, tol) * rhs;
    LinMap l = Eigen::Map<const Matrix>(x.data(), n, p);

    const double bound = tol.abs_residual_tol * map_scale(a);
    for (const auto& w : spaces) {
        const double res = invariance_residual(a + l * c, w);
        if (res > bound) {
            throw NotConditionedInvariant("common_friend: no single friend for all subspaces (residual " +
                                              std::to_string(res) + ")",
                                          res);
        }
    }
    return l;
}

namespace {

struct QuotientChart {
    LinMap p_wstar;  // X -> X/W*
    Matrix t;        // orthonormal basis of S*/W* inside the X/W* chart
    Matrix induced;  // (A + L0 C) | S*/W* in basis t
};

QuotientChart zero_quotient(const LinMap& a, const LinMap& c, const Subspace& w_star, const Subspace& s_star,
                            const LinMap& l0, const TolerancePolicy& tol) {
    if (!contains(s_star, w_star, tol)) throw Error("spectral_split: W* is not contained in S*");
    QuotientChart chart;
    chart.p_wstar = canonical_projection(w_star);
    const Subspace s_chart = image(chart.p_wstar * s_star.basis(), tol, 1.0);
    chart.t = s_chart.basis();
    const LinMap a_l = a + l0 * c;
    const double bound = tol.abs_residual_tol * map_scale(a_l);
    const double rw = invariance_residual(a_l, w_star);
    const double rs = invariance_residual(a_l, s_star);
    if (rw > bound || rs > bound) {
        throw InvarianceViolated("spectral_split: L0 is not a common friend of W* and S*", std::max(rw, rs));
    }
    const Matrix abar = chart.p_wstar * a_l * chart.p_wstar.transpose();
    chart.induced = chart.t.transpose() * abar * chart.t;
    return chart;
}

}  // namespace

std::pair<Subspace, Subspace> spectral_split(const LinMap& a, const LinMap& c, const Subspace& w_star,
                                             const Subspace& s_star, const LinMap& l0,
                                             const SpectralPartition& part, const TolerancePolicy& tol) {
    const QuotientChart chart = zero_quotient(a, c, w_star, s_star, l0, tol);
    const Index q = chart.p_wstar.rows();
    if (chart.t.cols() == 0) return {Subspace(q, tol.rel_rank_tol), Subspace(q, tol.rel_rank_tol)};

    const Matrix good = chart.t * invariant_subspace(chart.induced, [&](Complex z) { return part.is_good(z); });
    const Matrix bad = chart.t * invariant_subspace(chart.induced, [&](Complex z) { return part.is_bad(z); });
    return {Subspace::from_orthonormal(good, tol.rel_rank_tol), Subspace::from_orthonormal(bad, tol.rel_rank_tol)};
}

Subspace compute_Wg_star(const Subspace& w_star, const Subspace& xbar_b, const LinMap& p_wstar,
                         const TolerancePolicy& tol) {
    if (p_wstar.cols() != w_star.ambient_dim() || p_wstar.rows() != xbar_b.ambient_dim()) {
        throw DimensionMismatch("compute_Wg_star: chart does not match subspaces");
    }
    return preimage(p_wstar, xbar_b, tol);
}

StabilizingFriend stabilizing_friend(const LinMap& a, const LinMap& c, const Subspace& w_g_star,
                                     const SpectralPartition& part, const TolerancePolicy& tol,
                                     const std::optional<LinMap>& base) {
    require_square_system(a, c, w_g_star.ambient_dim(), "stabilizing_friend");
    const LinMap l0 = base ? *base : friend_gain(a, c, w_g_star, tol);
    const LinMap q = canonical_projection(w_g_star);

    const double bound = tol.abs_residual_tol * map_scale(a + l0 * c);
    const double base_res = w_g_star.is_zero() ? 0.0 : (q * (a + l0 * c) * w_g_star.basis()).norm();
    if (base_res > bound) {
        throw InvarianceViolated("stabilizing_friend: base gain is not a friend of W_g*", base_res);
    }

    // Corrections of the form q^T Y N^T with N spanning (C W_g*)^perp keep W_g* invariant
    // and sweep every quotient map reachable by friends of W_g*.
    const Matrix cw = c * w_g_star.basis();
    const Matrix n_basis = w_g_star.is_zero() ? Matrix(Matrix::Identity(c.rows(), c.rows()))
                                              : orth_complement(image(cw, tol, 1.0)).basis();
    const Matrix a0 = q * (a + l0 * c) * q.transpose();
    const Matrix cbar = n_basis.transpose() * c * q.transpose();

    const Index qdim = q.rows();
    std::vector<double> targets = part.targets(qdim);
    const PolePlacement placement = place_output_injection(a0, cbar, targets, tol);

    StabilizingFriend out;
    out.L = l0 + q.transpose() * placement.gain * n_basis.transpose();
    out.Abar = q * (a + out.L * c) * q.transpose();

    const Eigen::VectorXcd spectrum = sorted_eigenvalues(out.Abar);
    std::vector<Complex> offending;
    for (Index i = 0; i < spectrum.size(); ++i) {
        if (!part.is_good(spectrum(i))) offending.push_back(spectrum(i));
    }
    if (!offending.empty()) {
        Eigen::VectorXcd off(static_cast<Index>(offending.size()));
        for (std::size_t i = 0; i < offending.size(); ++i) off(static_cast<Index>(i)) = offending[i];
        throw SpectrumUnassignable("stabilizing_friend: quotient modes outside the good region", off);
    }
    const double inv_res = w_g_star.is_zero() ? 0.0 : (q * (a + out.L * c) * w_g_star.basis()).norm();
    if (inv_res > tol.abs_residual_tol * map_scale(a + out.L * c)) {
        throw InvarianceViolated("stabilizing_friend: placed gain broke invariance of W_g*", inv_res);
    }
    return out;
}

GeometricDecomposition decompose(const LinMap& a, const LinMap& c, const LinMap& bbar,
                                 const SpectralPartition& part, const TolerancePolicy& tol) {
    if (bbar.rows() != a.rows()) throw DimensionMismatch("decompose: Bbar row count differs from n");
    GeometricDecomposition d;
    const Subspace im_b = image(bbar, tol);
    d.W_star = infimal_conditioned_invariant(a, c, im_b, tol);
    d.S_star = infimal_unobservability_subspace(a, c, d.W_star, tol);
    const std::vector<Subspace> pair{d.W_star, d.S_star};
    d.L0 = common_friend(a, c, pair, tol);

    const QuotientChart chart = zero_quotient(a, c, d.W_star, d.S_star, d.L0, tol);
    d.P_Wstar = chart.p_wstar;
    d.invariant_zeros = sorted_eigenvalues(chart.induced);
    std::tie(d.Xbar_g, d.Xbar_b) = spectral_split(a, c, d.W_star, d.S_star, d.L0, part, tol);
    d.W_g_star = compute_Wg_star(d.W_star, d.Xbar_b, d.P_Wstar, tol);
    d.V = d.P_Wstar.transpose() * d.Xbar_b.basis();
    d.P_Wg = canonical_projection(d.W_g_star);
    return d;
}

}  // namespace geouio
