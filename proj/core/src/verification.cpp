#include "geouio/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace geouio {

namespace {

Matrix uniform_matrix(std::mt19937_64& rng, Index rows, Index cols, double bound) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
    return m;
}

double alpha_distance(const Eigen::VectorXcd& ev, double alpha) {
    double d = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < ev.size(); ++i) d = std::min(d, std::abs(ev(i).real() - alpha));
    return d;
}

// Eigenvalues of a that fail the PBH rank test against c (unobservable modes).
Eigen::VectorXcd unobservable_modes(const Matrix& a, const Matrix& c, const TolerancePolicy& tol) {
    const Index n = a.rows();
    const Eigen::VectorXcd ev = sorted_eigenvalues(a);
    std::vector<Complex> out;
    const double scale = std::max(1.0, a.norm());
    for (Index i = 0; i < ev.size(); ++i) {
        Eigen::MatrixXcd pbh(n + c.rows(), n);
        pbh.topRows(n) = ev(i) * Eigen::MatrixXcd::Identity(n, n) - a.cast<Complex>();
        pbh.bottomRows(c.rows()) = c.cast<Complex>();
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pbh);
        const Vector s = svd.singularValues();
        const double cut = tol.rel_rank_tol * static_cast<double>(pbh.rows()) * std::max(s(0), scale);
        if (s(n - 1) <= cut) out.push_back(ev(i));
    }
    Eigen::VectorXcd v(static_cast<Index>(out.size()));
    for (std::size_t k = 0; k < out.size(); ++k) v(static_cast<Index>(k)) = out[k];
    return v;
}

CheckResult at_most(std::string name, double value, double limit) {
    return {std::move(name), value <= limit, value, limit};
}

CheckResult below(std::string name, double value, double limit) {
    return {std::move(name), value < limit, value, limit};
}

Index dim_or_zero(const Subspace& s) { return s.dim(); }

CheckResult dimension_identity(const GeometricDecomposition& d) {
    const Index lhs = dim_or_zero(d.Xbar_g) + dim_or_zero(d.Xbar_b);
    const Index rhs = d.S_star.dim() - d.W_star.dim();
    return {"dim Xg + dim Xb = dim S* - dim W*", lhs == rhs, static_cast<double>(std::abs(lhs - rhs)), 0.0};
}

}  // namespace

RandomDraw random_system(std::mt19937_64& rng, const RandomSystemSpec& spec) {
    std::uniform_int_distribution<Index> pick_n(1, spec.max_n);
    const Index n = pick_n(rng);
    std::uniform_int_distribution<Index> pick_p(1, std::min(spec.max_p, n));
    const Index p = pick_p(rng);
    std::uniform_int_distribution<Index> pick_m(spec.min_unknown, std::min(spec.max_unknown, n));
    const Index m = pick_m(rng);

    RandomDraw out;
    out.sys.A = uniform_matrix(rng, n, n, spec.bound);
    out.sys.C = uniform_matrix(rng, p, n, spec.bound);
    out.sys.B = uniform_matrix(rng, n, m, spec.bound);

    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < spec.blind_column_rate && p < n) {
        // Project one column onto Ker C so C Bbar loses rank exactly.
        const Subspace ker = kernel(out.sys.C);
        const Matrix proj = ker.projector();
        std::uniform_int_distribution<Index> pick_col(0, m - 1);
        const Index col = pick_col(rng);
        out.sys.B.col(col) = proj * out.sys.B.col(col);
    }
    for (Index k = 0; k < m; ++k) out.part.unknown_cols.push_back(k);
    return out;
}

EquivalenceTrial equivalence_trial(const LinSystem& sys, const InputPartition& part, const SpectralPartition& spectral,
                                   const TolerancePolicy& tol, double margin) {
    EquivalenceTrial t;
    RankAudit audit;
    try {
        const Matrix bbar = part.unknown(sys.B);
        const GeometricDecomposition d = decompose(sys.A, sys.C, bbar, spectral, tol);
        t.geometric = check_uio_condition(d, sys.C, tol);
        const ClassicalConditions cc = classical_rank_condition(sys, part, spectral, tol);
        t.rank_condition = cc.rank_condition;
        t.detectable = cc.detectable;

        const Index n = sys.n();
        const double scale = norm_2(sys.C) * norm_2(bbar);
        const Matrix a1 =
            (Matrix::Identity(n, n) - bbar * pseudo_inverse(sys.C * bbar, tol, scale) * sys.C) * sys.A;
        // Only eigenvalues whose side of the boundary can change a decision: invariant
        // zeros and unobservable modes of (C, A1).
        t.min_alpha_distance = std::min(alpha_distance(d.invariant_zeros, spectral.alpha),
                                        alpha_distance(unobservable_modes(a1, sys.C, tol), spectral.alpha));
    } catch (const Error& e) {
        t.error = e.what();
    }
    t.min_rank_gap = audit.min_gap();
    t.marginal = t.min_rank_gap < margin || t.min_alpha_distance < margin;
    return t;
}

bool BatteryResult::pass(double max_marginal_fraction) const {
    if (trials <= 0) return false;
    return errors == 0 && disagreements.empty() && agreements == scored &&
           static_cast<double>(marginal) < max_marginal_fraction * static_cast<double>(trials);
}

BatteryResult equivalence_battery(Index trials, std::uint64_t seed, const SpectralPartition& spectral,
                                  const TolerancePolicy& tol, const RandomSystemSpec& spec) {
    BatteryResult r;
    r.seed = seed;
    r.trials = trials;
    std::mt19937_64 rng(seed);
    for (Index k = 0; k < trials; ++k) {
        const RandomDraw draw = random_system(rng, spec);
        const EquivalenceTrial t = equivalence_trial(draw.sys, draw.part, spectral, tol);
        if (!t.error.empty()) {
            ++r.errors;
            r.disagreements.push_back(k);
            continue;
        }
        if (t.marginal) {
            ++r.marginal;
            continue;
        }
        ++r.scored;
        if (t.geometric) ++r.geometric_true;
        if (!t.rank_condition) ++r.rank_false;
        if (t.agree()) {
            ++r.agreements;
        } else {
            r.disagreements.push_back(k);
        }
    }
    return r;
}

std::vector<CheckResult> centralized_checks(const LinSystem& sys, const InputPartition& part,
                                            const CentralizedObserver& obs, const SpectralPartition& spectral) {
    const CentralResiduals r = centralized_residuals(obs, sys, part);
    return {
        at_most("||E P + F C - I||_F", r.reconstruction, 1e-9),
        at_most("||P_Wg Bbar||_F", r.input_decoupling, 1e-10),
        at_most("friend invariance of W_g*", r.friend_invariance, 1e-9),
        at_most("||Abarbar P - P (A + L C)||_F", r.commutation, 1e-9),
        below("max Re spec(Abarbar) < alpha", r.spectral_abscissa, spectral.alpha),
        dimension_identity(obs.decomp),
    };
}

std::vector<CheckResult> node_checks(const LinSystem& sys, const SensorNode& node, const SpectralPartition& spectral) {
    const NodeResiduals r = node_residuals(sys, node);
    const std::string tag = "node " + std::to_string(node.id) + ": ";
    std::vector<CheckResult> out;
    if (node.cls == NodeClass::N1) {
        out.push_back(at_most(tag + "||E P_W* + F C_i - I||_F", r.reconstruction, 1e-9));
        out.push_back(at_most(tag + "V / P_W* block relations", r.block_relations, 1e-9));
    }
    out.push_back(at_most(tag + "||P_Wg Bbar_i||_F", r.input_decoupling, 1e-10));
    out.push_back(at_most(tag + "friend invariance", r.friend_invariance, 1e-9));
    out.push_back(at_most(tag + "||Abarbar P - P (A + L C_i)||_F", r.commutation, 1e-9));
    out.push_back(below(tag + "max Re spec(Abarbar) < alpha", r.spectral_abscissa, spectral.alpha));
    CheckResult dims = dimension_identity(node.decomp);
    dims.name = tag + dims.name;
    out.push_back(dims);
    return out;
}

std::vector<Vector> centralized_quotient_error(const Trajectory& traj, const CentralizedObserver& obs) {
    std::vector<Vector> q;
    q.reserve(traj.x.size());
    for (std::size_t k = 0; k < traj.x.size(); ++k) q.push_back(obs.P_Wg * traj.x[k] - traj.internal[0][k]);
    return q;
}

std::vector<Vector> node_quotient_error(const Trajectory& traj, Index observer, const SensorNode& node) {
    const auto& inner = traj.internal.at(static_cast<std::size_t>(observer));
    const Matrix& pg = node.decomp.P_Wg;
    std::vector<Vector> q;
    q.reserve(traj.x.size());
    if (node.cls == NodeClass::N1) {
        const Matrix& pw = node.decomp.P_Wstar;
        const Matrix chart = pg * pw.transpose();
        for (std::size_t k = 0; k < traj.x.size(); ++k) q.push_back(chart * (pw * traj.x[k] - inner[k]));
    } else {
        for (std::size_t k = 0; k < traj.x.size(); ++k) q.push_back(pg * (traj.x[k] - inner[k]));
    }
    return q;
}

QuotientResidual quotient_residual(const Trajectory& traj, const std::vector<Vector>& q, const Matrix& abarbar) {
    QuotientResidual r;
    const std::size_t count = q.size();
    if (count < 3 || abarbar.size() == 0) return r;
    for (std::size_t k = 0; k < count; ++k) {
        Vector dq;
        if (k == 0) {
            const double h = traj.times[1] - traj.times[0];
            dq = (-3.0 * q[0] + 4.0 * q[1] - q[2]) / (2.0 * h);
        } else if (k + 1 == count) {
            const double h = traj.times[k] - traj.times[k - 1];
            dq = (3.0 * q[k] - 4.0 * q[k - 1] + q[k - 2]) / (2.0 * h);
        } else {
            dq = (q[k + 1] - q[k - 1]) / (traj.times[k + 1] - traj.times[k - 1]);
        }
        const double res = (dq - abarbar * q[k]).norm();
        if (res > r.worst_abs) {
            r.worst_abs = res;
            r.t_worst = traj.times[k];
        }
        r.worst_rel = std::max(r.worst_rel, res / (1.0 + traj.x[k].norm()));
    }
    return r;
}

}  // namespace geouio
