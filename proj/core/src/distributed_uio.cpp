#include "geouio/distributed_uio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace geouio {

namespace {

constexpr double kQFloor = 1e-9;

Matrix kron_identity(const Matrix& m, Index n) {
    Matrix out = Matrix::Zero(m.rows() * n, m.cols() * n);
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j)
            if (m(i, j) != 0.0) out.block(i * n, j * n, n, n).diagonal().setConstant(m(i, j));
    return out;
}

}  // namespace

const char* to_string(NodeClass cls) { return cls == NodeClass::N1 ? "N1" : "N2"; }

Index SensorNode::state_dim() const {
    return cls == NodeClass::N1 ? decomp.P_Wstar.rows() : C.cols();
}

SensorGraph::SensorGraph(Matrix adjacency) : adjacency_(std::move(adjacency)) {
    const Index n = adjacency_.rows();
    if (n == 0 || adjacency_.cols() != n) throw ConfigError("graph: adjacency must be square and nonempty");
    for (Index i = 0; i < n; ++i) {
        if (adjacency_(i, i) != 0.0) throw ConfigError("graph: adjacency diagonal must be zero");
        for (Index j = 0; j < n; ++j) {
            const double a = adjacency_(i, j);
            if (a != 0.0 && a != 1.0) throw ConfigError("graph: adjacency entries must be 0 or 1");
            if (a != adjacency_(j, i)) throw ConfigError("graph: adjacency must be symmetric");
        }
    }
    laplacian_ = Matrix(adjacency_.rowwise().sum().asDiagonal()) - adjacency_;
}

SensorGraph SensorGraph::ring(Index nodes) {
    Matrix a = Matrix::Zero(nodes, nodes);
    if (nodes == 2) {
        a(0, 1) = a(1, 0) = 1.0;
    } else if (nodes > 2) {
        for (Index i = 0; i < nodes; ++i) {
            const Index j = (i + 1) % nodes;
            a(i, j) = a(j, i) = 1.0;
        }
    }
    return SensorGraph(a);
}

SensorGraph SensorGraph::path(Index nodes) {
    Matrix a = Matrix::Zero(nodes, nodes);
    for (Index i = 0; i + 1 < nodes; ++i) a(i, i + 1) = a(i + 1, i) = 1.0;
    return SensorGraph(a);
}

SensorGraph SensorGraph::complete(Index nodes) {
    Matrix a = Matrix::Ones(nodes, nodes);
    a.diagonal().setZero();
    return SensorGraph(a);
}

double SensorGraph::algebraic_connectivity() const {
    if (size() < 2) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(laplacian_, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(1);
}

bool SensorGraph::connected() const { return size() == 1 || algebraic_connectivity() > 1e-9; }

Classification classify_nodes(const LinSystem& sys, std::span<const NodeSpec> nodes, const TolerancePolicy& tol) {
    Classification out;
    for (const auto& spec : nodes) {
        const Matrix bbar = spec.inputs.unknown(sys.B);
        const bool n1 = numerical_rank(spec.C * bbar, tol) == numerical_rank(bbar, tol);
        (n1 ? out.n1 : out.n2).push_back(spec.id);
    }
    return out;
}

SensorNode per_node_decomposition(const LinSystem& sys, const NodeSpec& spec, const SpectralPartition& spectral,
                                  const TolerancePolicy& tol) {
    if (spec.C.cols() != sys.n()) throw DimensionMismatch("node " + std::to_string(spec.id) + ": C_i must have n columns");
    spec.inputs.validate(sys.m());

    SensorNode node;
    node.id = spec.id;
    node.C = spec.C;
    node.inputs = spec.inputs;
    node.B_known = spec.inputs.known(sys.B);
    node.B_unknown = spec.inputs.unknown(sys.B);
    node.cls = numerical_rank(spec.C * node.B_unknown, tol) == numerical_rank(node.B_unknown, tol) ? NodeClass::N1
                                                                                                     : NodeClass::N2;
    node.decomp = decompose(sys.A, spec.C, node.B_unknown, spectral, tol);
    node.W_g = node.decomp.W_g_star.basis();

    const StabilizingFriend fr =
        stabilizing_friend(sys.A, spec.C, node.decomp.W_g_star, spectral, tol, node.decomp.L0);
    node.L = fr.L;
    node.A_L = sys.A + fr.L * spec.C;
    node.Abarbar_L = fr.Abar;

    if (node.cls == NodeClass::N1) {
        const OutputReconstruction ef = solve_output_reconstruction(node.decomp.P_Wstar, spec.C, tol);
        node.E = ef.E;
        node.F = ef.F;
        node.Abar_L = induced_map(sys.A + node.L * spec.C, node.decomp.W_star, node.decomp.P_Wstar, tol);
    }
    return node;
}

NetworkBlocks network_blocks(const LinSystem& sys, std::span<const SensorNode> nodes, const SensorGraph& graph) {
    const Index n = sys.n();
    NetworkBlocks out;
    for (Index i = 0; i < static_cast<Index>(nodes.size()); ++i)
        if (nodes[static_cast<std::size_t>(i)].cls == NodeClass::N1) out.order.push_back(i);
    for (Index i = 0; i < static_cast<Index>(nodes.size()); ++i)
        if (nodes[static_cast<std::size_t>(i)].cls == NodeClass::N2) out.order.push_back(i);

    std::vector<Matrix> wv;
    std::vector<Matrix> al;
    for (Index idx : out.order) {
        const SensorNode& node = nodes[static_cast<std::size_t>(idx)];
        const Matrix a_l = sys.A + node.L * node.C;
        const Matrix& basis = node.cls == NodeClass::N1 ? node.decomp.V : node.W_g;
        wv.push_back(basis);
        al.push_back(basis.transpose() * a_l * basis);
    }
    out.W_V = block_diagonal(wv);
    out.A_L = block_diagonal(al);

    const Index count = static_cast<Index>(out.order.size());
    Matrix lap(count, count);
    for (Index a = 0; a < count; ++a)
        for (Index b = 0; b < count; ++b) lap(a, b) = graph.laplacian()(out.order[a], out.order[b]);
    out.Q = out.W_V.transpose() * kron_identity(lap, n) * out.W_V;
    return out;
}

JointDetectability joint_detectability_check(const LinSystem& sys, std::span<const SensorNode> nodes,
                                             const SensorGraph& graph, const TolerancePolicy& tol) {
    JointDetectability out;
    out.connected = graph.connected();
    const NetworkBlocks blocks = network_blocks(sys, nodes, graph);
    if (blocks.Q.size() == 0) {
        out.sigma_min_Q = std::numeric_limits<double>::infinity();
    } else {
        Eigen::JacobiSVD<Matrix> svd(blocks.Q);
        out.sigma_min_Q = svd.singularValues()(svd.singularValues().size() - 1);
    }

    Subspace common = Subspace::full(sys.n());
    for (const auto& node : nodes) {
        const Subspace blind = node.cls == NodeClass::N1 ? Subspace::from_orthonormal(node.decomp.V)
                                                         : node.decomp.W_g_star;
        common = intersect(common, blind, tol);
    }
    out.intersection_trivial = common.is_zero();
    out.ok = out.connected && out.sigma_min_Q > kQFloor;
    return out;
}

GainBounds gain_bounds(const LinSystem& sys, std::span<const SensorNode> nodes, const SensorGraph& graph,
                       double u_bar_max) {
    const NetworkBlocks blocks = network_blocks(sys, nodes, graph);
    GainBounds out;
    if (blocks.Q.size() > 0) {
        Eigen::JacobiSVD<Matrix> svd(blocks.Q);
        const double smin = svd.singularValues()(svd.singularValues().size() - 1);
        if (smin <= kQFloor) throw SingularQ("gain_bounds: sigma_min(Q) = " + std::to_string(smin), smin);
        out.chi_min = norm_2(blocks.A_L) / smin;
    }
    double max_b1 = 0.0;
    double max_winf = 0.0;
    for (const auto& node : nodes) {
        if (node.cls != NodeClass::N2) continue;
        max_b1 = std::max(max_b1, norm_1(node.B_unknown));
        max_winf = std::max(max_winf, norm_inf(node.W_g));
    }
    out.gamma_min = u_bar_max * max_b1 * max_winf;
    return out;
}

DistributedObserverNetwork synthesize_distributed(const LinSystem& sys, std::span<const NodeSpec> specs,
                                                  const SensorGraph& graph, const DistributedOptions& opts,
                                                  const TolerancePolicy& tol) {
    sys.validate();
    opts.spectral.validate();
    if (graph.size() != static_cast<Index>(specs.size())) {
        throw ConfigError("graph size does not match the number of nodes");
    }
    if (!(opts.safety >= 1.0) || !std::isfinite(opts.safety)) throw ConfigError("safety factor must be >= 1");
    if (!graph.connected()) throw AssumptionViolated("communication graph is not connected", 1);
    if (!(std::isfinite(opts.u_bar_max) && opts.u_bar_max >= 0.0)) {
        throw AssumptionViolated("unknown-input bound u_bar_max must be finite and nonnegative", 2);
    }

    DistributedObserverNetwork net;
    net.graph = graph;
    net.u_bar_max = opts.u_bar_max;
    for (const auto& spec : specs) net.nodes.push_back(per_node_decomposition(sys, spec, opts.spectral, tol));

    const JointDetectability jd = joint_detectability_check(sys, net.nodes, graph, tol);
    net.sigma_min_Q = jd.sigma_min_Q;
    if (!jd.ok) {
        throw AssumptionViolated("joint detectability fails: sigma_min(Q) = " + std::to_string(jd.sigma_min_Q) +
                                     (jd.intersection_trivial ? "" : ", common blind subspace is nonzero"),
                                 3);
    }

    const GainBounds bounds = gain_bounds(sys, net.nodes, graph, opts.u_bar_max);
    net.chi_min = bounds.chi_min;
    net.gamma_min = bounds.gamma_min;
    net.chi = bounds.chi_min > 0.0 ? opts.safety * bounds.chi_min : opts.chi_floor;
    net.gamma = opts.safety * bounds.gamma_min;

    const NetworkBlocks blocks = network_blocks(sys, net.nodes, graph);
    net.block_order = blocks.order;
    net.W_V_block = blocks.W_V;
    net.A_L_block = blocks.A_L;
    return net;
}

Vector disagreement(const SensorGraph& graph, Index i, std::span<const Vector> estimates) {
    Vector out = Vector::Zero(estimates[static_cast<std::size_t>(i)].size());
    for (Index j = 0; j < graph.size(); ++j) {
        const double a = graph.adjacency()(i, j);
        if (a != 0.0) out += a * (estimates[static_cast<std::size_t>(j)] - estimates[static_cast<std::size_t>(i)]);
    }
    return out;
}

Vector SignRealization::apply(const Vector& s) const {
    if (exact) return s.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
    return s.unaryExpr([this](double v) { return std::clamp(v / eps, -1.0, 1.0); });
}

Vector node_rhs_N1(const SensorNode& node, const Vector& z, const Vector& y, const Vector& u_known,
                   const Vector& disagreement, double chi) {
    const Matrix& p = node.decomp.P_Wstar;
    Vector dz = node.Abar_L * z - p * (node.L * y);
    if (node.B_known.cols() > 0) dz += p * (node.B_known * u_known);
    if (chi != 0.0 && node.decomp.V.cols() > 0) {
        dz += chi * (p * (node.decomp.V * (node.decomp.V.transpose() * disagreement)));
    }
    return dz;
}

Vector node_estimate_N1(const SensorNode& node, const Vector& z, const Vector& y) { return node.E * z + node.F * y; }

Vector node_rhs_N2(const SensorNode& node, const Vector& xhat, const Vector& y, const Vector& u_known,
                   const Vector& disagreement, double chi, double gamma, const SignRealization& sign) {
    Vector dx = node.A_L * xhat - node.L * y;
    if (node.B_known.cols() > 0) dx += node.B_known * u_known;
    if (node.W_g.cols() > 0) {
        const Vector s = node.W_g.transpose() * disagreement;
        if (chi != 0.0) dx += chi * (node.W_g * s);
        if (gamma != 0.0) dx += gamma * (node.W_g * sign.apply(s));
    }
    return dx;
}

NodeResiduals node_residuals(const LinSystem& sys, const SensorNode& node) {
    const Index n = sys.n();
    const Matrix a_l = sys.A + node.L * node.C;
    const Matrix& pg = node.decomp.P_Wg;
    NodeResiduals r;
    r.input_decoupling = (pg * node.B_unknown).norm();
    r.friend_invariance = invariance_residual(a_l, node.decomp.W_g_star);
    r.commutation = (node.Abarbar_L * pg - pg * a_l).norm();
    r.spectral_abscissa = spectral_abscissa(node.Abarbar_L);
    if (node.cls == NodeClass::N1) {
        r.reconstruction = (node.E * node.decomp.P_Wstar + node.F * node.C - Matrix::Identity(n, n)).norm();
        r.friend_invariance = std::max(r.friend_invariance, invariance_residual(a_l, node.decomp.W_star));
        // Im P_W*^T = (W*)^perp, Im V ⊆ W_g*, V^T W* = 0.
        const Subspace rows = image(node.decomp.P_Wstar.transpose());
        const Subspace perp = orth_complement(node.decomp.W_star);
        const double rows_vs_perp = std::max(containment_residual(rows, perp), containment_residual(perp, rows));
        const Subspace v = Subspace::from_orthonormal(node.decomp.V);
        const double v_in_wg = containment_residual(node.decomp.W_g_star, v);
        const double v_perp_w =
            node.decomp.V.size() == 0 || node.decomp.W_star.is_zero()
                ? 0.0
                : (node.decomp.V.transpose() * node.decomp.W_star.basis()).norm();
        r.block_relations = std::max({rows_vs_perp, v_in_wg, v_perp_w});
    }
    return r;
}

}  // namespace geouio
