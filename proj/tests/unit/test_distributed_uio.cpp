#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "geouio/builtin_examples.hpp"
#include "geouio/distributed_uio.hpp"
#include "geouio/errors.hpp"
#include "geouio/linalg.hpp"
#include "geouio/verification.hpp"
#include "oracles.hpp"

using namespace geouio;

namespace {

// Four-node network typed out independently of the built-in example.
struct Network {
    LinSystem sys;
    std::vector<NodeSpec> nodes;
    Network() {
        sys.A.resize(6, 6);
        sys.A << 0, 3, 0, 0, 0, 0, -2, 0, 1, 0, 0, 0, 0, 0, 0, 2, 0, 0, 0, 0, -3, -2, 0, 0, 0, 0, 0, 1, 0, -3, 0, 2,
            0, 0, 4, 0;
        sys.B = Matrix::Zero(6, 3);
        sys.B(1, 0) = sys.B(5, 0) = 1;  // b1
        sys.B(3, 1) = 1;                // b2
        sys.B(2, 2) = sys.B(5, 2) = 1;  // b3
        Matrix c1 = Matrix::Zero(2, 6), c2 = Matrix::Zero(1, 6), c3 = Matrix::Zero(2, 6), c4 = Matrix::Zero(1, 6);
        c1(0, 0) = c1(1, 2) = 1;
        c2(0, 1) = c2(0, 4) = 1;
        c3(0, 2) = c3(1, 1) = 1;
        c4(0, 0) = c4(0, 1) = 1;
        nodes = {{1, c1, {{0, 1}, {2}}}, {2, c2, {{0, 2}, {1}}}, {3, c3, {{1, 2}, {0}}}, {4, c4, {{0}, {1, 2}}}};
        sys.C.resize(6, 6);
        sys.C << c1, c2, c3, c4;
    }
};

DistributedObserverNetwork synthesize(const Network& net, double u_bar = 0.2) {
    DistributedOptions opts;
    opts.u_bar_max = u_bar;
    return synthesize_distributed(net.sys, net.nodes, SensorGraph::ring(4), opts);
}

std::vector<int> sorted(std::vector<int> v) {
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace

TEST(Builtin, MatchesTypedNetwork) {
    const Network net;
    const ProjectConfig cfg = builtin_distributed();
    EXPECT_EQ(cfg.system.A, net.sys.A);
    EXPECT_EQ(cfg.system.B, net.sys.B);
    ASSERT_EQ(cfg.nodes.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(cfg.nodes[i].C, net.nodes[i].C);
        EXPECT_EQ(cfg.nodes[i].inputs.unknown_cols, net.nodes[i].inputs.unknown_cols);
    }
    Vector x0(6);
    x0 << 1, 2, 3, -1, -2, -3;
    EXPECT_EQ(cfg.sim.x0, x0);
}

TEST(Classification, FourNodeNetwork) {
    const Network net;
    const Classification cls = classify_nodes(net.sys, net.nodes);
    EXPECT_EQ(sorted(cls.n1), (std::vector<int>{1, 3}));
    EXPECT_EQ(sorted(cls.n2), (std::vector<int>{2, 4}));
}

TEST(Classification, PermutationEquivariant) {
    const Network net;
    std::vector<NodeSpec> rev(net.nodes.rbegin(), net.nodes.rend());
    const Classification cls = classify_nodes(net.sys, rev);
    EXPECT_EQ(sorted(cls.n1), (std::vector<int>{1, 3}));
    EXPECT_EQ(sorted(cls.n2), (std::vector<int>{2, 4}));
    const Classification again = classify_nodes(net.sys, rev);
    EXPECT_EQ(again.n1, cls.n1);
}

TEST(Classification, AllKnownOrAllBlind) {
    Network net;
    for (auto& n : net.nodes) n.inputs = {{0, 1, 2}, {}};
    EXPECT_EQ(classify_nodes(net.sys, net.nodes).n1.size(), 4u);

    // Every node blind to its unknown input: C_i Bbar_i = 0.
    Network blind;
    blind.nodes = {{1, blind.nodes[1].C, {{0, 2}, {1}}}, {2, blind.nodes[3].C, {{0, 1}, {2}}}};
    for (const auto& n : blind.nodes) {
        EXPECT_EQ((n.C * n.inputs.unknown(blind.sys.B)).norm(), 0.0);
    }
    EXPECT_EQ(classify_nodes(blind.sys, blind.nodes).n2.size(), 2u);
}

TEST(PerNode, NodeOneAndFour) {
    const Network net;
    const SensorNode n1 = per_node_decomposition(net.sys, net.nodes[0], SpectralPartition{});
    Vector c1b3(2);
    c1b3 << 0, 1;
    EXPECT_EQ(net.nodes[0].C * net.sys.B.col(2), c1b3);
    EXPECT_EQ(n1.cls, NodeClass::N1);
    const Index n = 6;
    EXPECT_LE((n1.E * n1.decomp.P_Wstar + n1.F * n1.C - Matrix::Identity(n, n)).norm(), 1e-9);

    const SensorNode n4 = per_node_decomposition(net.sys, net.nodes[3], SpectralPartition{});
    EXPECT_EQ((net.nodes[3].C * net.sys.B.col(1)).norm(), 0.0);
    EXPECT_EQ((net.nodes[3].C * net.sys.B.col(2)).norm(), 0.0);
    EXPECT_EQ(n4.cls, NodeClass::N2);
    EXPECT_GT(n4.decomp.W_g_star.dim(), 0);
}

TEST(PerNode, FullMeasurementNode) {
    const Network net;
    const NodeSpec spec{7, Matrix::Identity(6, 6), {{0, 1}, {2}}};
    const SensorNode node = per_node_decomposition(net.sys, spec, SpectralPartition{});
    EXPECT_EQ(node.cls, NodeClass::N1);
    EXPECT_TRUE(equal(node.decomp.W_star, image(net.sys.B.col(2))));
    EXPECT_LE((node.E * node.decomp.P_Wstar + node.F - Matrix::Identity(6, 6)).norm(), 1e-9);
}

TEST(PerNode, ResidualsAndBlockRelations) {
    const Network net;
    const DistributedObserverNetwork dn = synthesize(net);
    for (const SensorNode& node : dn.nodes) {
        for (const CheckResult& c : node_checks(net.sys, node, SpectralPartition{})) {
            EXPECT_TRUE(c.pass) << "node " << node.id << ": " << c.name << " " << c.worst;
        }
        if (node.cls != NodeClass::N1) continue;
        const Matrix& v = node.decomp.V;
        EXPECT_TRUE(equal(image(node.decomp.P_Wstar.transpose()), orth_complement(node.decomp.W_star)));
        if (v.cols() > 0) {
            EXPECT_LE(oracle::outside(node.decomp.W_g_star.basis(), v), 1e-9);
            EXPECT_LE((v.transpose() * node.decomp.W_star.basis()).norm(), 1e-9);
        }
    }
}

TEST(JointDetectability, FourNodeNetwork) {
    const Network net;
    const DistributedObserverNetwork dn = synthesize(net);
    const JointDetectability jd = joint_detectability_check(net.sys, dn.nodes, dn.graph);
    EXPECT_TRUE(jd.ok);
    EXPECT_TRUE(jd.intersection_trivial);
    EXPECT_GT(jd.sigma_min_Q, 0.0);
}

TEST(JointDetectability, DisconnectedGraph) {
    const Network net;
    std::vector<NodeSpec> two(net.nodes.begin(), net.nodes.begin() + 2);
    const SensorGraph g(Matrix::Zero(2, 2));
    EXPECT_FALSE(g.connected());
    std::vector<SensorNode> built;
    for (const auto& s : two) built.push_back(per_node_decomposition(net.sys, s, SpectralPartition{}));
    EXPECT_FALSE(joint_detectability_check(net.sys, built, g).ok);
    try {
        synthesize_distributed(net.sys, two, g, DistributedOptions{});
        FAIL() << "expected AssumptionViolated";
    } catch (const AssumptionViolated& e) {
        EXPECT_EQ(e.assumption(), 1);
    }
}

TEST(GainBounds, IndependentReevaluation) {
    const Network net;
    const DistributedObserverNetwork dn = synthesize(net);
    const Index n = 6;
    const Index count = static_cast<Index>(dn.nodes.size());

    // Blocks in plain node order (the library groups N1 first; spectra are unaffected).
    std::vector<Matrix> bases;
    double al_norm = 0.0;
    for (const SensorNode& node : dn.nodes) {
        const Matrix basis = node.cls == NodeClass::N1 ? node.decomp.V : node.decomp.W_g_star.basis();
        bases.push_back(basis);
        const Matrix a_l = net.sys.A + node.L * node.C;
        if (basis.cols() > 0) al_norm = std::max(al_norm, norm_2(basis.transpose() * a_l * basis));
    }
    Index cols = 0;
    for (const Matrix& b : bases) cols += b.cols();
    Matrix wv = Matrix::Zero(count * n, cols);
    Index off = 0;
    for (Index i = 0; i < count; ++i) {
        wv.block(i * n, off, n, bases[i].cols()) = bases[i];
        off += bases[i].cols();
    }
    const Matrix adj = SensorGraph::ring(4).adjacency();
    Matrix big = Matrix::Zero(count * n, count * n);
    for (Index i = 0; i < count; ++i) {
        const double deg = adj.row(i).sum();
        for (Index j = 0; j < count; ++j) {
            const double lij = (i == j ? deg : 0.0) - adj(i, j);
            big.block(i * n, j * n, n, n) = lij * Matrix::Identity(n, n);
        }
    }
    const Matrix q = wv.transpose() * big * wv;
    const double lmin = Eigen::SelfAdjointEigenSolver<Matrix>(q).eigenvalues().minCoeff();
    EXPECT_NEAR(dn.sigma_min_Q, lmin, 1e-9);
    EXPECT_NEAR(dn.chi_min, al_norm / lmin, 1e-8 * (1 + dn.chi_min));

    double max_b1 = 0.0, max_winf = 0.0;
    for (const SensorNode& node : dn.nodes) {
        if (node.cls != NodeClass::N2) continue;
        for (Index j = 0; j < node.B_unknown.cols(); ++j) max_b1 = std::max(max_b1, node.B_unknown.col(j).cwiseAbs().sum());
        const Matrix w = node.decomp.W_g_star.basis();
        // The basis chart may differ from node.W_g only by an orthogonal factor, so use the stored one.
        for (Index i = 0; i < node.W_g.rows(); ++i) max_winf = std::max(max_winf, node.W_g.row(i).cwiseAbs().sum());
        EXPECT_EQ(w.cols(), node.W_g.cols());
    }
    EXPECT_NEAR(dn.gamma_min, 0.2 * max_b1 * max_winf, 1e-12);

    EXPECT_GT(dn.chi, dn.chi_min);
    EXPECT_GT(dn.gamma, dn.gamma_min);
    EXPECT_NEAR(dn.chi, 1.1 * dn.chi_min, 1e-9 * dn.chi);
    EXPECT_NEAR(dn.gamma, 1.1 * dn.gamma_min, 1e-12);
}

TEST(GainBounds, ZeroInputBoundAndMonotonicity) {
    const Network net;
    const DistributedObserverNetwork dn = synthesize(net);
    EXPECT_EQ(gain_bounds(net.sys, dn.nodes, dn.graph, 0.0).gamma_min, 0.0);

    std::vector<SensorNode> scaled = dn.nodes;
    const double base = gain_bounds(net.sys, scaled, dn.graph, 0.2).gamma_min;
    for (auto& node : scaled) {
        if (node.cls == NodeClass::N2) node.B_unknown *= 2.0;
    }
    EXPECT_GE(gain_bounds(net.sys, scaled, dn.graph, 0.2).gamma_min, base);
}

TEST(GainBounds, NoBlindNodes) {
    Network net;
    for (auto& n : net.nodes) n.C = Matrix::Identity(6, 6);
    const DistributedObserverNetwork dn = synthesize(net);
    EXPECT_EQ(dn.gamma_min, 0.0);
    for (const auto& node : dn.nodes) EXPECT_EQ(node.cls, NodeClass::N1);
}

TEST(Synthesis, SingleNodeIsCentralized) {
    LinSystem s;
    s.A.resize(3, 3);
    s.A << 2, -2, 0, 0, 0, 1, 0, -2, 1;
    s.B.resize(3, 2);
    s.B << 0, 1, 0, 1, 1, 0;
    s.C.resize(2, 3);
    s.C << 1, 0, 0, 0, 1, 0;
    const std::vector<NodeSpec> one{{1, s.C, {{0}, {1}}}};
    const DistributedObserverNetwork dn =
        synthesize_distributed(s, one, SensorGraph(Matrix::Zero(1, 1)), DistributedOptions{});
    ASSERT_EQ(dn.nodes.size(), 1u);
    EXPECT_EQ(dn.nodes[0].cls, NodeClass::N1);
    EXPECT_EQ(dn.nodes[0].decomp.V.cols(), 0);
    EXPECT_EQ(disagreement(dn.graph, 0, std::vector<Vector>{Vector::Ones(3)}).norm(), 0.0);
}

TEST(Rhs, ConsensusVanishesAtAgreement) {
    const Network net;
    const DistributedObserverNetwork dn = synthesize(net);
    Vector x(6);
    x << 1, 2, 3, -1, -2, -3;
    const std::vector<Vector> same(4, x);
    for (Index i = 0; i < 4; ++i) EXPECT_EQ(disagreement(dn.graph, i, same).norm(), 0.0);

    const SensorNode& n2 = dn.nodes[1];
    const Vector y2 = n2.C * x;
    const Vector u = Vector::Zero(2);
    const SignRealization sign{false, 1e-3};
    const Vector coupled = node_rhs_N2(n2, x, y2, u, Vector::Zero(6), dn.chi, dn.gamma, sign);
    const Vector local = n2.A_L * x - n2.L * y2 + n2.B_known * u;
    EXPECT_LE((coupled - local).norm(), 1e-13);

    const SensorNode& n1 = dn.nodes[0];
    const Vector z = n1.decomp.P_Wstar * x;
    EXPECT_LE((node_estimate_N1(n1, z, n1.C * x) - x).norm(), 1e-12);
    EXPECT_LE((node_rhs_N1(n1, z, n1.C * x, Vector::Zero(2), Vector::Zero(6), dn.chi) -
               node_rhs_N1(n1, z, n1.C * x, Vector::Zero(2), Vector::Zero(6), 0.0))
                  .norm(),
              0.0);
}

TEST(Rhs, HandEvaluationAtStart) {
    const Network net;
    const DistributedObserverNetwork dn = synthesize(net);
    Vector x0(6);
    x0 << 1, 2, 3, -1, -2, -3;
    // u(0) = [sin 0, 0.2 cos 0, 0.2 sin 0] = [0, 0.2, 0].
    Vector u(3);
    u << 0, 0.2, 0;
    const Vector d = Vector::LinSpaced(6, -1.0, 1.0);

    const SensorNode& n1 = dn.nodes[0];
    const Vector y1 = n1.C * x0;
    const Vector u1 = n1.inputs.known(u);
    const Matrix& p = n1.decomp.P_Wstar;
    const Matrix& v = n1.decomp.V;
    const Index q = p.rows();
    Vector expected = Vector::Zero(q);
    for (Index i = 0; i < q; ++i) {
        double acc = 0.0;
        for (Index j = 0; j < 6; ++j) {
            double ly = 0.0, bu = 0.0, vvd = 0.0;
            for (Index k = 0; k < y1.size(); ++k) ly += n1.L(j, k) * y1(k);
            for (Index k = 0; k < u1.size(); ++k) bu += n1.B_known(j, k) * u1(k);
            for (Index k = 0; k < v.cols(); ++k) vvd += v(j, k) * v.col(k).dot(d);
            acc += p(i, j) * (-ly + bu + dn.chi * vvd);
        }
        expected(i) = acc;
    }
    EXPECT_LE((node_rhs_N1(n1, Vector::Zero(q), y1, u1, d, dn.chi) - expected).norm(), 1e-12);

    const SensorNode& n2 = dn.nodes[1];
    const Vector y2 = n2.C * x0;
    const Vector u2 = n2.inputs.known(u);
    const Matrix& w = n2.W_g;
    Vector e2 = Vector::Zero(6);
    for (Index j = 0; j < 6; ++j) {
        double ly = 0.0, bu = 0.0;
        for (Index k = 0; k < y2.size(); ++k) ly += n2.L(j, k) * y2(k);
        for (Index k = 0; k < u2.size(); ++k) bu += n2.B_known(j, k) * u2(k);
        double coupling = 0.0;
        for (Index k = 0; k < w.cols(); ++k) {
            const double s = w.col(k).dot(d);
            coupling += w(j, k) * (dn.chi * s + dn.gamma * std::clamp(s / 1e-3, -1.0, 1.0));
        }
        e2(j) = -ly + bu + coupling;
    }
    const SignRealization sign{false, 1e-3};
    EXPECT_LE((node_rhs_N2(n2, Vector::Zero(6), y2, u2, d, dn.chi, dn.gamma, sign) - e2).norm(), 1e-12);
}

TEST(Properties, RandomNetworksQRoutesAgree) {
    std::mt19937_64 rng(77);
    int scored = 0;
    for (int trial = 0; trial < 300; ++trial) {
        LinSystem s;
        const Index n = 3 + static_cast<Index>(rng() % 2);
        s.A = oracle::random_matrix(rng, n, n);
        s.B = oracle::random_matrix(rng, n, 2);
        std::vector<NodeSpec> specs;
        for (int i = 0; i < 3; ++i) {
            specs.push_back({i + 1, oracle::random_matrix(rng, 1, n), {{0}, {1}}});
            if (rng() % 2) specs.back().C.row(0) -= specs.back().C.row(0).dot(s.B.col(1)) / s.B.col(1).squaredNorm() *
                                                     s.B.col(1).transpose();
        }
        s.C = Matrix(3, n);
        for (int i = 0; i < 3; ++i) s.C.row(i) = specs[static_cast<std::size_t>(i)].C;
        const SensorGraph g = rng() % 4 == 0 ? SensorGraph(Matrix::Zero(3, 3)) : SensorGraph::path(3);
        std::vector<SensorNode> nodes;
        try {
            for (const auto& sp : specs) nodes.push_back(per_node_decomposition(s, sp, SpectralPartition{}));
        } catch (const Error&) {
            continue;
        }
        const NetworkBlocks blocks = network_blocks(s, nodes, g);
        if (blocks.Q.size() == 0) continue;
        const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Matrix>(blocks.Q).eigenvalues();
        EXPECT_GE(ev.minCoeff(), -1e-10);
        EXPECT_LE((blocks.Q - blocks.Q.transpose()).norm(), 1e-12);
        const JointDetectability jd = joint_detectability_check(s, nodes, g);
        if (jd.sigma_min_Q > 1e-12 && jd.sigma_min_Q < 1e-6) continue;
        ++scored;
        EXPECT_EQ(jd.sigma_min_Q > 1e-9, jd.intersection_trivial && g.connected()) << "trial " << trial;
    }
    EXPECT_GT(scored, 20);
}

TEST(Graph, Basics) {
    EXPECT_TRUE(SensorGraph::ring(4).connected());
    EXPECT_NEAR(SensorGraph::ring(4).algebraic_connectivity(), 2.0, 1e-12);
    EXPECT_TRUE(SensorGraph(Matrix::Zero(1, 1)).connected());
    Matrix asym = Matrix::Zero(2, 2);
    asym(0, 1) = 1;
    EXPECT_THROW(SensorGraph{asym}, ConfigError);
}
