#pragma once

// Networked unknown-input observer.  Each sensor node i sees y_i = C_i x and its own
// split B u = B_i u_i + Bbar_i ubar_i.  Nodes meeting rank(C_i Bbar_i) = rank(Bbar_i)
// (class N1) run a reduced observer on X/W_i*; the rest (class N2) run a full-order
// observer.  Both exchange estimates with neighbours to recover the directions they
// cannot reconstruct locally (Im V_i for N1, W_{g,i}* for N2).

#include <span>
#include <vector>

#include "geouio/central_uio.hpp"

namespace geouio {

enum class NodeClass { N1, N2 };

const char* to_string(NodeClass cls);

/// Raw per-node description before synthesis.
struct NodeSpec {
    int id = 0;  // 1-based label used in reports
    Matrix C;
    InputPartition inputs;
};

struct SensorNode {
    int id = 0;
    Matrix C;
    InputPartition inputs;
    Matrix B_known;
    Matrix B_unknown;
    NodeClass cls = NodeClass::N2;
    GeometricDecomposition decomp;
    Matrix L;
    Matrix A_L;  // A + L C
    /// (A + L C) | X/W_g*; Hurwitz for every node.
    Matrix Abarbar_L;
    // N1 only.
    Matrix E;
    Matrix F;
    Matrix Abar_L;  // (A + L C) | X/W*
    /// Orthonormal basis of W_g* (n x dim W_g*).
    Matrix W_g;

    Index state_dim() const;  // n - dim W* for N1, n for N2
};

class SensorGraph {
public:
    SensorGraph() = default;
    /// Requires a symmetric 0/1 matrix with zero diagonal.
    explicit SensorGraph(Matrix adjacency);

    static SensorGraph ring(Index nodes);
    static SensorGraph path(Index nodes);
    static SensorGraph complete(Index nodes);

    Index size() const { return adjacency_.rows(); }
    const Matrix& adjacency() const { return adjacency_; }
    const Matrix& laplacian() const { return laplacian_; }
    /// Second-smallest Laplacian eigenvalue (0 for a single node).
    double algebraic_connectivity() const;
    /// A single node counts as connected.
    bool connected() const;

private:
    Matrix adjacency_;
    Matrix laplacian_;
};

struct DistributedObserverNetwork {
    std::vector<SensorNode> nodes;
    SensorGraph graph;
    double chi = 0.0;
    double gamma = 0.0;
    double u_bar_max = 0.0;
    double chi_min = 0.0;
    double gamma_min = 0.0;
    double sigma_min_Q = 0.0;
    /// Node indices in block order: N1 nodes first, then N2.
    std::vector<Index> block_order;
    Matrix W_V_block;
    Matrix A_L_block;
};

struct Classification {
    std::vector<int> n1;  // node ids
    std::vector<int> n2;
};

Classification classify_nodes(const LinSystem& sys, std::span<const NodeSpec> nodes, const TolerancePolicy& tol = {});

SensorNode per_node_decomposition(const LinSystem& sys, const NodeSpec& spec, const SpectralPartition& spectral,
                                  const TolerancePolicy& tol = {});

/// Block-diagonal W_V and A_L in N1-then-N2 order, plus that order.
struct NetworkBlocks {
    std::vector<Index> order;
    Matrix W_V;
    Matrix A_L;
    Matrix Q;  // W_V^T (L_perm ⊗ I_n) W_V
};
NetworkBlocks network_blocks(const LinSystem& sys, std::span<const SensorNode> nodes, const SensorGraph& graph);

struct JointDetectability {
    bool ok = false;
    bool connected = false;
    bool intersection_trivial = false;  // direct subspace route
    double sigma_min_Q = 0.0;           // +inf when Q is empty
};
JointDetectability joint_detectability_check(const LinSystem& sys, std::span<const SensorNode> nodes,
                                             const SensorGraph& graph, const TolerancePolicy& tol = {});

struct GainBounds {
    double chi_min = 0.0;
    double gamma_min = 0.0;
};
/// Lower bounds on the coupling gains.  Throws SingularQ when sigma_min(Q) <= 1e-9.
GainBounds gain_bounds(const LinSystem& sys, std::span<const SensorNode> nodes, const SensorGraph& graph,
                       double u_bar_max);

struct DistributedOptions {
    SpectralPartition spectral;
    double u_bar_max = 0.0;
    double safety = 1.1;
    double chi_floor = 0.1;
};

/// Throws AssumptionViolated (1: disconnected graph, 2: bad ubar bound, 3: joint detectability).
DistributedObserverNetwork synthesize_distributed(const LinSystem& sys, std::span<const NodeSpec> nodes,
                                                  const SensorGraph& graph, const DistributedOptions& opts,
                                                  const TolerancePolicy& tol = {});

/// Sum_j a_ij (xhat_j - xhat_i).
Vector disagreement(const SensorGraph& graph, Index i, std::span<const Vector> estimates);

/// Componentwise sign used by the N2 nonlinear coupling.
struct SignRealization {
    bool exact = false;
    double eps = 1e-3;  // boundary-layer width: sgn(s) ~ clamp(s / eps, -1, 1)

    Vector apply(const Vector& s) const;
};

Vector node_rhs_N1(const SensorNode& node, const Vector& z, const Vector& y, const Vector& u_known,
                   const Vector& disagreement, double chi);
Vector node_estimate_N1(const SensorNode& node, const Vector& z, const Vector& y);

Vector node_rhs_N2(const SensorNode& node, const Vector& xhat, const Vector& y, const Vector& u_known,
                   const Vector& disagreement, double chi, double gamma, const SignRealization& sign);

/// Residuals of a node's defining identities.
struct NodeResiduals {
    double reconstruction = 0.0;     // N1: ||E P_W* + F C - I||_F
    double input_decoupling = 0.0;   // ||P_Wg Bbar_i||_F
    double friend_invariance = 0.0;  // ||P_Wg (A + L C) W_g||_F (and W* for N1)
    double commutation = 0.0;        // ||Abarbar P_Wg - P_Wg (A + L C)||_F
    double spectral_abscissa = 0.0;  // max Re spec(Abarbar)
    double block_relations = 0.0;    // N1: worst of the V_i / P_W* relations
};
NodeResiduals node_residuals(const LinSystem& sys, const SensorNode& node);

}  // namespace geouio
