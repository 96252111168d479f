#include "geouio/builtin_examples.hpp"

namespace geouio {

ProjectConfig builtin_centralized() {
    ProjectConfig cfg;
    cfg.name = "centralized";
    cfg.system.A.resize(3, 3);
    cfg.system.A << 2, -2, 0,
                    0, 0, 1,
                    0, -2, 1;
    cfg.system.B.resize(3, 2);
    cfg.system.B << 0, 1,
                    0, 1,
                    1, 0;
    cfg.system.C.resize(2, 3);
    cfg.system.C << 1, 0, 0,
                    0, 1, 0;
    cfg.partition.known_cols = {0};
    cfg.partition.unknown_cols = {1};
    cfg.signals = {{SignalKind::Sin, 1.0, 1.0, 0.0}, {SignalKind::Cos, 1.0, 0.5, 0.0}};
    cfg.sim.t_end = 20.0;
    cfg.sim.x0 = Vector(3);
    cfg.sim.x0 << 1, 2, 3;
    // The plant has an eigenvalue at +2, so |x| passes 1e12 near t = 13.7 while the
    // observer is still fine; widen the guard so the full horizon can be recorded.
    cfg.sim.divergence_limit = 1e20;
    return cfg;
}

ProjectConfig builtin_distributed() {
    ProjectConfig cfg;
    cfg.name = "distributed";
    cfg.system.A.resize(6, 6);
    cfg.system.A << 0, 3, 0, 0, 0, 0,
                    -2, 0, 1, 0, 0, 0,
                    0, 0, 0, 2, 0, 0,
                    0, 0, -3, -2, 0, 0,
                    0, 0, 0, 1, 0, -3,
                    0, 2, 0, 0, 4, 0;
    Matrix bt(3, 6);
    bt << 0, 1, 0, 0, 0, 1,
          0, 0, 0, 1, 0, 0,
          0, 0, 1, 0, 0, 1;
    cfg.system.B = bt.transpose();

    NodeSpec n1{1, Matrix(2, 6), {{0, 1}, {2}}};
    n1.C << 1, 0, 0, 0, 0, 0,
            0, 0, 1, 0, 0, 0;
    NodeSpec n2{2, Matrix(1, 6), {{0, 2}, {1}}};
    n2.C << 0, 1, 0, 0, 1, 0;
    NodeSpec n3{3, Matrix(2, 6), {{1, 2}, {0}}};
    n3.C << 0, 0, 1, 0, 0, 0,
            0, 1, 0, 0, 0, 0;
    NodeSpec n4{4, Matrix(1, 6), {{0}, {1, 2}}};
    n4.C << 1, 1, 0, 0, 0, 0;
    cfg.nodes = {n1, n2, n3, n4};

    cfg.system.C.resize(6, 6);
    cfg.system.C << n1.C, n2.C, n3.C, n4.C;
    cfg.adjacency = SensorGraph::ring(4).adjacency();

    cfg.signals = {{SignalKind::Sin, 1.0, 1.0, 0.0}, {SignalKind::Cos, 0.2, 1.0, 0.0}, {SignalKind::Sin, 0.2, 0.5, 0.0}};
    // Unknown channels of the nodes without the local rank condition (2 and 4) are
    // 0.2 cos t and 0.2 sin 0.5t.
    cfg.u_bar_max = 0.2;
    cfg.sim.t_end = 40.0;
    cfg.sim.x0 = Vector(6);
    cfg.sim.x0 << 1, 2, 3, -1, -2, -3;
    return cfg;
}

std::optional<ProjectConfig> builtin_example(const std::string& which) {
    if (which == "centralized") return builtin_centralized();
    if (which == "distributed") return builtin_distributed();
    return std::nullopt;
}

}  // namespace geouio
