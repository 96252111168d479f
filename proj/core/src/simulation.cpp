#include "geouio/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>

namespace geouio {

double SignalSpec::eval(double t) const {
    switch (kind) {
        case SignalKind::Sin: return amplitude * std::sin(frequency * t + phase);
        case SignalKind::Cos: return amplitude * std::cos(frequency * t + phase);
        case SignalKind::Const: return amplitude;
    }
    return 0.0;
}

Vector eval_signals(std::span<const SignalSpec> specs, double t) {
    Vector u(static_cast<Index>(specs.size()));
    for (std::size_t k = 0; k < specs.size(); ++k) u(static_cast<Index>(k)) = specs[k].eval(t);
    return u;
}

const char* to_string(SignalKind kind) {
    switch (kind) {
        case SignalKind::Sin: return "sin";
        case SignalKind::Cos: return "cos";
        case SignalKind::Const: return "const";
    }
    return "?";
}

const char* to_string(Integrator method) { return method == Integrator::Euler ? "euler" : "rk4"; }
const char* to_string(SignMode mode) { return mode == SignMode::Exact ? "exact" : "boundary_layer"; }

void SimConfig::validate(Index n) const {
    if (!(std::isfinite(t_end) && t_end > 0.0)) throw ConfigError("sim: t_end must be positive");
    if (!(std::isfinite(dt) && dt > 0.0)) throw ConfigError("sim: dt must be positive");
    if (!(dt < t_end)) throw ConfigError("sim: dt must be smaller than t_end");
    if (sign_mode == SignMode::BoundaryLayer && !(eps_bl > 0.0)) throw ConfigError("sim: eps_bl must be positive");
    if (record_stride < 1) throw ConfigError("sim: record_stride must be >= 1");
    if (!(divergence_limit > 0.0)) throw ConfigError("sim: divergence_limit must be positive");
    if (x0.size() != n) throw ConfigError("sim: x0 must have " + std::to_string(n) + " entries");
    if (!x0.allFinite()) throw ConfigError("sim: x0 is not finite");
}

Index SimConfig::steps() const { return static_cast<Index>(std::floor(t_end / dt + 1e-9)); }

namespace {

using Rhs = std::function<Vector(double, const Vector&)>;

Vector advance(const Rhs& f, double t, const Vector& s, double dt, Integrator method) {
    if (method == Integrator::Euler) return s + dt * f(t, s);
    const Vector k1 = f(t, s);
    const Vector k2 = f(t + 0.5 * dt, s + 0.5 * dt * k1);
    const Vector k3 = f(t + 0.5 * dt, s + 0.5 * dt * k2);
    const Vector k4 = f(t + dt, s + dt * k3);
    return s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void guard(const Vector& s, double t, double limit) {
    if (!s.allFinite() || s.cwiseAbs().maxCoeff() > limit) {
        std::ostringstream msg;
        msg << "state diverged (non-finite or above " << limit << ") at t = " << t;
        throw NonFiniteState(msg.str(), t);
    }
}

Vector initial_or_zero(const SimConfig& cfg, std::size_t k, Index dim, const std::string& who) {
    if (k >= cfg.observer_init.size() || cfg.observer_init[k].size() == 0) return Vector::Zero(dim);
    if (cfg.observer_init[k].size() != dim) {
        throw ConfigError("sim: initial state of " + who + " must have " + std::to_string(dim) + " entries");
    }
    return cfg.observer_init[k];
}

// Shared driver: `unpack` turns the stacked state into per-observer estimates and internal states.
template <class Unpack>
Trajectory run(const SimConfig& cfg, Index n, std::vector<int> ids, const Vector& s0, const Rhs& f,
               std::span<const SignalSpec> signals, Unpack unpack) {
    Trajectory traj;
    traj.observer_ids = std::move(ids);
    const std::size_t nobs = traj.observer_ids.size();
    traj.xhat.resize(nobs);
    traj.err_norm.resize(nobs);
    traj.internal.resize(nobs);

    auto record = [&](Index k, const Vector& s) {
        const double t = static_cast<double>(k) * cfg.dt;
        const Vector x = s.head(n);
        traj.times.push_back(t);
        traj.x.push_back(x);
        traj.u.push_back(eval_signals(signals, t));
        std::vector<Vector> est;
        std::vector<Vector> inner;
        unpack(s, est, inner);
        for (std::size_t i = 0; i < nobs; ++i) {
            traj.err_norm[i].push_back((x - est[i]).norm());
            traj.xhat[i].push_back(std::move(est[i]));
            traj.internal[i].push_back(std::move(inner[i]));
        }
    };

    const Index steps = cfg.steps();
    Vector s = s0;
    guard(s, 0.0, cfg.divergence_limit);
    record(0, s);
    for (Index k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * cfg.dt;
        s = advance(f, t, s, cfg.dt, cfg.method);
        guard(s, t + cfg.dt, cfg.divergence_limit);
        if ((k + 1) % cfg.record_stride == 0) record(k + 1, s);
    }
    return traj;
}

}  // namespace

Trajectory simulate_centralized(const LinSystem& sys, const InputPartition& part, const CentralizedObserver& obs,
                                std::span<const SignalSpec> signals, const SimConfig& cfg) {
    sys.validate();
    cfg.validate(sys.n());
    if (static_cast<Index>(signals.size()) != sys.m()) throw ConfigError("sim: one signal per input channel required");
    const Index n = sys.n();
    const Index q = obs.z_dim;

    Vector s0(n + q);
    s0 << cfg.x0, initial_or_zero(cfg, 0, q, "the centralized observer");

    const Rhs f = [&](double t, const Vector& s) {
        const Vector u = eval_signals(signals, t);
        const Vector x = s.head(n);
        const Vector y = sys.C * x;
        Vector ds(n + q);
        ds.head(n) = sys.A * x + sys.B * u;
        ds.tail(q) = observer_rhs(obs, s.tail(q), y, part.known(u));
        return ds;
    };
    auto unpack = [&](const Vector& s, std::vector<Vector>& est, std::vector<Vector>& inner) {
        const Vector z = s.tail(q);
        est.push_back(estimate(obs, z, sys.C * s.head(n)));
        inner.push_back(z);
    };
    return run(cfg, n, {1}, s0, f, signals, unpack);
}

Trajectory simulate_distributed(const LinSystem& sys, const DistributedObserverNetwork& network,
                                std::span<const SignalSpec> signals, const SimConfig& cfg) {
    sys.validate();
    cfg.validate(sys.n());
    if (static_cast<Index>(signals.size()) != sys.m()) throw ConfigError("sim: one signal per input channel required");
    const Index n = sys.n();
    const auto& nodes = network.nodes;
    const std::size_t count = nodes.size();
    if (network.graph.size() != static_cast<Index>(count)) throw DimensionMismatch("sim: graph size differs from node count");

    std::vector<Index> offset(count);
    Index total = n;
    std::vector<int> ids;
    for (std::size_t i = 0; i < count; ++i) {
        offset[i] = total;
        total += nodes[i].state_dim();
        ids.push_back(nodes[i].id);
    }
    Vector s0(total);
    s0.head(n) = cfg.x0;
    for (std::size_t i = 0; i < count; ++i) {
        s0.segment(offset[i], nodes[i].state_dim()) =
            initial_or_zero(cfg, i, nodes[i].state_dim(), "node " + std::to_string(nodes[i].id));
    }

    const SignRealization sign{cfg.sign_mode == SignMode::Exact, cfg.eps_bl};

    // Estimates from one snapshot; every node's derivative reads this same set.
    auto estimates = [&](const Vector& s, std::vector<Vector>& est) {
        const Vector x = s.head(n);
        est.resize(count);
        for (std::size_t i = 0; i < count; ++i) {
            const Vector si = s.segment(offset[i], nodes[i].state_dim());
            est[i] = nodes[i].cls == NodeClass::N1 ? node_estimate_N1(nodes[i], si, nodes[i].C * x) : si;
        }
    };

    const Rhs f = [&](double t, const Vector& s) {
        const Vector u = eval_signals(signals, t);
        const Vector x = s.head(n);
        std::vector<Vector> est;
        estimates(s, est);
        Vector ds(total);
        ds.head(n) = sys.A * x + sys.B * u;
        for (std::size_t i = 0; i < count; ++i) {
            const SensorNode& node = nodes[i];
            const Vector y = node.C * x;
            const Vector d = disagreement(network.graph, static_cast<Index>(i), est);
            const Vector si = s.segment(offset[i], node.state_dim());
            const Vector uk = node.inputs.known(u);
            ds.segment(offset[i], node.state_dim()) =
                node.cls == NodeClass::N1 ? node_rhs_N1(node, si, y, uk, d, network.chi)
                                          : node_rhs_N2(node, si, y, uk, d, network.chi, network.gamma, sign);
        }
        return ds;
    };
    auto unpack = [&](const Vector& s, std::vector<Vector>& est, std::vector<Vector>& inner) {
        estimates(s, est);
        for (std::size_t i = 0; i < count; ++i) inner.push_back(s.segment(offset[i], nodes[i].state_dim()));
    };
    return run(cfg, n, ids, s0, f, signals, unpack);
}

std::vector<ErrorSummary> error_metrics(const Trajectory& traj, double tau, double t_star) {
    std::vector<ErrorSummary> out;
    for (Index i = 0; i < traj.observers(); ++i) {
        const auto& err = traj.err_norm[static_cast<std::size_t>(i)];
        ErrorSummary s;
        s.observer_id = traj.observer_ids[static_cast<std::size_t>(i)];
        if (err.empty()) {
            out.push_back(s);
            continue;
        }
        s.final_err = err.back();
        std::size_t settle = err.size();
        while (settle > 0 && err[settle - 1] < tau) --settle;
        if (settle < err.size()) s.t_tol = traj.times[settle];
        for (std::size_t k = 0; k < err.size(); ++k) {
            if (traj.times[k] >= t_star - 1e-9 * std::max(1.0, t_star)) s.sup_after = std::max(s.sup_after, err[k]);
        }
        out.push_back(s);
    }
    return out;
}

}  // namespace geouio
