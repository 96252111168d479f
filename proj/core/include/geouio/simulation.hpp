#pragma once

// Fixed-step simulation of the plant together with a centralized observer or a
// sensor network.  All observers read the same step-begin snapshot.

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "geouio/central_uio.hpp"
#include "geouio/distributed_uio.hpp"

namespace geouio {

enum class SignalKind { Sin, Cos, Const };

struct SignalSpec {
    SignalKind kind = SignalKind::Const;
    double amplitude = 0.0;
    double frequency = 0.0;  // rad/s
    double phase = 0.0;      // rad

    double eval(double t) const;
};

Vector eval_signals(std::span<const SignalSpec> specs, double t);

enum class Integrator { Euler, RK4 };
enum class SignMode { Exact, BoundaryLayer };

const char* to_string(SignalKind kind);
const char* to_string(Integrator method);
const char* to_string(SignMode mode);

struct SimConfig {
    double t_end = 20.0;
    double dt = 1e-3;
    Integrator method = Integrator::RK4;
    SignMode sign_mode = SignMode::BoundaryLayer;
    double eps_bl = 1e-3;
    Vector x0;
    /// One entry per observer (z for reduced observers, xhat for full-order ones).
    /// Missing entries start at zero.
    std::vector<Vector> observer_init;
    Index record_stride = 1;
    /// Any state entry above this magnitude aborts the run with NonFiniteState.
    double divergence_limit = 1e12;

    /// Throws ConfigError.
    void validate(Index n) const;
    Index steps() const;
};

struct Trajectory {
    std::vector<int> observer_ids;
    std::vector<double> times;
    std::vector<Vector> x;
    std::vector<std::vector<Vector>> xhat;      // [observer][sample]
    std::vector<std::vector<double>> err_norm;  // [observer][sample]
    std::vector<std::vector<Vector>> internal;  // observer state: z or xhat
    std::vector<Vector> u;

    Index observers() const { return static_cast<Index>(observer_ids.size()); }
    Index samples() const { return static_cast<Index>(times.size()); }
};

/// Throws NonFiniteState when a state leaves the finite range or exceeds cfg.divergence_limit.
Trajectory simulate_centralized(const LinSystem& sys, const InputPartition& part, const CentralizedObserver& obs,
                                std::span<const SignalSpec> signals, const SimConfig& cfg);

Trajectory simulate_distributed(const LinSystem& sys, const DistributedObserverNetwork& network,
                                std::span<const SignalSpec> signals, const SimConfig& cfg);

struct ErrorSummary {
    int observer_id = 0;
    double final_err = 0.0;
    /// First recorded time after which err stays below tau; +inf if it never settles.
    double t_tol = std::numeric_limits<double>::infinity();
    /// sup err over t >= t_star.
    double sup_after = 0.0;
};

std::vector<ErrorSummary> error_metrics(const Trajectory& traj, double tau, double t_star);

}  // namespace geouio
