#pragma once

// Self-checks: the randomized agreement battery between the geometric existence
// test and the classical rank + detectability test, and residual checks on
// synthesized observers and simulated trajectories.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "geouio/central_uio.hpp"
#include "geouio/distributed_uio.hpp"
#include "geouio/simulation.hpp"

namespace geouio {

struct CheckResult {
    std::string name;
    bool pass = false;
    double worst = 0.0;  // worst residual (or margin) observed
    double limit = 0.0;
};

struct RandomSystemSpec {
    Index max_n = 6;
    Index max_p = 3;
    Index min_unknown = 1;
    Index max_unknown = 2;
    double bound = 2.0;  // entries uniform in [-bound, bound]
    /// Chance that one unknown column is pushed into Ker C, so the rank condition fails exactly.
    double blind_column_rate = 0.2;
};

struct RandomDraw {
    LinSystem sys;
    InputPartition part;  // every column unknown
};

RandomDraw random_system(std::mt19937_64& rng, const RandomSystemSpec& spec = {});

struct EquivalenceTrial {
    bool geometric = false;    // W_g* ∩ Ker C = 0
    bool rank_condition = false;
    bool detectable = false;
    bool marginal = false;
    double min_rank_gap = 1.0;       // smallest gap over every rank decision
    double min_alpha_distance = 0.0; // closest |Re lambda - alpha| over classified eigenvalues
    std::string error;               // non-empty when the pipeline threw

    bool classical() const { return rank_condition && detectable; }
    bool agree() const { return geometric == classical(); }
};

/// Marginal when some rank gap or eigenvalue distance falls below `margin`.
EquivalenceTrial equivalence_trial(const LinSystem& sys, const InputPartition& part, const SpectralPartition& spectral,
                                   const TolerancePolicy& tol = {}, double margin = 1e-6);

struct BatteryResult {
    std::uint64_t seed = 0;
    Index trials = 0;
    Index scored = 0;
    Index agreements = 0;
    Index marginal = 0;
    Index errors = 0;
    Index geometric_true = 0;  // among scored
    Index rank_false = 0;      // among scored
    std::vector<Index> disagreements;  // trial indices

    bool pass(double max_marginal_fraction = 0.05) const;
};

BatteryResult equivalence_battery(Index trials, std::uint64_t seed, const SpectralPartition& spectral = {},
                                  const TolerancePolicy& tol = {}, const RandomSystemSpec& spec = {});

/// Residual checks every successful synthesis must meet.
std::vector<CheckResult> centralized_checks(const LinSystem& sys, const InputPartition& part,
                                            const CentralizedObserver& obs, const SpectralPartition& spectral);
std::vector<CheckResult> node_checks(const LinSystem& sys, const SensorNode& node, const SpectralPartition& spectral);

/// Quotient error of the centralized observer along a trajectory: P_Wg x - z.
std::vector<Vector> centralized_quotient_error(const Trajectory& traj, const CentralizedObserver& obs);

/// Quotient error of node `observer` (index into the trajectory):
/// N1 uses P_Wg P_W*^T (P_W* x - z), N2 uses P_Wg (x - xhat).
std::vector<Vector> node_quotient_error(const Trajectory& traj, Index observer, const SensorNode& node);

struct QuotientResidual {
    double worst_abs = 0.0;  // max_k ||dq/dt - Abarbar q||, central differences
    double worst_rel = 0.0;  // same divided by (1 + ||x||)
    double t_worst = 0.0;
};

/// `q` sampled on `traj.times` (uniform); `abarbar` is the quotient map for that observer.
QuotientResidual quotient_residual(const Trajectory& traj, const std::vector<Vector>& q, const Matrix& abarbar);

}  // namespace geouio
