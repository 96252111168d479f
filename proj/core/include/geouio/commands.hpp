#pragma once

// Command implementations behind the geo-uio executable.  Each returns a process exit
// code and writes its artifacts under `out_dir`.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "geouio/config.hpp"
#include "geouio/verification.hpp"

namespace geouio {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config = 1;
inline constexpr int synthesis = 2;
inline constexpr int simulation = 3;
inline constexpr int verification = 4;
}  // namespace exit_code

struct CommandIO {
    std::ostream& out;
    std::ostream& err;
};

/// Everything synthesized from one config.
struct Synthesis {
    ProjectConfig cfg;
    TolerancePolicy tol;
    std::optional<CentralizedObserver> central;
    std::optional<DistributedObserverNetwork> network;
    double u_bar_max = 0.0;
};

/// Throws the synthesis errors (ExistenceFailed, AssumptionViolated, SingularQ, ...).
Synthesis synthesize(const ProjectConfig& cfg, const TolerancePolicy& tol);

/// Residual and bound checks for a finished synthesis.
std::vector<CheckResult> synthesis_checks(const Synthesis& syn);

/// Throws NonFiniteState.
Trajectory simulate(const Synthesis& syn);

/// CSV with header t,x_1..x_n,node<k>_xhat_1..n (per observer),node<k>_err (per observer).
void write_trajectory_csv(const Trajectory& traj, const std::string& path);
/// One file per observer, "err_node<k>.dat", two columns (t, err).
std::vector<std::string> write_error_series(const Trajectory& traj, const std::string& out_dir);

int cmd_synth(const ProjectConfig& cfg, const std::string& out_dir, CommandIO io);
int cmd_simulate(const ProjectConfig& cfg, const std::string& out_dir, CommandIO io);
int cmd_verify(const ProjectConfig& cfg, const std::string& out_dir, CommandIO io);
int cmd_verify_random(long long trials, std::uint64_t seed, const std::string& out_dir, CommandIO io);
int cmd_reproduce(const std::string& which, const std::string& out_dir, CommandIO io);

/// Loads the config (exit 1 on failure) and dispatches.
int run_with_config(const std::string& command, const std::string& config_path, const std::string& out_dir,
                    CommandIO io);

}  // namespace geouio
