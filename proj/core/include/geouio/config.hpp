#pragma once

// Project configuration: one JSON document describing the plant, who knows which
// inputs, the sensor network (optional), spectral settings, input signals and the
// simulation setup.  Matrices are row-major nested arrays; column indices are 0-based.

#include <optional>
#include <string>
#include <vector>

#include "geouio/central_uio.hpp"
#include "geouio/distributed_uio.hpp"
#include "geouio/simulation.hpp"

namespace geouio {

struct ProjectConfig {
    std::string name;
    LinSystem system;
    InputPartition partition;     // centralized design
    std::vector<NodeSpec> nodes;  // non-empty selects the distributed design
    Matrix adjacency;             // nodes x nodes
    SpectralPartition spectral;
    double safety = 1.1;
    std::vector<SignalSpec> signals;
    SimConfig sim;
    std::optional<double> u_bar_max;

    bool distributed() const { return !nodes.empty(); }

    /// Cross-field checks; throws ConfigError.
    void validate() const;
};

/// Throws ConfigError on malformed JSON, unknown keys, bad shapes or out-of-range indices.
ProjectConfig parse_config(const std::string& json_text);
ProjectConfig load_config(const std::string& path);

/// Inverse of parse_config (node matrices are written out in full).
std::string serialize_config(const ProjectConfig& cfg);

/// Largest amplitude among the unknown channels of the given nodes; the signals are
/// bounded by their amplitudes, so this is a valid bound on |ubar_i|.
double amplitude_bound(const std::vector<SignalSpec>& signals, const std::vector<const NodeSpec*>& nodes);

}  // namespace geouio
