#include "geouio/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace geouio {

using nlohmann::json;

namespace {

void allow_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
    }
}

const json& require(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
    return obj.at(key);
}

double number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(where + ": not finite");
    return x;
}

Matrix matrix(const json& v, const std::string& where) {
    if (!v.is_array()) throw ConfigError(where + ": expected an array of rows");
    const Index rows = static_cast<Index>(v.size());
    if (rows == 0) return Matrix(0, 0);
    if (!v[0].is_array()) throw ConfigError(where + ": expected an array of rows");
    const Index cols = static_cast<Index>(v[0].size());
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        const json& row = v[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
            throw ConfigError(where + ": rows must all have " + std::to_string(cols) + " entries");
        }
        for (Index j = 0; j < cols; ++j) {
            m(i, j) = number(row[static_cast<std::size_t>(j)], where);
        }
    }
    return m;
}

Vector vector(const json& v, const std::string& where) {
    if (!v.is_array()) throw ConfigError(where + ": expected an array");
    Vector out(static_cast<Index>(v.size()));
    for (std::size_t k = 0; k < v.size(); ++k) out(static_cast<Index>(k)) = number(v[k], where);
    return out;
}

std::vector<Index> indices(const json& v, const std::string& where) {
    if (!v.is_array()) throw ConfigError(where + ": expected an array of indices");
    std::vector<Index> out;
    for (const json& e : v) {
        if (!e.is_number_integer()) throw ConfigError(where + ": indices must be integers");
        out.push_back(e.get<Index>());
    }
    return out;
}

json to_json(const Matrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

json to_json(const Vector& v) {
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

SignalSpec parse_signal(const json& v, const std::string& where) {
    allow_keys(v, where, {"kind", "amplitude", "frequency", "phase"});
    SignalSpec s;
    const json& kind = require(v, "kind", where);
    if (!kind.is_string()) throw ConfigError(where + ": kind must be a string");
    const std::string k = kind.get<std::string>();
    if (k == "sin") {
        s.kind = SignalKind::Sin;
    } else if (k == "cos") {
        s.kind = SignalKind::Cos;
    } else if (k == "const") {
        s.kind = SignalKind::Const;
    } else {
        throw ConfigError(where + ": kind must be sin, cos or const");
    }
    s.amplitude = number(require(v, "amplitude", where), where + ".amplitude");
    if (v.contains("frequency")) s.frequency = number(v.at("frequency"), where + ".frequency");
    if (v.contains("phase")) s.phase = number(v.at("phase"), where + ".phase");
    return s;
}

SimConfig parse_sim(const json& v) {
    allow_keys(v, "sim", {"t_end", "dt", "method", "sign_mode", "eps_bl", "x0", "observer_init", "record_stride",
                           "divergence_limit"});
    SimConfig s;
    s.t_end = number(require(v, "t_end", "sim"), "sim.t_end");
    if (v.contains("dt")) s.dt = number(v.at("dt"), "sim.dt");
    if (v.contains("method")) {
        const std::string m = v.at("method").get<std::string>();
        if (m == "rk4") {
            s.method = Integrator::RK4;
        } else if (m == "euler") {
            s.method = Integrator::Euler;
        } else {
            throw ConfigError("sim.method must be rk4 or euler");
        }
    }
    if (v.contains("sign_mode")) {
        const std::string m = v.at("sign_mode").get<std::string>();
        if (m == "boundary_layer") {
            s.sign_mode = SignMode::BoundaryLayer;
        } else if (m == "exact") {
            s.sign_mode = SignMode::Exact;
        } else {
            throw ConfigError("sim.sign_mode must be boundary_layer or exact");
        }
    }
    if (v.contains("eps_bl")) s.eps_bl = number(v.at("eps_bl"), "sim.eps_bl");
    s.x0 = vector(require(v, "x0", "sim"), "sim.x0");
    if (v.contains("observer_init")) {
        const json& init = v.at("observer_init");
        if (!init.is_array()) throw ConfigError("sim.observer_init: expected an array of vectors");
        for (const json& e : init) s.observer_init.push_back(vector(e, "sim.observer_init"));
    }
    if (v.contains("record_stride")) {
        const json& r = v.at("record_stride");
        if (!r.is_number_integer()) throw ConfigError("sim.record_stride must be an integer");
        s.record_stride = r.get<Index>();
    }
    if (v.contains("divergence_limit")) s.divergence_limit = number(v.at("divergence_limit"), "sim.divergence_limit");
    return s;
}

}  // namespace

void ProjectConfig::validate() const {
    system.validate();
    spectral.validate();
    if (!(std::isfinite(safety) && safety >= 1.0)) throw ConfigError("spectral.safety must be >= 1");
    if (u_bar_max && !(std::isfinite(*u_bar_max) && *u_bar_max >= 0.0)) {
        throw ConfigError("u_bar_max must be finite and >= 0");
    }
    const Index n = system.n();
    const Index m = system.m();
    if (static_cast<Index>(signals.size()) != m) {
        throw ConfigError("signals: expected one entry per column of B (" + std::to_string(m) + ")");
    }
    sim.validate(n);

    if (!distributed()) {
        partition.validate(m);
        return;
    }
    std::set<int> ids;
    for (const NodeSpec& node : nodes) {
        const std::string where = "node " + std::to_string(node.id);
        if (!ids.insert(node.id).second) throw ConfigError(where + ": duplicate id");
        if (node.C.cols() != n || node.C.rows() == 0) throw ConfigError(where + ": C must be p_i x " + std::to_string(n));
        node.inputs.validate(m);
    }
    if (adjacency.rows() != static_cast<Index>(nodes.size())) {
        throw ConfigError("graph: adjacency must be " + std::to_string(nodes.size()) + " x " +
                          std::to_string(nodes.size()));
    }
    SensorGraph check(adjacency);
    (void)check;
}

ProjectConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }

    ProjectConfig cfg;
    try {
        allow_keys(doc, "config",
                   {"name", "system", "partition", "nodes", "graph", "spectral", "signals", "sim", "u_bar_max"});
        if (doc.contains("name")) cfg.name = doc.at("name").get<std::string>();

        const json& sys = require(doc, "system", "config");
        allow_keys(sys, "system", {"A", "B", "C"});
        cfg.system.A = matrix(require(sys, "A", "system"), "system.A");
        const Index n = cfg.system.A.rows();
        cfg.system.B = matrix(require(sys, "B", "system"), "system.B");
        if (cfg.system.B.size() == 0) cfg.system.B = Matrix(n, 0);
        if (sys.contains("C")) cfg.system.C = matrix(sys.at("C"), "system.C");

        if (doc.contains("partition")) {
            const json& part = doc.at("partition");
            allow_keys(part, "partition", {"known", "unknown"});
            if (part.contains("known")) cfg.partition.known_cols = indices(part.at("known"), "partition.known");
            if (part.contains("unknown")) cfg.partition.unknown_cols = indices(part.at("unknown"), "partition.unknown");
        }

        if (doc.contains("nodes")) {
            const json& nodes = doc.at("nodes");
            if (!nodes.is_array()) throw ConfigError("nodes: expected an array");
            int next_id = 1;
            for (const json& v : nodes) {
                const std::string where = "nodes[" + std::to_string(next_id - 1) + "]";
                allow_keys(v, where, {"id", "C", "C_rows", "known", "unknown"});
                NodeSpec node;
                node.id = v.contains("id") ? v.at("id").get<int>() : next_id;
                ++next_id;
                if (v.contains("C") == v.contains("C_rows")) throw ConfigError(where + ": give exactly one of C, C_rows");
                if (v.contains("C")) {
                    node.C = matrix(v.at("C"), where + ".C");
                } else {
                    if (cfg.system.C.size() == 0) throw ConfigError(where + ": C_rows needs system.C");
                    const std::vector<Index> rows = indices(v.at("C_rows"), where + ".C_rows");
                    node.C.resize(static_cast<Index>(rows.size()), cfg.system.C.cols());
                    for (std::size_t k = 0; k < rows.size(); ++k) {
                        if (rows[k] < 0 || rows[k] >= cfg.system.C.rows()) {
                            throw ConfigError(where + ": C_rows index out of range");
                        }
                        node.C.row(static_cast<Index>(k)) = cfg.system.C.row(rows[k]);
                    }
                }
                if (v.contains("known")) node.inputs.known_cols = indices(v.at("known"), where + ".known");
                if (v.contains("unknown")) node.inputs.unknown_cols = indices(v.at("unknown"), where + ".unknown");
                cfg.nodes.push_back(std::move(node));
            }
            if (cfg.system.C.size() == 0) {
                // Plant output = every node's measurements stacked.
                Index rows = 0;
                for (const NodeSpec& node : cfg.nodes) rows += node.C.rows();
                cfg.system.C.resize(rows, n);
                Index r = 0;
                for (const NodeSpec& node : cfg.nodes) {
                    if (node.C.cols() != n) throw ConfigError("node " + std::to_string(node.id) + ": C must have n columns");
                    cfg.system.C.middleRows(r, node.C.rows()) = node.C;
                    r += node.C.rows();
                }
            }
            const json& graph = require(doc, "graph", "config");
            allow_keys(graph, "graph", {"adjacency"});
            cfg.adjacency = matrix(require(graph, "adjacency", "graph"), "graph.adjacency");
        } else if (!doc.contains("partition")) {
            throw ConfigError("config: need either 'partition' (centralized) or 'nodes' (distributed)");
        }
        if (cfg.system.C.size() == 0) throw ConfigError("system: missing 'C'");

        if (doc.contains("spectral")) {
            const json& sp = doc.at("spectral");
            allow_keys(sp, "spectral", {"alpha", "margin", "pole_targets", "safety"});
            if (sp.contains("alpha")) cfg.spectral.alpha = number(sp.at("alpha"), "spectral.alpha");
            if (sp.contains("margin")) cfg.spectral.margin = number(sp.at("margin"), "spectral.margin");
            if (sp.contains("pole_targets")) {
                const Vector t = vector(sp.at("pole_targets"), "spectral.pole_targets");
                cfg.spectral.pole_targets.assign(t.data(), t.data() + t.size());
            }
            if (sp.contains("safety")) cfg.safety = number(sp.at("safety"), "spectral.safety");
        }

        const json& signals = require(doc, "signals", "config");
        if (!signals.is_array()) throw ConfigError("signals: expected an array");
        for (std::size_t k = 0; k < signals.size(); ++k) {
            cfg.signals.push_back(parse_signal(signals[k], "signals[" + std::to_string(k) + "]"));
        }
        cfg.sim = parse_sim(require(doc, "sim", "config"));
        if (doc.contains("u_bar_max")) cfg.u_bar_max = number(doc.at("u_bar_max"), "u_bar_max");
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    try {
        cfg.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

ProjectConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string serialize_config(const ProjectConfig& cfg) {
    json doc;
    if (!cfg.name.empty()) doc["name"] = cfg.name;
    doc["system"] = {{"A", to_json(cfg.system.A)}, {"B", to_json(cfg.system.B)}, {"C", to_json(cfg.system.C)}};
    if (cfg.distributed()) {
        json nodes = json::array();
        for (const NodeSpec& node : cfg.nodes) {
            nodes.push_back({{"id", node.id},
                             {"C", to_json(node.C)},
                             {"known", node.inputs.known_cols},
                             {"unknown", node.inputs.unknown_cols}});
        }
        doc["nodes"] = nodes;
        doc["graph"] = {{"adjacency", to_json(cfg.adjacency)}};
    } else {
        doc["partition"] = {{"known", cfg.partition.known_cols}, {"unknown", cfg.partition.unknown_cols}};
    }
    json spectral = {{"alpha", cfg.spectral.alpha}, {"margin", cfg.spectral.margin}, {"safety", cfg.safety}};
    if (!cfg.spectral.pole_targets.empty()) spectral["pole_targets"] = cfg.spectral.pole_targets;
    doc["spectral"] = spectral;

    json signals = json::array();
    for (const SignalSpec& s : cfg.signals) {
        signals.push_back(
            {{"kind", to_string(s.kind)}, {"amplitude", s.amplitude}, {"frequency", s.frequency}, {"phase", s.phase}});
    }
    doc["signals"] = signals;

    json sim = {{"t_end", cfg.sim.t_end},
                {"dt", cfg.sim.dt},
                {"method", to_string(cfg.sim.method)},
                {"sign_mode", to_string(cfg.sim.sign_mode)},
                {"eps_bl", cfg.sim.eps_bl},
                {"x0", to_json(cfg.sim.x0)},
                {"record_stride", cfg.sim.record_stride},
                {"divergence_limit", cfg.sim.divergence_limit}};
    if (!cfg.sim.observer_init.empty()) {
        json init = json::array();
        for (const Vector& v : cfg.sim.observer_init) init.push_back(to_json(v));
        sim["observer_init"] = init;
    }
    doc["sim"] = sim;
    if (cfg.u_bar_max) doc["u_bar_max"] = *cfg.u_bar_max;
    return doc.dump(2);
}

double amplitude_bound(const std::vector<SignalSpec>& signals, const std::vector<const NodeSpec*>& nodes) {
    double bound = 0.0;
    for (const NodeSpec* node : nodes) {
        for (Index k : node->inputs.unknown_cols) {
            bound = std::max(bound, std::abs(signals.at(static_cast<std::size_t>(k)).amplitude));
        }
    }
    return bound;
}

}  // namespace geouio
