#include "geouio/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "geouio/builtin_examples.hpp"
#include "json.hpp"

namespace geouio {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json mat(const Matrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

json complex_list(const Eigen::VectorXcd& v) {
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back({v(i).real(), v(i).imag()});
    return out;
}

json basis(const Subspace& s) { return {{"dim", s.dim()}, {"basis", mat(s.basis())}}; }

json decomposition_json(const GeometricDecomposition& d) {
    return {{"W_star", basis(d.W_star)},
            {"S_star", basis(d.S_star)},
            {"W_g_star", basis(d.W_g_star)},
            {"Xbar_g_dim", d.Xbar_g.dim()},
            {"Xbar_b_dim", d.Xbar_b.dim()},
            {"invariant_zeros", complex_list(d.invariant_zeros)},
            {"L0", mat(d.L0)},
            {"V", mat(d.V)},
            {"P_Wstar", mat(d.P_Wstar)},
            {"P_Wg", mat(d.P_Wg)}};
}

json checks_json(const std::vector<CheckResult>& checks) {
    json out = json::array();
    for (const CheckResult& c : checks) {
        out.push_back({{"name", c.name}, {"value", c.worst}, {"limit", c.limit}, {"pass", c.pass}});
    }
    return out;
}

bool all_pass(const std::vector<CheckResult>& checks) {
    for (const CheckResult& c : checks) {
        if (!c.pass) return false;
    }
    return true;
}

std::vector<int> ids_of(const std::vector<SensorNode>& nodes, NodeClass cls) {
    std::vector<int> ids;
    for (const SensorNode& n : nodes) {
        if (n.cls == cls) ids.push_back(n.id);
    }
    return ids;
}

json report_json(const Synthesis& syn) {
    const ProjectConfig& cfg = syn.cfg;
    json r;
    r["config_name"] = cfg.name;
    r["mode"] = cfg.distributed() ? "distributed" : "centralized";
    r["tolerance"] = {{"rel_rank_tol", syn.tol.rel_rank_tol}, {"abs_residual_tol", syn.tol.abs_residual_tol}};
    r["spectral"] = {{"alpha", cfg.spectral.alpha}, {"margin", cfg.spectral.margin}, {"safety", cfg.safety}};
    r["system"] = {{"A", mat(cfg.system.A)}, {"B", mat(cfg.system.B)}, {"C", mat(cfg.system.C)}};

    if (syn.central) {
        const CentralizedObserver& obs = *syn.central;
        const ClassicalConditions cc = classical_rank_condition(cfg.system, cfg.partition, cfg.spectral, syn.tol);
        r["centralized"] = {
            {"uio_condition", check_uio_condition(obs.decomp, cfg.system.C, syn.tol)},
            {"rank_condition", cc.rank_condition},
            {"detectable_C_A1", cc.detectable},
            {"decomposition", decomposition_json(obs.decomp)},
            {"observer",
             {{"z_dim", obs.z_dim},
              {"Abar_L", mat(obs.Abar_L)},
              {"P_Wg", mat(obs.P_Wg)},
              {"L", mat(obs.L)},
              {"E", mat(obs.E)},
              {"F", mat(obs.F)},
              {"B_known", mat(obs.B_known)},
              {"Bbar", mat(cfg.partition.unknown(cfg.system.B))},
              {"eigenvalues", complex_list(sorted_eigenvalues(obs.Abar_L))}}}};
    }
    if (syn.network) {
        const DistributedObserverNetwork& net = *syn.network;
        json nodes = json::array();
        for (const SensorNode& node : net.nodes) {
            json n = {{"id", node.id},
                      {"class", to_string(node.cls)},
                      {"local_rank_condition", node.cls == NodeClass::N1},
                      {"C", mat(node.C)},
                      {"B_known", mat(node.B_known)},
                      {"Bbar", mat(node.B_unknown)},
                      {"decomposition", decomposition_json(node.decomp)},
                      {"L", mat(node.L)},
                      {"A_L", mat(node.A_L)},
                      {"Abarbar_L", mat(node.Abarbar_L)},
                      {"Abarbar_eigenvalues", complex_list(sorted_eigenvalues(node.Abarbar_L))},
                      {"W_g", mat(node.W_g)},
                      {"state_dim", node.state_dim()}};
            if (node.cls == NodeClass::N1) {
                n["E"] = mat(node.E);
                n["F"] = mat(node.F);
                n["Abar_L"] = mat(node.Abar_L);
            }
            nodes.push_back(n);
        }
        const JointDetectability jd = joint_detectability_check(cfg.system, net.nodes, net.graph, syn.tol);
        json order = json::array();
        for (Index i : net.block_order) order.push_back(net.nodes[static_cast<std::size_t>(i)].id);
        r["distributed"] = {
            {"classification", {{"N1", ids_of(net.nodes, NodeClass::N1)}, {"N2", ids_of(net.nodes, NodeClass::N2)}}},
            {"nodes", nodes},
            {"graph",
             {{"adjacency", mat(net.graph.adjacency())},
              {"laplacian", mat(net.graph.laplacian())},
              {"algebraic_connectivity", net.graph.algebraic_connectivity()}}},
            {"assumptions",
             {{"1_connected", net.graph.connected()},
              {"2_u_bar_max", net.u_bar_max},
              {"3_joint_detectability", jd.ok},
              {"3_blind_intersection_trivial", jd.intersection_trivial}}},
            {"gains",
             {{"norm2_A_L", norm_2(net.A_L_block)},
              {"sigma_min_Q", net.sigma_min_Q},
              {"chi_min", net.chi_min},
              {"gamma_min", net.gamma_min},
              {"chi", net.chi},
              {"gamma", net.gamma},
              {"u_bar_max", net.u_bar_max}}},
            {"block_order", order},
            {"W_V_block", mat(net.W_V_block)},
            {"A_L_block", mat(net.A_L_block)}};
    }
    r["checks"] = checks_json(synthesis_checks(syn));
    return r;
}

void write_json(const json& doc, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << doc.dump(2) << '\n';
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
}

void print_checks(const std::vector<CheckResult>& checks, std::ostream& out) {
    for (const CheckResult& c : checks) {
        char line[256];
        std::snprintf(line, sizeof line, "%s  %-52s worst=%-12.4g limit=%.4g", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                      c.worst, c.limit);
        out << line << '\n';
    }
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Maps library errors raised during synthesis onto exit codes with a diagnostic.
template <class F>
int guarded(CommandIO io, F&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        io.err << "config error: " << e.what() << '\n';
        return exit_code::config;
    } catch (const NonFiniteState& e) {
        io.err << "simulation failed: " << e.what() << '\n';
        return exit_code::simulation;
    } catch (const ExistenceFailed& e) {
        io.err << "synthesis failed: " << e.what() << '\n';
        if (e.witness().size() > 0) io.err << "offending directions (columns):\n" << e.witness() << '\n';
        if (e.eigenvalues().size() > 0) io.err << "unassignable eigenvalues: " << e.eigenvalues().transpose() << '\n';
        return exit_code::synthesis;
    } catch (const AssumptionViolated& e) {
        io.err << "synthesis failed (assumption " << e.assumption() << "): " << e.what() << '\n';
        return exit_code::synthesis;
    } catch (const Error& e) {
        io.err << "synthesis failed: " << e.what() << '\n';
        return exit_code::synthesis;
    }
}

json metrics_json(const Trajectory& traj, double tau, double t_star) {
    json out = json::array();
    for (const ErrorSummary& s : error_metrics(traj, tau, t_star)) {
        out.push_back({{"observer", s.observer_id},
                       {"final_err", s.final_err},
                       {"t_tol", std::isfinite(s.t_tol) ? json(s.t_tol) : json(nullptr)},
                       {"tau", tau},
                       {"t_star", t_star},
                       {"sup_err_after_t_star", s.sup_after}});
    }
    return out;
}

// Synthesis + simulation artifacts; returns the exit code and fills `report`.
int synth_and_simulate(const Synthesis& syn, const std::string& out_dir, CommandIO io, json& report) {
    report = report_json(syn);
    const Trajectory traj = simulate(syn);
    write_trajectory_csv(traj, (fs::path(out_dir) / "trajectory.csv").string());
    write_error_series(traj, out_dir);
    const double tau = 1e-2;
    const double t_star = 0.75 * syn.cfg.sim.t_end;
    report["metrics"] = metrics_json(traj, tau, t_star);
    report["sim"] = {{"t_end", syn.cfg.sim.t_end},
                     {"dt", syn.cfg.sim.dt},
                     {"method", to_string(syn.cfg.sim.method)},
                     {"sign_mode", to_string(syn.cfg.sim.sign_mode)},
                     {"eps_bl", syn.cfg.sim.eps_bl},
                     {"samples", traj.samples()}};
    for (const ErrorSummary& s : error_metrics(traj, tau, t_star)) {
        io.out << "observer " << s.observer_id << ": final err " << s.final_err << ", sup err for t >= " << t_star
               << ": " << s.sup_after << '\n';
    }
    return exit_code::ok;
}

}  // namespace

Synthesis synthesize(const ProjectConfig& cfg, const TolerancePolicy& tol) {
    cfg.validate();
    Synthesis syn;
    syn.cfg = cfg;
    syn.tol = tol;
    if (!cfg.distributed()) {
        syn.central = synthesize_centralized_uio(cfg.system, cfg.partition, cfg.spectral, tol);
        return syn;
    }
    const SensorGraph graph(cfg.adjacency);
    if (cfg.u_bar_max) {
        syn.u_bar_max = *cfg.u_bar_max;
    } else {
        const Classification cls = classify_nodes(cfg.system, cfg.nodes, tol);
        std::vector<const NodeSpec*> n2;
        for (const NodeSpec& node : cfg.nodes) {
            if (std::find(cls.n2.begin(), cls.n2.end(), node.id) != cls.n2.end()) n2.push_back(&node);
        }
        syn.u_bar_max = amplitude_bound(cfg.signals, n2);
    }
    DistributedOptions opts;
    opts.spectral = cfg.spectral;
    opts.safety = cfg.safety;
    opts.u_bar_max = syn.u_bar_max;
    syn.network = synthesize_distributed(cfg.system, cfg.nodes, graph, opts, tol);
    return syn;
}

std::vector<CheckResult> synthesis_checks(const Synthesis& syn) {
    const ProjectConfig& cfg = syn.cfg;
    if (syn.central) return centralized_checks(cfg.system, cfg.partition, *syn.central, cfg.spectral);

    std::vector<CheckResult> out;
    const DistributedObserverNetwork& net = *syn.network;
    for (const SensorNode& node : net.nodes) {
        const auto c = node_checks(cfg.system, node, cfg.spectral);
        out.insert(out.end(), c.begin(), c.end());
    }
    const JointDetectability jd = joint_detectability_check(cfg.system, net.nodes, net.graph, syn.tol);
    out.push_back({"graph connected (algebraic connectivity)", net.graph.connected(),
                   net.graph.algebraic_connectivity(), 1e-9});
    out.push_back({"joint detectability sigma_min(Q) > 1e-9", jd.ok, jd.sigma_min_Q, 1e-9});
    out.push_back({"common blind subspace is zero", jd.intersection_trivial, jd.intersection_trivial ? 0.0 : 1.0, 0.0});
    out.push_back({"chi > chi_min", net.chi > net.chi_min, net.chi - net.chi_min, 0.0});
    const bool gamma_ok = net.gamma_min > 0.0 ? net.gamma > net.gamma_min : net.gamma >= 0.0;
    out.push_back({"gamma above gamma_min", gamma_ok, net.gamma - net.gamma_min, 0.0});
    return out;
}

Trajectory simulate(const Synthesis& syn) {
    const ProjectConfig& cfg = syn.cfg;
    if (syn.central) return simulate_centralized(cfg.system, cfg.partition, *syn.central, cfg.signals, cfg.sim);
    return simulate_distributed(cfg.system, *syn.network, cfg.signals, cfg.sim);
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    const Index n = traj.x.empty() ? 0 : traj.x.front().size();
    out << "t";
    for (Index i = 1; i <= n; ++i) out << ",x_" << i;
    for (int id : traj.observer_ids) {
        for (Index i = 1; i <= n; ++i) out << ",node" << id << "_xhat_" << i;
    }
    for (int id : traj.observer_ids) out << ",node" << id << "_err";
    out << '\n';
    for (Index k = 0; k < traj.samples(); ++k) {
        const auto kk = static_cast<std::size_t>(k);
        out << fmt17(traj.times[kk]);
        for (Index i = 0; i < n; ++i) out << ',' << fmt17(traj.x[kk](i));
        for (std::size_t o = 0; o < traj.observer_ids.size(); ++o) {
            for (Index i = 0; i < n; ++i) out << ',' << fmt17(traj.xhat[o][kk](i));
        }
        for (std::size_t o = 0; o < traj.observer_ids.size(); ++o) out << ',' << fmt17(traj.err_norm[o][kk]);
        out << '\n';
    }
}

std::vector<std::string> write_error_series(const Trajectory& traj, const std::string& out_dir) {
    std::vector<std::string> paths;
    for (std::size_t o = 0; o < traj.observer_ids.size(); ++o) {
        const std::string path =
            (fs::path(out_dir) / ("err_node" + std::to_string(traj.observer_ids[o]) + ".dat")).string();
        std::ofstream out(path);
        if (!out) throw ConfigError("cannot write '" + path + "'");
        out << "# t err\n";
        for (std::size_t k = 0; k < traj.times.size(); ++k) {
            out << fmt17(traj.times[k]) << ' ' << fmt17(traj.err_norm[o][k]) << '\n';
        }
        paths.push_back(path);
    }
    return paths;
}

int cmd_synth(const ProjectConfig& cfg, const std::string& out_dir, CommandIO io) {
    return guarded(io, [&] {
        ensure_dir(out_dir);
        const Synthesis syn = synthesize(cfg, TolerancePolicy::from_env());
        const json report = report_json(syn);
        write_json(report, (fs::path(out_dir) / "report.json").string());
        if (syn.central) {
            io.out << "centralized observer: z_dim = " << syn.central->z_dim << ", W_g* ∩ Ker C = 0: pass\n";
        } else {
            const auto& net = *syn.network;
            io.out << "N1 = " << json(ids_of(net.nodes, NodeClass::N1)).dump()
                   << ", N2 = " << json(ids_of(net.nodes, NodeClass::N2)).dump() << '\n'
                   << "chi = " << net.chi << " (min " << net.chi_min << "), gamma = " << net.gamma << " (min "
                   << net.gamma_min << ")\n";
        }
        io.out << "report written to " << (fs::path(out_dir) / "report.json").string() << '\n';
        return exit_code::ok;
    });
}

int cmd_simulate(const ProjectConfig& cfg, const std::string& out_dir, CommandIO io) {
    return guarded(io, [&] {
        ensure_dir(out_dir);
        const Synthesis syn = synthesize(cfg, TolerancePolicy::from_env());
        json report;
        const int rc = synth_and_simulate(syn, out_dir, io, report);
        write_json(report, (fs::path(out_dir) / "report.json").string());
        return rc;
    });
}

int cmd_verify(const ProjectConfig& cfg, const std::string& out_dir, CommandIO io) {
    return guarded(io, [&] {
        ensure_dir(out_dir);
        const Synthesis syn = synthesize(cfg, TolerancePolicy::from_env());
        const std::vector<CheckResult> checks = synthesis_checks(syn);
        print_checks(checks, io.out);
        json report = {{"mode", "config"}, {"config_name", cfg.name}, {"checks", checks_json(checks)}};
        write_json(report, (fs::path(out_dir) / "verify.json").string());
        const bool ok = all_pass(checks);
        io.out << (ok ? "all checks passed" : "some checks FAILED") << '\n';
        return ok ? exit_code::ok : exit_code::verification;
    });
}

int cmd_verify_random(long long trials, std::uint64_t seed, const std::string& out_dir, CommandIO io) {
    if (trials <= 0) {
        io.err << "config error: the trial count must be a positive integer\n";
        return exit_code::config;
    }
    return guarded(io, [&] {
        ensure_dir(out_dir);
        const TolerancePolicy tol = TolerancePolicy::from_env();
        const BatteryResult r = equivalence_battery(static_cast<Index>(trials), seed, SpectralPartition{}, tol);
        const bool ok = r.pass();
        io.out << "equivalence battery: seed " << r.seed << ", " << r.trials << " draws\n"
               << "  scored " << r.scored << ", agreements " << r.agreements << "/" << r.scored << '\n'
               << "  marginal (excluded) " << r.marginal << ", pipeline errors " << r.errors << '\n'
               << "  geometric condition true on " << r.geometric_true << ", rank condition false on " << r.rank_false
               << '\n';
        for (Index k : r.disagreements) io.out << "  disagreement at draw " << k << '\n';
        io.out << (ok ? "PASS" : "FAIL") << '\n';
        json report = {{"mode", "random"},
                       {"seed", r.seed},
                       {"trials", r.trials},
                       {"scored", r.scored},
                       {"agreements", r.agreements},
                       {"marginal", r.marginal},
                       {"errors", r.errors},
                       {"geometric_true", r.geometric_true},
                       {"rank_false", r.rank_false},
                       {"disagreements", r.disagreements},
                       {"pass", ok}};
        write_json(report, (fs::path(out_dir) / "verify.json").string());
        return ok ? exit_code::ok : exit_code::verification;
    });
}

int cmd_reproduce(const std::string& which, const std::string& out_dir, CommandIO io) {
    const std::optional<ProjectConfig> cfg = builtin_example(which);
    if (!cfg) {
        io.err << "unknown example '" << which << "'\nusage: geo-uio reproduce centralized|distributed [--out DIR]\n";
        return exit_code::config;
    }
    return guarded(io, [&] {
        ensure_dir(out_dir);
        {
            std::ofstream out((fs::path(out_dir) / "config.json").string());
            out << serialize_config(*cfg) << '\n';
        }
        const Synthesis syn = synthesize(*cfg, TolerancePolicy::from_env());
        json report;
        try {
            synth_and_simulate(syn, out_dir, io, report);
        } catch (const NonFiniteState& e) {
            report["simulation_error"] = e.what();
            write_json(report, (fs::path(out_dir) / "report.json").string());
            throw;
        }
        const std::vector<CheckResult> checks = synthesis_checks(syn);
        print_checks(checks, io.out);
        write_json(report, (fs::path(out_dir) / "report.json").string());
        return all_pass(checks) ? exit_code::ok : exit_code::verification;
    });
}

int run_with_config(const std::string& command, const std::string& config_path, const std::string& out_dir,
                    CommandIO io) {
    ProjectConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const Error& e) {
        io.err << "config error: " << e.what() << '\n';
        return exit_code::config;
    }
    if (command == "synth") return cmd_synth(cfg, out_dir, io);
    if (command == "simulate") return cmd_simulate(cfg, out_dir, io);
    if (command == "verify") return cmd_verify(cfg, out_dir, io);
    io.err << "unknown command '" << command << "'\n";
    return exit_code::config;
}

}  // namespace geouio
