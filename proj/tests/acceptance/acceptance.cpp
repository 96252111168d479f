// Acceptance run: one PASS/FAIL line per criterion.
//   acceptance            run all criteria, exit 1 if any fails
//   acceptance N          run criterion N only

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "geouio/builtin_examples.hpp"
#include "geouio/commands.hpp"
#include "geouio/errors.hpp"
#include "geouio/linalg.hpp"
#include "geouio/verification.hpp"
#include "oracles.hpp"

using namespace geouio;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double sup_after(const std::vector<double>& times, const std::vector<double>& err, double t0) {
    double s = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k)
        if (times[k] >= t0 - 1e-9) s = std::max(s, err[k]);
    return s;
}

Outcome centralized_reproduction() {
    const auto t0 = Clock::now();
    const ProjectConfig cfg = builtin_centralized();
    const Synthesis syn = synthesize(cfg, TolerancePolicy{});
    const Trajectory traj = simulate(syn);
    const double runtime = seconds_since(t0);
    const double sup15 = sup_after(traj.times, traj.err_norm[0], 15.0);

    std::vector<SignalSpec> other = cfg.signals;
    other[1] = {SignalKind::Cos, 5.0, 3.0, 0.0};
    const Trajectory alt = simulate_centralized(cfg.system, cfg.partition, *syn.central, other, cfg.sim);
    double decoupling = 0.0;
    for (std::size_t k = 0; k < traj.err_norm[0].size(); ++k)
        decoupling = std::max(decoupling, std::abs(traj.err_norm[0][k] - alt.err_norm[0][k]));

    double t_last_ok = 0.0;  // last time up to which the error has stayed below 1e-2 since t = 10
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        if (traj.times[k] < 10.0) continue;
        if (traj.err_norm[0][k] >= 1e-2) break;
        t_last_ok = traj.times[k];
    }
    Outcome o;
    o.pass = sup15 < 1e-2 && decoupling <= 1e-8 && runtime < 5.0;
    o.detail = "sup err t>=15 " + fmt("%.3g", sup15) + " (<1e-2), decoupling " + fmt("%.3g", decoupling) +
               " (<=1e-8), runtime " + fmt("%.2fs", runtime) + "; err < 1e-2 until t=" + fmt("%.2f", t_last_ok) +
               ", |x(20)| = " + fmt("%.2g", traj.x.back().norm());
    return o;
}

Outcome distributed_reproduction() {
    const auto t0 = Clock::now();
    const ProjectConfig cfg = builtin_distributed();
    const Synthesis syn = synthesize(cfg, TolerancePolicy{});
    const Trajectory traj = simulate(syn);
    const double runtime = seconds_since(t0);
    const auto& net = *syn.network;

    std::vector<int> n1, n2;
    for (const auto& node : net.nodes) (node.cls == NodeClass::N1 ? n1 : n2).push_back(node.id);
    const bool classes = n1 == std::vector<int>{1, 3} && n2 == std::vector<int>{2, 4};
    const bool gains = std::abs(net.chi - 1.1 * net.chi_min) <= 1e-12 * net.chi &&
                       std::abs(net.gamma - 1.1 * net.gamma_min) <= 1e-12 * (1 + net.gamma) &&
                       net.u_bar_max == 0.2 && cfg.sim.sign_mode == SignMode::BoundaryLayer &&
                       cfg.sim.eps_bl == 1e-3 && cfg.sim.dt == 1e-3 && cfg.sim.t_end == 40.0;
    double s30 = 0.0, s15 = 0.0;
    for (const auto& err : traj.err_norm) {
        s30 = std::max(s30, sup_after(traj.times, err, 30.0));
        s15 = std::max(s15, sup_after(traj.times, err, 15.0));
    }
    Outcome o;
    o.pass = classes && gains && s30 < 5e-2 && s15 < 2e-1 && runtime < 30.0;
    o.detail = std::string("N1={1,3} N2={2,4} ") + (classes ? "ok" : "WRONG") + ", gains 1.1x bounds " +
               (gains ? "ok" : "WRONG") + " (chi " + fmt("%.4g", net.chi) + ", gamma " + fmt("%.4g", net.gamma) +
               "), sup err t>=30 " + fmt("%.3g", s30) + " (<5e-2), t>=15 " + fmt("%.3g", s15) + " (<2e-1), runtime " +
               fmt("%.2fs", runtime);
    return o;
}

Outcome equivalence() {
    const BatteryResult r = equivalence_battery(500, 42);
    Outcome o;
    o.pass = r.pass() && r.agreements == r.scored;
    o.detail = "seed 42: " + std::to_string(r.agreements) + "/" + std::to_string(r.scored) + " agree, " +
               std::to_string(r.marginal) + " marginal (<25), " + std::to_string(r.errors) + " errors";
    return o;
}

Outcome invariant_suite() {
    Index syntheses = 0, failures = 0;
    std::string first_failure;
    auto tally = [&](const std::vector<CheckResult>& checks, const std::string& who) {
        ++syntheses;
        for (const auto& c : checks) {
            if (c.pass) continue;
            ++failures;
            if (first_failure.empty()) first_failure = who + ": " + c.name + " = " + fmt("%.3g", c.worst);
        }
    };
    const ProjectConfig central = builtin_centralized();
    const Synthesis cs = synthesize(central, TolerancePolicy{});
    tally(synthesis_checks(cs), "centralized example");
    const Synthesis ds = synthesize(builtin_distributed(), TolerancePolicy{});
    for (const auto& node : ds.network->nodes)
        tally(node_checks(ds.cfg.system, node, ds.cfg.spectral), "node " + std::to_string(node.id));

    std::mt19937_64 rng(2024);
    Index random_ok = 0;
    for (int k = 0; k < 300; ++k) {
        const RandomDraw d = random_system(rng);
        try {
            const CentralizedObserver obs = synthesize_centralized_uio(d.sys, d.part);
            tally(centralized_checks(d.sys, d.part, obs, SpectralPartition{}), "random draw " + std::to_string(k));
            ++random_ok;
        } catch (const Error&) {
        }
    }
    Outcome o;
    o.pass = failures == 0;
    o.detail = std::to_string(syntheses) + " syntheses (" + std::to_string(random_ok) + " random), " +
               std::to_string(failures) + " failed checks" + (first_failure.empty() ? "" : "; first: " + first_failure);
    return o;
}

Outcome subspace_oracles() {
    std::mt19937_64 rng(5150);
    std::mt19937_64 oracle_rng(99);
    int w_fail = 0, s_fail = 0;
    for (int k = 0; k < 200; ++k) {
        const Index n = 1 + static_cast<Index>(rng() % 5);
        const Index p = 1 + static_cast<Index>(rng() % std::min<Index>(3, n));
        const Index m = 1 + static_cast<Index>(rng() % std::min<Index>(2, n));
        const Matrix a = oracle::random_matrix(rng, n, n);
        const Matrix c = oracle::random_matrix(rng, p, n);
        Matrix bbar = oracle::random_matrix(rng, n, m);
        const Matrix ker = oracle::lu_kernel(c);
        if (k % 3 == 0 && ker.cols() > 0) bbar.col(0) = ker.col(0);
        const Subspace w = infimal_conditioned_invariant(a, c, image(bbar));
        if (!oracle::infimal_conditioned_invariant_ok(a, c, bbar, w.basis(), oracle_rng)) ++w_fail;
        const Subspace s = infimal_unobservability_subspace(a, c, w);
        if (!oracle::unobservability_fixed_point_ok(a, c, w.basis(), s.basis(), oracle_rng)) ++s_fail;
    }
    Outcome o;
    o.pass = w_fail == 0 && s_fail == 0;
    o.detail = "200 draws n<=5: W* oracle failures " + std::to_string(w_fail) + ", S* oracle failures " +
               std::to_string(s_fail);
    return o;
}

Outcome error_dynamics() {
    const Synthesis cs = synthesize(builtin_centralized(), TolerancePolicy{});
    const Trajectory ct = simulate(cs);
    const QuotientResidual cr = quotient_residual(ct, centralized_quotient_error(ct, *cs.central), cs.central->Abar_L);

    const Synthesis ds = synthesize(builtin_distributed(), TolerancePolicy{});
    const Trajectory dt = simulate(ds);
    double worst = 0.0;
    for (std::size_t i = 0; i < ds.network->nodes.size(); ++i) {
        const SensorNode& node = ds.network->nodes[i];
        const auto q = node_quotient_error(dt, static_cast<Index>(i), node);
        worst = std::max(worst, quotient_residual(dt, q, node.Abarbar_L).worst_abs);
    }
    // Time until which the centralized residual stays inside the bound.
    const auto q = centralized_quotient_error(ct, *cs.central);
    double t_ok = 0.0;
    for (std::size_t k = 1; k + 1 < q.size(); ++k) {
        const Vector dq = (q[k + 1] - q[k - 1]) / (ct.times[k + 1] - ct.times[k - 1]);
        if ((dq - cs.central->Abar_L * q[k]).norm() > 1e-4) break;
        t_ok = ct.times[k];
    }
    Outcome o;
    o.pass = cr.worst_abs <= 1e-4 && worst <= 1e-4;
    o.detail = "centralized worst " + fmt("%.3g", cr.worst_abs) + " at t=" + fmt("%.2f", cr.t_worst) +
               " (within 1e-4 until t=" + fmt("%.2f", t_ok) + ", worst relative to 1+|x| " +
               fmt("%.3g", cr.worst_rel) + "); distributed worst " + fmt("%.3g", worst) + " (<=1e-4)";
    return o;
}

Outcome integrator_order() {
    const ProjectConfig cfg = builtin_centralized();
    const Synthesis syn = synthesize(cfg, TolerancePolicy{});
    auto run = [&](double dt) {
        SimConfig s = cfg.sim;
        s.dt = dt;
        return simulate_centralized(cfg.system, cfg.partition, *syn.central, cfg.signals, s);
    };
    const double h = cfg.sim.dt;
    const Trajectory a = run(h), b = run(h / 2), c = run(h / 4);
    double d1 = 0.0, d2 = 0.0;
    for (std::size_t k = 0; k < a.x.size(); ++k) {
        d1 = std::max(d1, (a.x[k] - b.x[2 * k]).norm());
        d2 = std::max(d2, (b.x[2 * k] - c.x[4 * k]).norm());
    }
    const double ratio = d1 / d2;
    Outcome o;
    o.pass = ratio >= 8.0 && ratio <= 32.0;
    o.detail = "dt " + fmt("%g", h) + " -> dt/2 -> dt/4 over t in [0,20]: max deviations " + fmt("%.3g", d1) +
               ", " + fmt("%.3g", d2) + ", ratio " + fmt("%.2f", ratio) + " (in [8,32])";
    return o;
}

struct Criterion {
    const char* title;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria{
        {"centralized reproduction", centralized_reproduction},
        {"distributed reproduction", distributed_reproduction},
        {"rank/geometric equivalence battery", equivalence},
        {"synthesis invariant suite", invariant_suite},
        {"subspace-algebra oracles", subspace_oracles},
        {"quotient error dynamics", error_dynamics},
        {"rk4 step-halving order", integrator_order},
    };
    int only = 0;
    if (argc > 1) {
        only = std::atoi(argv[1]);
        if (only < 1 || only > static_cast<int>(criteria.size())) {
            std::fprintf(stderr, "usage: acceptance [1-%zu]\n", criteria.size());
            return 2;
        }
    }
    bool all = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (only != 0 && static_cast<int>(i + 1) != only) continue;
        Outcome o;
        try {
            o = criteria[i].run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].title,
                    o.detail.c_str());
        std::fflush(stdout);
        all = all && o.pass;
    }
    return all ? 0 : 1;
}
