#pragma once

// Conditioned-invariant geometry for a triple (C, A, Im Bbar): the infimal
// (C,A)-invariant subspace W*, the infimal unobservability subspace S*, the
// good/bad split of the invariant-zero quotient S*/W*, and W_g*, the smallest
// (C,A)-invariant subspace containing Im Bbar whose quotient spectrum can be
// placed in the good region.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "geouio/linalg.hpp"
#include "geouio/subspace.hpp"

namespace geouio {

/// Good region: Re(lambda) < alpha.  Ties on the boundary count as bad, where a tie is
/// |Re(lambda) - alpha| <= tie_tol * max(1, |lambda|) (computed eigenvalues of exact
/// boundary modes land a few ulps either side).
struct SpectralPartition {
    double alpha = 0.0;
    /// Pole targets used on quotients: alpha - 1, alpha - 1.5, ... unless `pole_targets` is set.
    double margin = 0.5;
    std::vector<double> pole_targets;
    double tie_tol = 1e-8;

    bool is_good(Complex lambda) const {
        return lambda.real() < alpha - tie_tol * std::max(1.0, std::abs(lambda));
    }
    bool is_bad(Complex lambda) const { return !is_good(lambda); }

    /// First `count` pole targets.
    std::vector<double> targets(Index count) const;

    /// Throws ConfigError on non-finite alpha/margin or targets outside Re < alpha - margin.
    void validate() const;
};

struct GeometricDecomposition {
    Subspace W_star;
    Subspace S_star;
    /// Common friend of W* and S*; induces the invariant-zero map on S*/W*.
    LinMap L0;
    /// Good and bad invariant subspaces of S*/W*, as subspaces of the X/W* chart (R^{n - dim W*}).
    Subspace Xbar_g;
    Subspace Xbar_b;
    Subspace W_g_star;
    /// Ambient orthonormal basis of W_g* ∩ (W*)^perp (n x dim Xbar_b).
    Matrix V;
    LinMap P_Wstar;
    LinMap P_Wg;
    /// Spectrum of the map induced on S*/W* (invariant zeros), sorted.
    Eigen::VectorXcd invariant_zeros;
};

/// W_{k+1} = Bbar + A (W_k ∩ Ker C), W_0 = Bbar.  Returns every iterate, the last being W*.
std::vector<Subspace> conditioned_invariant_iterates(const LinMap& a, const LinMap& c, const Subspace& bbar,
                                                     const TolerancePolicy& tol = {});
Subspace infimal_conditioned_invariant(const LinMap& a, const LinMap& c, const Subspace& bbar,
                                       const TolerancePolicy& tol = {});

/// S_{k+1} = W* + (A^{-1} S_k ∩ Ker C), S_0 = R^n.  Returns every iterate, the last being S*.
std::vector<Subspace> unobservability_iterates(const LinMap& a, const LinMap& c, const Subspace& w_star,
                                               const TolerancePolicy& tol = {});
Subspace infimal_unobservability_subspace(const LinMap& a, const LinMap& c, const Subspace& w_star,
                                          const TolerancePolicy& tol = {});

/// Residual of A (W ∩ Ker C) ⊆ W; zero iff W is (C,A)-invariant.
double conditioned_invariance_residual(const LinMap& a, const LinMap& c, const Subspace& w,
                                       const TolerancePolicy& tol = {});

/// Minimum-Frobenius-norm L with (A + L C) W ⊆ W.  Throws NotConditionedInvariant.
LinMap friend_gain(const LinMap& a, const LinMap& c, const Subspace& w, const TolerancePolicy& tol = {});

/// Minimum-norm L making every subspace in `spaces` (A + L C)-invariant at once.
LinMap common_friend(const LinMap& a, const LinMap& c, std::span<const Subspace> spaces,
                     const TolerancePolicy& tol = {});

/// Splits S*/W* into (good, bad) invariant subspaces of the map induced by A + L0 C.
std::pair<Subspace, Subspace> spectral_split(const LinMap& a, const LinMap& c, const Subspace& w_star,
                                             const Subspace& s_star, const LinMap& l0,
                                             const SpectralPartition& part, const TolerancePolicy& tol = {});

/// W_g* = P_{W*}^{-1} Xbar_b.
Subspace compute_Wg_star(const Subspace& w_star, const Subspace& xbar_b, const LinMap& p_wstar,
                         const TolerancePolicy& tol = {});

struct StabilizingFriend {
    LinMap L;
    /// Matrix of (A + L C) | X/W_g* in the chart canonical_projection(W_g*).
    LinMap Abar;
};

/// Output injection L that keeps W_g* invariant and places the quotient spectrum in
/// the good region.  When `base` is given it must already be a friend of W_g*; the
/// correction added to it annihilates C W_g*, so every subspace `base` keeps
/// invariant inside W_g* stays invariant.  Throws SpectrumUnassignable.
StabilizingFriend stabilizing_friend(const LinMap& a, const LinMap& c, const Subspace& w_g_star,
                                     const SpectralPartition& part, const TolerancePolicy& tol = {},
                                     const std::optional<LinMap>& base = std::nullopt);

/// Full pipeline for one (C, A, Bbar): W*, S*, common friend, split, W_g*, V, charts.
GeometricDecomposition decompose(const LinMap& a, const LinMap& c, const LinMap& bbar,
                                 const SpectralPartition& part, const TolerancePolicy& tol = {});

}  // namespace geouio
