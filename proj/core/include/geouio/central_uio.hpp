#pragma once

#include <vector>

#include "geouio/geometric.hpp"

namespace geouio {

/// Plant x' = A x + B u, y = C x.
struct LinSystem {
    Matrix A;
    Matrix B;
    Matrix C;

    Index n() const { return A.rows(); }
    Index m() const { return B.cols(); }
    Index p() const { return C.rows(); }

    /// Throws DimensionMismatch / ConfigError on inconsistent sizes or non-finite entries.
    void validate() const;
};

/// Column split of B into known and unknown input channels.
struct InputPartition {
    std::vector<Index> known_cols;
    std::vector<Index> unknown_cols;

    /// Requires the two lists to partition 0..m-1 exactly.
    void validate(Index m) const;

    Matrix known(const Matrix& b) const;
    Matrix unknown(const Matrix& b) const;
    Vector known(const Vector& u) const;
    Vector unknown(const Vector& u) const;
};

/// z' = Abar_L z + P_Wg B_known u_known - P_Wg L y,   xhat = E z + F y.
struct CentralizedObserver {
    Matrix Abar_L;
    Matrix P_Wg;
    Matrix L;
    Matrix E;
    Matrix F;
    Matrix B_known;
    Index z_dim = 0;
    GeometricDecomposition decomp;
};

/// True iff W_g* ∩ Ker C = 0.
bool check_uio_condition(const GeometricDecomposition& decomp, const LinMap& c, const TolerancePolicy& tol = {});

struct ClassicalConditions {
    bool rank_condition = false;  // rank(C Bbar) = rank(Bbar)
    bool detectable = false;      // (C, A1) detectable, A1 = (I - Bbar (C Bbar)^+ C) A
};

ClassicalConditions classical_rank_condition(const LinSystem& sys, const InputPartition& part,
                                             const SpectralPartition& spectral = {},
                                             const TolerancePolicy& tol = {});

/// PBH detectability of (c, a) for eigenvalues with Re >= alpha.
bool is_detectable(const Matrix& a, const Matrix& c, double alpha, const TolerancePolicy& tol = {});

struct OutputReconstruction {
    Matrix E;
    Matrix F;
};

/// Minimum-norm [E F] with E P + F C = I.  Throws NotSolvable when [P; C] is column-rank deficient.
OutputReconstruction solve_output_reconstruction(const Matrix& p, const Matrix& c, const TolerancePolicy& tol = {});

/// Runs the whole centralized pipeline.  Throws ExistenceFailed.
CentralizedObserver synthesize_centralized_uio(const LinSystem& sys, const InputPartition& part,
                                               const SpectralPartition& spectral = {},
                                               const TolerancePolicy& tol = {});

Vector observer_rhs(const CentralizedObserver& obs, const Vector& z, const Vector& y, const Vector& u_known);
Vector estimate(const CentralizedObserver& obs, const Vector& z, const Vector& y);

/// Residuals of the synthesized observer's defining identities.
struct CentralResiduals {
    double reconstruction = 0.0;    // ||E P + F C - I||_F
    double input_decoupling = 0.0;  // ||P_Wg Bbar||_F
    double commutation = 0.0;       // ||Abar P - P (A + L C)||_F
    double friend_invariance = 0.0; // ||P_Wg (A + L C) basis(W_g*)||_F
    double spectral_abscissa = 0.0; // max Re spec(Abar)
};
CentralResiduals centralized_residuals(const CentralizedObserver& obs, const LinSystem& sys,
                                       const InputPartition& part);

}  // namespace geouio
