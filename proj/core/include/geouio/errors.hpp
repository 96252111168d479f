#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace geouio {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// A subspace expected to be invariant under a map is not (beyond tolerance).
class InvarianceViolated : public Error {
public:
    InvarianceViolated(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// No output injection L renders the subspace invariant.
class NotConditionedInvariant : public Error {
public:
    NotConditionedInvariant(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Pole placement on a quotient could not move the spectrum into the good region.
class SpectrumUnassignable : public Error {
public:
    SpectrumUnassignable(const std::string& what, Eigen::VectorXcd offending)
        : Error(what), offending_(std::move(offending)) {}
    const Eigen::VectorXcd& offending() const noexcept { return offending_; }

private:
    Eigen::VectorXcd offending_;
};

class NotSolvable : public Error {
public:
    using Error::Error;
};

/// Which existence requirement a centralized synthesis failed.
enum class ExistenceCondition {
    KernelIntersection,  // W_g* ∩ Ker C != 0
    SpectrumAssignment,  // quotient spectrum could not be placed
};

class ExistenceFailed : public Error {
public:
    ExistenceFailed(const std::string& what, ExistenceCondition cond, Eigen::MatrixXd witness,
                    Eigen::VectorXcd eigenvalues = {})
        : Error(what), cond_(cond), witness_(std::move(witness)), eigenvalues_(std::move(eigenvalues)) {}

    ExistenceCondition condition() const noexcept { return cond_; }
    /// Basis of the offending intersection (KernelIntersection only).
    const Eigen::MatrixXd& witness() const noexcept { return witness_; }
    /// Eigenvalues that could not be moved (SpectrumAssignment only).
    const Eigen::VectorXcd& eigenvalues() const noexcept { return eigenvalues_; }

private:
    ExistenceCondition cond_;
    Eigen::MatrixXd witness_;
    Eigen::VectorXcd eigenvalues_;
};

class AssumptionViolated : public Error {
public:
    AssumptionViolated(const std::string& what, int assumption) : Error(what), assumption_(assumption) {}
    /// 1: graph connectivity, 2: bounded unknown inputs, 3: joint detectability.
    int assumption() const noexcept { return assumption_; }

private:
    int assumption_;
};

class SingularQ : public Error {
public:
    SingularQ(const std::string& what, double sigma_min) : Error(what), sigma_min_(sigma_min) {}
    double sigma_min() const noexcept { return sigma_min_; }

private:
    double sigma_min_;
};

class NonFiniteState : public Error {
public:
    NonFiniteState(const std::string& what, double time) : Error(what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace geouio
