#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bsekit {

using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = MatrixX<double>;
using VectorXd = VectorX<double>;

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the documented domain (p <= 1, level out of range, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// A generator or driver broke its measurability / normalization contract.
class ContractError : public Error {
public:
    using Error::Error;
};

/// Tree would exceed the configured leaf budget.
class BudgetError : public Error {
public:
    BudgetError(const std::string& what, std::uint64_t leaves)
        : Error(what), leaves_(leaves) {}
    std::uint64_t leaves() const noexcept { return leaves_; }

private:
    std::uint64_t leaves_;
};

/// Degenerate structure, e.g. a singular Gram matrix on a hand-built space.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// Invalid experiment configuration; `what()` starts with a JSON pointer.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace bsekit
