#ifndef RCID_ERRORS_HPP_
#define RCID_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace rcid {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed model, distribution, scheme or scenario configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

// An operation was called outside its domain (wrong model variant,
// permutation condition violated, missing table entry, ...).
class PreconditionError : public Error {
public:
    using Error::Error;
};

// A denominator derivative or moment fell below the relevance threshold.
class RelevanceError : public Error {
public:
    RelevanceError(const std::string& what, int order = 0)
        : Error(what), order_(order) {}
    int order() const { return order_; }

private:
    int order_;
};

// The inductive anchor of the independence route vanished at some order.
class AnchorError : public RelevanceError {
public:
    using RelevanceError::RelevanceError;
};

// Every bundle was excluded for some scenario: the argmax set is empty.
class InfeasibleScenarioError : public Error {
public:
    using Error::Error;
};

// Non-finite ASF value at a stencil node.
class EvaluationError : public Error {
public:
    using Error::Error;
};

class WeightingError : public Error {
public:
    using Error::Error;
};

} // namespace rcid

#endif // RCID_ERRORS_HPP_
