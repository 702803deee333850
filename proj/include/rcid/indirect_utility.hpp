#ifndef RCID_INDIRECT_UTILITY_HPP_
#define RCID_INDIRECT_UTILITY_HPP_

#include <span>

#include "rcid/indexing.hpp"
#include "rcid/model.hpp"
#include "rcid/tables.hpp"

namespace rcid {

// Closed-form integrated indirect utility V(u) for the built-in models.
//
// With smoothing s > 0 each scenario contributes s * log sum_y exp((y.u + D(y))/s)
// over its non-excluded bundles (the logit case is s = 1 on the unit-vector
// budget); with s = 0 it contributes max_y (y.u + D(y)). Scenarios are
// weighted by their probabilities.
double closed_form_v(const ModelSpec& model, std::span<const double> u);

// Partial derivative d_gamma V(u) for a good multi-index gamma (1-based,
// any order >= 1). For s > 0 this is s^(1-n) times the joint cumulant of
// the chosen bundle under the Gibbs weights, summed over scenarios. With
// s = 0 only the gradient (n = 1) exists.
double closed_form_v_derivative(const ModelSpec& model, std::span<const double> u,
                                const GoodTuple& gamma);

// Every sorted derivative of V at u = 0 with 1 <= order <= max_order.
VDerivTable analytic_v_derivatives(const ModelSpec& model, int max_order);

} // namespace rcid

#endif // RCID_INDIRECT_UTILITY_HPP_
