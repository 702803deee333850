#include "rcid/tables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rcid/errors.hpp"

namespace rcid {

void MomentTable::set(const MomentIndex& idx, double value, std::string route) {
    if (!std::isfinite(value))
        throw EvaluationError("non-finite moment for " + idx.to_string());
    if (order_ != 0 && static_cast<int>(idx.order()) != order_)
        throw PreconditionError("moment " + idx.to_string() + " does not match table order " +
                                std::to_string(order_));
    entries_[idx] = {value, std::move(route)};
}

double MomentTable::at(const MomentIndex& idx) const {
    auto it = entries_.find(idx);
    if (it == entries_.end())
        throw PreconditionError("moment " + idx.to_string() + " is not in the table");
    return it->second.value;
}

void VDerivTable::set(GoodTuple key, double value, double discrepancy, int candidates) {
    std::sort(key.begin(), key.end());
    if (!std::isfinite(value))
        throw EvaluationError("non-finite V derivative for " + v_key_string(key));
    entries_[std::move(key)] = {value, discrepancy, candidates};
}

bool VDerivTable::contains(GoodTuple key) const {
    std::sort(key.begin(), key.end());
    return entries_.count(key) > 0;
}

double VDerivTable::at(GoodTuple key) const {
    std::sort(key.begin(), key.end());
    auto it = entries_.find(key);
    if (it == entries_.end())
        throw PreconditionError("V derivative " + v_key_string(key) + " is not in the table");
    return it->second.value;
}

int VDerivTable::max_order() const {
    std::size_t m = 0;
    for (const auto& [k, v] : entries_)
        m = std::max(m, k.size());
    return static_cast<int>(m);
}

void VDerivTable::merge(const VDerivTable& other) {
    for (const auto& [k, v] : other.entries_)
        entries_[k] = v;
}

double VDerivTable::min_diagonal() const {
    double out = std::numeric_limits<double>::infinity();
    for (const auto& [k, v] : entries_)
        if (k.size() == 2 && k[0] == k[1])
            out = std::min(out, v.value);
    return out;
}

std::string v_key_string(const GoodTuple& key) {
    std::string out = "V[";
    for (std::size_t i = 0; i < key.size(); ++i) {
        if (i)
            out += ' ';
        out += std::to_string(key[i]);
    }
    return out + ']';
}

} // namespace rcid
