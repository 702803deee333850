#ifndef RCID_TABLES_HPP_
#define RCID_TABLES_HPP_

#include <map>
#include <string>

#include "rcid/indexing.hpp"
#include "rcid/model.hpp"

namespace rcid {

struct MomentEntry {
    double value = 0.0;
    std::string route; // which recovery route produced the value
};

/// Recovered moments of one order.
class MomentTable {
public:
    MomentTable() = default;
    explicit MomentTable(int order) : order_(order) {}

    int order() const { return order_; }
    void set(const MomentIndex& idx, double value, std::string route);
    bool contains(const MomentIndex& idx) const { return entries_.count(idx) > 0; }
    double at(const MomentIndex& idx) const;
    const std::map<MomentIndex, MomentEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

private:
    int order_ = 0;
    std::map<MomentIndex, MomentEntry> entries_;
};

struct VDerivEntry {
    double value = 0.0;
    // Spread (max - min) across the (k, gamma) factorizations averaged into
    // `value`; 0 when only one factorization was available.
    double discrepancy = 0.0;
    int candidates = 1;
};

/// Partial derivatives of V at the centering point, keyed by sorted good
/// multi-index. Keys of different lengths may coexist.
class VDerivTable {
public:
    void set(GoodTuple key, double value, double discrepancy = 0.0, int candidates = 1);
    bool contains(GoodTuple key) const;
    double at(GoodTuple key) const;
    const std::map<GoodTuple, VDerivEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    int max_order() const;

    /// Adds every entry of `other`, overwriting existing keys.
    void merge(const VDerivTable& other);

    /// Smallest own second derivative d_kk V; convexity requires >= 0.
    double min_diagonal() const;

private:
    std::map<GoodTuple, VDerivEntry> entries_;
};

std::string v_key_string(const GoodTuple& key);

} // namespace rcid

#endif // RCID_TABLES_HPP_
