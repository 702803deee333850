#ifndef RCID_INDEXING_HPP_
#define RCID_INDEXING_HPP_

#include <string>
#include <vector>

#include "rcid/model.hpp"

namespace rcid {

/// Sorted multiset of 1-based good indices; names dY/dx multi-indices
/// and partial derivatives of V alike.
using GoodTuple = std::vector<int>;

/// All sorted good multisets of the given size over goods 1..K, in
/// lexicographic order.
std::vector<GoodTuple> good_multisets(int goods, int size);

/// Every moment index whose sorted good multiset equals `goods`
/// (all characteristic assignments), in lexicographic order.
std::vector<MomentIndex> moment_indices_for(const std::vector<int>& dims, const GoodTuple& goods);

/// Every moment index of the given order.
std::vector<MomentIndex> moment_indices(const std::vector<int>& dims, int order);

std::string to_string(const GoodTuple& goods);

} // namespace rcid

#endif // RCID_INDEXING_HPP_
