#include "rcid/indexing.hpp"

#include <algorithm>
#include <map>

#include "rcid/errors.hpp"

namespace rcid {

namespace {

// Sorted multisets of `size` values from [lo, hi], appended to `out`.
void multisets(int lo, int hi, int size, std::vector<int>& prefix,
               std::vector<std::vector<int>>& out) {
    if (size == 0) {
        out.push_back(prefix);
        return;
    }
    for (int v = lo; v <= hi; ++v) {
        prefix.push_back(v);
        multisets(v, hi, size - 1, prefix, out);
        prefix.pop_back();
    }
}

} // namespace

std::vector<GoodTuple> good_multisets(int goods, int size) {
    if (goods < 1 || size < 0)
        throw PreconditionError("good_multisets: invalid arguments");
    std::vector<GoodTuple> out;
    std::vector<int> prefix;
    multisets(1, goods, size, prefix, out);
    return out;
}

std::vector<MomentIndex> moment_indices_for(const std::vector<int>& dims, const GoodTuple& goods) {
    std::map<int, int> count;
    for (int g : goods) {
        if (g < 1 || g > static_cast<int>(dims.size()))
            throw PreconditionError("good index out of range");
        ++count[g];
    }
    // Per good, all multisets of characteristics; then the cartesian product.
    std::vector<std::vector<CharSlot>> partial{{}};
    for (const auto& [g, c] : count) {
        std::vector<std::vector<int>> chars;
        std::vector<int> prefix;
        multisets(1, dims[g - 1], c, prefix, chars);
        std::vector<std::vector<CharSlot>> next;
        for (const auto& head : partial) {
            for (const auto& cs : chars) {
                auto slots = head;
                for (int ch : cs)
                    slots.push_back({g, ch});
                next.push_back(std::move(slots));
            }
        }
        partial = std::move(next);
    }
    std::vector<MomentIndex> out;
    out.reserve(partial.size());
    for (auto& slots : partial)
        out.emplace_back(std::move(slots));
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<MomentIndex> moment_indices(const std::vector<int>& dims, int order) {
    std::vector<MomentIndex> out;
    for (const auto& g : good_multisets(static_cast<int>(dims.size()), order)) {
        auto part = moment_indices_for(dims, g);
        out.insert(out.end(), part.begin(), part.end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string to_string(const GoodTuple& goods) {
    std::string out = "(";
    for (std::size_t i = 0; i < goods.size(); ++i) {
        if (i)
            out += ' ';
        out += std::to_string(goods[i]);
    }
    return out + ')';
}

} // namespace rcid
