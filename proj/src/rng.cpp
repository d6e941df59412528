#include "longnbt/rng.hpp"

#include <algorithm>
#include <unordered_set>

namespace longnbt {

std::vector<index_t> CounterRng::sample_without_replacement(index_t population, index_t k) {
    if (k > population) throw invalid_input("sample_without_replacement: k > population");
    std::vector<index_t> out;
    out.reserve(std::size_t(k));
    if (k == 0) return out;
    if (3 * k >= population) {
        // dense case: partial Fisher-Yates over an explicit index array
        std::vector<index_t> idx(static_cast<std::size_t>(population));
        for (index_t i = 0; i < population; ++i) idx[std::size_t(i)] = i;
        for (index_t i = 0; i < k; ++i) {
            index_t j = i + index_t(uniform_below(std::uint64_t(population - i)));
            std::swap(idx[std::size_t(i)], idx[std::size_t(j)]);
            out.push_back(idx[std::size_t(i)]);
        }
    } else {
        // sparse case: Floyd's algorithm
        std::unordered_set<index_t> chosen;
        chosen.reserve(std::size_t(2 * k));
        for (index_t j = population - k; j < population; ++j) {
            index_t t = index_t(uniform_below(std::uint64_t(j + 1)));
            index_t pick = chosen.insert(t).second ? t : j;
            if (pick == j) chosen.insert(j);
            out.push_back(pick);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace longnbt
