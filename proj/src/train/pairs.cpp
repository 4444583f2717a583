#include "moco/train/pairs.hpp"

namespace moco::train {

std::vector<PreferencePair> build_pairs(std::span<const double> scalarized) {
    std::vector<PreferencePair> pairs;
    int k = static_cast<int>(scalarized.size());
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) {
            double a = scalarized[static_cast<size_t>(i)];
            double b = scalarized[static_cast<size_t>(j)];
            if (a == b) continue;
            PreferencePair p;
            p.winner = a < b ? i : j;
            p.loser = a < b ? j : i;
            pairs.push_back(p);
        }
    return pairs;
}

}  // namespace moco::train
