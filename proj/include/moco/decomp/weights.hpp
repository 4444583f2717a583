#pragma once

#include <string>
#include <vector>

namespace moco::decomp {

// Structured simplex-lattice weights: all vectors with components in
// {0, 1/H, ..., 1} summing to 1, in ascending lexicographic order.
// Count is C(H + kappa - 1, kappa - 1).
std::vector<std::vector<double>> das_dennis(int kappa, int H);

// CSV with kappa columns per row, 17 significant digits, bit-exact round trip.
void write_weights_csv(const std::string& path, const std::vector<std::vector<double>>& weights);
std::vector<std::vector<double>> read_weights_csv(const std::string& path);

}  // namespace moco::decomp
