#pragma once

#include <span>
#include <string>
#include <vector>

#include "moco/problems/instance.hpp"

namespace moco::decomp {

enum class Scalarization { weighted_sum, tchebycheff, pbi };

std::string scalarization_name(Scalarization s);
Scalarization parse_scalarization(const std::string& s);

// All scalarizations assume minimization; maximization objectives are negated
// at this boundary (to_min_orientation) so downstream code is uniform.
struct ScalarizationConfig {
    Scalarization kind = Scalarization::weighted_sum;
    std::vector<double> ideal;  // z*, minimization orientation
    double pbi_alpha = 5.0;
};

double scalarize(const ScalarizationConfig& cfg, std::span<const double> f,
                 std::span<const double> lambda);

inline double reward(const ScalarizationConfig& cfg, std::span<const double> f,
                     std::span<const double> lambda) {
    return -scalarize(cfg, f, lambda);
}

std::vector<double> to_min_orientation(problems::Problem p, std::vector<double> f);

// Ideal point z* in minimization orientation, from the standard reference
// table, nearest listed size.
std::vector<double> default_ideal(problems::Problem p, int n, int kappa);

}  // namespace moco::decomp
