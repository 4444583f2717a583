#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "moco/util/error.hpp"

namespace moco::problems {

enum class Problem { motsp, mocvrp, mokp };

std::string problem_name(Problem p);
Problem parse_problem(const std::string& s);
bool is_maximization(Problem p);

// One problem instance. Features are row-major [n, feat_dim]:
//   motsp:  2*kappa coordinates per city (kappa coordinate pairs)
//   mocvrp: x, y, demand per node; node 0 is the depot (demand 0), demands
//           are scaled by 1/Q so capacity is 1.0
//   mokp:   weight, profit1, profit2 per item
struct Instance {
    Problem problem = Problem::motsp;
    int n = 0;
    int kappa = 2;
    std::vector<double> features;
    double capacity = 0.0;  // mocvrp / mokp only

    int feat_dim() const {
        switch (problem) {
            case Problem::motsp: return 2 * kappa;
            case Problem::mocvrp: return 3;
            case Problem::mokp: return 1 + kappa;
        }
        return 0;
    }
    double feat(int node, int j) const {
        return features[static_cast<size_t>(node * feat_dim() + j)];
    }
};

// Deterministic generator: equal seeds give bit-identical instances.
Instance generate(Problem problem, int n, int kappa, uint64_t seed);

void validate_instance(const Instance& inst);

// JSONL: one instance per line; '#' lines are comments. f64 values use 17
// significant digits and round-trip bit-exactly.
void write_instances(std::ostream& os, const std::vector<Instance>& list,
                     const std::string& header_comment = "");
void write_instances_file(const std::string& path, const std::vector<Instance>& list,
                          const std::string& header_comment = "");
std::vector<Instance> read_instances(std::istream& is);
std::vector<Instance> read_instances_file(const std::string& path);

}  // namespace moco::problems
