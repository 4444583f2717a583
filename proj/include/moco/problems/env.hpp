#pragma once

#include <vector>

#include "moco/problems/instance.hpp"

namespace moco::problems {

// Sequential construction state. Actions are node/item indices; the feasible
// mask marks selectable actions with 1.
struct EnvState {
    const Instance* inst = nullptr;
    int current = -1;               // motsp: last visited (-1 before the first
                                    // step); mocvrp: current node (starts at
                                    // the depot); mokp: unused
    double remaining = 0.0;         // mocvrp / mokp remaining capacity
    std::vector<uint8_t> visited;   // cities / customers / selected items
    std::vector<int> partial;       // action sequence (mocvrp includes depot
                                    // visits and the final forced return)
    bool done = false;
};

EnvState env_reset(const Instance& inst);
std::vector<uint8_t> feasible_mask(const EnvState& s);
void env_step(EnvState& s, int action);

// Objective vector of a complete solution (kappa entries). Incomplete or
// infeasible sequences are rejected. mokp objectives are profits (larger is
// better); the others are lengths (smaller is better).
std::vector<double> evaluate(const Instance& inst, const std::vector<int>& partial);

// Euclidean distance between nodes in objective j's coordinate pair (motsp)
// or the single coordinate set (mocvrp).
double node_dist(const Instance& inst, int a, int b, int obj);

}  // namespace moco::problems
