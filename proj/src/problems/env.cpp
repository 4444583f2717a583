#include <algorithm>
#include <cmath>

#include "moco/problems/env.hpp"

namespace moco::problems {

namespace {
constexpr double kCapTol = 1e-9;

bool all_customers_served(const EnvState& s) {
    for (int i = 1; i < s.inst->n; ++i)
        if (!s.visited[static_cast<size_t>(i)]) return false;
    return true;
}
}  // namespace

double node_dist(const Instance& inst, int a, int b, int obj) {
    int off = inst.problem == Problem::motsp ? 2 * obj : 0;
    double dx = inst.feat(a, off) - inst.feat(b, off);
    double dy = inst.feat(a, off + 1) - inst.feat(b, off + 1);
    return std::sqrt(dx * dx + dy * dy);
}

EnvState env_reset(const Instance& inst) {
    validate_instance(inst);
    EnvState s;
    s.inst = &inst;
    s.visited.assign(static_cast<size_t>(inst.n), 0);
    switch (inst.problem) {
        case Problem::motsp:
            s.current = -1;
            break;
        case Problem::mocvrp:
            s.current = 0;
            s.remaining = inst.capacity;
            break;
        case Problem::mokp:
            s.remaining = inst.capacity;
            break;
    }
    return s;
}

std::vector<uint8_t> feasible_mask(const EnvState& s) {
    if (s.done) throw DataError("feasible_mask on a finished episode");
    const Instance& inst = *s.inst;
    std::vector<uint8_t> mask(static_cast<size_t>(inst.n), 0);
    switch (inst.problem) {
        case Problem::motsp:
            for (int i = 0; i < inst.n; ++i)
                mask[static_cast<size_t>(i)] = s.visited[static_cast<size_t>(i)] ? 0 : 1;
            break;
        case Problem::mocvrp: {
            // Depot is selectable unless the vehicle is already there.
            mask[0] = s.current == 0 ? 0 : 1;
            for (int i = 1; i < inst.n; ++i) {
                if (s.visited[static_cast<size_t>(i)]) continue;
                if (inst.feat(i, 2) > s.remaining + kCapTol) continue;
                mask[static_cast<size_t>(i)] = 1;
            }
            break;
        }
        case Problem::mokp:
            for (int i = 0; i < inst.n; ++i) {
                if (s.visited[static_cast<size_t>(i)]) continue;
                if (inst.feat(i, 0) > s.remaining) continue;
                mask[static_cast<size_t>(i)] = 1;
            }
            break;
    }
    return mask;
}

void env_step(EnvState& s, int action) {
    const Instance& inst = *s.inst;
    if (s.done) throw DataError("env_step on a finished episode");
    if (action < 0 || action >= inst.n)
        throw DataError("action " + std::to_string(action) + " out of range");
    std::vector<uint8_t> mask = feasible_mask(s);
    if (!mask[static_cast<size_t>(action)])
        throw DataError("infeasible action " + std::to_string(action));
    switch (inst.problem) {
        case Problem::motsp: {
            s.visited[static_cast<size_t>(action)] = 1;
            s.partial.push_back(action);
            s.current = action;
            s.done = std::all_of(s.visited.begin(), s.visited.end(),
                                 [](uint8_t v) { return v != 0; });
            break;
        }
        case Problem::mocvrp: {
            s.partial.push_back(action);
            if (action == 0) {
                s.current = 0;
                s.remaining = inst.capacity;
            } else {
                s.visited[static_cast<size_t>(action)] = 1;
                s.remaining -= inst.feat(action, 2);
                s.current = action;
                if (all_customers_served(s)) {
                    // Episode ends with a forced return to the depot.
                    s.partial.push_back(0);
                    s.current = 0;
                    s.done = true;
                }
            }
            break;
        }
        case Problem::mokp: {
            s.visited[static_cast<size_t>(action)] = 1;
            s.remaining -= inst.feat(action, 0);
            s.partial.push_back(action);
            std::vector<uint8_t> next = feasible_mask(s);
            s.done = std::none_of(next.begin(), next.end(), [](uint8_t v) { return v != 0; });
            break;
        }
    }
}

std::vector<double> evaluate(const Instance& inst, const std::vector<int>& partial) {
    validate_instance(inst);
    for (int a : partial)
        if (a < 0 || a >= inst.n)
            throw DataError("node index " + std::to_string(a) + " out of range");
    std::vector<double> f(static_cast<size_t>(inst.kappa), 0.0);
    switch (inst.problem) {
        case Problem::motsp: {
            if (static_cast<int>(partial.size()) != inst.n)
                throw DataError("motsp tour must visit all " + std::to_string(inst.n) +
                                " cities, got " + std::to_string(partial.size()));
            std::vector<uint8_t> seen(static_cast<size_t>(inst.n), 0);
            for (int a : partial) {
                if (seen[static_cast<size_t>(a)])
                    throw DataError("city " + std::to_string(a) + " visited twice");
                seen[static_cast<size_t>(a)] = 1;
            }
            for (int j = 0; j < inst.kappa; ++j)
                for (size_t i = 0; i < partial.size(); ++i)
                    f[static_cast<size_t>(j)] +=
                        node_dist(inst, partial[i], partial[(i + 1) % partial.size()], j);
            break;
        }
        case Problem::mocvrp: {
            if (partial.empty() || partial.back() != 0)
                throw DataError("mocvrp route sequence must end at the depot");
            std::vector<uint8_t> seen(static_cast<size_t>(inst.n), 0);
            double total = 0.0, longest = 0.0, route_len = 0.0, load = 0.0;
            int prev = 0;
            for (int a : partial) {
                if (a == 0) {
                    if (prev == 0) throw DataError("consecutive depot visits");
                    route_len += node_dist(inst, prev, 0, 0);
                    total += route_len;
                    longest = std::max(longest, route_len);
                    route_len = 0.0;
                    load = 0.0;
                    prev = 0;
                } else {
                    if (seen[static_cast<size_t>(a)])
                        throw DataError("customer " + std::to_string(a) + " visited twice");
                    seen[static_cast<size_t>(a)] = 1;
                    load += inst.feat(a, 2);
                    if (load > inst.capacity + kCapTol)
                        throw DataError("route exceeds vehicle capacity");
                    route_len += node_dist(inst, prev, a, 0);
                    prev = a;
                }
            }
            for (int i = 1; i < inst.n; ++i)
                if (!seen[static_cast<size_t>(i)])
                    throw DataError("customer " + std::to_string(i) + " was not served");
            f[0] = total;
            f[1] = longest;
            break;
        }
        case Problem::mokp: {
            std::vector<uint8_t> sel(static_cast<size_t>(inst.n), 0);
            double weight = 0.0;
            for (int a : partial) {
                if (sel[static_cast<size_t>(a)])
                    throw DataError("item " + std::to_string(a) + " selected twice");
                sel[static_cast<size_t>(a)] = 1;
                weight += inst.feat(a, 0);
            }
            if (weight > inst.capacity + kCapTol)
                throw DataError("selection exceeds knapsack capacity");
            double remaining = inst.capacity - weight;
            for (int i = 0; i < inst.n; ++i)
                if (!sel[static_cast<size_t>(i)] && inst.feat(i, 0) <= remaining)
                    throw DataError("selection is incomplete: item " + std::to_string(i) +
                                    " still fits");
            for (int a : partial)
                for (int j = 0; j < inst.kappa; ++j)
                    f[static_cast<size_t>(j)] += inst.feat(a, 1 + j);
            break;
        }
    }
    return f;
}

}  // namespace moco::problems
