#include <cmath>

#include "moco/train/losses.hpp"

namespace moco::train {

using namespace tensor;
using model::DecodeMode;
using model::Trajectory;

Value pl_loss(Graph&, Value avg_ll_winner, Value avg_ll_loser, double beta, double y) {
    if (beta <= 0.0) throw DataError("beta must be positive");
    Value z = scale(sub(avg_ll_winner, avg_ll_loser), beta);
    return scale(log(sigmoid(z)), -y);
}

Value reinforce_loss(Graph& g, std::span<const Trajectory> trajectories,
                     std::span<const double> rewards) {
    (void)g;
    size_t k = trajectories.size();
    if (k != rewards.size())
        throw DataError("trajectory count " + std::to_string(k) +
                        " does not match reward count " + std::to_string(rewards.size()));
    if (k < 2) throw DataError("baseline needs at least 2 trajectories");
    double baseline = 0.0;
    for (double r : rewards) baseline += r;
    baseline /= double(k);
    Value loss;
    for (size_t j = 0; j < k; ++j) {
        double adv = rewards[j] - baseline;
        double len = double(trajectories[j].step_logp.size());
        Value term = scale(trajectories[j].avg_ll, -adv * len / double(k));
        loss = loss.valid() ? add(loss, term) : term;
    }
    return loss;
}

namespace {
std::vector<std::vector<double>> snapshot_grads(const ParamStore& store) {
    std::vector<std::vector<double>> out;
    out.reserve(store.size());
    for (size_t i = 0; i < store.size(); ++i) out.push_back(store[i].grad.v);
    return out;
}
}  // namespace

double pl_closed_form_deviation(model::Policy& policy, const problems::Instance& inst,
                                std::span<const double> lambda,
                                const std::vector<int>& winner_actions,
                                const std::vector<int>& loser_actions, double beta,
                                double y) {
    ParamStore& store = policy.params();
    Rng unused(0);

    store.zero_grad();
    double z_val;
    std::vector<std::vector<double>> auto_grads;
    {
        Graph g;
        model::Embeddings e = policy.encode(g, inst, lambda);
        Trajectory tw = policy.rollout(g, e, inst, DecodeMode::greedy, unused,
                                       &winner_actions);
        Trajectory tl = policy.rollout(g, e, inst, DecodeMode::greedy, unused,
                                       &loser_actions);
        Value loss = pl_loss(g, tw.avg_ll, tl.avg_ll, beta, y);
        z_val = beta * (tw.avg_ll.item() - tl.avg_ll.item());
        g.backward(loss);
        auto_grads = snapshot_grads(store);
    }

    store.zero_grad();
    std::vector<std::vector<double>> grads_w;
    {
        Graph g;
        Trajectory tw = policy.rollout(g, inst, lambda, DecodeMode::greedy, unused,
                                       &winner_actions);
        g.backward(tw.avg_ll);
        grads_w = snapshot_grads(store);
    }
    store.zero_grad();
    std::vector<std::vector<double>> grads_l;
    {
        Graph g;
        Trajectory tl = policy.rollout(g, inst, lambda, DecodeMode::greedy, unused,
                                       &loser_actions);
        g.backward(tl.avg_ll);
        grads_l = snapshot_grads(store);
    }
    store.zero_grad();

    double sig = 1.0 / (1.0 + std::exp(-z_val));
    double coef = -y * beta * (1.0 - sig);
    double dev = 0.0;
    for (size_t p = 0; p < auto_grads.size(); ++p)
        for (size_t i = 0; i < auto_grads[p].size(); ++i) {
            double closed = coef * (grads_w[p][i] - grads_l[p][i]);
            dev = std::max(dev, std::abs(auto_grads[p][i] - closed));
        }
    return dev;
}

double pooled_grad_variance(const ParamStore& store) {
    int64_t n = 0;
    double mean = 0.0;
    for (size_t p = 0; p < store.size(); ++p) {
        const ArrayF64& g = store[p].grad;
        for (int64_t i = 0; i < g.numel(); ++i) mean += g.at(i);
        n += g.numel();
    }
    if (n == 0) return 0.0;
    mean /= double(n);
    double var = 0.0;
    for (size_t p = 0; p < store.size(); ++p) {
        const ArrayF64& g = store[p].grad;
        for (int64_t i = 0; i < g.numel(); ++i) {
            double d = g.at(i) - mean;
            var += d * d;
        }
    }
    return var / double(n);
}

}  // namespace moco::train
