#pragma once

#include <span>
#include <vector>

#include "moco/model/policy.hpp"
#include "moco/tensor/graph.hpp"

namespace moco::train {

// Bradley-Terry preference loss: z = beta * (avg_ll_winner - avg_ll_loser),
// loss = -y * log(sigmoid(z)). y = 0 gives exactly zero loss and gradient.
tensor::Value pl_loss(tensor::Graph& g, tensor::Value avg_ll_winner,
                      tensor::Value avg_ll_loser, double beta, double y = 1.0);

// Policy-gradient surrogate with a shared mean baseline over the K rewards:
// loss = -(1/K) sum_j (reward_j - mean) * total_ll_j, where total_ll_j is
// len_j * avg_ll_j and the advantages are constants.
tensor::Value reinforce_loss(tensor::Graph& g,
                             std::span<const model::Trajectory> trajectories,
                             std::span<const double> rewards);

// Max abs deviation between the autodiff gradient of pl_loss and the closed
// form -y*beta*(1-sigmoid(z)) * [grad avg_ll_w - grad avg_ll_l], the latter
// assembled from two separate per-trajectory backward passes.
double pl_closed_form_deviation(model::Policy& policy, const problems::Instance& inst,
                                std::span<const double> lambda,
                                const std::vector<int>& winner_actions,
                                const std::vector<int>& loser_actions, double beta,
                                double y = 1.0);

// Population variance of all gradient entries pooled across parameters.
double pooled_grad_variance(const tensor::ParamStore& store);

}  // namespace moco::train
