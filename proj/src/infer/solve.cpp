#include "moco/infer/solve.hpp"

#include <cmath>

#include "moco/infer/augment.hpp"
#include "moco/problems/env.hpp"
#include "moco/util/error.hpp"
#include "moco/util/parallel.hpp"
#include "moco/util/rng.hpp"

namespace moco::infer {

FrontResult solve_front(model::Policy& policy, const problems::Instance& inst,
                        const std::vector<std::vector<double>>& weights,
                        const decomp::ScalarizationConfig& scal, bool augment,
                        bool pool_augmented) {
    if (inst.problem != policy.problem() || inst.kappa != policy.kappa())
        throw DataError("instance does not match the policy's problem or objective count");
    if (weights.empty()) throw DataError("solve_front needs at least one weight vector");

    decomp::ScalarizationConfig cfg = scal;
    if (cfg.kind != decomp::Scalarization::weighted_sum && cfg.ideal.empty())
        cfg.ideal = decomp::default_ideal(inst.problem, inst.n, inst.kappa);

    // Augmentation rolls out on each transformed variant but keeps the tour,
    // which is then re-evaluated on the original instance. mokp has no
    // coordinate features, so it never augments (the CLI warns about it).
    std::vector<problems::Instance> variants;
    variants.push_back(inst);
    if (augment && inst.problem != problems::Problem::mokp) {
        auto transforms = enumerate_transforms(inst.problem, inst.kappa);
        for (size_t t = 1; t < transforms.size(); ++t)
            variants.push_back(apply_transform(inst, transforms[t]));
    }

    FrontResult res{pareto::ParetoArchive(inst.kappa, problems::is_maximization(inst.problem)),
                    {}, {}};
    Rng unused(0);
    for (const auto& lambda : weights) {
        double best_s = std::numeric_limits<double>::infinity();
        std::vector<double> best_obj;
        for (const auto& variant : variants) {
            tensor::Graph g;
            auto traj = policy.rollout(g, variant, lambda, model::DecodeMode::greedy, unused);
            std::vector<double> obj = problems::evaluate(inst, traj.actions);
            double s = decomp::scalarize(cfg, decomp::to_min_orientation(inst.problem, obj),
                                         lambda);
            if (pool_augmented) res.archive.insert(obj);
            if (s < best_s) {
                best_s = s;
                best_obj = std::move(obj);
            }
        }
        res.archive.insert(best_obj);
        res.per_weight_objectives.push_back(std::move(best_obj));
        res.per_weight_scalarized.push_back(best_s);
    }
    return res;
}

EvalReport evaluate_model(model::Policy& policy, const std::vector<problems::Instance>& dataset,
                          const std::vector<std::vector<double>>& weights,
                          const decomp::ScalarizationConfig& scal, const pareto::HvFrame& frame,
                          double hv_ref, bool augment, int threads, bool pool_augmented) {
    if (dataset.empty()) throw DataError("evaluation dataset is empty");
    if (static_cast<int>(frame.ref.size()) != policy.kappa())
        throw DataError("hypervolume frame has " + std::to_string(frame.ref.size()) +
                        " objectives, policy has " + std::to_string(policy.kappa()));

    EvalReport rep;
    rep.n_instances = static_cast<int>(dataset.size());
    rep.n_weights = static_cast<int>(weights.size());
    rep.augment = augment && policy.problem() != problems::Problem::mokp;
    rep.per_instance_hv.assign(dataset.size(), 0.0);

    parallel_for(dataset.size(), threads, [&](size_t i) {
        auto front = solve_front(policy, dataset[i], weights, scal, rep.augment,
                                 pool_augmented);
        rep.per_instance_hv[i] = pareto::normalized_hypervolume(front.archive.points(), frame);
    });

    double sum = 0.0;
    for (double v : rep.per_instance_hv) sum += v;
    rep.mean_hv = sum / static_cast<double>(dataset.size());
    if (std::isfinite(hv_ref)) rep.gap = pareto::hv_gap(rep.mean_hv, hv_ref);
    return rep;
}

}  // namespace moco::infer
