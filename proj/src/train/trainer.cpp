#include "moco/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

#include "moco/decomp/weights.hpp"
#include "moco/infer/solve.hpp"
#include "moco/pareto/hypervolume.hpp"
#include "moco/train/losses.hpp"
#include "moco/train/pairs.hpp"
#include "moco/util/fmt.hpp"
#include "moco/util/parallel.hpp"

namespace moco::train {

using model::DecodeMode;
using model::Trajectory;

void TrainConfig::validate() const {
    if (kappa != 2 && kappa != 3) throw DataError("kappa must be 2 or 3");
    if (problem != problems::Problem::motsp && kappa != 2)
        throw DataError("kappa 3 is only supported for motsp");
    int min_n = problem == problems::Problem::mokp ? 1 : 2;
    if (n_nodes < min_n)
        throw DataError("n_nodes must be at least " + std::to_string(min_n));
    if (algorithm != "pl" && algorithm != "reinforce")
        throw DataError("algorithm must be pl or reinforce, got '" + algorithm + "'");
    if (batch < 1) throw DataError("batch must be at least 1");
    if (k_samples < 2) throw DataError("k_samples must be at least 2");
    if (beta < 0.0) throw DataError("beta must be non-negative (0 means default)");
    if (steps < 0) throw DataError("steps must be non-negative");
    if (validate_every < 1) throw DataError("validate_every must be at least 1");
    if (val_instances < 1) throw DataError("val_instances must be at least 1");
    if (weight_h < 1) throw DataError("weight_h must be at least 1");
    if (pbi_alpha <= 0.0) throw DataError("pbi_alpha must be positive");
    if (adam.lr <= 0.0) throw DataError("learning rate must be positive");
    if (threads < 1) throw DataError("threads must be at least 1");
    model.validate();
}

namespace {

decomp::ScalarizationConfig scal_config(const TrainConfig& cfg) {
    decomp::ScalarizationConfig sc;
    sc.kind = cfg.scheme;
    sc.pbi_alpha = cfg.pbi_alpha;
    if (sc.kind != decomp::Scalarization::weighted_sum)
        sc.ideal = decomp::default_ideal(cfg.problem, cfg.n_nodes, cfg.kappa);
    return sc;
}

// One decomposed subproblem: a fresh instance, a simplex-sampled weight
// vector, and K sampled rollouts sharing one encoder pass. Holds its graph so
// the caller can run backward after all subproblems are built.
struct Subproblem {
    std::unique_ptr<tensor::Graph> graph;
    std::vector<Trajectory> trajectories;
    std::vector<double> scalarized;
};

Subproblem build_subproblem(model::Policy& policy, const TrainConfig& cfg,
                            const decomp::ScalarizationConfig& scal, int step, int b) {
    Subproblem sp;
    sp.graph = std::make_unique<tensor::Graph>();

    problems::Instance inst = problems::generate(
        cfg.problem, cfg.n_nodes, cfg.kappa,
        derive_seed(cfg.seed, stream_tag("train.instance"), uint64_t(step), uint64_t(b)));

    Rng wrng(derive_seed(cfg.seed, stream_tag("train.weight"), uint64_t(step), uint64_t(b)));
    std::vector<double> lambda(static_cast<size_t>(cfg.kappa));
    wrng.simplex(lambda.data(), lambda.size());

    Rng rrng(derive_seed(cfg.seed, stream_tag("train.rollout"), uint64_t(step), uint64_t(b)));
    model::Embeddings e = policy.encode(*sp.graph, inst, lambda);
    for (int j = 0; j < cfg.k_samples; ++j) {
        Trajectory t = policy.rollout(*sp.graph, e, inst, DecodeMode::sample, rrng);
        sp.scalarized.push_back(decomp::scalarize(
            scal, decomp::to_min_orientation(cfg.problem, t.objectives), lambda));
        sp.trajectories.push_back(std::move(t));
    }
    return sp;
}

// Loss node for one subproblem on its own graph; invalid Value when every
// pair ties (PL only), which contributes zero loss and zero gradient.
tensor::Value subproblem_loss(Subproblem& sp, bool use_pl,
                              double beta) {
    tensor::Graph& g = *sp.graph;
    if (!use_pl) {
        std::vector<double> rewards;
        rewards.reserve(sp.scalarized.size());
        for (double s : sp.scalarized) rewards.push_back(-s);
        return reinforce_loss(g, sp.trajectories, rewards);
    }
    auto pairs = build_pairs(sp.scalarized);
    if (pairs.empty()) return {};
    tensor::Value sum;
    for (const auto& pr : pairs) {
        tensor::Value term = pl_loss(g, sp.trajectories[size_t(pr.winner)].avg_ll,
                                     sp.trajectories[size_t(pr.loser)].avg_ll, beta, pr.y);
        sum = sum.valid() ? add(sum, term) : term;
    }
    return scale(sum, 1.0 / double(pairs.size()));
}

// Builds the batch in parallel, then accumulates gradients serially in index
// order so thread count never changes the result. Returns the mean loss.
double accumulate_batch(model::Policy& policy, const TrainConfig& cfg,
                        const decomp::ScalarizationConfig& scal, bool use_pl, double beta,
                        int step, std::vector<Subproblem>* keep = nullptr) {
    std::vector<Subproblem> subs(static_cast<size_t>(cfg.batch));
    parallel_for(subs.size(), cfg.threads, [&](size_t b) {
        subs[b] = build_subproblem(policy, cfg, scal, step, int(b));
    });
    double loss_sum = 0.0;
    for (auto& sp : subs) {
        tensor::Value loss = subproblem_loss(sp, use_pl, beta);
        if (!loss.valid()) continue;
        loss_sum += loss.item();
        sp.graph->backward(scale(loss, 1.0 / double(cfg.batch)));
    }
    if (keep) *keep = std::move(subs);
    return loss_sum / double(cfg.batch);
}

}  // namespace

double validate_policy(model::Policy& policy, const TrainConfig& cfg) {
    std::vector<problems::Instance> dataset;
    dataset.reserve(static_cast<size_t>(cfg.val_instances));
    for (int i = 0; i < cfg.val_instances; ++i)
        dataset.push_back(problems::generate(
            cfg.problem, cfg.n_nodes, cfg.kappa,
            derive_seed(cfg.seed, stream_tag("train.val.inst"), uint64_t(i))));
    auto weights = decomp::das_dennis(cfg.kappa, cfg.weight_h);
    auto frame = pareto::default_frame(cfg.problem, cfg.n_nodes, cfg.kappa);
    auto rep = infer::evaluate_model(policy, dataset, weights, scal_config(cfg), frame,
                                     std::numeric_limits<double>::quiet_NaN(), false,
                                     cfg.threads);
    return rep.mean_hv;
}

TrainResult train(model::Policy& policy, const TrainConfig& cfg) {
    cfg.validate();
    if (policy.problem() != cfg.problem || policy.kappa() != cfg.kappa)
        throw DataError("policy does not match the training problem or objective count");

    const bool use_pl = cfg.algorithm == "pl";
    const double beta = cfg.resolved_beta();
    const decomp::ScalarizationConfig scal = scal_config(cfg);
    tensor::Adam adam(cfg.adam);

    TrainResult res;
    res.initial_hv = validate_policy(policy, cfg);
    res.final_hv = res.initial_hv;
    res.val_curve.emplace_back(0, res.initial_hv);
    MetricsRow head;
    head.step = 0;
    head.algorithm = cfg.algorithm;
    head.val_hv = res.initial_hv;
    res.rows.push_back(head);
    std::fprintf(stderr, "[train] step 0/%d val_hv %.6f\n", cfg.steps, res.initial_hv);

    for (int step = 1; step <= cfg.steps; ++step) {
        auto t0 = std::chrono::steady_clock::now();
        policy.params().zero_grad();
        double loss = accumulate_batch(policy, cfg, scal, use_pl, beta, step);
        if (!std::isfinite(loss))
            throw NumericError("non-finite loss at step " + std::to_string(step));

        MetricsRow row;
        row.step = step;
        row.algorithm = cfg.algorithm;
        row.loss = loss;
        bool val_step = step % cfg.validate_every == 0 || step == cfg.steps;
        if (step <= 5 || val_step) row.grad_variance = pooled_grad_variance(policy.params());
        adam.step(policy.params());

        if (val_step) {
            double hv = validate_policy(policy, cfg);
            row.val_hv = hv;
            res.val_curve.emplace_back(step, hv);
            res.final_hv = hv;
            std::fprintf(stderr, "[train] step %d/%d loss %.6f val_hv %.6f\n", step,
                         cfg.steps, loss, hv);
        }
        if (cfg.timings) {
            auto dt = std::chrono::steady_clock::now() - t0;
            row.wall_ms =
                std::chrono::duration_cast<std::chrono::milliseconds>(dt).count();
        }
        res.rows.push_back(row);
    }
    policy.params().zero_grad();
    return res;
}

std::vector<VarianceRow> gradient_variance_probe(model::Policy& policy,
                                                 const TrainConfig& cfg, int batches) {
    cfg.validate();
    if (batches < 1) throw DataError("variance probe needs at least 1 batch");
    if (policy.problem() != cfg.problem || policy.kappa() != cfg.kappa)
        throw DataError("policy does not match the probe problem or objective count");

    const double beta = cfg.resolved_beta();
    const decomp::ScalarizationConfig scal = scal_config(cfg);

    // Both estimators differentiate the same rollouts from the same frozen
    // parameters; no updates happen, so rows are directly comparable.
    std::vector<VarianceRow> rows;
    for (int batch = 0; batch < batches; ++batch) {
        int step = batch + 1;
        std::vector<Subproblem> subs(static_cast<size_t>(cfg.batch));
        parallel_for(subs.size(), cfg.threads, [&](size_t b) {
            subs[b] = build_subproblem(policy, cfg, scal, step, int(b));
        });
        for (bool use_pl : {true, false}) {
            policy.params().zero_grad();
            for (auto& sp : subs) {
                tensor::Value loss = subproblem_loss(sp, use_pl, beta);
                if (!loss.valid()) continue;
                sp.graph->backward(scale(loss, 1.0 / double(cfg.batch)));
            }
            rows.push_back({batch, use_pl ? "pl" : "reinforce",
                            pooled_grad_variance(policy.params())});
        }
        policy.params().zero_grad();
    }
    return rows;
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot open '" + path + "' for writing");
    os << "step,algorithm,loss,validation_hv,grad_variance,wall_ms\n";
    for (const auto& r : rows) {
        os << r.step << ',' << r.algorithm << ',';
        if (!std::isnan(r.loss)) os << fmt_f64(r.loss);
        os << ',';
        if (!std::isnan(r.val_hv)) os << fmt_f64(r.val_hv);
        os << ',';
        if (!std::isnan(r.grad_variance)) os << fmt_f64(r.grad_variance);
        os << ',';
        if (r.wall_ms >= 0) os << r.wall_ms;
        os << '\n';
    }
    if (!os.good()) throw DataError("failed writing '" + path + "'");
}

}  // namespace moco::train
