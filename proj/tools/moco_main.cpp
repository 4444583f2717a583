#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "moco/decomp/scalarize.hpp"
#include "moco/decomp/weights.hpp"
#include "moco/infer/solve.hpp"
#include "moco/model/checkpoint.hpp"
#include "moco/model/policy.hpp"
#include "moco/pareto/hypervolume.hpp"
#include "moco/problems/instance.hpp"
#include "moco/tensor/gradcheck.hpp"
#include "moco/train/losses.hpp"
#include "moco/train/trainer.hpp"
#include "moco/util/config.hpp"
#include "moco/util/error.hpp"
#include "moco/util/fmt.hpp"
#include "moco/util/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

int64_t elapsed_ms(std::chrono::steady_clock::time_point t0) {
    auto dt = std::chrono::steady_clock::now() - t0;
    return std::chrono::duration_cast<std::chrono::milliseconds>(dt).count();
}

// stdout carries exactly one machine-readable JSON line per command.
void emit(const ordered_json& j) { std::cout << j.dump() << "\n"; }

struct GenArgs {
    std::string problem = "motsp";
    int n = 20;
    int kappa = 2;
    int count = 1;
    uint64_t seed = 1;
    std::string out;
};

int cmd_gen(const GenArgs& a) {
    auto problem = moco::problems::parse_problem(a.problem);
    if (a.count < 0) throw moco::UsageError("--count must be non-negative");
    std::vector<moco::problems::Instance> list;
    list.reserve(static_cast<size_t>(a.count));
    for (int i = 0; i < a.count; ++i)
        list.push_back(moco::problems::generate(
            problem, a.n, a.kappa,
            moco::derive_seed(a.seed, moco::stream_tag("gen.instance"), uint64_t(i))));
    std::string comment = "problem=" + a.problem + " n=" + std::to_string(a.n) +
                          " kappa=" + std::to_string(a.kappa) +
                          " count=" + std::to_string(a.count) +
                          " seed=" + std::to_string(a.seed);
    moco::problems::write_instances_file(a.out, list, comment);
    emit({{"written", a.count}, {"path", a.out}});
    return 0;
}

struct WeightsArgs {
    int kappa = 2;
    int h = 10;
    std::string out;
};

int cmd_weights(const WeightsArgs& a) {
    auto ws = moco::decomp::das_dennis(a.kappa, a.h);
    moco::decomp::write_weights_csv(a.out, ws);
    emit({{"count", ws.size()}, {"path", a.out}});
    return 0;
}

struct TrainArgs {
    std::string config;
    std::string out;
    uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
    bool timings = false;
};

int cmd_train(const TrainArgs& a) {
    auto cfg = moco::load_train_config(a.config);
    if (a.seed_set) cfg.seed = a.seed;
    if (a.threads > 0) cfg.threads = a.threads;
    if (a.timings) cfg.timings = true;
    fs::create_directories(a.out);

    moco::model::Policy policy(cfg.problem, cfg.kappa, cfg.model);
    policy.init_params(cfg.seed);
    auto res = moco::train::train(policy, cfg);

    std::string ckpt = (fs::path(a.out) / "model.ckpt").string();
    moco::model::save_checkpoint(ckpt, policy);
    moco::train::write_metrics_csv((fs::path(a.out) / "metrics.csv").string(), res.rows);
    moco::write_resolved_config((fs::path(a.out) / "config.json").string(), cfg);

    emit({{"initial_hv", res.initial_hv},
          {"final_hv", res.final_hv},
          {"steps", cfg.steps},
          {"checkpoint", ckpt}});
    return 0;
}

struct EvalArgs {
    std::string checkpoint;
    std::string data;
    std::string weights;
    int h = 10;
    std::string scheme = "weighted_sum";
    double pbi_alpha = 5.0;
    bool augment = false;
    bool pool = false;
    double hv_ref = std::numeric_limits<double>::quiet_NaN();
    int threads = 1;
    bool timings = false;
    std::string out;
};

int cmd_eval(const EvalArgs& a) {
    moco::model::Policy policy = moco::model::load_checkpoint(a.checkpoint);
    auto dataset = moco::problems::read_instances_file(a.data);
    if (dataset.empty()) throw moco::DataError("dataset '" + a.data + "' has no instances");

    std::vector<std::vector<double>> weights =
        a.weights.empty() ? moco::decomp::das_dennis(policy.kappa(), a.h)
                          : moco::decomp::read_weights_csv(a.weights);

    if (a.augment && policy.problem() == moco::problems::Problem::mokp)
        std::fprintf(stderr, "warning: augmentation has no effect for mokp; ignoring\n");

    moco::decomp::ScalarizationConfig sc;
    sc.kind = moco::decomp::parse_scalarization(a.scheme);
    sc.pbi_alpha = a.pbi_alpha;

    auto frame = moco::pareto::default_frame(policy.problem(), dataset[0].n, policy.kappa());
    auto t0 = std::chrono::steady_clock::now();
    auto rep = moco::infer::evaluate_model(policy, dataset, weights, sc, frame, a.hv_ref,
                                           a.augment, a.threads, a.pool);
    if (a.timings) rep.wall_ms = elapsed_ms(t0);

    ordered_json j;
    j["mean_hv"] = rep.mean_hv;
    j["gap"] = std::isnan(rep.gap) ? ordered_json(nullptr) : ordered_json(rep.gap);
    j["n_instances"] = rep.n_instances;
    j["n_weights"] = rep.n_weights;
    j["augment"] = rep.augment;
    j["wall_ms"] = rep.wall_ms < 0 ? ordered_json(nullptr) : ordered_json(rep.wall_ms);
    emit(j);
    if (!a.out.empty()) {
        std::ofstream os(a.out);
        if (!os) throw moco::DataError("cannot open '" + a.out + "' for writing");
        os << j.dump(2) << "\n";
    }
    return 0;
}

struct GradcheckArgs {
    uint64_t seed = 1;
    double tol_primitive = 1e-5;
    double tol_e2e = 1e-4;
    bool inject_fault = false;
};

int cmd_gradcheck(const GradcheckArgs& a) {
    auto cases = moco::tensor::run_primitive_gradchecks(a.seed, a.inject_fault,
                                                        a.tol_primitive);
    double prim_max = 0.0;
    bool prim_pass = true;
    for (const auto& c : cases) {
        prim_max = std::max(prim_max, c.rel_err);
        prim_pass = prim_pass && c.pass;
        std::fprintf(stderr, "%-28s rel_err %.3e  %s\n", c.name.c_str(), c.rel_err,
                     c.pass ? "ok" : "FAIL");
    }

    // End-to-end: differentiate a preference loss between two forced tours
    // through the full encoder/decoder/router stack on a tiny model.
    moco::model::ModelConfig mc;
    mc.embed_dim = 8;
    mc.n_layers = 1;
    mc.n_heads = 2;
    mc.n_experts = 2;
    mc.topk = 2;
    moco::model::Policy policy(moco::problems::Problem::motsp, 2, mc);
    policy.init_params(a.seed);
    auto inst = moco::problems::generate(moco::problems::Problem::motsp, 5, 2,
                                         moco::derive_seed(a.seed, 77));
    std::vector<double> lambda{0.6, 0.4};
    std::vector<int> winner{0, 1, 2, 3, 4};
    std::vector<int> loser{0, 2, 4, 1, 3};
    auto f = [&](moco::tensor::Graph& g) {
        moco::Rng unused(0);
        auto e = policy.encode(g, inst, lambda);
        auto tw = policy.rollout(g, e, inst, moco::model::DecodeMode::greedy, unused,
                                 &winner);
        auto tl = policy.rollout(g, e, inst, moco::model::DecodeMode::greedy, unused,
                                 &loser);
        return moco::train::pl_loss(g, tw.avg_ll, tl.avg_ll, 3.5);
    };
    auto r = moco::tensor::finite_diff_check(f, policy.params(), 1e-6,
                                             a.inject_fault ? 1e-2 : 0.0);
    bool e2e_pass = r.max_rel_err < a.tol_e2e;
    std::fprintf(stderr, "end-to-end                   rel_err %.3e  %s (worst %s[%lld])\n",
                 r.max_rel_err, e2e_pass ? "ok" : "FAIL", r.worst_param.c_str(),
                 static_cast<long long>(r.worst_index));

    emit({{"primitive_max_rel_err", prim_max},
          {"primitive_tol", a.tol_primitive},
          {"e2e_max_rel_err", r.max_rel_err},
          {"e2e_tol", a.tol_e2e},
          {"pass", prim_pass && e2e_pass}});
    if (!(prim_pass && e2e_pass))
        throw moco::NumericError("gradient check failed");
    return 0;
}

struct VarianceArgs {
    std::string config;
    int batches = 5;
    uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
    std::string out;
};

int cmd_variance(const VarianceArgs& a) {
    auto cfg = moco::load_train_config(a.config);
    if (a.seed_set) cfg.seed = a.seed;
    if (a.threads > 0) cfg.threads = a.threads;

    moco::model::Policy policy(cfg.problem, cfg.kappa, cfg.model);
    policy.init_params(cfg.seed);
    auto rows = moco::train::gradient_variance_probe(policy, cfg, a.batches);

    if (!a.out.empty()) {
        std::ofstream os(a.out);
        if (!os) throw moco::DataError("cannot open '" + a.out + "' for writing");
        os << "batch,algorithm,variance\n";
        for (const auto& r : rows)
            os << r.batch << ',' << r.algorithm << ',' << moco::fmt_f64(r.variance)
               << '\n';
    }

    double sum_pl = 0.0, sum_rl = 0.0;
    int lower = 0;
    double min_ratio = std::numeric_limits<double>::infinity();
    for (int b = 0; b < a.batches; ++b) {
        double pl = rows[size_t(2 * b)].variance;
        double rl = rows[size_t(2 * b + 1)].variance;
        sum_pl += pl;
        sum_rl += rl;
        if (pl < rl) ++lower;
        if (pl > 0.0) min_ratio = std::min(min_ratio, rl / pl);
    }
    emit({{"batches", a.batches},
          {"mean_pl_variance", sum_pl / a.batches},
          {"mean_reinforce_variance", sum_rl / a.batches},
          {"batches_pl_lower", lower},
          {"min_ratio", std::isfinite(min_ratio) ? ordered_json(min_ratio)
                                                 : ordered_json(nullptr)}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decomposition-based multi-objective combinatorial optimization with a "
                 "preference-trained attention policy"};
    app.require_subcommand(1);
    // long-only help so the short -h stays free for the --h lattice option
    app.set_help_flag("--help", "print help and exit");

    GenArgs ga;
    auto* gen = app.add_subcommand("gen", "Generate a deterministic instance dataset");
    gen->set_help_flag("--help", "print help and exit");
    gen->add_option("--problem", ga.problem, "motsp | mocvrp | mokp")->capture_default_str();
    gen->add_option("--n", ga.n, "nodes / items per instance")->capture_default_str();
    gen->add_option("--kappa", ga.kappa, "objective count")->capture_default_str();
    gen->add_option("--count", ga.count, "instances to generate")->capture_default_str();
    gen->add_option("--seed", ga.seed, "master seed")->capture_default_str();
    gen->add_option("--out", ga.out, "output JSONL path")->required();

    WeightsArgs wa;
    auto* wts = app.add_subcommand("weights", "Emit the structured weight lattice");
    wts->set_help_flag("--help", "print help and exit");
    wts->add_option("--kappa", wa.kappa, "objective count")->capture_default_str();
    wts->add_option("--h", wa.h, "lattice resolution")->capture_default_str();
    wts->add_option("--out", wa.out, "output CSV path")->required();

    TrainArgs ta;
    auto* tr = app.add_subcommand("train", "Train a policy and save checkpoint + metrics");
    tr->set_help_flag("--help", "print help and exit");
    tr->add_option("--config", ta.config, "training config JSON")->required();
    tr->add_option("--out", ta.out, "output directory")->required();
    auto* tr_seed = tr->add_option("--seed", ta.seed, "override config seed");
    tr->add_option("--threads", ta.threads, "override config threads");
    tr->add_flag("--timings", ta.timings, "record per-step wall time in metrics");

    EvalArgs ea;
    auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
    ev->set_help_flag("--help", "print help and exit");
    ev->add_option("--checkpoint", ea.checkpoint, "model checkpoint")->required();
    ev->add_option("--data", ea.data, "instances JSONL")->required();
    ev->add_option("--weights", ea.weights, "weight CSV (default: lattice from --h)");
    ev->add_option("--h", ea.h, "lattice resolution when --weights is absent")
        ->capture_default_str();
    ev->add_option("--scheme", ea.scheme, "weighted_sum | tchebycheff | pbi")
        ->capture_default_str();
    ev->add_option("--pbi-alpha", ea.pbi_alpha, "pbi penalty")->capture_default_str();
    ev->add_flag("--augment", ea.augment, "decode all coordinate isometries per weight");
    ev->add_flag("--augment-pool", ea.pool,
                 "archive every augmented rollout, not just per-weight winners");
    ev->add_option("--hv-ref", ea.hv_ref, "reference mean hypervolume for the gap");
    ev->add_option("--threads", ea.threads, "worker threads")->capture_default_str();
    ev->add_flag("--timings", ea.timings, "report wall time");
    ev->add_option("--out", ea.out, "also write the report JSON here");

    GradcheckArgs ca;
    auto* gc = app.add_subcommand("gradcheck", "Finite-difference gradient verification");
    gc->set_help_flag("--help", "print help and exit");
    gc->add_option("--seed", ca.seed, "seed")->capture_default_str();
    gc->add_option("--tol-primitive", ca.tol_primitive, "per-primitive tolerance")
        ->capture_default_str();
    gc->add_option("--tol-e2e", ca.tol_e2e, "end-to-end tolerance")->capture_default_str();
    gc->add_flag("--inject-fault", ca.inject_fault,
                 "corrupt one analytic gradient to prove the check fails");

    VarianceArgs va;
    auto* vr = app.add_subcommand("variance",
                                  "Gradient-variance probe (no parameter updates)");
    vr->set_help_flag("--help", "print help and exit");
    vr->add_option("--config", va.config, "training config JSON")->required();
    vr->add_option("--batches", va.batches, "batches to probe")->capture_default_str();
    auto* vr_seed = vr->add_option("--seed", va.seed, "override config seed");
    vr->add_option("--threads", va.threads, "override config threads");
    vr->add_option("--out", va.out, "variance CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    ta.seed_set = tr_seed->count() > 0;
    va.seed_set = vr_seed->count() > 0;

    try {
        if (gen->parsed()) return cmd_gen(ga);
        if (wts->parsed()) return cmd_weights(wa);
        if (tr->parsed()) return cmd_train(ta);
        if (ev->parsed()) return cmd_eval(ea);
        if (gc->parsed()) return cmd_gradcheck(ca);
        if (vr->parsed()) return cmd_variance(va);
    } catch (const moco::UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const moco::DataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const moco::NumericError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
