#pragma once

#include <span>
#include <string>
#include <vector>

#include "moco/model/config.hpp"
#include "moco/problems/env.hpp"
#include "moco/problems/instance.hpp"
#include "moco/tensor/graph.hpp"
#include "moco/tensor/param.hpp"
#include "moco/util/rng.hpp"

namespace moco::model {

enum class DecodeMode { greedy, sample };

// One constructed solution plus everything needed to differentiate its
// likelihood: avg_ll lives on the graph the rollout ran on.
struct Trajectory {
    std::vector<int> actions;
    std::vector<double> step_logp;   // numeric copies of the per-step log-probs
    std::vector<double> objectives;  // raw orientation (mokp: profits)
    tensor::Value avg_ll;            // mean per-step log-likelihood, scalar node
};

// Encoder output bound to one (instance, weight-vector) pair on one graph.
struct Embeddings {
    tensor::Value nodes;   // [n, d]
    tensor::Value weight;  // [1, d]
    tensor::Value tokens;  // [n+1, d], weight row first (decoder key/value set)
};

// Diagnostics from one routing decision.
struct CcoOutput {
    tensor::Value out;             // [1, d]
    tensor::Value gates;           // [1, k], softmax over the kept logits
    std::vector<int64_t> selected; // expert ids, n_experts = identity
};

// Weight-conditioned attention encoder + autoregressive decoder with a
// routed-expert block between the decoder attention and the compatibility
// layer. One Policy instance is bound to a (problem, kappa) pair.
class Policy {
  public:
    Policy(problems::Problem problem, int kappa, ModelConfig cfg);

    // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights, zeros for shifts
    // and biases, ones for norm scales; one seeded stream in registration
    // order.
    void init_params(uint64_t seed);

    Embeddings encode(tensor::Graph& g, const problems::Instance& inst,
                      std::span<const double> lambda);

    // Masked compatibility logits [1, n] for the current state (-inf on
    // infeasible actions).
    tensor::Value decode_logits(tensor::Graph& g, const Embeddings& e,
                                const problems::EnvState& state);

    CcoOutput cco_forward(tensor::Graph& g, tensor::Value h_c);

    // Encode once, then alternate decode/step until done. `forced` replays a
    // fixed action sequence (for finite-difference checks).
    Trajectory rollout(tensor::Graph& g, const Embeddings& e,
                       const problems::Instance& inst, DecodeMode mode, Rng& rng,
                       const std::vector<int>* forced = nullptr);
    Trajectory rollout(tensor::Graph& g, const problems::Instance& inst,
                       std::span<const double> lambda, DecodeMode mode, Rng& rng,
                       const std::vector<int>* forced = nullptr);

    tensor::ParamStore& params() { return store_; }
    const tensor::ParamStore& params() const { return store_; }
    const ModelConfig& config() const { return cfg_; }
    problems::Problem problem() const { return problem_; }
    int kappa() const { return kappa_; }
    int feat_dim() const;

    tensor::Parameter& find(const std::string& name) {
        tensor::Parameter* p = store_.find(name);
        if (!p) throw DataError("unknown parameter: " + name);
        return *p;
    }

    // Optional diagnostics sink: while set, every routing decision appends
    // its CcoOutput (the Values stay valid as long as their graph lives).
    std::vector<CcoOutput>* cco_log = nullptr;

  private:
    struct Mha {
        tensor::Parameter* wq;
        tensor::Parameter* wk;
        tensor::Parameter* wv;
        tensor::Parameter* wo;
    };

    tensor::Value mha(tensor::Graph& g, tensor::Value q_in, tensor::Value kv_in,
                      const Mha& p);
    tensor::Value ff(tensor::Graph& g, tensor::Value x, tensor::Parameter& w1,
                     tensor::Parameter& b1, tensor::Parameter& w2,
                     tensor::Parameter& b2);
    tensor::Value norm_tokens(tensor::Graph& g, tensor::Value x,
                              tensor::Parameter& scale, tensor::Parameter& shift,
                              int axis);
    tensor::Value context_query(tensor::Graph& g, const Embeddings& e,
                                const problems::EnvState& state);

    tensor::Parameter& reg(const std::string& name, tensor::Shape shape,
                           int init_kind, int fan_in);

    problems::Problem problem_;
    int kappa_;
    ModelConfig cfg_;
    tensor::ParamStore store_;
    struct InitSpec {
        int kind;  // 0 uniform, 1 zero, 2 one
        int fan_in;
    };
    std::vector<InitSpec> init_specs_;
};

// (1/T) sum of chosen-action log-probs as a plain number.
double avg_log_likelihood(const Trajectory& t);

}  // namespace moco::model
