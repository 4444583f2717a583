#include <array>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

#include "moco/model/policy.hpp"

namespace moco::model {

using problems::Problem;
using namespace tensor;

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<int64_t> iota_idx(int64_t from, int64_t count) {
    std::vector<int64_t> ix(static_cast<size_t>(count));
    std::iota(ix.begin(), ix.end(), from);
    return ix;
}
}  // namespace

Policy::Policy(Problem problem, int kappa, ModelConfig cfg)
    : problem_(problem), kappa_(kappa), cfg_(cfg) {
    cfg_.validate();
    if (kappa_ != 2 && kappa_ != 3) throw DataError("kappa must be 2 or 3");
    if (problem_ != Problem::motsp && kappa_ != 2)
        throw DataError(problems::problem_name(problem_) + " requires kappa 2");

    const int d = cfg_.embed_dim;
    const int fh = cfg_.resolved_ff();
    const int z = feat_dim();

    reg("in.node.w", Shape{z, d}, 0, z);
    reg("in.node.b", Shape{d}, 1, 0);
    reg("in.wvec.w", Shape{kappa_, d}, 0, kappa_);
    reg("in.wvec.b", Shape{d}, 1, 0);
    for (int l = 0; l < cfg_.n_layers; ++l) {
        std::string p = "enc" + std::to_string(l) + ".";
        reg(p + "film.g", Shape{d, d}, 0, d);
        reg(p + "film.b", Shape{d, d}, 0, d);
        reg(p + "attn.wq", Shape{d, d}, 0, d);
        reg(p + "attn.wk", Shape{d, d}, 0, d);
        reg(p + "attn.wv", Shape{d, d}, 0, d);
        reg(p + "attn.wo", Shape{d, d}, 0, d);
        reg(p + "norm1.scale", Shape{d}, 2, 0);
        reg(p + "norm1.shift", Shape{d}, 1, 0);
        reg(p + "ff.w1", Shape{d, fh}, 0, d);
        reg(p + "ff.b1", Shape{fh}, 1, 0);
        reg(p + "ff.w2", Shape{fh, d}, 0, fh);
        reg(p + "ff.b2", Shape{d}, 1, 0);
        reg(p + "norm2.scale", Shape{d}, 2, 0);
        reg(p + "norm2.shift", Shape{d}, 1, 0);
    }
    if (problem_ == Problem::motsp) reg("dec.start", Shape{1, 2 * d}, 0, 2 * d);
    const int ctx_in = problem_ == Problem::motsp ? 2 * d : d + 1;
    reg("dec.ctx.w", Shape{ctx_in, d}, 0, ctx_in);
    reg("dec.attn.wq", Shape{d, d}, 0, d);
    reg("dec.attn.wk", Shape{d, d}, 0, d);
    reg("dec.attn.wv", Shape{d, d}, 0, d);
    reg("dec.attn.wo", Shape{d, d}, 0, d);
    reg("dec.gate.w", Shape{d, cfg_.n_experts + 1}, 0, d);
    for (int j = 0; j < cfg_.n_experts; ++j) {
        std::string p = "dec.exp" + std::to_string(j) + ".";
        reg(p + "w1", Shape{d, fh}, 0, d);
        reg(p + "b1", Shape{fh}, 1, 0);
        reg(p + "w2", Shape{fh, d}, 0, fh);
        reg(p + "b2", Shape{d}, 1, 0);
    }
    reg("dec.norm.scale", Shape{d}, 2, 0);
    reg("dec.norm.shift", Shape{d}, 1, 0);
    reg("dec.key.w", Shape{d, d}, 0, d);
}

int Policy::feat_dim() const {
    switch (problem_) {
        case Problem::motsp: return 2 * kappa_;
        case Problem::mocvrp: return 3;
        case Problem::mokp: return 1 + kappa_;
    }
    return 0;
}

Parameter& Policy::reg(const std::string& name, Shape shape, int init_kind, int fan_in) {
    Parameter& p = store_.add(name, shape);
    init_specs_.push_back({init_kind, fan_in});
    return p;
}

void Policy::init_params(uint64_t seed) {
    Rng rng(derive_seed(seed, stream_tag("model.init")));
    for (size_t i = 0; i < store_.size(); ++i) {
        Parameter& p = store_[i];
        const InitSpec& spec = init_specs_[i];
        switch (spec.kind) {
            case 0: {
                double bound = 1.0 / std::sqrt(static_cast<double>(spec.fan_in));
                for (int64_t j = 0; j < p.data.numel(); ++j)
                    p.data.at(j) = rng.uniform(-bound, bound);
                break;
            }
            case 1: p.data.fill(0.0); break;
            case 2: p.data.fill(1.0); break;
        }
        p.adam_m.fill(0.0);
        p.adam_v.fill(0.0);
        p.zero_grad();
    }
}

Value Policy::mha(Graph& g, Value q_in, Value kv_in, const Mha& p) {
    const int d = cfg_.embed_dim;
    const int dh = d / cfg_.n_heads;
    Value q = matmul(q_in, g.param(*p.wq));
    Value k = matmul(kv_in, g.param(*p.wk));
    Value v = matmul(kv_in, g.param(*p.wv));
    std::vector<Value> heads;
    heads.reserve(static_cast<size_t>(cfg_.n_heads));
    for (int h = 0; h < cfg_.n_heads; ++h) {
        auto ix = iota_idx(int64_t(h) * dh, dh);
        Value qh = gather(q, 1, ix);
        Value kh = gather(k, 1, ix);
        Value vh = gather(v, 1, ix);
        Value sc = scale(matmul(qh, kh, false, true), 1.0 / std::sqrt(double(dh)));
        heads.push_back(matmul(softmax(sc, 1), vh));
    }
    Value cat = concat(heads, 1);
    return matmul(cat, g.param(*p.wo));
}

Value Policy::ff(Graph& g, Value x, Parameter& w1, Parameter& b1, Parameter& w2,
                 Parameter& b2) {
    Value h = relu(add(matmul(x, g.param(w1)), g.param(b1)));
    return add(matmul(h, g.param(w2)), g.param(b2));
}

Value Policy::norm_tokens(Graph& g, Value x, Parameter& scale_p, Parameter& shift_p,
                          int axis) {
    Value n = instance_norm(x, axis);
    return add(mul(n, g.param(scale_p)), g.param(shift_p));
}

Embeddings Policy::encode(Graph& g, const problems::Instance& inst,
                          std::span<const double> lambda) {
    if (inst.problem != problem_)
        throw DataError("policy is bound to " + problems::problem_name(problem_) +
                        ", got a " + problems::problem_name(inst.problem) + " instance");
    if (inst.kappa != kappa_)
        throw DataError("policy expects kappa " + std::to_string(kappa_) + ", got " +
                        std::to_string(inst.kappa));
    if (static_cast<int>(lambda.size()) != kappa_)
        throw DataError("weight vector size " + std::to_string(lambda.size()) +
                        " does not match kappa " + std::to_string(kappa_));

    const int n = inst.n;
    const int z = feat_dim();
    Value feats = g.constant(ArrayF64(Shape{n, z}, inst.features));
    Value lam = g.constant(
        ArrayF64(Shape{1, kappa_}, std::vector<double>(lambda.begin(), lambda.end())));

    Value h_nodes = add(matmul(feats, g.param(find("in.node.w"))),
                        g.param(find("in.node.b")));
    Value h_lam = add(matmul(lam, g.param(find("in.wvec.w"))),
                      g.param(find("in.wvec.b")));
    std::array<Value, 2> first = {h_lam, h_nodes};
    Value tokens = concat(first, 0);

    auto node_ix = iota_idx(1, n);
    for (int l = 0; l < cfg_.n_layers; ++l) {
        std::string p = "enc" + std::to_string(l) + ".";
        Value hl = gather(tokens, 0, {0});
        Value gam = matmul(hl, g.param(find(p + "film.g")));
        Value bet = matmul(hl, g.param(find(p + "film.b")));
        Value cond = add(mul(gather(tokens, 0, node_ix), gam), bet);
        std::array<Value, 2> qkv_parts = {hl, cond};
        Value qkv = concat(qkv_parts, 0);
        Mha attn = {&find(p + "attn.wq"), &find(p + "attn.wk"), &find(p + "attn.wv"),
                    &find(p + "attn.wo")};
        Value t1 = norm_tokens(g, add(tokens, mha(g, qkv, qkv, attn)),
                               find(p + "norm1.scale"), find(p + "norm1.shift"), 0);
        Value f = ff(g, t1, find(p + "ff.w1"), find(p + "ff.b1"), find(p + "ff.w2"),
                     find(p + "ff.b2"));
        tokens = norm_tokens(g, add(t1, f), find(p + "norm2.scale"),
                             find(p + "norm2.shift"), 0);
        if (!all_finite(tokens.data()))
            throw NumericError("non-finite activations in encoder layer " +
                               std::to_string(l));
    }

    Embeddings e;
    e.tokens = tokens;
    e.weight = gather(tokens, 0, {0});
    e.nodes = gather(tokens, 0, node_ix);
    return e;
}

Value Policy::context_query(Graph& g, const Embeddings& e,
                            const problems::EnvState& state) {
    const problems::Instance& inst = *state.inst;
    Value ctx;
    switch (problem_) {
        case Problem::motsp: {
            if (state.partial.empty()) {
                ctx = g.param(find("dec.start"));
            } else {
                Value hf = gather(e.nodes, 0, {state.partial.front()});
                Value hl = gather(e.nodes, 0, {state.partial.back()});
                std::array<Value, 2> parts = {hf, hl};
                ctx = concat(parts, 1);
            }
            break;
        }
        case Problem::mocvrp: {
            Value hc = gather(e.nodes, 0, {state.current});
            Value rem = g.constant(ArrayF64(Shape{1, 1}, {state.remaining}));
            std::array<Value, 2> parts = {hc, rem};
            ctx = concat(parts, 1);
            break;
        }
        case Problem::mokp: {
            Value ones = g.constant(
                ArrayF64(Shape{1, inst.n}, std::vector<double>(size_t(inst.n), 1.0)));
            Value mean_h = scale(matmul(ones, e.nodes), 1.0 / double(inst.n));
            Value rem = g.constant(ArrayF64(Shape{1, 1}, {state.remaining}));
            std::array<Value, 2> parts = {mean_h, rem};
            ctx = concat(parts, 1);
            break;
        }
    }
    return matmul(ctx, g.param(find("dec.ctx.w")));
}

CcoOutput Policy::cco_forward(Graph& g, Value h_c) {
    const int m = cfg_.n_experts;
    Value logits = matmul(h_c, g.param(find("dec.gate.w")));
    Value kept = topk(logits, 1, cfg_.topk);
    CcoOutput out;
    out.selected = g.topk_indices(kept);
    out.gates = softmax(kept, 1);
    Value mix;
    for (int s = 0; s < cfg_.topk; ++s) {
        int64_t j = out.selected[static_cast<size_t>(s)];
        Value e_out;
        if (j == m) {
            e_out = h_c;  // identity expert
        } else {
            std::string p = "dec.exp" + std::to_string(j) + ".";
            e_out = ff(g, h_c, find(p + "w1"), find(p + "b1"), find(p + "w2"),
                       find(p + "b2"));
        }
        Value term = mul(e_out, gather(out.gates, 1, {s}));
        mix = mix.valid() ? add(mix, term) : term;
    }
    Value pre = add(mix, h_c);
    out.out = norm_tokens(g, pre, find("dec.norm.scale"), find("dec.norm.shift"), 1);
    if (cco_log) cco_log->push_back(out);
    return out;
}

Value Policy::decode_logits(Graph& g, const Embeddings& e,
                            const problems::EnvState& state) {
    if (state.done) throw DataError("decode on a finished episode");
    const int d = cfg_.embed_dim;
    Value q = context_query(g, e, state);
    Mha attn = {&find("dec.attn.wq"), &find("dec.attn.wk"), &find("dec.attn.wv"),
                &find("dec.attn.wo")};
    Value h_c = mha(g, q, e.tokens, attn);
    CcoOutput cco = cco_forward(g, h_c);
    Value keys = matmul(e.nodes, g.param(find("dec.key.w")));
    Value sc = scale(matmul(cco.out, keys, false, true), 1.0 / std::sqrt(double(d)));
    Value alpha = scale(tanh(sc), cfg_.clip);
    std::vector<uint8_t> feasible = problems::feasible_mask(state);
    std::vector<uint8_t> blocked(feasible.size());
    for (size_t i = 0; i < feasible.size(); ++i) blocked[i] = feasible[i] ? 0 : 1;
    return masked_fill(alpha, std::move(blocked), kNegInf);
}

Trajectory Policy::rollout(Graph& g, const Embeddings& e,
                           const problems::Instance& inst, DecodeMode mode, Rng& rng,
                           const std::vector<int>* forced) {
    problems::EnvState state = problems::env_reset(inst);
    Trajectory traj;
    std::vector<Value> steps;
    size_t t = 0;
    while (!state.done) {
        Value alpha = decode_logits(g, e, state);
        Value logp = log_softmax(alpha, 1);
        const ArrayF64& lp = logp.data();
        int action;
        if (forced) {
            if (t >= forced->size())
                throw DataError("forced action sequence ended before the episode");
            action = (*forced)[t];
        } else if (mode == DecodeMode::greedy) {
            action = 0;
            for (int i = 1; i < inst.n; ++i)
                if (lp.at(i) > lp.at(action)) action = i;
        } else {
            std::vector<double> probs(static_cast<size_t>(inst.n));
            for (int i = 0; i < inst.n; ++i)
                probs[static_cast<size_t>(i)] = lp.at(i) == kNegInf ? 0.0 : std::exp(lp.at(i));
            action = static_cast<int>(rng.categorical(probs.data(), probs.size()));
        }
        Value chosen = gather(logp, 1, {action});
        steps.push_back(chosen);
        traj.step_logp.push_back(chosen.item());
        problems::env_step(state, action);
        ++t;
    }
    traj.actions = state.partial;
    traj.objectives = problems::evaluate(inst, state.partial);
    Value cat = steps.size() == 1 ? steps[0] : concat(steps, 0);
    traj.avg_ll = scale(sum(cat, 0), 1.0 / double(steps.size()));
    return traj;
}

Trajectory Policy::rollout(Graph& g, const problems::Instance& inst,
                           std::span<const double> lambda, DecodeMode mode, Rng& rng,
                           const std::vector<int>* forced) {
    Embeddings e = encode(g, inst, lambda);
    return rollout(g, e, inst, mode, rng, forced);
}

double avg_log_likelihood(const Trajectory& t) {
    if (t.step_logp.empty()) throw DataError("empty trajectory");
    double s = 0.0;
    for (double lp : t.step_logp) s += lp;
    return s / double(t.step_logp.size());
}

}  // namespace moco::model
