#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "moco/model/checkpoint.hpp"
#include "moco/model/policy.hpp"
#include "moco/problems/env.hpp"
#include "moco/tensor/gradcheck.hpp"
#include "moco/util/rng.hpp"

using namespace moco;
using model::DecodeMode;
using model::ModelConfig;
using model::Policy;
using problems::Instance;
using problems::Problem;

namespace {

ModelConfig tiny_cfg() {
    ModelConfig c;
    c.embed_dim = 8;
    c.n_layers = 1;
    c.n_heads = 2;
    c.n_experts = 2;
    c.topk = 2;
    return c;
}

Policy tiny_policy(uint64_t seed = 7, Problem p = Problem::motsp, int kappa = 2) {
    Policy pol(p, kappa, tiny_cfg());
    pol.init_params(seed);
    return pol;
}

Instance permuted(const Instance& inst, const std::vector<int>& perm) {
    Instance out = inst;
    int fd = inst.feat_dim();
    for (int i = 0; i < inst.n; ++i)
        for (int j = 0; j < fd; ++j)
            out.features[size_t(i * fd + j)] = inst.features[size_t(perm[size_t(i)] * fd + j)];
    return out;
}

double max_abs_diff_row(const tensor::ArrayF64& a, int64_t ra, const tensor::ArrayF64& b,
                        int64_t rb) {
    int64_t d = a.shape[1];
    double m = 0.0;
    for (int64_t j = 0; j < d; ++j)
        m = std::max(m, std::abs(a.at(ra * d + j) - b.at(rb * d + j)));
    return m;
}

}  // namespace

TEST_CASE("same seed gives identical parameters, different seed differs") {
    Policy a = tiny_policy(3), b = tiny_policy(3), c = tiny_policy(4);
    REQUIRE(a.params().size() == b.params().size());
    bool any_diff = false;
    for (size_t i = 0; i < a.params().size(); ++i) {
        const auto& pa = a.params()[i];
        const auto& pb = b.params()[i];
        CHECK(pa.name == pb.name);
        for (int64_t j = 0; j < pa.data.numel(); ++j) CHECK(pa.data.at(j) == pb.data.at(j));
        const auto& pc = c.params()[i];
        for (int64_t j = 0; j < pa.data.numel(); ++j)
            if (pa.data.at(j) != pc.data.at(j)) any_diff = true;
    }
    CHECK(any_diff);
}

TEST_CASE("encoder is permutation-equivariant over nodes (1e-10)") {
    Policy pol = tiny_policy(11);
    Rng r(5);
    std::vector<double> lambda{0.3, 0.7};
    for (int rep = 0; rep < 5; ++rep) {
        Instance inst = problems::generate(Problem::motsp, 7, 2, 100 + uint64_t(rep));
        std::vector<int> perm(7);
        for (int i = 0; i < 7; ++i) perm[size_t(i)] = i;
        for (int i = 6; i > 0; --i)
            std::swap(perm[size_t(i)], perm[size_t(r.uniform_int(0, i))]);

        tensor::Graph g1, g2;
        auto e1 = pol.encode(g1, inst, lambda);
        auto e2 = pol.encode(g2, permuted(inst, perm), lambda);
        for (int i = 0; i < 7; ++i)
            CHECK(max_abs_diff_row(e2.nodes.data(), i, e1.nodes.data(), perm[size_t(i)]) <
                  1e-10);
        CHECK(max_abs_diff_row(e2.weight.data(), 0, e1.weight.data(), 0) < 1e-10);
    }
}

TEST_CASE("node embeddings depend on the weight vector") {
    Policy pol = tiny_policy(13);
    Instance inst = problems::generate(Problem::motsp, 6, 2, 42);
    tensor::Graph g1, g2;
    std::vector<double> l1{1.0, 0.0}, l2{0.0, 1.0};
    auto e1 = pol.encode(g1, inst, l1);
    auto e2 = pol.encode(g2, inst, l2);
    double diff = 0.0;
    for (int64_t i = 0; i < e1.nodes.data().numel(); ++i)
        diff = std::max(diff, std::abs(e1.nodes.data().at(i) - e2.nodes.data().at(i)));
    CHECK(diff > 1e-6);
}

TEST_CASE("two identical nodes get identical embeddings") {
    Policy pol = tiny_policy(17);
    Instance inst;
    inst.problem = Problem::motsp;
    inst.n = 4;
    inst.kappa = 2;
    inst.features = {0.1, 0.2, 0.8, 0.9,   0.5, 0.5, 0.25, 0.4,
                     0.9, 0.3, 0.1, 0.6,   0.5, 0.5, 0.25, 0.4};  // node 3 == node 1
    tensor::Graph g;
    auto e = pol.encode(g, inst, std::vector<double>{0.4, 0.6});
    CHECK(max_abs_diff_row(e.nodes.data(), 1, e.nodes.data(), 3) < 1e-14);
    CHECK(max_abs_diff_row(e.nodes.data(), 0, e.nodes.data(), 2) > 1e-8);
}

TEST_CASE("encode rejects mismatched instances and weight vectors") {
    Policy pol = tiny_policy(19);
    Instance tsp = problems::generate(Problem::motsp, 5, 2, 1);
    Instance kp = problems::generate(Problem::mokp, 5, 2, 1);
    tensor::Graph g;
    CHECK_THROWS_AS(pol.encode(g, kp, std::vector<double>{0.5, 0.5}), DataError);
    CHECK_THROWS_AS(pol.encode(g, tsp, std::vector<double>{0.5, 0.3, 0.2}), DataError);
}

TEST_CASE("decode distributions are valid and respect the feasibility mask") {
    for (Problem p : {Problem::motsp, Problem::mocvrp, Problem::mokp}) {
        Policy pol = tiny_policy(23, p);
        Instance inst = problems::generate(p, 6, 2, 9);
        tensor::Graph g;
        std::vector<double> lambda{0.5, 0.5};
        auto e = pol.encode(g, inst, lambda);
        auto state = problems::env_reset(inst);
        int guard = 0;
        while (!state.done && guard++ < 20) {
            auto mask = problems::feasible_mask(state);
            auto alpha = pol.decode_logits(g, e, state);
            auto probs = tensor::softmax(alpha, 1);
            double total = 0.0;
            int best = -1;
            for (int i = 0; i < inst.n; ++i) {
                double pr = probs.data().at(i);
                double lo = alpha.data().at(i);
                total += pr;
                if (mask[size_t(i)]) {
                    CHECK(pr > 0.0);
                    CHECK(std::abs(lo) <= pol.config().clip + 1e-12);
                    if (best < 0 || lo > alpha.data().at(best)) best = i;
                } else {
                    CHECK(pr == 0.0);
                    CHECK(std::isinf(lo));
                }
            }
            CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
            problems::env_step(state, best);
        }
        CHECK(state.done);
    }
}

TEST_CASE("routing keeps exactly topk experts with gates summing to 1") {
    ModelConfig mc = tiny_cfg();
    mc.n_experts = 4;
    mc.topk = 3;
    Policy pol(Problem::motsp, 2, mc);
    pol.init_params(29);
    Rng r(31);
    for (int rep = 0; rep < 10; ++rep) {
        tensor::Graph g;
        std::vector<double> h(static_cast<size_t>(mc.embed_dim));
        for (double& x : h) x = r.uniform(-2.0, 2.0);
        auto cco = pol.cco_forward(g, g.constant(tensor::ArrayF64(
                                          tensor::Shape{1, mc.embed_dim}, h)));
        REQUIRE(cco.selected.size() == 3);
        double sum = 0.0;
        for (int s = 0; s < 3; ++s) {
            CHECK(cco.selected[size_t(s)] >= 0);
            CHECK(cco.selected[size_t(s)] <= mc.n_experts);
            sum += cco.gates.data().at(s);
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
        for (int a = 0; a < 3; ++a)
            for (int b = a + 1; b < 3; ++b)
                CHECK(cco.selected[size_t(a)] != cco.selected[size_t(b)]);
    }
}

TEST_CASE("gate logits [2,1,0,-1,3] with k=2 select experts {4,0} with gates (0.7311, 0.2689)") {
    ModelConfig mc;
    mc.embed_dim = 5;
    mc.n_heads = 1;
    mc.n_layers = 1;
    mc.n_experts = 4;
    mc.topk = 2;
    Policy pol(Problem::motsp, 2, mc);
    pol.init_params(1);
    // h_c = e_0 makes the gate logits equal to row 0 of the gate matrix.
    tensor::Parameter& w = pol.find("dec.gate.w");
    w.data.fill(0.0);
    w.data.at(0) = 2.0;
    w.data.at(1) = 1.0;
    w.data.at(2) = 0.0;
    w.data.at(3) = -1.0;
    w.data.at(4) = 3.0;

    tensor::Graph g;
    auto h_c = g.constant(tensor::ArrayF64(tensor::Shape{1, 5}, {1, 0, 0, 0, 0}));
    auto cco = pol.cco_forward(g, h_c);
    REQUIRE(cco.selected.size() == 2);
    CHECK(cco.selected[0] == 4);  // identity expert carries the largest logit
    CHECK(cco.selected[1] == 0);
    CHECK(cco.gates.data().at(0) == doctest::Approx(0.7311).epsilon(1e-4));
    CHECK(cco.gates.data().at(1) == doctest::Approx(0.2689).epsilon(1e-4));
    CHECK(cco.gates.data().at(0) + cco.gates.data().at(1) ==
          doctest::Approx(1.0).epsilon(1e-12));

    // Differentiating the routed output reaches the chosen expert (0) and the
    // gate, but leaves every unselected expert with exactly zero gradient.
    pol.params().zero_grad();
    auto loss = tensor::sum(tensor::sum(cco.out, 1), 0);
    g.backward(loss);
    for (int j : {1, 2, 3}) {
        std::string prefix = "dec.exp" + std::to_string(j) + ".";
        for (const char* leaf : {"w1", "b1", "w2", "b2"}) {
            const tensor::Parameter& p = pol.find(prefix + leaf);
            for (int64_t i = 0; i < p.grad.numel(); ++i) CHECK(p.grad.at(i) == 0.0);
        }
    }
    double sel_grad = 0.0;
    const tensor::Parameter& e0 = pol.find("dec.exp0.w1");
    for (int64_t i = 0; i < e0.grad.numel(); ++i)
        sel_grad = std::max(sel_grad, std::abs(e0.grad.at(i)));
    CHECK(sel_grad > 0.0);
    pol.params().zero_grad();
}

TEST_CASE("top-1 identity routing reproduces the normalized context vector") {
    ModelConfig mc;
    mc.embed_dim = 5;
    mc.n_heads = 1;
    mc.n_layers = 1;
    mc.n_experts = 3;
    mc.topk = 1;
    Policy pol(Problem::motsp, 2, mc);
    pol.init_params(2);
    tensor::Parameter& w = pol.find("dec.gate.w");
    w.data.fill(0.0);
    w.data.at(3) = 10.0;  // row 0, identity column (index m = 3)

    tensor::Graph g;
    auto h_c = g.constant(
        tensor::ArrayF64(tensor::Shape{1, 5}, {120.0, -80.0, 45.0, -160.0, 95.0}));
    auto cco = pol.cco_forward(g, h_c);
    REQUIRE(cco.selected.size() == 1);
    CHECK(cco.selected[0] == 3);
    CHECK(cco.gates.data().at(0) == 1.0);
    auto direct = tensor::instance_norm(h_c, 1);
    for (int64_t i = 0; i < 5; ++i)
        CHECK(cco.out.data().at(i) == doctest::Approx(direct.data().at(i)).epsilon(1e-8));
}

TEST_CASE("greedy rollouts are deterministic and their log-likelihood is non-positive") {
    for (Problem p : {Problem::motsp, Problem::mocvrp, Problem::mokp}) {
        Policy pol = tiny_policy(37, p);
        Instance inst = problems::generate(p, 7, 2, 4);
        Rng r1(0), r2(0);
        tensor::Graph g1, g2;
        std::vector<double> lambda{0.6, 0.4};
        auto t1 = pol.rollout(g1, inst, lambda, DecodeMode::greedy, r1);
        auto t2 = pol.rollout(g2, inst, lambda, DecodeMode::greedy, r2);
        CHECK(t1.actions == t2.actions);
        REQUIRE(t1.step_logp.size() == t2.step_logp.size());
        for (size_t i = 0; i < t1.step_logp.size(); ++i)
            CHECK(t1.step_logp[i] == t2.step_logp[i]);
        CHECK(t1.avg_ll.item() <= 0.0);
        CHECK(t1.avg_ll.item() ==
              doctest::Approx(model::avg_log_likelihood(t1)).epsilon(1e-12));
        CHECK(std::isfinite(t1.avg_ll.item()));
        CHECK(t1.objectives.size() == 2);
    }
}

TEST_CASE("motsp sampled trajectories visit every node exactly once") {
    Policy pol = tiny_policy(41);
    Instance inst = problems::generate(Problem::motsp, 6, 2, 8);
    Rng r(99);
    for (int rep = 0; rep < 5; ++rep) {
        tensor::Graph g;
        auto t = pol.rollout(g, inst, std::vector<double>{0.2, 0.8}, DecodeMode::sample, r);
        REQUIRE(t.actions.size() == 6);
        std::vector<int> seen(6, 0);
        for (int a : t.actions) seen[size_t(a)]++;
        for (int c : seen) CHECK(c == 1);
    }
}

TEST_CASE("forced replay reproduces a sampled trajectory's log-probs") {
    Policy pol = tiny_policy(43);
    Instance inst = problems::generate(Problem::motsp, 5, 2, 3);
    Rng r(7);
    std::vector<double> lambda{0.5, 0.5};
    tensor::Graph g1;
    auto t1 = pol.rollout(g1, inst, lambda, DecodeMode::sample, r);
    tensor::Graph g2;
    Rng unused(0);
    auto t2 = pol.rollout(g2, inst, lambda, DecodeMode::greedy, unused, &t1.actions);
    CHECK(t2.actions == t1.actions);
    for (size_t i = 0; i < t1.step_logp.size(); ++i)
        CHECK(t1.step_logp[i] == t2.step_logp[i]);

    std::vector<int> short_seq(t1.actions.begin(), t1.actions.end() - 1);
    tensor::Graph g3;
    CHECK_THROWS_AS(pol.rollout(g3, inst, lambda, DecodeMode::greedy, unused, &short_seq),
                    DataError);
}

TEST_CASE("end-to-end finite-difference gradient check on a 4-node tour") {
    Policy pol = tiny_policy(47);
    Instance inst = problems::generate(Problem::motsp, 4, 2, 12);
    std::vector<double> lambda{0.55, 0.45};
    std::vector<int> tour{0, 2, 1, 3};
    Rng unused(0);
    auto f = [&](tensor::Graph& g) {
        return pol.rollout(g, inst, lambda, DecodeMode::greedy, unused, &tour).avg_ll;
    };
    auto r = tensor::finite_diff_check(f, pol.params(), 1e-6);
    INFO("worst ", r.worst_param, "[", r.worst_index, "] analytic ", r.analytic,
         " numeric ", r.numeric);
    CHECK(r.max_rel_err < 1e-4);
}

TEST_CASE("checkpoint save/load round-trips parameters and rollouts bit-exactly") {
    Policy pol = tiny_policy(53, Problem::mocvrp);
    Instance inst = problems::generate(Problem::mocvrp, 6, 2, 21);
    std::vector<double> lambda{0.35, 0.65};
    Rng r0(0);
    tensor::Graph g0;
    auto before = pol.rollout(g0, inst, lambda, DecodeMode::greedy, r0);

    std::string path = "ckpt_roundtrip.bin";
    model::save_checkpoint(path, pol);
    Policy loaded = model::load_checkpoint(path);
    CHECK(loaded.problem() == pol.problem());
    CHECK(loaded.kappa() == pol.kappa());
    CHECK(loaded.config().embed_dim == pol.config().embed_dim);
    REQUIRE(loaded.params().size() == pol.params().size());
    for (size_t i = 0; i < pol.params().size(); ++i) {
        const auto& a = pol.params()[i];
        const auto& b = loaded.params()[i];
        CHECK(a.name == b.name);
        REQUIRE(a.data.numel() == b.data.numel());
        for (int64_t j = 0; j < a.data.numel(); ++j) CHECK(a.data.at(j) == b.data.at(j));
    }

    Rng r1(0);
    tensor::Graph g1;
    auto after = loaded.rollout(g1, inst, lambda, DecodeMode::greedy, r1);
    CHECK(after.actions == before.actions);
    for (size_t i = 0; i < before.step_logp.size(); ++i)
        CHECK(after.step_logp[i] == before.step_logp[i]);
    std::remove(path.c_str());
}

TEST_CASE("checkpoint loader rejects corrupt files") {
    Policy pol = tiny_policy(59);
    std::string path = "ckpt_corrupt.bin";
    model::save_checkpoint(path, pol);

    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();

    SUBCASE("bad magic") {
        std::string b = bytes;
        b[0] = 'X';
        std::ofstream(path, std::ios::binary).write(b.data(), std::streamsize(b.size()));
        CHECK_THROWS_WITH_AS(model::load_checkpoint(path),
                             doctest::Contains("bad magic"), DataError);
    }
    SUBCASE("truncated parameter data") {
        std::string b = bytes.substr(0, bytes.size() - 16);
        std::ofstream(path, std::ios::binary).write(b.data(), std::streamsize(b.size()));
        CHECK_THROWS_WITH_AS(model::load_checkpoint(path),
                             doctest::Contains("truncated"), DataError);
    }
    SUBCASE("trailing bytes") {
        std::string b = bytes + "xx";
        std::ofstream(path, std::ios::binary).write(b.data(), std::streamsize(b.size()));
        CHECK_THROWS_WITH_AS(model::load_checkpoint(path),
                             doctest::Contains("trailing"), DataError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(model::load_checkpoint("does_not_exist.bin"), DataError);
    }
    std::remove(path.c_str());
}

TEST_CASE("policy constructor enforces problem/kappa and width invariants") {
    ModelConfig bad = tiny_cfg();
    bad.n_heads = 3;  // 8 % 3 != 0
    CHECK_THROWS_AS(Policy(Problem::motsp, 2, bad), DataError);
    CHECK_THROWS_AS(Policy(Problem::mocvrp, 3, tiny_cfg()), DataError);
    CHECK_THROWS_AS(Policy(Problem::mokp, 3, tiny_cfg()), DataError);
    ModelConfig k1 = tiny_cfg();
    k1.topk = 4;  // > n_experts + 1
    CHECK_THROWS_AS(Policy(Problem::motsp, 2, k1), DataError);
    CHECK_NOTHROW(Policy(Problem::motsp, 3, tiny_cfg()));
}

TEST_CASE("unknown parameter lookups are rejected") {
    Policy pol = tiny_policy(61);
    CHECK_THROWS_AS(pol.find("enc9.attn.wq"), DataError);
}
