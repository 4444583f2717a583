#include "moco/util/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace moco {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

template <typename T>
void take(json& j, const char* key, T& out) {
    auto it = j.find(key);
    if (it == j.end()) return;
    out = it->get<T>();
    j.erase(it);
}

void reject_leftovers(const json& j, const char* where) {
    if (!j.empty())
        throw DataError(std::string("unknown config key '") + j.begin().key() + "' in " +
                        where);
}

}  // namespace

train::TrainConfig train_config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw DataError("config must be a JSON object");

    train::TrainConfig cfg;
    try {
        std::string problem = problems::problem_name(cfg.problem);
        std::string scheme = decomp::scalarization_name(cfg.scheme);
        take(j, "problem", problem);
        take(j, "kappa", cfg.kappa);
        take(j, "n_nodes", cfg.n_nodes);
        take(j, "algorithm", cfg.algorithm);
        take(j, "batch", cfg.batch);
        take(j, "k_samples", cfg.k_samples);
        take(j, "beta", cfg.beta);
        take(j, "steps", cfg.steps);
        take(j, "validate_every", cfg.validate_every);
        take(j, "val_instances", cfg.val_instances);
        take(j, "weight_h", cfg.weight_h);
        take(j, "scheme", scheme);
        take(j, "pbi_alpha", cfg.pbi_alpha);
        take(j, "seed", cfg.seed);
        take(j, "threads", cfg.threads);
        take(j, "timings", cfg.timings);
        cfg.problem = problems::parse_problem(problem);
        cfg.scheme = decomp::parse_scalarization(scheme);

        if (auto it = j.find("adam"); it != j.end()) {
            json a = *it;
            j.erase(it);
            take(a, "lr", cfg.adam.lr);
            take(a, "beta1", cfg.adam.beta1);
            take(a, "beta2", cfg.adam.beta2);
            take(a, "eps", cfg.adam.eps);
            take(a, "weight_decay", cfg.adam.weight_decay);
            reject_leftovers(a, "adam");
        }
        if (auto it = j.find("model"); it != j.end()) {
            json m = *it;
            j.erase(it);
            take(m, "embed_dim", cfg.model.embed_dim);
            take(m, "n_layers", cfg.model.n_layers);
            take(m, "n_heads", cfg.model.n_heads);
            take(m, "n_experts", cfg.model.n_experts);
            take(m, "topk", cfg.model.topk);
            take(m, "clip", cfg.model.clip);
            take(m, "ff_hidden", cfg.model.ff_hidden);
            reject_leftovers(m, "model");
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("config: ") + e.what());
    }
    reject_leftovers(j, "config");
    cfg.validate();
    return cfg;
}

std::string train_config_to_json_text(const train::TrainConfig& cfg) {
    ordered_json j;
    j["problem"] = problems::problem_name(cfg.problem);
    j["kappa"] = cfg.kappa;
    j["n_nodes"] = cfg.n_nodes;
    j["algorithm"] = cfg.algorithm;
    j["batch"] = cfg.batch;
    j["k_samples"] = cfg.k_samples;
    j["beta"] = cfg.beta;
    j["steps"] = cfg.steps;
    j["validate_every"] = cfg.validate_every;
    j["val_instances"] = cfg.val_instances;
    j["weight_h"] = cfg.weight_h;
    j["scheme"] = decomp::scalarization_name(cfg.scheme);
    j["pbi_alpha"] = cfg.pbi_alpha;
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    j["timings"] = cfg.timings;
    j["adam"] = {{"lr", cfg.adam.lr},
                 {"beta1", cfg.adam.beta1},
                 {"beta2", cfg.adam.beta2},
                 {"eps", cfg.adam.eps},
                 {"weight_decay", cfg.adam.weight_decay}};
    j["model"] = {{"embed_dim", cfg.model.embed_dim},
                  {"n_layers", cfg.model.n_layers},
                  {"n_heads", cfg.model.n_heads},
                  {"n_experts", cfg.model.n_experts},
                  {"topk", cfg.model.topk},
                  {"clip", cfg.model.clip},
                  {"ff_hidden", cfg.model.ff_hidden}};
    return j.dump(2) + "\n";
}

train::TrainConfig load_train_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return train_config_from_json_text(ss.str());
}

void write_resolved_config(const std::string& path, const train::TrainConfig& cfg) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot open '" + path + "' for writing");
    os << train_config_to_json_text(cfg);
    if (!os.good()) throw DataError("failed writing '" + path + "'");
}

}  // namespace moco
