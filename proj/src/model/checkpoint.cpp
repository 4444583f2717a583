#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "moco/model/checkpoint.hpp"

namespace moco::model {

static_assert(std::endian::native == std::endian::little,
              "checkpoint io assumes a little-endian host");

namespace {
constexpr char kMagic[8] = {'M', 'O', 'C', 'O', 'C', 'K', 'P', '1'};
}

void save_checkpoint(const std::string& path, const Policy& policy) {
    const tensor::ParamStore& store = policy.params();
    nlohmann::ordered_json header;
    header["problem"] = problems::problem_name(policy.problem());
    header["kappa"] = policy.kappa();
    const ModelConfig& c = policy.config();
    header["config"] = {{"embed_dim", c.embed_dim}, {"n_layers", c.n_layers},
                        {"n_heads", c.n_heads},     {"n_experts", c.n_experts},
                        {"topk", c.topk},           {"clip", c.clip},
                        {"ff_hidden", c.ff_hidden}};
    nlohmann::ordered_json manifest = nlohmann::ordered_json::array();
    uint64_t offset = 0;
    for (size_t i = 0; i < store.size(); ++i) {
        const tensor::Parameter& p = store[i];
        nlohmann::ordered_json entry;
        entry["name"] = p.name;
        auto shape = nlohmann::ordered_json::array();
        for (int r = 0; r < p.data.shape.rank; ++r) shape.push_back(p.data.shape[r]);
        entry["shape"] = shape;
        entry["offset"] = offset;
        manifest.push_back(entry);
        offset += static_cast<uint64_t>(p.data.numel()) * sizeof(double);
    }
    header["params"] = manifest;
    std::string hs = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    out.write(kMagic, 8);
    uint64_t hlen = hs.size();
    out.write(reinterpret_cast<const char*>(&hlen), 8);
    out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    for (size_t i = 0; i < store.size(); ++i) {
        const tensor::Parameter& p = store[i];
        out.write(reinterpret_cast<const char*>(p.data.data()),
                  static_cast<std::streamsize>(p.data.numel() * sizeof(double)));
    }
    if (!out) throw DataError("write failed for '" + path + "'");
}

Policy load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw DataError("'" + path + "' is not a checkpoint file (bad magic)");
    uint64_t hlen = 0;
    in.read(reinterpret_cast<char*>(&hlen), 8);
    if (!in || hlen == 0 || hlen > (1u << 26))
        throw DataError("'" + path + "': corrupt header length");
    std::string hs(hlen, '\0');
    in.read(hs.data(), static_cast<std::streamsize>(hlen));
    if (!in) throw DataError("'" + path + "': truncated header");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(hs);
    } catch (const std::exception& e) {
        throw DataError("'" + path + "': invalid header JSON: " + e.what());
    }
    for (auto& [key, _] : header.items())
        if (key != "problem" && key != "kappa" && key != "config" && key != "params")
            throw DataError("'" + path + "': unknown header key '" + key + "'");
    if (!header.contains("problem") || !header.contains("kappa") ||
        !header.contains("config") || !header.contains("params"))
        throw DataError("'" + path + "': incomplete header");

    problems::Problem problem = problems::parse_problem(header["problem"].get<std::string>());
    int kappa = header["kappa"].get<int>();
    const auto& jc = header["config"];
    for (auto& [key, _] : jc.items())
        if (key != "embed_dim" && key != "n_layers" && key != "n_heads" &&
            key != "n_experts" && key != "topk" && key != "clip" && key != "ff_hidden")
            throw DataError("'" + path + "': unknown config key '" + key + "'");
    ModelConfig cfg;
    cfg.embed_dim = jc.at("embed_dim").get<int>();
    cfg.n_layers = jc.at("n_layers").get<int>();
    cfg.n_heads = jc.at("n_heads").get<int>();
    cfg.n_experts = jc.at("n_experts").get<int>();
    cfg.topk = jc.at("topk").get<int>();
    cfg.clip = jc.at("clip").get<double>();
    cfg.ff_hidden = jc.at("ff_hidden").get<int>();

    Policy policy(problem, kappa, cfg);
    tensor::ParamStore& store = policy.params();
    const auto& manifest = header["params"];
    if (manifest.size() != store.size())
        throw DataError("'" + path + "': manifest lists " + std::to_string(manifest.size()) +
                        " parameters, model has " + std::to_string(store.size()));
    uint64_t expect_offset = 0;
    for (size_t i = 0; i < store.size(); ++i) {
        tensor::Parameter& p = store[i];
        const auto& entry = manifest[i];
        if (entry.at("name").get<std::string>() != p.name)
            throw DataError("'" + path + "': parameter " + std::to_string(i) + " is '" +
                            entry.at("name").get<std::string>() + "', expected '" +
                            p.name + "'");
        const auto& js = entry.at("shape");
        if (static_cast<int>(js.size()) != p.data.shape.rank)
            throw DataError("'" + path + "': shape rank mismatch for " + p.name);
        for (int r = 0; r < p.data.shape.rank; ++r)
            if (js[static_cast<size_t>(r)].get<int64_t>() != p.data.shape[r])
                throw DataError("'" + path + "': shape mismatch for " + p.name);
        if (entry.at("offset").get<uint64_t>() != expect_offset)
            throw DataError("'" + path + "': unexpected blob offset for " + p.name);
        expect_offset += static_cast<uint64_t>(p.data.numel()) * sizeof(double);
        in.read(reinterpret_cast<char*>(p.data.data()),
                static_cast<std::streamsize>(p.data.numel() * sizeof(double)));
        if (!in) throw DataError("'" + path + "': truncated parameter data at " + p.name);
    }
    in.peek();
    if (!in.eof()) throw DataError("'" + path + "': trailing bytes after parameter data");
    return policy;
}

}  // namespace moco::model
