#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "moco/problems/instance.hpp"
#include "moco/util/fmt.hpp"
#include "moco/util/rng.hpp"

namespace moco::problems {

std::string problem_name(Problem p) {
    switch (p) {
        case Problem::motsp: return "motsp";
        case Problem::mocvrp: return "mocvrp";
        case Problem::mokp: return "mokp";
    }
    return "?";
}

Problem parse_problem(const std::string& s) {
    if (s == "motsp") return Problem::motsp;
    if (s == "mocvrp") return Problem::mocvrp;
    if (s == "mokp") return Problem::mokp;
    throw DataError("unknown problem '" + s + "' (expected motsp|mocvrp|mokp)");
}

bool is_maximization(Problem p) { return p == Problem::mokp; }

namespace {

// Vehicle capacity by customer count, nearest of the standard sizes.
double cvrp_q(int customers) {
    if (customers <= 35) return 30.0;
    if (customers <= 75) return 40.0;
    return 50.0;
}

double mokp_capacity(int items) { return items < 75 ? 12.5 : 25.0; }

}  // namespace

Instance generate(Problem problem, int n, int kappa, uint64_t seed) {
    if (n < 2) throw DataError("instance size must be >= 2, got " + std::to_string(n));
    if (problem == Problem::motsp) {
        if (kappa != 2 && kappa != 3)
            throw DataError("motsp supports kappa 2 or 3, got " + std::to_string(kappa));
    } else if (kappa != 2) {
        throw DataError(problem_name(problem) + " supports kappa 2 only, got " +
                        std::to_string(kappa));
    }
    Rng rng(seed);
    Instance inst;
    inst.problem = problem;
    inst.n = n;
    inst.kappa = kappa;
    switch (problem) {
        case Problem::motsp: {
            inst.features.resize(static_cast<size_t>(n) * static_cast<size_t>(2 * kappa));
            for (double& f : inst.features) f = rng.u01();
            break;
        }
        case Problem::mocvrp: {
            double q = cvrp_q(n - 1);
            inst.capacity = 1.0;
            inst.features.resize(static_cast<size_t>(n) * 3);
            for (int i = 0; i < n; ++i) {
                inst.features[static_cast<size_t>(i * 3 + 0)] = rng.u01();
                inst.features[static_cast<size_t>(i * 3 + 1)] = rng.u01();
                inst.features[static_cast<size_t>(i * 3 + 2)] =
                    i == 0 ? 0.0 : static_cast<double>(rng.uniform_int(1, 9)) / q;
            }
            break;
        }
        case Problem::mokp: {
            inst.capacity = mokp_capacity(n);
            inst.features.resize(static_cast<size_t>(n) * 3);
            for (double& f : inst.features) f = rng.u01();
            break;
        }
    }
    validate_instance(inst);
    return inst;
}

void validate_instance(const Instance& inst) {
    if (inst.n < 2) throw DataError("instance size must be >= 2");
    int fd = inst.feat_dim();
    if (static_cast<int64_t>(inst.features.size()) !=
        static_cast<int64_t>(inst.n) * static_cast<int64_t>(fd))
        throw DataError("feature count " + std::to_string(inst.features.size()) +
                        " does not match n=" + std::to_string(inst.n) +
                        " x feat_dim=" + std::to_string(fd));
    for (double f : inst.features)
        if (!std::isfinite(f)) throw DataError("non-finite feature value");
    switch (inst.problem) {
        case Problem::motsp:
            if (inst.kappa != 2 && inst.kappa != 3) throw DataError("motsp kappa must be 2 or 3");
            break;
        case Problem::mocvrp: {
            if (inst.kappa != 2) throw DataError("mocvrp kappa must be 2");
            if (inst.capacity <= 0.0) throw DataError("mocvrp capacity must be positive");
            if (inst.feat(0, 2) != 0.0) throw DataError("depot demand must be 0");
            for (int i = 1; i < inst.n; ++i) {
                double d = inst.feat(i, 2);
                if (d <= 0.0 || d >= inst.capacity)
                    throw DataError("customer " + std::to_string(i) +
                                    " demand must lie in (0, capacity)");
            }
            break;
        }
        case Problem::mokp: {
            if (inst.kappa != 2) throw DataError("mokp kappa must be 2");
            if (inst.capacity <= 0.0) throw DataError("mokp capacity must be positive");
            for (int i = 0; i < inst.n; ++i)
                if (inst.feat(i, 0) >= inst.capacity)
                    throw DataError("item " + std::to_string(i) + " weight exceeds capacity");
            break;
        }
    }
}

void write_instances(std::ostream& os, const std::vector<Instance>& list,
                     const std::string& header_comment) {
    if (!header_comment.empty()) os << "# " << header_comment << "\n";
    for (const Instance& inst : list) {
        os << "{\"problem\":\"" << problem_name(inst.problem) << "\",\"n\":" << inst.n
           << ",\"kappa\":" << inst.kappa << ",\"features\":[";
        for (size_t i = 0; i < inst.features.size(); ++i) {
            if (i) os << ",";
            os << fmt_f64(inst.features[i]);
        }
        os << "]";
        if (inst.problem != Problem::motsp) os << ",\"capacity\":" << fmt_f64(inst.capacity);
        os << "}\n";
    }
}

void write_instances_file(const std::string& path, const std::vector<Instance>& list,
                          const std::string& header_comment) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open for writing: " + path);
    write_instances(os, list, header_comment);
}

std::vector<Instance> read_instances(std::istream& is) {
    std::vector<Instance> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError("line " + std::to_string(lineno) + ": invalid JSON: " + e.what());
        }
        auto fail = [&](const std::string& msg) -> DataError {
            return DataError("line " + std::to_string(lineno) + ": " + msg);
        };
        if (!j.is_object()) throw fail("expected a JSON object");
        for (auto it = j.begin(); it != j.end(); ++it) {
            const std::string& k = it.key();
            if (k != "problem" && k != "n" && k != "kappa" && k != "features" && k != "capacity")
                throw fail("unknown key '" + k + "'");
        }
        for (const char* k : {"problem", "n", "kappa", "features"})
            if (!j.contains(k)) throw fail(std::string("missing key '") + k + "'");
        Instance inst;
        try {
            inst.problem = parse_problem(j.at("problem").get<std::string>());
            inst.n = j.at("n").get<int>();
            inst.kappa = j.at("kappa").get<int>();
            inst.features = j.at("features").get<std::vector<double>>();
            if (j.contains("capacity")) inst.capacity = j.at("capacity").get<double>();
        } catch (const nlohmann::json::exception& e) {
            throw fail(std::string("bad field type: ") + e.what());
        }
        if (inst.problem != Problem::motsp && !j.contains("capacity"))
            throw fail("missing key 'capacity'");
        if (inst.problem == Problem::motsp && j.contains("capacity"))
            throw fail("motsp instances must not carry 'capacity'");
        try {
            validate_instance(inst);
        } catch (const DataError& e) {
            throw fail(e.what());
        }
        out.push_back(std::move(inst));
    }
    return out;
}

std::vector<Instance> read_instances_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open: " + path);
    return read_instances(is);
}

}  // namespace moco::problems
