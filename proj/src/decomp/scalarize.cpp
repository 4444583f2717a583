#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <initializer_list>
#include <string>

#include "moco/decomp/scalarize.hpp"
#include "moco/util/error.hpp"

namespace moco::decomp {

std::string scalarization_name(Scalarization s) {
    switch (s) {
        case Scalarization::weighted_sum: return "weighted_sum";
        case Scalarization::tchebycheff: return "tchebycheff";
        case Scalarization::pbi: return "pbi";
    }
    return "?";
}

Scalarization parse_scalarization(const std::string& s) {
    if (s == "weighted_sum") return Scalarization::weighted_sum;
    if (s == "tchebycheff") return Scalarization::tchebycheff;
    if (s == "pbi") return Scalarization::pbi;
    throw DataError("unknown scalarization '" + s +
                    "' (expected weighted_sum|tchebycheff|pbi)");
}

double scalarize(const ScalarizationConfig& cfg, std::span<const double> f,
                 std::span<const double> lambda) {
    if (f.size() != lambda.size())
        throw DataError("objective count " + std::to_string(f.size()) +
                        " does not match weight count " + std::to_string(lambda.size()));
    size_t k = f.size();
    if (cfg.kind != Scalarization::weighted_sum && cfg.ideal.size() != k)
        throw DataError("ideal point size " + std::to_string(cfg.ideal.size()) +
                        " does not match objective count " + std::to_string(k));
    switch (cfg.kind) {
        case Scalarization::weighted_sum: {
            double s = 0.0;
            for (size_t j = 0; j < k; ++j) s += lambda[j] * f[j];
            return s;
        }
        case Scalarization::tchebycheff: {
            double m = 0.0;
            for (size_t j = 0; j < k; ++j)
                m = std::max(m, lambda[j] * std::abs(f[j] - cfg.ideal[j]));
            return m;
        }
        case Scalarization::pbi: {
            double lnorm = 0.0, proj = 0.0;
            for (size_t j = 0; j < k; ++j) {
                lnorm += lambda[j] * lambda[j];
                proj += (f[j] - cfg.ideal[j]) * lambda[j];
            }
            lnorm = std::sqrt(lnorm);
            if (lnorm == 0.0) throw DataError("pbi requires a non-zero weight vector");
            double d1 = std::abs(proj) / lnorm;
            double d2sq = 0.0;
            for (size_t j = 0; j < k; ++j) {
                // foot of the projection lies at z* + d1 * lambda / ||lambda||
                double r = f[j] - (cfg.ideal[j] + d1 * lambda[j] / lnorm);
                d2sq += r * r;
            }
            return d1 + cfg.pbi_alpha * std::sqrt(d2sq);
        }
    }
    return 0.0;
}

std::vector<double> to_min_orientation(problems::Problem p, std::vector<double> f) {
    if (problems::is_maximization(p))
        for (double& x : f) x = -x;
    return f;
}

namespace {
int nearest(int n, std::initializer_list<int> sizes) {
    int best = *sizes.begin();
    for (int s : sizes)
        if (std::abs(n - s) < std::abs(n - best)) best = s;
    return best;
}
}  // namespace

std::vector<double> default_ideal(problems::Problem p, int n, int kappa) {
    using problems::Problem;
    switch (p) {
        case Problem::motsp:
        case Problem::mocvrp:
            return std::vector<double>(static_cast<size_t>(kappa), 0.0);
        case Problem::mokp: {
            int s = nearest(n, {50, 100, 200});
            double z = s == 50 ? 30.0 : s == 100 ? 50.0 : 75.0;
            return std::vector<double>(static_cast<size_t>(kappa), -z);
        }
    }
    return {};
}

}  // namespace moco::decomp
