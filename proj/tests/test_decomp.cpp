#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "moco/decomp/scalarize.hpp"
#include "moco/decomp/weights.hpp"
#include "moco/util/error.hpp"
#include "moco/util/rng.hpp"

using namespace moco;
using namespace moco::decomp;

namespace {

int64_t binom(int64_t n, int64_t k) {
    int64_t r = 1;
    for (int64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

TEST_CASE("das_dennis counts match the lattice formula") {
    CHECK(das_dennis(2, 100).size() == 101);
    CHECK(das_dennis(3, 13).size() == 105);
    for (int H : {1, 2, 3, 7, 25, 100}) {
        CHECK(das_dennis(2, H).size() == size_t(binom(H + 1, 1)));
        CHECK(das_dennis(3, H).size() == size_t(binom(H + 2, 2)));
    }
}

TEST_CASE("das_dennis enumeration for kappa=2 H=2") {
    auto w = das_dennis(2, 2);
    REQUIRE(w.size() == 3);
    CHECK(w[0] == std::vector<double>{0.0, 1.0});
    CHECK(w[1] == std::vector<double>{0.5, 0.5});
    CHECK(w[2] == std::vector<double>{1.0, 0.0});
}

TEST_CASE("das_dennis vectors live on the simplex lattice in lexicographic order") {
    for (int kappa : {2, 3}) {
        int H = kappa == 2 ? 100 : 13;
        auto ws = das_dennis(kappa, H);
        for (size_t i = 0; i < ws.size(); ++i) {
            REQUIRE(ws[i].size() == size_t(kappa));
            double sum = 0.0;
            for (double v : ws[i]) {
                CHECK(v >= 0.0);
                double scaled = v * H;
                CHECK(std::abs(scaled - std::round(scaled)) < 1e-9);
                sum += v;
            }
            CHECK(std::abs(sum - 1.0) <= 1e-12);
            if (i > 0) CHECK(ws[i - 1] < ws[i]);
        }
    }
}

TEST_CASE("weight csv round trip is bit exact") {
    auto ws = das_dennis(3, 13);
    auto path = std::filesystem::temp_directory_path() / "moco_test_weights.csv";
    write_weights_csv(path.string(), ws);
    auto back = read_weights_csv(path.string());
    REQUIRE(back.size() == ws.size());
    for (size_t i = 0; i < ws.size(); ++i)
        for (size_t j = 0; j < ws[i].size(); ++j)
            CHECK(back[i][j] == ws[i][j]);
    std::filesystem::remove(path);
}

TEST_CASE("weighted sum examples") {
    ScalarizationConfig cfg;
    cfg.kind = Scalarization::weighted_sum;
    std::vector<double> f = {3.0, 4.0}, lam = {0.25, 0.75};
    CHECK(scalarize(cfg, f, lam) == doctest::Approx(3.75).epsilon(1e-15));
    CHECK(reward(cfg, f, lam) == doctest::Approx(-3.75).epsilon(1e-15));
    std::vector<double> e1 = {1.0, 0.0};
    CHECK(scalarize(cfg, f, e1) == 3.0);
    CHECK(reward(cfg, f, e1) == -3.0);
}

TEST_CASE("weighted sum is linear in the objectives") {
    ScalarizationConfig cfg;
    Rng rng(derive_seed(11, stream_tag("test.ws.linear"), 0));
    for (int t = 0; t < 20; ++t) {
        std::vector<double> lam(2), f1(2), f2(2), fc(2);
        rng.simplex(lam.data(), 2);
        double a = rng.u01() * 3.0, b = rng.u01() * 3.0;
        for (int j = 0; j < 2; ++j) {
            f1[j] = rng.u01() * 10.0;
            f2[j] = rng.u01() * 10.0;
            fc[j] = a * f1[j] + b * f2[j];
        }
        double lhs = scalarize(cfg, fc, lam);
        double rhs = a * scalarize(cfg, f1, lam) + b * scalarize(cfg, f2, lam);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("tchebycheff examples and basis-vector identity") {
    ScalarizationConfig cfg;
    cfg.kind = Scalarization::tchebycheff;
    cfg.ideal = {0.0, 0.0};
    std::vector<double> f = {2.0, 4.0}, lam = {0.5, 0.5};
    CHECK(scalarize(cfg, f, lam) == 2.0);

    std::vector<double> z = {0.5, 1.5}, lam2 = {0.3, 0.7};
    cfg.ideal = z;
    CHECK(scalarize(cfg, z, lam2) == 0.0);

    for (int i = 0; i < 2; ++i) {
        std::vector<double> e(2, 0.0);
        e[size_t(i)] = 1.0;
        std::vector<double> ff = {3.25, 7.5};
        CHECK(scalarize(cfg, ff, e) == 1.0 * std::abs(ff[size_t(i)] - z[size_t(i)]));
    }
}

TEST_CASE("pbi hand example and on-ray property") {
    ScalarizationConfig cfg;
    cfg.kind = Scalarization::pbi;
    cfg.ideal = {0.0, 0.0};
    cfg.pbi_alpha = 5.0;
    std::vector<double> f = {2.0, 1.0}, lam = {1.0, 0.0};
    CHECK(scalarize(cfg, f, lam) == doctest::Approx(7.0).epsilon(1e-14));

    Rng rng(derive_seed(12, stream_tag("test.pbi.ray"), 0));
    for (int t = 0; t < 20; ++t) {
        std::vector<double> l(2);
        rng.simplex(l.data(), 2);
        double tt = rng.u01() * 5.0;
        std::vector<double> z = {rng.u01(), rng.u01()};
        std::vector<double> on_ray = {z[0] + tt * l[0], z[1] + tt * l[1]};
        cfg.ideal = z;
        double lnorm = std::sqrt(l[0] * l[0] + l[1] * l[1]);
        CHECK(scalarize(cfg, on_ray, l) == doctest::Approx(tt * lnorm).epsilon(1e-10));
    }
}

TEST_CASE("weighted sum and tchebycheff are monotone under componentwise domination") {
    // pbi is excluded on purpose: with a large off-ray penalty, a dominated
    // point that lies closer to the weight ray can score better (d2 shrinks
    // faster than d1 grows), so domination does not order pbi values.
    Rng rng(derive_seed(13, stream_tag("test.scal.mono"), 0));
    for (auto kind : {Scalarization::weighted_sum, Scalarization::tchebycheff}) {
        ScalarizationConfig cfg;
        cfg.kind = kind;
        cfg.ideal = {0.0, 0.0};
        for (int t = 0; t < 50; ++t) {
            std::vector<double> lam(2);
            rng.simplex(lam.data(), 2);
            std::vector<double> f(2), g(2);
            for (int j = 0; j < 2; ++j) {
                f[size_t(j)] = rng.u01() * 5.0;
                g[size_t(j)] = f[size_t(j)] + rng.u01() * 3.0;
            }
            CHECK(scalarize(cfg, f, lam) <= scalarize(cfg, g, lam) + 1e-12);
        }
    }
}

TEST_CASE("scalarization name round trip and errors") {
    for (auto k : {Scalarization::weighted_sum, Scalarization::tchebycheff,
                   Scalarization::pbi})
        CHECK(parse_scalarization(scalarization_name(k)) == k);
    CHECK_THROWS_AS(parse_scalarization("nope"), DataError);

    ScalarizationConfig cfg;
    std::vector<double> f = {1.0, 2.0}, lam = {1.0};
    CHECK_THROWS_AS(scalarize(cfg, f, lam), DataError);
    cfg.kind = Scalarization::tchebycheff;
    cfg.ideal = {0.0};
    std::vector<double> lam2 = {0.5, 0.5};
    CHECK_THROWS_AS(scalarize(cfg, f, lam2), DataError);
}

TEST_CASE("min orientation negates only maximization problems") {
    using problems::Problem;
    auto f = to_min_orientation(Problem::motsp, {1.0, -2.0});
    CHECK(f == std::vector<double>{1.0, -2.0});
    f = to_min_orientation(Problem::mocvrp, {3.0, 4.0});
    CHECK(f == std::vector<double>{3.0, 4.0});
    f = to_min_orientation(Problem::mokp, {3.0, 4.0});
    CHECK(f == std::vector<double>{-3.0, -4.0});
}

TEST_CASE("default ideal points") {
    using problems::Problem;
    CHECK(default_ideal(Problem::motsp, 20, 2) == std::vector<double>{0.0, 0.0});
    CHECK(default_ideal(Problem::motsp, 50, 3) == std::vector<double>(3, 0.0));
    CHECK(default_ideal(Problem::mocvrp, 100, 2) == std::vector<double>{0.0, 0.0});
    CHECK(default_ideal(Problem::mokp, 50, 2) == std::vector<double>{-30.0, -30.0});
    CHECK(default_ideal(Problem::mokp, 100, 2) == std::vector<double>{-50.0, -50.0});
    CHECK(default_ideal(Problem::mokp, 200, 2) == std::vector<double>{-75.0, -75.0});
    CHECK(default_ideal(Problem::mokp, 130, 2) == std::vector<double>{-50.0, -50.0});
}
