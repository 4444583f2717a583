#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <vector>

#include "doctest.h"
#include "moco/pareto/archive.hpp"
#include "moco/pareto/hypervolume.hpp"
#include "moco/util/error.hpp"
#include "moco/util/rng.hpp"

using namespace moco;
using namespace moco::pareto;
using problems::Problem;

namespace {

// Coordinate-compression oracle: exact dominated volume by summing grid
// cells whose lower corner is dominated. Independent of the sweep code.
double hv_oracle(const std::vector<std::vector<double>>& pts,
                 const std::vector<double>& lo, const std::vector<double>& hi) {
    size_t k = lo.size();
    std::vector<std::vector<double>> clipped;
    for (const auto& p : pts) {
        std::vector<double> q(k);
        bool inside = true;
        for (size_t i = 0; i < k; ++i) {
            if (p[i] >= hi[i]) { inside = false; break; }
            q[i] = std::max(p[i], lo[i]);
        }
        if (inside) clipped.push_back(q);
    }
    if (clipped.empty()) return 0.0;
    std::vector<std::vector<double>> levels(k);
    for (size_t i = 0; i < k; ++i) {
        for (const auto& q : clipped) levels[i].push_back(q[i]);
        levels[i].push_back(hi[i]);
        std::sort(levels[i].begin(), levels[i].end());
        levels[i].erase(std::unique(levels[i].begin(), levels[i].end()), levels[i].end());
    }
    double vol = 0.0;
    std::vector<size_t> idx(k, 0);
    while (true) {
        double cell = 1.0;
        bool valid = true;
        std::vector<double> corner(k);
        for (size_t i = 0; i < k; ++i) {
            if (idx[i] + 1 >= levels[i].size()) { valid = false; break; }
            corner[i] = levels[i][idx[i]];
            cell *= levels[i][idx[i] + 1] - levels[i][idx[i]];
        }
        if (valid) {
            bool dominated = false;
            for (const auto& q : clipped) {
                bool ok = true;
                for (size_t i = 0; i < k; ++i)
                    if (q[i] > corner[i]) { ok = false; break; }
                if (ok) { dominated = true; break; }
            }
            if (dominated) vol += cell;
        }
        size_t d = 0;
        while (d < k) {
            if (++idx[d] + 1 < levels[d].size()) break;
            idx[d] = 0;
            ++d;
        }
        if (d == k) break;
    }
    return vol;
}

std::vector<std::vector<double>> brute_filter(
    const std::vector<std::vector<double>>& stream, bool maximize) {
    std::vector<std::vector<double>> keep;
    for (const auto& f : stream) {
        bool dup = false;
        for (const auto& g : keep)
            if (g == f) { dup = true; break; }
        if (dup) continue;
        bool dominated = false;
        for (const auto& g : stream)
            if (dominates(g, f, maximize)) { dominated = true; break; }
        if (!dominated) keep.push_back(f);
    }
    return keep;
}

}  // namespace

TEST_CASE("dominance definition") {
    std::vector<double> a = {1.0, 2.0}, b = {2.0, 3.0}, c = {1.0, 3.0}, d = {2.0, 2.0};
    CHECK(dominates(a, b, false));
    CHECK_FALSE(dominates(b, a, false));
    CHECK_FALSE(dominates(a, a, false));
    CHECK_FALSE(dominates(c, d, false));
    CHECK_FALSE(dominates(d, c, false));
    CHECK(dominates(b, a, true));
    CHECK_FALSE(dominates(a, b, true));
    std::vector<double> short_vec = {1.0};
    CHECK_THROWS_AS(dominates(a, short_vec, false), DataError);
}

TEST_CASE("archive insert outcomes") {
    ParetoArchive ar(2, false);
    CHECK(ar.insert(std::vector<double>{1.0, 1.0}).accepted);
    auto r = ar.insert(std::vector<double>{0.0, 0.0});
    CHECK(r.accepted);
    CHECK(r.removed == 1);
    CHECK(ar.size() == 1);
    r = ar.insert(std::vector<double>{2.0, 2.0});
    CHECK_FALSE(r.accepted);
    CHECK(ar.size() == 1);
    r = ar.insert(std::vector<double>{0.0, 0.0});
    CHECK_FALSE(r.accepted);
    CHECK_THROWS_AS(ar.insert(std::vector<double>{1.0}), DataError);
    std::vector<double> bad = {std::nan(""), 0.0};
    CHECK_THROWS_AS(ar.insert(bad), DataError);
}

TEST_CASE("archive equals brute-force non-dominated filter of the stream") {
    for (bool maximize : {false, true}) {
        Rng rng(derive_seed(7, stream_tag("test.archive.stream"), maximize));
        std::vector<std::vector<double>> stream;
        ParetoArchive ar(2, maximize);
        for (int i = 0; i < 100; ++i) {
            std::vector<double> f = {std::floor(rng.u01() * 12.0),
                                     std::floor(rng.u01() * 12.0)};
            stream.push_back(f);
            ar.insert(f);
        }
        auto expect = brute_filter(stream, maximize);
        auto got = ar.points();
        auto key = [](const std::vector<double>& v) { return std::make_pair(v[0], v[1]); };
        std::sort(expect.begin(), expect.end());
        std::sort(got.begin(), got.end());
        REQUIRE(got.size() == expect.size());
        for (size_t i = 0; i < got.size(); ++i) CHECK(key(got[i]) == key(expect[i]));
        for (size_t i = 0; i < got.size(); ++i)
            for (size_t j = 0; j < got.size(); ++j)
                CHECK_FALSE(dominates(got[i], got[j], maximize));
    }
}

TEST_CASE("2d hypervolume frozen examples") {
    HvFrame fr;
    fr.ref = {1.0, 1.0};
    fr.ideal = {0.0, 0.0};
    CHECK(hypervolume({{0.5, 0.5}}, fr) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(hypervolume({}, fr) == 0.0);

    fr.ref = {4.0, 4.0};
    CHECK(hypervolume({{1.0, 3.0}, {2.0, 2.0}, {3.0, 1.0}}, fr) ==
          doctest::Approx(6.0).epsilon(1e-15));

    // Clipping: a point below the ideal covers the whole box.
    fr.ref = {1.0, 1.0};
    CHECK(hypervolume({{-5.0, -5.0}}, fr) == doctest::Approx(1.0).epsilon(1e-15));
    // A point at or beyond the reference contributes nothing.
    CHECK(hypervolume({{1.0, 0.2}}, fr) == 0.0);
}

TEST_CASE("2d hypervolume matches the grid oracle on random fronts") {
    Rng rng(derive_seed(21, stream_tag("test.hv2.oracle"), 0));
    for (int t = 0; t < 40; ++t) {
        int n = 1 + int(rng.u01() * 20.0);
        std::vector<std::vector<double>> pts;
        for (int i = 0; i < n; ++i)
            pts.push_back({rng.u01() * 1.4 - 0.2, rng.u01() * 1.4 - 0.2});
        HvFrame fr;
        fr.ref = {1.0, 1.0};
        fr.ideal = {0.0, 0.0};
        double got = hypervolume(pts, fr);
        double want = hv_oracle(pts, fr.ideal, fr.ref);
        CHECK(got == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("3d hypervolume matches the grid oracle on random fronts") {
    Rng rng(derive_seed(22, stream_tag("test.hv3.oracle"), 0));
    for (int t = 0; t < 25; ++t) {
        int n = 1 + int(rng.u01() * 16.0);
        std::vector<std::vector<double>> pts;
        for (int i = 0; i < n; ++i)
            pts.push_back({rng.u01() * 1.2 - 0.1, rng.u01() * 1.2 - 0.1,
                           rng.u01() * 1.2 - 0.1});
        HvFrame fr;
        fr.ref = {1.0, 1.0, 1.0};
        fr.ideal = {0.0, 0.0, 0.0};
        double got = hypervolume(pts, fr);
        double want = hv_oracle(pts, fr.ideal, fr.ref);
        CHECK(got == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("3d box union example") {
    HvFrame fr;
    fr.ref = {2.0, 2.0, 2.0};
    fr.ideal = {0.0, 0.0, 0.0};
    CHECK(hypervolume({{1.0, 1.0, 1.0}}, fr) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(hypervolume({{0.0, 0.0, 1.0}, {1.0, 1.0, 0.0}}, fr) ==
          doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("2d sweep equals 3d slicer at a constant third coordinate") {
    Rng rng(derive_seed(23, stream_tag("test.hv.consistency"), 0));
    for (int t = 0; t < 20; ++t) {
        int n = 1 + int(rng.u01() * 15.0);
        std::vector<std::vector<double>> p2, p3;
        double c = 0.25;
        for (int i = 0; i < n; ++i) {
            double x = rng.u01(), y = rng.u01();
            p2.push_back({x, y});
            p3.push_back({x, y, c});
        }
        HvFrame f2;
        f2.ref = {1.0, 1.0};
        f2.ideal = {0.0, 0.0};
        HvFrame f3;
        f3.ref = {1.0, 1.0, 1.0};
        f3.ideal = {0.0, 0.0, 0.0};
        double want = hypervolume(p2, f2) * (1.0 - c);
        CHECK(hypervolume(p3, f3) == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("hypervolume within 3 sigma of a Monte-Carlo estimate") {
    for (int k : {2, 3}) {
        Rng rng(derive_seed(24, stream_tag("test.hv.mc"), uint64_t(k)));
        std::vector<std::vector<double>> pts;
        for (int i = 0; i < 30; ++i) {
            std::vector<double> p(static_cast<size_t>(k));
            for (auto& v : p) v = rng.u01();
            pts.push_back(p);
        }
        HvFrame fr;
        fr.ref.assign(size_t(k), 1.0);
        fr.ideal.assign(size_t(k), 0.0);
        double hv = hypervolume(pts, fr);
        const int N = 1000000;
        int hits = 0;
        for (int s = 0; s < N; ++s) {
            std::vector<double> x(static_cast<size_t>(k));
            for (auto& v : x) v = rng.u01();
            for (const auto& p : pts) {
                bool dom = true;
                for (int i = 0; i < k; ++i)
                    if (p[size_t(i)] > x[size_t(i)]) { dom = false; break; }
                if (dom) { hits = hits + 1; break; }
            }
        }
        double frac = double(hits) / N;
        double sigma = std::sqrt(std::max(frac * (1.0 - frac), 1e-12) / N);
        CHECK(std::abs(hv - frac) <= 3.0 * sigma);
    }
}

TEST_CASE("hypervolume is monotone under non-dominated insertion") {
    Rng rng(derive_seed(25, stream_tag("test.hv.monotone"), 0));
    HvFrame fr;
    fr.ref = {1.0, 1.0};
    fr.ideal = {0.0, 0.0};
    ParetoArchive ar(2, false);
    double prev = 0.0;
    for (int i = 0; i < 60; ++i) {
        std::vector<double> f = {rng.u01(), rng.u01()};
        auto r = ar.insert(f);
        double hv = hypervolume(ar.points(), fr);
        if (r.accepted) CHECK(hv >= prev - 1e-15);
        prev = hv;
    }
}

TEST_CASE("maximization frames mirror into the same sweep") {
    // Max-space front with ref below and ideal above all points.
    HvFrame fr;
    fr.ref = {0.0, 0.0};
    fr.ideal = {4.0, 4.0};
    fr.maximize = true;
    // Mirrored, this is the {(-1,-3),(-2,-2),(-3,-1)} staircase with ref (0,0).
    CHECK(hypervolume({{1.0, 3.0}, {2.0, 2.0}, {3.0, 1.0}}, fr) ==
          doctest::Approx(6.0).epsilon(1e-15));
    CHECK(normalized_hypervolume({{1.0, 3.0}, {2.0, 2.0}, {3.0, 1.0}}, fr) ==
          doctest::Approx(6.0 / 16.0).epsilon(1e-15));
}

TEST_CASE("normalized hypervolume") {
    HvFrame fr;
    fr.ref = {20.0, 20.0};
    fr.ideal = {0.0, 0.0};
    // A point at or clipped to the ideal covers the whole box.
    CHECK(normalized_hypervolume({{0.0, 0.0}}, fr) == doctest::Approx(1.0));
    CHECK(normalized_hypervolume({{-1.0, -1.0}}, fr) == doctest::Approx(1.0));
    CHECK(normalized_hypervolume({}, fr) == 0.0);
    CHECK(normalized_hypervolume({{10.0, 10.0}}, fr) == doctest::Approx(0.25));

    Rng rng(derive_seed(26, stream_tag("test.hv.norm"), 0));
    for (int t = 0; t < 20; ++t) {
        std::vector<std::vector<double>> pts;
        for (int i = 0; i < 10; ++i)
            pts.push_back({rng.u01() * 30.0 - 5.0, rng.u01() * 30.0 - 5.0});
        double nh = normalized_hypervolume(pts, fr);
        CHECK(nh >= 0.0);
        CHECK(nh <= 1.0);
    }

    HvFrame degenerate;
    degenerate.ref = {1.0, 1.0};
    degenerate.ideal = {1.0, 0.0};
    CHECK_THROWS_AS(normalized_hypervolume({}, degenerate), DataError);
}

TEST_CASE("gap reporting") {
    CHECK(hv_gap(0.5, 0.5) == 0.0);
    CHECK(hv_gap(0.0, 0.7) == doctest::Approx(1.0));
    CHECK(hv_gap(0.6392, 0.6411) == doctest::Approx(0.0030).epsilon(0.02));
    CHECK_THROWS_AS(hv_gap(0.1, 0.0), DataError);
    CHECK_THROWS_AS(hv_gap(0.1, -1.0), DataError);
}

TEST_CASE("default frames follow the benchmark table") {
    auto f = default_frame(Problem::motsp, 20, 2);
    CHECK(f.ref == std::vector<double>{20.0, 20.0});
    CHECK(f.ideal == std::vector<double>{0.0, 0.0});
    CHECK_FALSE(f.maximize);
    CHECK(default_frame(Problem::motsp, 50, 2).ref == std::vector<double>{35.0, 35.0});
    CHECK(default_frame(Problem::motsp, 100, 2).ref == std::vector<double>{65.0, 65.0});
    CHECK(default_frame(Problem::motsp, 150, 2).ref == std::vector<double>{85.0, 85.0});
    CHECK(default_frame(Problem::motsp, 200, 2).ref == std::vector<double>{115.0, 115.0});
    CHECK(default_frame(Problem::motsp, 20, 3).ref == std::vector<double>(3, 20.0));
    CHECK(default_frame(Problem::motsp, 100, 3).ref == std::vector<double>(3, 65.0));
    CHECK(default_frame(Problem::mocvrp, 20, 2).ref == std::vector<double>{30.0, 4.0});
    CHECK(default_frame(Problem::mocvrp, 50, 2).ref == std::vector<double>{45.0, 4.0});
    CHECK(default_frame(Problem::mocvrp, 100, 2).ref == std::vector<double>{80.0, 4.0});
    auto kp = default_frame(Problem::mokp, 50, 2);
    CHECK(kp.ref == std::vector<double>{5.0, 5.0});
    CHECK(kp.ideal == std::vector<double>{30.0, 30.0});
    CHECK(kp.maximize);
    CHECK(default_frame(Problem::mokp, 100, 2).ref == std::vector<double>{20.0, 20.0});
    CHECK(default_frame(Problem::mokp, 200, 2).ideal == std::vector<double>{75.0, 75.0});
    CHECK_THROWS_AS(default_frame(Problem::mokp, 100, 3), DataError);

    // Off-table sizes interpolate between rows (the table is ~linear in n)
    // and extend the end segments, so small instances keep a discriminative
    // reference instead of inheriting the nearest tabulated one.
    CHECK(default_frame(Problem::motsp, 10, 2).ref == std::vector<double>{15.0, 15.0});
    CHECK(default_frame(Problem::motsp, 75, 2).ref == std::vector<double>{50.0, 50.0});
    CHECK(default_frame(Problem::motsp, 300, 2).ref == std::vector<double>{175.0, 175.0});
    CHECK(default_frame(Problem::mocvrp, 30, 2).ref == std::vector<double>{35.0, 4.0});
    CHECK(default_frame(Problem::mokp, 150, 2).ref == std::vector<double>{25.0, 25.0});
}

TEST_CASE("front csv round trip") {
    std::vector<std::vector<double>> pts = {{1.5, 2.25}, {0.1, 9.75}};
    auto path = std::filesystem::temp_directory_path() / "moco_test_front.csv";
    write_front_csv(path.string(), pts);
    auto back = read_front_csv(path.string());
    REQUIRE(back.size() == 2);
    CHECK(back[0] == pts[0]);
    CHECK(back[1] == pts[1]);
    std::filesystem::remove(path);
}
