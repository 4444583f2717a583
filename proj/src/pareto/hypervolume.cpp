#include <algorithm>
#include <cmath>
#include <string>

#include "moco/pareto/hypervolume.hpp"
#include "moco/util/error.hpp"

namespace moco::pareto {

namespace {

// The stock frames are tabulated at a few instance sizes and grow almost
// exactly linearly in n (tour lengths scale with the number of nodes), so we
// interpolate between rows and extend the end segments for off-table sizes.
double lerp_rows(int n, std::initializer_list<std::pair<int, double>> rows) {
    auto lo = rows.begin();
    auto last = rows.end() - 1;
    while (lo + 1 != last && n > (lo + 1)->first) ++lo;
    auto hi = lo + 1;
    return lo->second + (hi->second - lo->second) * double(n - lo->first) /
                            double(hi->first - lo->first);
}

// Staircase sweep over clipped minimization points: union of the rectangles
// [x_i, hx] x [y_i, hy].
double area2(std::vector<std::pair<double, double>>& pts, double hx, double hy) {
    if (pts.empty()) return 0.0;
    std::sort(pts.begin(), pts.end());
    double area = 0.0;
    double prev_x = 0.0, prev_y = 0.0;
    bool have = false;
    for (const auto& [x, y] : pts) {
        if (have && y >= prev_y) continue;
        if (have) area += (x - prev_x) * (hy - prev_y);
        prev_x = x;
        prev_y = y;
        have = true;
    }
    area += (hx - prev_x) * (hy - prev_y);
    return area;
}

}  // namespace

HvFrame default_frame(problems::Problem p, int n, int kappa) {
    using problems::Problem;
    HvFrame fr;
    switch (p) {
        case Problem::motsp: {
            if (kappa != 2 && kappa != 3)
                throw DataError("no reference frame for motsp with kappa " +
                                std::to_string(kappa));
            double r = kappa == 2 ? lerp_rows(n, {{20, 20.0}, {50, 35.0}, {100, 65.0},
                                                  {150, 85.0}, {200, 115.0}})
                                  : lerp_rows(n, {{20, 20.0}, {50, 35.0}, {100, 65.0}});
            fr.ref.assign(static_cast<size_t>(kappa), r);
            fr.ideal.assign(static_cast<size_t>(kappa), 0.0);
            return fr;
        }
        case Problem::mocvrp: {
            if (kappa != 2)
                throw DataError("no reference frame for mocvrp with kappa " +
                                std::to_string(kappa));
            fr.ref = {lerp_rows(n, {{20, 30.0}, {50, 45.0}, {100, 80.0}}), 4.0};
            fr.ideal = {0.0, 0.0};
            return fr;
        }
        case Problem::mokp: {
            if (kappa != 2)
                throw DataError("no reference frame for mokp with kappa " +
                                std::to_string(kappa));
            fr.ref.assign(2, lerp_rows(n, {{50, 5.0}, {100, 20.0}, {200, 30.0}}));
            fr.ideal.assign(2, lerp_rows(n, {{50, 30.0}, {100, 50.0}, {200, 75.0}}));
            fr.maximize = true;
            return fr;
        }
    }
    throw DataError("unknown problem in default_frame");
}

double hypervolume(const std::vector<std::vector<double>>& points, const HvFrame& frame) {
    size_t k = frame.ref.size();
    if (k != frame.ideal.size())
        throw DataError("frame reference and ideal sizes differ");
    if (k != 2 && k != 3)
        throw DataError("hypervolume supports 2 or 3 objectives, got " + std::to_string(k));

    // Internally minimize over the box [lo, hi].
    std::vector<double> lo(k), hi(k);
    for (size_t i = 0; i < k; ++i) {
        lo[i] = frame.maximize ? -frame.ideal[i] : frame.ideal[i];
        hi[i] = frame.maximize ? -frame.ref[i] : frame.ref[i];
        if (!(lo[i] < hi[i]))
            throw DataError("degenerate frame: ideal must lie strictly inside the "
                            "reference on every coordinate");
    }

    std::vector<std::vector<double>> pts;
    pts.reserve(points.size());
    for (const auto& p : points) {
        if (p.size() != k)
            throw DataError("point has " + std::to_string(p.size()) +
                            " objectives, frame has " + std::to_string(k));
        std::vector<double> q(k);
        bool inside = true;
        for (size_t i = 0; i < k; ++i) {
            double v = frame.maximize ? -p[i] : p[i];
            if (v >= hi[i]) { inside = false; break; }
            q[i] = std::max(v, lo[i]);
        }
        if (inside) pts.push_back(std::move(q));
    }
    if (pts.empty()) return 0.0;

    if (k == 2) {
        std::vector<std::pair<double, double>> xy;
        xy.reserve(pts.size());
        for (const auto& q : pts) xy.emplace_back(q[0], q[1]);
        return area2(xy, hi[0], hi[1]);
    }

    // Slab sweep: sort by the third coordinate; each slab contributes its
    // height times the 2D area of everything at or below its lower level.
    std::sort(pts.begin(), pts.end(),
              [](const auto& a, const auto& b) { return a[2] < b[2]; });
    double vol = 0.0;
    std::vector<std::pair<double, double>> active;
    size_t i = 0;
    while (i < pts.size()) {
        double level = pts[i][2];
        while (i < pts.size() && pts[i][2] == level) {
            active.emplace_back(pts[i][0], pts[i][1]);
            ++i;
        }
        double next = i < pts.size() ? pts[i][2] : hi[2];
        std::vector<std::pair<double, double>> tmp = active;
        vol += (next - level) * area2(tmp, hi[0], hi[1]);
    }
    return vol;
}

double normalized_hypervolume(const std::vector<std::vector<double>>& points,
                              const HvFrame& frame) {
    double denom = 1.0;
    for (size_t i = 0; i < frame.ref.size(); ++i)
        denom *= std::abs(frame.ref[i] - frame.ideal[i]);
    if (denom == 0.0) throw DataError("degenerate frame: zero box volume");
    return hypervolume(points, frame) / denom;
}

double hv_gap(double hv, double hv_ref) {
    if (!(hv_ref > 0.0))
        throw DataError("gap requires a positive reference hypervolume");
    return (hv_ref - hv) / hv_ref;
}

}  // namespace moco::pareto
