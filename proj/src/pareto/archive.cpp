#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "moco/pareto/archive.hpp"
#include "moco/util/error.hpp"
#include "moco/util/fmt.hpp"

namespace moco::pareto {

bool dominates(std::span<const double> a, std::span<const double> b, bool maximize) {
    if (a.size() != b.size())
        throw DataError("dominance between vectors of size " + std::to_string(a.size()) +
                        " and " + std::to_string(b.size()));
    bool strict = false;
    for (size_t i = 0; i < a.size(); ++i) {
        double lo = maximize ? b[i] : a[i];
        double hi = maximize ? a[i] : b[i];
        if (lo > hi) return false;
        if (lo < hi) strict = true;
    }
    return strict;
}

InsertResult ParetoArchive::insert(std::span<const double> f) {
    if (static_cast<int>(f.size()) != kappa_)
        throw DataError("archive expects " + std::to_string(kappa_) +
                        " objectives, got " + std::to_string(f.size()));
    for (double v : f)
        if (!std::isfinite(v)) throw DataError("non-finite objective value in archive insert");

    for (const auto& p : points_) {
        if (std::equal(p.begin(), p.end(), f.begin())) return {false, 0};
        if (dominates(p, f, maximize_)) return {false, 0};
    }
    InsertResult r;
    r.accepted = true;
    size_t w = 0;
    for (size_t i = 0; i < points_.size(); ++i) {
        if (dominates(f, points_[i], maximize_)) {
            ++r.removed;
        } else {
            if (w != i) points_[w] = std::move(points_[i]);
            ++w;
        }
    }
    points_.resize(w);
    points_.emplace_back(f.begin(), f.end());
    return r;
}

void write_front_csv(const std::string& path,
                     const std::vector<std::vector<double>>& points) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    for (const auto& p : points) {
        for (size_t j = 0; j < p.size(); ++j) {
            if (j) out << ',';
            out << fmt_f64(p[j]);
        }
        out << '\n';
    }
    if (!out) throw DataError("write failed for '" + path + "'");
}

std::vector<std::vector<double>> read_front_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(parse_f64(cell));
            } catch (const DataError& e) {
                throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
            }
        }
        if (row.empty())
            throw DataError(path + ":" + std::to_string(lineno) + ": empty row");
        if (width == 0) width = row.size();
        if (row.size() != width)
            throw DataError(path + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(width) + " columns, got " +
                            std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace moco::pareto
