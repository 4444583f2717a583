#include <fstream>
#include <sstream>

#include "moco/decomp/weights.hpp"
#include "moco/util/error.hpp"
#include "moco/util/fmt.hpp"

namespace moco::decomp {

namespace {
void rec(int kappa, int H, int left, std::vector<double>& cur,
         std::vector<std::vector<double>>& out) {
    if (static_cast<int>(cur.size()) == kappa - 1) {
        cur.push_back(static_cast<double>(left) / static_cast<double>(H));
        out.push_back(cur);
        cur.pop_back();
        return;
    }
    for (int i = 0; i <= left; ++i) {
        cur.push_back(static_cast<double>(i) / static_cast<double>(H));
        rec(kappa, H, left - i, cur, out);
        cur.pop_back();
    }
}
}  // namespace

std::vector<std::vector<double>> das_dennis(int kappa, int H) {
    if (kappa < 2) throw DataError("das_dennis requires kappa >= 2");
    if (H < 1) throw DataError("das_dennis requires H >= 1");
    std::vector<std::vector<double>> out;
    std::vector<double> cur;
    rec(kappa, H, H, cur, out);
    return out;
}

void write_weights_csv(const std::string& path, const std::vector<std::vector<double>>& weights) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open for writing: " + path);
    for (const auto& w : weights) {
        for (size_t i = 0; i < w.size(); ++i) {
            if (i) os << ",";
            os << fmt_f64(w[i]);
        }
        os << "\n";
    }
}

std::vector<std::vector<double>> read_weights_csv(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open: " + path);
    std::vector<std::vector<double>> out;
    std::string line;
    size_t lineno = 0;
    size_t width = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(parse_f64(cell));
            } catch (const DataError& e) {
                throw DataError("weights line " + std::to_string(lineno) + ": " + e.what());
            }
        }
        if (row.empty()) throw DataError("weights line " + std::to_string(lineno) + ": empty row");
        if (width == 0) width = row.size();
        if (row.size() != width)
            throw DataError("weights line " + std::to_string(lineno) + ": expected " +
                            std::to_string(width) + " columns, got " + std::to_string(row.size()));
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace moco::decomp
