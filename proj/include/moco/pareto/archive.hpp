#pragma once

#include <span>
#include <string>
#include <vector>

namespace moco::pareto {

// a dominates b when a is no worse in every coordinate and differs in at
// least one. Orientation is explicit; maximize flips the comparison.
bool dominates(std::span<const double> a, std::span<const double> b, bool maximize);

struct InsertResult {
    bool accepted = false;
    int removed = 0;  // points evicted because the new point dominates them
};

// Mutually non-dominated set maintained incrementally. Exact duplicates are
// rejected (the first copy stays).
class ParetoArchive {
  public:
    explicit ParetoArchive(int kappa, bool maximize)
        : kappa_(kappa), maximize_(maximize) {}

    InsertResult insert(std::span<const double> f);

    const std::vector<std::vector<double>>& points() const { return points_; }
    int kappa() const { return kappa_; }
    bool maximize() const { return maximize_; }
    size_t size() const { return points_.size(); }

  private:
    int kappa_;
    bool maximize_;
    std::vector<std::vector<double>> points_;
};

void write_front_csv(const std::string& path,
                     const std::vector<std::vector<double>>& points);
std::vector<std::vector<double>> read_front_csv(const std::string& path);

}  // namespace moco::pareto
