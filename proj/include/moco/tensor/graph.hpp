#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <unordered_map>
#include <vector>

#include "moco/tensor/array.hpp"
#include "moco/tensor/param.hpp"

namespace moco::tensor {

enum class Op : uint8_t {
    kLeaf,
    kMatMul,
    kAdd,
    kSub,
    kMul,
    kScale,
    kTanh,
    kSigmoid,
    kRelu,
    kExp,
    kLog,
    kSoftmax,
    kLogSoftmax,
    kMean,
    kSum,
    kInstanceNorm,
    kConcat,
    kGather,
    kMaskedFill,
    kTopK,
};

const char* op_name(Op op);

struct Attrs {
    int axis = -1;
    int k = 0;                     // kTopK
    double scale = 1.0;            // kScale
    double fill = 0.0;             // kMaskedFill
    double eps = 1e-5;             // kInstanceNorm
    bool trans_a = false;          // kMatMul
    bool trans_b = false;          // kMatMul
    std::vector<int64_t> indices;  // kGather
    std::vector<uint8_t> mask;     // kMaskedFill, 1 = replace with fill
};

struct Node {
    Op op = Op::kLeaf;
    ArrayF64 data;
    ArrayF64 grad;  // allocated during backward for reachable nodes
    std::vector<int32_t> parents;
    Attrs attrs;
    std::vector<int64_t> aux_idx;  // kTopK: selected source indices per lane
    std::vector<double> saved;     // kInstanceNorm: inv_std per lane
    bool requires_grad = false;
    Parameter* param = nullptr;
};

class Graph;

// Lightweight handle into a graph's node list.
struct Value {
    Graph* g = nullptr;
    int32_t id = -1;

    bool valid() const { return g != nullptr && id >= 0; }
    const ArrayF64& data() const;
    const ArrayF64& grad() const;
    const Shape& shape() const;
    double item() const;  // scalar nodes only
};

// Define-by-run reverse-mode autodiff tape over f64 arrays.
class Graph {
public:
    Value leaf(ArrayF64 data, bool requires_grad = false);
    Value constant(ArrayF64 data) { return leaf(std::move(data), false); }
    Value constant(double x) { return leaf(scalar_array(x), false); }
    // One node per parameter per graph; data is copied at bind time, grads
    // accumulate into the parameter itself.
    Value param(Parameter& p);

    Value apply(Op op, std::span<const Value> inputs, Attrs attrs = {});

    // Accumulates d(root)/d(leaf) into every reachable requires_grad leaf:
    // plain leaves accumulate in node grad, parameter leaves in Parameter::grad.
    // Repeated calls keep accumulating until the caller zeroes gradients.
    void backward(Value root);

    // Clears node-level gradient buffers (parameter grads are cleared via
    // ParamStore::zero_grad).
    void zero_grad();

    const std::vector<int64_t>& topk_indices(Value v) const;

    Node& node(int32_t id) { return nodes_[static_cast<size_t>(id)]; }
    const Node& node(int32_t id) const { return nodes_[static_cast<size_t>(id)]; }
    size_t size() const { return nodes_.size(); }

private:
    std::deque<Node> nodes_;
    std::unordered_map<const Parameter*, int32_t> param_nodes_;
};

// Op builders.
Value matmul(Value a, Value b, bool trans_a = false, bool trans_b = false);
Value add(Value a, Value b);
Value sub(Value a, Value b);
Value mul(Value a, Value b);
Value scale(Value a, double s);
Value tanh(Value a);
Value sigmoid(Value a);
Value relu(Value a);
Value exp(Value a);
Value log(Value a);
Value softmax(Value a, int axis);
Value log_softmax(Value a, int axis);
Value mean(Value a, int axis);
Value sum(Value a, int axis);
Value instance_norm(Value a, int axis, double eps = 1e-5);
Value concat(std::span<const Value> xs, int axis);
Value gather(Value a, int axis, std::vector<int64_t> indices);
Value masked_fill(Value a, std::vector<uint8_t> mask, double fill);
Value topk(Value a, int axis, int k);

inline Value operator+(Value a, Value b) { return add(a, b); }
inline Value operator-(Value a, Value b) { return sub(a, b); }
inline Value operator*(Value a, Value b) { return mul(a, b); }

}  // namespace moco::tensor
