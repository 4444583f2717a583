#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

#include "moco/kern/kernels.hpp"
#include "moco/tensor/graph.hpp"

namespace moco::tensor {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

const kern::Kernels& K() { return kern::active(); }

[[noreturn]] void shape_error(const char* what, const Shape& a, const Shape& b) {
    throw DataError(std::string(what) + ": " + a.str() + " vs " + b.str());
}

void check_axis(const Shape& s, int axis, const char* op) {
    if (axis < 0 || axis >= s.rank)
        throw DataError(std::string(op) + ": axis " + std::to_string(axis) +
                        " out of range for shape " + s.str());
}

// Right-aligned broadcast of b onto a. Supported patterns: identical shapes,
// scalar b, or a suffix of b's dims matching a's trailing dims with every
// remaining leading dim of b equal to 1. Returns the broadcast period.
int64_t broadcast_period(const Shape& a, const Shape& b, const char* op) {
    if (a == b) return a.numel();
    if (b.numel() == 1) return 1;
    if (b.rank > a.rank) shape_error(op, a, b);
    int off = a.rank - b.rank;
    int t = b.rank;  // start of the matching suffix
    while (t > 0 && b.d[t - 1] == a.d[off + t - 1]) --t;
    int64_t period = 1;
    for (int i = 0; i < b.rank; ++i) {
        if (i < t) {
            if (b.d[i] != 1) shape_error(op, a, b);
        } else {
            period *= b.d[i];
        }
    }
    return period;
}

thread_local std::vector<double> t_scratch;

double* scratch(size_t n) {
    if (t_scratch.size() < n) t_scratch.resize(n);
    return t_scratch.data();
}

}  // namespace

const char* op_name(Op op) {
    switch (op) {
        case Op::kLeaf: return "leaf";
        case Op::kMatMul: return "matmul";
        case Op::kAdd: return "add";
        case Op::kSub: return "sub";
        case Op::kMul: return "mul";
        case Op::kScale: return "scale";
        case Op::kTanh: return "tanh";
        case Op::kSigmoid: return "sigmoid";
        case Op::kRelu: return "relu";
        case Op::kExp: return "exp";
        case Op::kLog: return "log";
        case Op::kSoftmax: return "softmax";
        case Op::kLogSoftmax: return "log_softmax";
        case Op::kMean: return "mean";
        case Op::kSum: return "sum";
        case Op::kInstanceNorm: return "instance_norm";
        case Op::kConcat: return "concat";
        case Op::kGather: return "gather";
        case Op::kMaskedFill: return "masked_fill";
        case Op::kTopK: return "topk";
    }
    return "?";
}

const ArrayF64& Value::data() const { return g->node(id).data; }
const ArrayF64& Value::grad() const { return g->node(id).grad; }
const Shape& Value::shape() const { return g->node(id).data.shape; }

double Value::item() const {
    const ArrayF64& a = data();
    if (a.numel() != 1) throw DataError("item() on non-scalar value of shape " + a.shape.str());
    return a.v[0];
}

Value Graph::leaf(ArrayF64 data, bool requires_grad) {
    Node n;
    n.op = Op::kLeaf;
    n.data = std::move(data);
    n.requires_grad = requires_grad;
    nodes_.push_back(std::move(n));
    return Value{this, static_cast<int32_t>(nodes_.size() - 1)};
}

Value Graph::param(Parameter& p) {
    auto it = param_nodes_.find(&p);
    if (it != param_nodes_.end()) return Value{this, it->second};
    Node n;
    n.op = Op::kLeaf;
    n.data = p.data;  // snapshot; optimizer steps do not mutate live graphs
    n.requires_grad = true;
    n.param = &p;
    nodes_.push_back(std::move(n));
    int32_t id = static_cast<int32_t>(nodes_.size() - 1);
    param_nodes_.emplace(&p, id);
    return Value{this, id};
}

const std::vector<int64_t>& Graph::topk_indices(Value v) const {
    const Node& n = node(v.id);
    if (n.op != Op::kTopK) throw DataError("topk_indices on non-topk node");
    return n.aux_idx;
}

void Graph::zero_grad() {
    for (auto& n : nodes_)
        if (!n.grad.empty()) n.grad.fill(0.0);
}

namespace {

// ---- forward helpers ----

void fw_binary(Op op, const ArrayF64& a, const ArrayF64& b, ArrayF64& out) {
    int64_t period = broadcast_period(a.shape, b.shape, op_name(op));
    int64_t n = a.numel();
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    if (period == n && b.numel() == n) {
        switch (op) {
            case Op::kAdd: K().add(pa, pb, po, n); break;
            case Op::kSub: K().sub(pa, pb, po, n); break;
            case Op::kMul: K().mul(pa, pb, po, n); break;
            default: break;
        }
        return;
    }
    if (period == 1) {
        double s = pb[0];
        switch (op) {
            case Op::kAdd: K().add_scalar(pa, s, po, n); break;
            case Op::kSub: K().add_scalar(pa, -s, po, n); break;
            case Op::kMul: K().scale(pa, s, po, n); break;
            default: break;
        }
        return;
    }
    for (int64_t off = 0; off < n; off += period) {
        switch (op) {
            case Op::kAdd: K().add(pa + off, pb, po + off, period); break;
            case Op::kSub: K().sub(pa + off, pb, po + off, period); break;
            case Op::kMul: K().mul(pa + off, pb, po + off, period); break;
            default: break;
        }
    }
}

struct MatDims {
    int64_t m, k, n;
};

MatDims matmul_dims(const ArrayF64& a, const ArrayF64& b, bool ta, bool tb) {
    if (a.shape.rank != 2 || b.shape.rank != 2)
        shape_error("matmul requires rank-2 operands", a.shape, b.shape);
    int64_t m = ta ? a.shape[1] : a.shape[0];
    int64_t ka = ta ? a.shape[0] : a.shape[1];
    int64_t kb = tb ? b.shape[1] : b.shape[0];
    int64_t n = tb ? b.shape[0] : b.shape[1];
    if (ka != kb) shape_error("matmul inner dim mismatch", a.shape, b.shape);
    return {m, ka, n};
}

Shape drop_axis(const Shape& s, int axis) {
    Shape out;
    out.rank = s.rank - 1;
    int j = 0;
    for (int i = 0; i < s.rank; ++i)
        if (i != axis) out.d[j++] = s.d[i];
    return out;
}

// Gathers a strided lane into dst.
void load_lane(const double* base, int64_t len, int64_t inner, double* dst) {
    for (int64_t l = 0; l < len; ++l) dst[l] = base[l * inner];
}

void store_lane(const double* src, int64_t len, int64_t inner, double* base) {
    for (int64_t l = 0; l < len; ++l) base[l * inner] = src[l];
}

void softmax_lane(const double* x, double* out, int64_t len, bool log_mode) {
    double m = kNegInf;
    for (int64_t l = 0; l < len; ++l) m = std::max(m, x[l]);
    if (m == kNegInf)
        throw NumericError("softmax over a fully masked axis");
    double s = 0.0;
    for (int64_t l = 0; l < len; ++l) {
        double e = x[l] == kNegInf ? 0.0 : std::exp(x[l] - m);
        out[l] = e;
        s += e;
    }
    if (log_mode) {
        double lse = m + std::log(s);
        for (int64_t l = 0; l < len; ++l) out[l] = x[l] == kNegInf ? kNegInf : x[l] - lse;
    } else {
        double inv = 1.0 / s;
        for (int64_t l = 0; l < len; ++l) out[l] *= inv;
    }
}

}  // namespace

Value Graph::apply(Op op, std::span<const Value> inputs, Attrs attrs) {
    for (const Value& v : inputs) {
        if (v.g != this) throw DataError("value belongs to a different graph");
    }
    Node n;
    n.op = op;
    n.attrs = std::move(attrs);
    n.parents.reserve(inputs.size());
    for (const Value& v : inputs) {
        n.parents.push_back(v.id);
        if (node(v.id).requires_grad) n.requires_grad = true;
    }
    auto in = [&](size_t i) -> const ArrayF64& { return node(n.parents[i]).data; };

    switch (op) {
        case Op::kLeaf:
            throw DataError("leaf nodes are created via leaf()/param()");
        case Op::kMatMul: {
            if (inputs.size() != 2) throw DataError("matmul takes 2 inputs");
            const ArrayF64 &a = in(0), &b = in(1);
            MatDims d = matmul_dims(a, b, n.attrs.trans_a, n.attrs.trans_b);
            n.data = ArrayF64(Shape{d.m, d.n});
            K().gemm(n.attrs.trans_a, n.attrs.trans_b, d.m, d.n, d.k, 1.0, a.data(), b.data(),
                     0.0, n.data.data());
            break;
        }
        case Op::kAdd:
        case Op::kSub:
        case Op::kMul: {
            if (inputs.size() != 2) throw DataError("binary op takes 2 inputs");
            const ArrayF64 &a = in(0), &b = in(1);
            n.data = ArrayF64(a.shape);
            fw_binary(op, a, b, n.data);
            break;
        }
        case Op::kScale: {
            const ArrayF64& a = in(0);
            n.data = ArrayF64(a.shape);
            K().scale(a.data(), n.attrs.scale, n.data.data(), a.numel());
            break;
        }
        case Op::kTanh:
        case Op::kSigmoid:
        case Op::kRelu:
        case Op::kExp:
        case Op::kLog: {
            const ArrayF64& a = in(0);
            n.data = ArrayF64(a.shape);
            switch (op) {
                case Op::kTanh: K().vtanh(a.data(), n.data.data(), a.numel()); break;
                case Op::kSigmoid: K().vsigmoid(a.data(), n.data.data(), a.numel()); break;
                case Op::kRelu: K().relu(a.data(), n.data.data(), a.numel()); break;
                case Op::kExp: K().vexp(a.data(), n.data.data(), a.numel()); break;
                case Op::kLog: K().vlog(a.data(), n.data.data(), a.numel()); break;
                default: break;
            }
            break;
        }
        case Op::kSoftmax:
        case Op::kLogSoftmax: {
            const ArrayF64& a = in(0);
            check_axis(a.shape, n.attrs.axis, op_name(op));
            int64_t outer, len, inner;
            a.shape.split(n.attrs.axis, &outer, &len, &inner);
            n.data = ArrayF64(a.shape);
            bool log_mode = op == Op::kLogSoftmax;
            if (inner == 1) {
                for (int64_t o = 0; o < outer; ++o)
                    softmax_lane(a.data() + o * len, n.data.data() + o * len, len, log_mode);
            } else {
                double* lane = scratch(static_cast<size_t>(2 * len));
                double* out_lane = lane + len;
                for (int64_t o = 0; o < outer; ++o)
                    for (int64_t i = 0; i < inner; ++i) {
                        const double* base = a.data() + o * len * inner + i;
                        load_lane(base, len, inner, lane);
                        softmax_lane(lane, out_lane, len, log_mode);
                        store_lane(out_lane, len, inner, n.data.data() + o * len * inner + i);
                    }
            }
            break;
        }
        case Op::kMean:
        case Op::kSum: {
            const ArrayF64& a = in(0);
            check_axis(a.shape, n.attrs.axis, op_name(op));
            int64_t outer, len, inner;
            a.shape.split(n.attrs.axis, &outer, &len, &inner);
            n.data = ArrayF64(drop_axis(a.shape, n.attrs.axis));
            double inv = op == Op::kMean ? 1.0 / static_cast<double>(len) : 1.0;
            for (int64_t o = 0; o < outer; ++o)
                for (int64_t i = 0; i < inner; ++i) {
                    const double* base = a.data() + o * len * inner + i;
                    double acc;
                    if (inner == 1) {
                        acc = K().sum(base, len);
                    } else {
                        acc = 0.0;
                        for (int64_t l = 0; l < len; ++l) acc += base[l * inner];
                    }
                    n.data.at(o * inner + i) = acc * inv;
                }
            break;
        }
        case Op::kInstanceNorm: {
            const ArrayF64& a = in(0);
            check_axis(a.shape, n.attrs.axis, op_name(op));
            if (a.shape[n.attrs.axis] < 1) throw DataError("instance_norm over empty axis");
            int64_t outer, len, inner;
            a.shape.split(n.attrs.axis, &outer, &len, &inner);
            n.data = ArrayF64(a.shape);
            n.saved.resize(static_cast<size_t>(outer * inner));
            double* lane = scratch(static_cast<size_t>(len));
            for (int64_t o = 0; o < outer; ++o)
                for (int64_t i = 0; i < inner; ++i) {
                    const double* base = a.data() + o * len * inner + i;
                    double mu, var;
                    if (inner == 1) {
                        K().moments(base, len, &mu, &var);
                    } else {
                        load_lane(base, len, inner, lane);
                        K().moments(lane, len, &mu, &var);
                    }
                    double inv = 1.0 / std::sqrt(var + n.attrs.eps);
                    n.saved[static_cast<size_t>(o * inner + i)] = inv;
                    double* ob = n.data.data() + o * len * inner + i;
                    for (int64_t l = 0; l < len; ++l)
                        ob[l * inner] = (base[l * inner] - mu) * inv;
                }
            break;
        }
        case Op::kConcat: {
            if (inputs.empty()) throw DataError("concat needs at least one input");
            const Shape& s0 = in(0).shape;
            check_axis(s0, n.attrs.axis, "concat");
            int64_t axis_total = 0;
            for (size_t i = 0; i < inputs.size(); ++i) {
                const Shape& si = in(i).shape;
                if (si.rank != s0.rank) shape_error("concat rank mismatch", s0, si);
                for (int dd = 0; dd < s0.rank; ++dd)
                    if (dd != n.attrs.axis && si.d[dd] != s0.d[dd])
                        shape_error("concat dim mismatch", s0, si);
                axis_total += si.d[n.attrs.axis];
            }
            Shape os = s0;
            os.d[n.attrs.axis] = axis_total;
            n.data = ArrayF64(os);
            int64_t outer, len_out, inner;
            os.split(n.attrs.axis, &outer, &len_out, &inner);
            int64_t axis_off = 0;
            for (size_t i = 0; i < inputs.size(); ++i) {
                const ArrayF64& a = in(i);
                int64_t len_i = a.shape[n.attrs.axis];
                for (int64_t o = 0; o < outer; ++o) {
                    const double* src = a.data() + o * len_i * inner;
                    double* dst = n.data.data() + (o * len_out + axis_off) * inner;
                    std::memcpy(dst, src, static_cast<size_t>(len_i * inner) * sizeof(double));
                }
                axis_off += len_i;
            }
            break;
        }
        case Op::kGather: {
            const ArrayF64& a = in(0);
            check_axis(a.shape, n.attrs.axis, "gather");
            int64_t outer, len, inner;
            a.shape.split(n.attrs.axis, &outer, &len, &inner);
            for (int64_t ix : n.attrs.indices)
                if (ix < 0 || ix >= len)
                    throw DataError("gather index " + std::to_string(ix) +
                                    " out of range for axis dim " + std::to_string(len));
            if (n.attrs.indices.empty()) throw DataError("gather needs at least one index");
            Shape os = a.shape;
            os.d[n.attrs.axis] = static_cast<int64_t>(n.attrs.indices.size());
            n.data = ArrayF64(os);
            int64_t m = static_cast<int64_t>(n.attrs.indices.size());
            for (int64_t o = 0; o < outer; ++o)
                for (int64_t j = 0; j < m; ++j) {
                    const double* src = a.data() + (o * len + n.attrs.indices[j]) * inner;
                    double* dst = n.data.data() + (o * m + j) * inner;
                    std::memcpy(dst, src, static_cast<size_t>(inner) * sizeof(double));
                }
            break;
        }
        case Op::kMaskedFill: {
            const ArrayF64& a = in(0);
            if (static_cast<int64_t>(n.attrs.mask.size()) != a.numel())
                throw DataError("masked_fill mask size " + std::to_string(n.attrs.mask.size()) +
                                " does not match value count " + std::to_string(a.numel()));
            n.data = ArrayF64(a.shape);
            for (int64_t i = 0; i < a.numel(); ++i)
                n.data.at(i) = n.attrs.mask[static_cast<size_t>(i)] ? n.attrs.fill : a.at(i);
            break;
        }
        case Op::kTopK: {
            const ArrayF64& a = in(0);
            check_axis(a.shape, n.attrs.axis, "topk");
            int64_t outer, len, inner;
            a.shape.split(n.attrs.axis, &outer, &len, &inner);
            int64_t k = n.attrs.k;
            if (k < 1 || k > len)
                throw DataError("topk k=" + std::to_string(k) + " out of range for axis dim " +
                                std::to_string(len));
            Shape os = a.shape;
            os.d[n.attrs.axis] = k;
            n.data = ArrayF64(os);
            n.aux_idx.resize(static_cast<size_t>(outer * inner * k));
            std::vector<int64_t> order(static_cast<size_t>(len));
            for (int64_t o = 0; o < outer; ++o)
                for (int64_t i = 0; i < inner; ++i) {
                    const double* base = a.data() + o * len * inner + i;
                    std::iota(order.begin(), order.end(), 0);
                    // Largest first; ties broken toward the lowest index.
                    std::partial_sort(order.begin(), order.begin() + k, order.end(),
                                      [&](int64_t x, int64_t y) {
                                          double vx = base[x * inner], vy = base[y * inner];
                                          if (vx != vy) return vx > vy;
                                          return x < y;
                                      });
                    for (int64_t j = 0; j < k; ++j) {
                        n.data.at((o * k + j) * inner + i) = base[order[static_cast<size_t>(j)] * inner];
                        n.aux_idx[static_cast<size_t>((o * inner + i) * k + j)] =
                            order[static_cast<size_t>(j)];
                    }
                }
            break;
        }
    }
    nodes_.push_back(std::move(n));
    return Value{this, static_cast<int32_t>(nodes_.size() - 1)};
}

namespace {

// ---- backward ----

ArrayF64& grad_buf(Node& n) {
    if (n.grad.empty()) n.grad = ArrayF64(n.data.shape);
    return n.grad;
}

double* parent_grad(Node& p) {
    if (p.param) return p.param->grad.data();
    return grad_buf(p).data();
}

// gy has parent-lhs shape; reduce-accumulate into rhs grad with given period.
void reduce_into_rhs(const double* gy, int64_t n, int64_t period, double* dst) {
    if (period == n) {
        K().axpy(1.0, gy, dst, n);
        return;
    }
    if (period == 1) {
        dst[0] += K().sum(gy, n);
        return;
    }
    for (int64_t off = 0; off < n; off += period) K().axpy(1.0, gy + off, dst, period);
}

}  // namespace

void Graph::backward(Value root) {
    if (root.g != this) throw DataError("backward: value belongs to a different graph");
    Node& rn = node(root.id);
    if (rn.data.numel() != 1)
        throw DataError("backward requires a scalar root, got shape " + rn.data.shape.str());
    if (!rn.requires_grad) return;

    // Reachability from the root through parent edges.
    std::vector<uint8_t> reach(nodes_.size(), 0);
    std::vector<int32_t> stack{root.id};
    reach[static_cast<size_t>(root.id)] = 1;
    while (!stack.empty()) {
        int32_t id = stack.back();
        stack.pop_back();
        for (int32_t p : node(id).parents) {
            if (!reach[static_cast<size_t>(p)] && node(p).requires_grad) {
                reach[static_cast<size_t>(p)] = 1;
                stack.push_back(p);
            }
        }
    }

    // Internal-node grads are per-call scratch; leaf grads accumulate across
    // calls until zeroed by the caller.
    for (size_t i = 0; i < nodes_.size(); ++i) {
        Node& n = nodes_[i];
        if (reach[i] && n.op != Op::kLeaf && !n.grad.empty()) n.grad.fill(0.0);
    }
    if (rn.op == Op::kLeaf) {
        if (rn.param)
            rn.param->grad.at(0) += 1.0;
        else
            grad_buf(rn).at(0) += 1.0;
        return;
    }
    grad_buf(rn).at(0) = 1.0;

    for (int32_t id = root.id; id >= 0; --id) {
        if (!reach[static_cast<size_t>(id)]) continue;
        Node& n = node(id);
        if (n.op == Op::kLeaf || n.grad.empty()) continue;
        const double* gy = n.grad.data();
        int64_t count = n.data.numel();

        switch (n.op) {
            case Op::kLeaf:
                break;
            case Op::kMatMul: {
                Node& pa = node(n.parents[0]);
                Node& pb = node(n.parents[1]);
                const ArrayF64& a = pa.data;
                const ArrayF64& b = pb.data;
                bool ta = n.attrs.trans_a, tb = n.attrs.trans_b;
                MatDims d = matmul_dims(a, b, ta, tb);
                if (pa.requires_grad) {
                    double* ga = parent_grad(pa);
                    if (!ta && !tb)
                        K().gemm(false, true, d.m, d.k, d.n, 1.0, gy, b.data(), 1.0, ga);
                    else if (!ta && tb)
                        K().gemm(false, false, d.m, d.k, d.n, 1.0, gy, b.data(), 1.0, ga);
                    else if (ta && !tb)
                        K().gemm(false, true, d.k, d.m, d.n, 1.0, b.data(), gy, 1.0, ga);
                    else
                        K().gemm(true, true, d.k, d.m, d.n, 1.0, b.data(), gy, 1.0, ga);
                }
                if (pb.requires_grad) {
                    double* gb = parent_grad(pb);
                    if (!ta && !tb)
                        K().gemm(true, false, d.k, d.n, d.m, 1.0, a.data(), gy, 1.0, gb);
                    else if (!ta && tb)
                        K().gemm(true, false, d.n, d.k, d.m, 1.0, gy, a.data(), 1.0, gb);
                    else if (ta && !tb)
                        K().gemm(false, false, d.k, d.n, d.m, 1.0, a.data(), gy, 1.0, gb);
                    else
                        K().gemm(true, true, d.n, d.k, d.m, 1.0, gy, a.data(), 1.0, gb);
                }
                break;
            }
            case Op::kAdd:
            case Op::kSub: {
                Node& pa = node(n.parents[0]);
                Node& pb = node(n.parents[1]);
                if (pa.requires_grad) K().axpy(1.0, gy, parent_grad(pa), count);
                if (pb.requires_grad) {
                    int64_t period = broadcast_period(pa.data.shape, pb.data.shape, "add");
                    double* gb = parent_grad(pb);
                    if (n.op == Op::kAdd) {
                        reduce_into_rhs(gy, count, period, gb);
                    } else {
                        double* neg = scratch(static_cast<size_t>(count));
                        K().scale(gy, -1.0, neg, count);
                        reduce_into_rhs(neg, count, period, gb);
                    }
                }
                break;
            }
            case Op::kMul: {
                Node& pa = node(n.parents[0]);
                Node& pb = node(n.parents[1]);
                const ArrayF64& a = pa.data;
                const ArrayF64& b = pb.data;
                int64_t period = broadcast_period(a.shape, b.shape, "mul");
                if (pa.requires_grad) {
                    double* ga = parent_grad(pa);
                    if (period == count && b.numel() == count) {
                        double* tmp = scratch(static_cast<size_t>(count));
                        K().mul(gy, b.data(), tmp, count);
                        K().add(ga, tmp, ga, count);
                    } else if (period == 1) {
                        K().axpy(b.at(0), gy, ga, count);
                    } else {
                        double* tmp = scratch(static_cast<size_t>(period));
                        for (int64_t off = 0; off < count; off += period) {
                            K().mul(gy + off, b.data(), tmp, period);
                            K().add(ga + off, tmp, ga + off, period);
                        }
                    }
                }
                if (pb.requires_grad) {
                    double* gb = parent_grad(pb);
                    if (period == count && b.numel() == count) {
                        double* tmp = scratch(static_cast<size_t>(count));
                        K().mul(gy, a.data(), tmp, count);
                        K().add(gb, tmp, gb, count);
                    } else if (period == 1) {
                        gb[0] += K().dot(gy, a.data(), count);
                    } else {
                        double* tmp = scratch(static_cast<size_t>(period));
                        for (int64_t off = 0; off < count; off += period) {
                            K().mul(gy + off, a.data() + off, tmp, period);
                            K().add(gb, tmp, gb, period);
                        }
                    }
                }
                break;
            }
            case Op::kScale: {
                Node& pa = node(n.parents[0]);
                if (pa.requires_grad) K().axpy(n.attrs.scale, gy, parent_grad(pa), count);
                break;
            }
            case Op::kTanh: {
                Node& pa = node(n.parents[0]);
                if (!pa.requires_grad) break;
                double* ga = parent_grad(pa);
                const double* y = n.data.data();
                for (int64_t i = 0; i < count; ++i) ga[i] += gy[i] * (1.0 - y[i] * y[i]);
                break;
            }
            case Op::kSigmoid: {
                Node& pa = node(n.parents[0]);
                if (!pa.requires_grad) break;
                double* ga = parent_grad(pa);
                const double* y = n.data.data();
                for (int64_t i = 0; i < count; ++i) ga[i] += gy[i] * y[i] * (1.0 - y[i]);
                break;
            }
            case Op::kRelu: {
                Node& pa = node(n.parents[0]);
                if (!pa.requires_grad) break;
                double* ga = parent_grad(pa);
                const double* x = pa.data.data();
                for (int64_t i = 0; i < count; ++i)
                    if (x[i] > 0.0) ga[i] += gy[i];
                break;
            }
            case Op::kExp: {
                Node& pa = node(n.parents[0]);
                if (!pa.requires_grad) break;
                double* ga = parent_grad(pa);
                const double* y = n.data.data();
                for (int64_t i = 0; i < count; ++i) ga[i] += gy[i] * y[i];
                break;
            }
            case Op::kLog: {
                Node& pa = node(n.parents[0]);
                if (!pa.requires_grad) break;
                double* ga = parent_grad(pa);
                const double* x = pa.data.data();
                for (int64_t i = 0; i < count; ++i) ga[i] += gy[i] / x[i];
                break;
            }
            case Op::kSoftmax: {
                Node& pa = node(n.parents[0]);
                if (!pa.requires_grad) break;
                double* ga = parent_grad(pa);
                int64_t outer, len, inner;
                n.data.shape.split(n.attrs.axis, &outer, &len, &inner);
                const double* y = n.data.data();
                for (int64_t o = 0; o < outer; ++o)
                    for (int64_t i = 0; i < inner; ++i) {
                        int64_t base = o * len * inner + i;
                        double dotv = 0.0;
                        for (int64_t l = 0; l < len; ++l)
                            dotv += y[base + l * inner] * gy[base + l * inner];
                        for (int64_t l = 0; l < len; ++l) {
                            int64_t ix = base + l * inner;
                            ga[ix] += y[ix] * (gy[ix] - dotv);
                        }
                    }
                break;
            }
            case Op::kLogSoftmax: {
                Node& pa = node(n.parents[0]);
                if (!pa.requires_grad) break;
                double* ga = parent_grad(pa);
                int64_t outer, len, inner;
                n.data.shape.split(n.attrs.axis, &outer, &len, &inner);
                const double* y = n.data.data();
                for (int64_t o = 0; o < outer; ++o)
                    for (int64_t i = 0; i < inner; ++i) {
                        int64_t base = o * len * inner + i;
                        double gsum = 0.0;
                        for (int64_t l = 0; l < len; ++l) gsum += gy[base + l * inner];
                        for (int64_t l = 0; l < len; ++l) {
                            int64_t ix = base + l * inner;
                            double p = y[ix] == kNegInf ? 0.0 : std::exp(y[ix]);
                            ga[ix] += gy[ix] - p * gsum;
                        }
                    }
                break;
            }
            case Op::kMean:
            case Op::kSum: {
                Node& pa = node(n.parents[0]);
                if (!pa.requires_grad) break;
                double* ga = parent_grad(pa);
                int64_t outer, len, inner;
                pa.data.shape.split(n.attrs.axis, &outer, &len, &inner);
                double w = n.op == Op::kMean ? 1.0 / static_cast<double>(len) : 1.0;
                for (int64_t o = 0; o < outer; ++o)
                    for (int64_t i = 0; i < inner; ++i) {
                        double g = gy[o * inner + i] * w;
                        double* base = ga + o * len * inner + i;
                        for (int64_t l = 0; l < len; ++l) base[l * inner] += g;
                    }
                break;
            }
            case Op::kInstanceNorm: {
                Node& pa = node(n.parents[0]);
                if (!pa.requires_grad) break;
                double* ga = parent_grad(pa);
                int64_t outer, len, inner;
                pa.data.shape.split(n.attrs.axis, &outer, &len, &inner);
                const double* y = n.data.data();
                double invn = 1.0 / static_cast<double>(len);
                for (int64_t o = 0; o < outer; ++o)
                    for (int64_t i = 0; i < inner; ++i) {
                        int64_t base = o * len * inner + i;
                        double inv = n.saved[static_cast<size_t>(o * inner + i)];
                        double gmean = 0.0, gymean = 0.0;
                        for (int64_t l = 0; l < len; ++l) {
                            gmean += gy[base + l * inner];
                            gymean += gy[base + l * inner] * y[base + l * inner];
                        }
                        gmean *= invn;
                        gymean *= invn;
                        for (int64_t l = 0; l < len; ++l) {
                            int64_t ix = base + l * inner;
                            ga[ix] += inv * (gy[ix] - gmean - y[ix] * gymean);
                        }
                    }
                break;
            }
            case Op::kConcat: {
                int64_t outer, len_out, inner;
                n.data.shape.split(n.attrs.axis, &outer, &len_out, &inner);
                int64_t axis_off = 0;
                for (int32_t pid : n.parents) {
                    Node& p = node(pid);
                    int64_t len_i = p.data.shape[n.attrs.axis];
                    if (p.requires_grad) {
                        double* gp = parent_grad(p);
                        for (int64_t o = 0; o < outer; ++o)
                            K().add(gp + o * len_i * inner,
                                    gy + (o * len_out + axis_off) * inner,
                                    gp + o * len_i * inner, len_i * inner);
                    }
                    axis_off += len_i;
                }
                break;
            }
            case Op::kGather: {
                Node& pa = node(n.parents[0]);
                if (!pa.requires_grad) break;
                double* ga = parent_grad(pa);
                int64_t outer, len, inner;
                pa.data.shape.split(n.attrs.axis, &outer, &len, &inner);
                int64_t m = static_cast<int64_t>(n.attrs.indices.size());
                for (int64_t o = 0; o < outer; ++o)
                    for (int64_t j = 0; j < m; ++j)
                        K().add(ga + (o * len + n.attrs.indices[static_cast<size_t>(j)]) * inner,
                                gy + (o * m + j) * inner,
                                ga + (o * len + n.attrs.indices[static_cast<size_t>(j)]) * inner,
                                inner);
                break;
            }
            case Op::kMaskedFill: {
                Node& pa = node(n.parents[0]);
                if (!pa.requires_grad) break;
                double* ga = parent_grad(pa);
                for (int64_t i = 0; i < count; ++i)
                    if (!n.attrs.mask[static_cast<size_t>(i)]) ga[i] += gy[i];
                break;
            }
            case Op::kTopK: {
                Node& pa = node(n.parents[0]);
                if (!pa.requires_grad) break;
                double* ga = parent_grad(pa);
                int64_t outer, len, inner;
                pa.data.shape.split(n.attrs.axis, &outer, &len, &inner);
                int64_t k = n.attrs.k;
                for (int64_t o = 0; o < outer; ++o)
                    for (int64_t i = 0; i < inner; ++i)
                        for (int64_t j = 0; j < k; ++j) {
                            int64_t src = n.aux_idx[static_cast<size_t>((o * inner + i) * k + j)];
                            ga[(o * len + src) * inner + i] += gy[(o * k + j) * inner + i];
                        }
                break;
            }
        }
    }
}

// ---- builders ----

namespace {
Value apply1(Value a, Op op, Attrs attrs = {}) {
    const Value in[] = {a};
    return a.g->apply(op, in, std::move(attrs));
}
Value apply2(Value a, Value b, Op op, Attrs attrs = {}) {
    const Value in[] = {a, b};
    return a.g->apply(op, in, std::move(attrs));
}
}  // namespace

Value matmul(Value a, Value b, bool trans_a, bool trans_b) {
    Attrs at;
    at.trans_a = trans_a;
    at.trans_b = trans_b;
    return apply2(a, b, Op::kMatMul, std::move(at));
}
Value add(Value a, Value b) { return apply2(a, b, Op::kAdd); }
Value sub(Value a, Value b) { return apply2(a, b, Op::kSub); }
Value mul(Value a, Value b) { return apply2(a, b, Op::kMul); }
Value scale(Value a, double s) {
    Attrs at;
    at.scale = s;
    return apply1(a, Op::kScale, std::move(at));
}
Value tanh(Value a) { return apply1(a, Op::kTanh); }
Value sigmoid(Value a) { return apply1(a, Op::kSigmoid); }
Value relu(Value a) { return apply1(a, Op::kRelu); }
Value exp(Value a) { return apply1(a, Op::kExp); }
Value log(Value a) { return apply1(a, Op::kLog); }
Value softmax(Value a, int axis) {
    Attrs at;
    at.axis = axis;
    return apply1(a, Op::kSoftmax, std::move(at));
}
Value log_softmax(Value a, int axis) {
    Attrs at;
    at.axis = axis;
    return apply1(a, Op::kLogSoftmax, std::move(at));
}
Value mean(Value a, int axis) {
    Attrs at;
    at.axis = axis;
    return apply1(a, Op::kMean, std::move(at));
}
Value sum(Value a, int axis) {
    Attrs at;
    at.axis = axis;
    return apply1(a, Op::kSum, std::move(at));
}
Value instance_norm(Value a, int axis, double eps) {
    Attrs at;
    at.axis = axis;
    at.eps = eps;
    return apply1(a, Op::kInstanceNorm, std::move(at));
}
Value concat(std::span<const Value> xs, int axis) {
    if (xs.empty()) throw DataError("concat needs at least one input");
    Attrs at;
    at.axis = axis;
    return xs[0].g->apply(Op::kConcat, xs, std::move(at));
}
Value gather(Value a, int axis, std::vector<int64_t> indices) {
    Attrs at;
    at.axis = axis;
    at.indices = std::move(indices);
    return apply1(a, Op::kGather, std::move(at));
}
Value masked_fill(Value a, std::vector<uint8_t> mask, double fill) {
    Attrs at;
    at.mask = std::move(mask);
    at.fill = fill;
    return apply1(a, Op::kMaskedFill, std::move(at));
}
Value topk(Value a, int axis, int k) {
    Attrs at;
    at.axis = axis;
    at.k = k;
    return apply1(a, Op::kTopK, std::move(at));
}

}  // namespace moco::tensor
