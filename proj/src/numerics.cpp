#include "piad/numerics.hpp"

#include <cmath>

namespace piad::numerics {

Tensor2 Tensor2::identity(std::size_t n) {
    Tensor2 m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

std::string Tensor2::shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

namespace {

void check_finite(const Vector& v, const char* who) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw NonFiniteError(std::string(who) + ": produced a non-finite value");
        }
    }
}

// Shared by the eager affine and the tape node so both routes are bitwise
// identical: y starts at b, rows of W accumulate in index order.
Vector affine_impl(const Vector& x, const Tensor2& w, const Vector& b, MacCounter* macs) {
    if (x.size() != w.rows() || b.size() != w.cols()) {
        throw std::invalid_argument("affine: x has length " + std::to_string(x.size()) +
                                    ", b has length " + std::to_string(b.size()) +
                                    ", but W is " + w.shape_str());
    }
    Vector y = b;
    const std::size_t n = w.rows();
    const std::size_t m = w.cols();
    const double* wd = w.data().data();
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = x[i];
        const double* row = wd + i * m;
        for (std::size_t j = 0; j < m; ++j) y[j] += xi * row[j];
    }
    if (macs) macs->multiplies += n * m;
    check_finite(y, "affine");
    return y;
}

}  // namespace

Vector affine(const Vector& x, const Tensor2& w, const Vector& b, MacCounter* macs) {
    return affine_impl(x, w, b, macs);
}

Vector relu(const Vector& x) {
    Vector y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
    return y;
}

// ---------------------------------------------------------------------------
// GradTape
// ---------------------------------------------------------------------------

const GradTape::Node& GradTape::node(ValId id) const {
    if (id >= nodes_.size()) {
        throw std::invalid_argument("GradTape: value id " + std::to_string(id) +
                                    " is not on the tape");
    }
    return nodes_[id];
}

GradTape::ValId GradTape::push(Node n) {
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
}

void GradTape::check_vector_node(ValId id, const char* who) const {
    if (node(id).op == Op::MatLeaf) {
        throw std::invalid_argument(std::string(who) + ": id " + std::to_string(id) +
                                    " is a matrix, expected a vector");
    }
}

GradTape::ValId GradTape::vec_leaf(Vector v) {
    Node n;
    n.op = Op::VecLeaf;
    n.val = std::move(v);
    return push(std::move(n));
}

GradTape::ValId GradTape::mat_leaf(Tensor2 m) {
    Node n;
    n.op = Op::MatLeaf;
    n.mat = std::move(m);
    return push(std::move(n));
}

GradTape::ValId GradTape::vec_const(Vector v) {
    Node n;
    n.op = Op::VecConst;
    n.val = std::move(v);
    return push(std::move(n));
}

GradTape::ValId GradTape::affine(ValId x, ValId w, ValId b) {
    check_vector_node(x, "affine");
    check_vector_node(b, "affine");
    if (node(w).op != Op::MatLeaf) {
        throw std::invalid_argument("affine: W must be a matrix leaf");
    }
    Node n;
    n.op = Op::Affine;
    n.a = x;
    n.b = w;
    n.c = b;
    n.val = affine_impl(node(x).val, node(w).mat, node(b).val, nullptr);
    return push(std::move(n));
}

GradTape::ValId GradTape::vecmat(ValId x, ValId w) {
    check_vector_node(x, "vecmat");
    if (node(w).op != Op::MatLeaf) {
        throw std::invalid_argument("vecmat: W must be a matrix leaf");
    }
    Vector zero(node(w).mat.cols(), 0.0);
    Node n;
    n.op = Op::VecMat;
    n.a = x;
    n.b = w;
    n.val = affine_impl(node(x).val, node(w).mat, zero, nullptr);
    return push(std::move(n));
}

GradTape::ValId GradTape::add(ValId a, ValId b) {
    check_vector_node(a, "add");
    check_vector_node(b, "add");
    const Vector& va = node(a).val;
    const Vector& vb = node(b).val;
    if (va.size() != vb.size()) {
        throw std::invalid_argument("add: lengths differ, " + std::to_string(va.size()) +
                                    " vs " + std::to_string(vb.size()));
    }
    Node n;
    n.op = Op::Add;
    n.a = a;
    n.b = b;
    n.val.resize(va.size());
    for (std::size_t i = 0; i < va.size(); ++i) n.val[i] = va[i] + vb[i];
    return push(std::move(n));
}

GradTape::ValId GradTape::mul(ValId a, ValId b) {
    check_vector_node(a, "mul");
    check_vector_node(b, "mul");
    const Vector& va = node(a).val;
    const Vector& vb = node(b).val;
    if (va.size() != vb.size()) {
        throw std::invalid_argument("mul: lengths differ, " + std::to_string(va.size()) +
                                    " vs " + std::to_string(vb.size()));
    }
    Node n;
    n.op = Op::Mul;
    n.a = a;
    n.b = b;
    n.val.resize(va.size());
    for (std::size_t i = 0; i < va.size(); ++i) n.val[i] = va[i] * vb[i];
    return push(std::move(n));
}

GradTape::ValId GradTape::relu(ValId x) {
    check_vector_node(x, "relu");
    Node n;
    n.op = Op::Relu;
    n.a = x;
    n.val = numerics::relu(node(x).val);
    return push(std::move(n));
}

GradTape::ValId GradTape::tanh(ValId x) {
    check_vector_node(x, "tanh");
    const Vector& vx = node(x).val;
    Node n;
    n.op = Op::Tanh;
    n.a = x;
    n.val.resize(vx.size());
    for (std::size_t i = 0; i < vx.size(); ++i) n.val[i] = std::tanh(vx[i]);
    return push(std::move(n));
}

GradTape::ValId GradTape::sum(ValId x) {
    check_vector_node(x, "sum");
    double s = 0.0;
    for (double v : node(x).val) s += v;
    Node n;
    n.op = Op::Sum;
    n.a = x;
    n.val = {s};
    return push(std::move(n));
}

GradTape::ValId GradTape::mse(ValId pred, Vector target) {
    check_vector_node(pred, "mse");
    const Vector& p = node(pred).val;
    if (p.size() != target.size()) {
        throw std::invalid_argument("mse: prediction length " + std::to_string(p.size()) +
                                    " vs target length " + std::to_string(target.size()));
    }
    if (p.empty()) throw std::invalid_argument("mse: empty vectors");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = p[i] - target[i];
        s += d * d;
    }
    s /= static_cast<double>(p.size());
    if (!std::isfinite(s)) throw NonFiniteError("mse: produced a non-finite value");
    Node n;
    n.op = Op::Mse;
    n.a = pred;
    n.aux = std::move(target);
    n.val = {s};
    return push(std::move(n));
}

const Vector& GradTape::value(ValId id) const {
    const Node& n = node(id);
    if (n.op == Op::MatLeaf) {
        throw std::invalid_argument("value: id refers to a matrix leaf");
    }
    return n.val;
}

double GradTape::scalar(ValId id) const {
    const Vector& v = value(id);
    if (v.size() != 1) {
        throw std::invalid_argument("scalar: node has length " + std::to_string(v.size()));
    }
    return v[0];
}

void GradTape::backward(ValId loss) {
    const Node& ln = node(loss);
    if (ln.op == Op::MatLeaf || ln.val.size() != 1) {
        throw std::invalid_argument("backward: loss must be a scalar vector node");
    }
    // Zero/allocate accumulators.
    for (Node& n : nodes_) {
        if (n.op == Op::MatLeaf) {
            n.mgrad = Tensor2(n.mat.rows(), n.mat.cols());
        } else {
            n.grad.assign(n.val.size(), 0.0);
        }
    }
    nodes_[loss].grad[0] = 1.0;
    has_grads_ = true;

    for (std::size_t k = loss + 1; k-- > 0;) {
        Node& n = nodes_[k];
        switch (n.op) {
            case Op::VecLeaf:
            case Op::MatLeaf:
            case Op::VecConst:
                break;
            case Op::Affine:
            case Op::VecMat: {
                Node& xn = nodes_[n.a];
                Node& wn = nodes_[n.b];
                const std::size_t rows = wn.mat.rows();
                const std::size_t cols = wn.mat.cols();
                const double* wd = wn.mat.data().data();
                double* wg = wn.mgrad.data().data();
                for (std::size_t i = 0; i < rows; ++i) {
                    const double xi = xn.val[i];
                    const double* wrow = wd + i * cols;
                    double* grow = wg + i * cols;
                    double dx = 0.0;
                    for (std::size_t j = 0; j < cols; ++j) {
                        const double dy = n.grad[j];
                        dx += wrow[j] * dy;
                        grow[j] += xi * dy;
                    }
                    xn.grad[i] += dx;
                }
                if (n.op == Op::Affine) {
                    Node& bn = nodes_[n.c];
                    for (std::size_t j = 0; j < cols; ++j) bn.grad[j] += n.grad[j];
                }
                break;
            }
            case Op::Add: {
                Node& an = nodes_[n.a];
                Node& bn = nodes_[n.b];
                for (std::size_t i = 0; i < n.grad.size(); ++i) {
                    an.grad[i] += n.grad[i];
                    bn.grad[i] += n.grad[i];
                }
                break;
            }
            case Op::Mul: {
                Node& an = nodes_[n.a];
                Node& bn = nodes_[n.b];
                for (std::size_t i = 0; i < n.grad.size(); ++i) {
                    an.grad[i] += bn.val[i] * n.grad[i];
                    bn.grad[i] += an.val[i] * n.grad[i];
                }
                break;
            }
            case Op::Relu: {
                Node& xn = nodes_[n.a];
                for (std::size_t i = 0; i < n.grad.size(); ++i) {
                    if (xn.val[i] > 0.0) xn.grad[i] += n.grad[i];
                }
                break;
            }
            case Op::Tanh: {
                Node& xn = nodes_[n.a];
                for (std::size_t i = 0; i < n.grad.size(); ++i) {
                    xn.grad[i] += (1.0 - n.val[i] * n.val[i]) * n.grad[i];
                }
                break;
            }
            case Op::Sum: {
                Node& xn = nodes_[n.a];
                for (std::size_t i = 0; i < xn.grad.size(); ++i) xn.grad[i] += n.grad[0];
                break;
            }
            case Op::Mse: {
                Node& pn = nodes_[n.a];
                const double scale = 2.0 * n.grad[0] / static_cast<double>(pn.val.size());
                for (std::size_t i = 0; i < pn.val.size(); ++i) {
                    pn.grad[i] += scale * (pn.val[i] - n.aux[i]);
                }
                break;
            }
        }
    }
}

const Vector& GradTape::vec_grad(ValId id) const {
    const Node& n = node(id);
    if (n.op == Op::MatLeaf) {
        throw std::invalid_argument("vec_grad: id refers to a matrix leaf, use mat_grad");
    }
    if (n.op == Op::VecConst) {
        throw std::invalid_argument("vec_grad: id refers to a constant, no gradient recorded");
    }
    if (!has_grads_) throw std::logic_error("vec_grad: backward has not run");
    return n.grad;
}

const Tensor2& GradTape::mat_grad(ValId id) const {
    const Node& n = node(id);
    if (n.op != Op::MatLeaf) {
        throw std::invalid_argument("mat_grad: id does not refer to a matrix leaf");
    }
    if (!has_grads_) throw std::logic_error("mat_grad: backward has not run");
    return n.mgrad;
}

std::vector<double> GradTape::relu_preactivations() const {
    std::vector<double> pre;
    for (const Node& n : nodes_) {
        if (n.op == Op::Relu) {
            const Vector& x = nodes_[n.a].val;
            pre.insert(pre.end(), x.begin(), x.end());
        }
    }
    return pre;
}

void GradTape::reset() {
    nodes_.clear();
    has_grads_ = false;
}

}  // namespace piad::numerics
