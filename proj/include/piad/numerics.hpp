#ifndef PIAD_NUMERICS_HPP
#define PIAD_NUMERICS_HPP

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace piad::numerics {

using Vector = std::vector<double>;

/// Thrown when an operation produces a non-finite value.
class NonFiniteError : public std::runtime_error {
public:
    explicit NonFiniteError(const std::string& what) : std::runtime_error(what) {}
};

/// Dense row-major matrix of 64-bit floats.
class Tensor2 {
public:
    Tensor2() = default;
    Tensor2(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Tensor2 identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    std::string shape_str() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Counts dense-layer multiplies (one multiply per accumulate).
struct MacCounter {
    std::uint64_t multiplies = 0;
};

/// y[j] = sum_i x[i]*W(i,j) + b[j], row-vector times matrix.
/// Throws std::invalid_argument naming both shapes on mismatch and
/// NonFiniteError if the result overflows.
Vector affine(const Vector& x, const Tensor2& w, const Vector& b, MacCounter* macs = nullptr);

/// Elementwise max(0, x). Subgradient at 0 is taken as 0.
Vector relu(const Vector& x);

/**
 * Reverse-mode gradient tape over vector/matrix primitives.
 *
 * Recording is explicit: leaves are created with vec_leaf/mat_leaf (or
 * vec_const for values that never need gradients), interior nodes with the
 * op builders. backward(loss) seeds d(loss)=1 and replays the recorded
 * operations once, in reverse order, accumulating gradients per node.
 * Gradient accumulators are zeroed when backward starts.
 *
 * A tape is single-owner; reset() drops all nodes so it can be reused.
 */
class GradTape {
public:
    using ValId = std::size_t;

    ValId vec_leaf(Vector v);
    ValId mat_leaf(Tensor2 m);
    ValId vec_const(Vector v);

    /// y = x*W + b (same accumulation order as the free affine()).
    ValId affine(ValId x, ValId w, ValId b);
    /// y = x*W
    ValId vecmat(ValId x, ValId w);
    ValId add(ValId a, ValId b);
    /// Elementwise product.
    ValId mul(ValId a, ValId b);
    ValId relu(ValId x);
    ValId tanh(ValId x);
    /// Scalar sum of components (1-element result).
    ValId sum(ValId x);
    /// Scalar mean((pred - target)^2); target is a constant.
    ValId mse(ValId pred, Vector target);

    const Vector& value(ValId id) const;
    /// Value of a 1-element node.
    double scalar(ValId id) const;

    /// Reverse pass from a scalar node. May be called once per recording.
    void backward(ValId loss);

    const Vector& vec_grad(ValId id) const;
    const Tensor2& mat_grad(ValId id) const;

    /// Pre-activation values of every recorded relu, in recording order.
    /// Used by gradient checks to detect kink crossings.
    std::vector<double> relu_preactivations() const;

    std::size_t size() const { return nodes_.size(); }
    void reset();

private:
    enum class Op : std::uint8_t {
        VecLeaf, MatLeaf, VecConst, Affine, VecMat, Add, Mul, Relu, Tanh, Sum, Mse
    };

    struct Node {
        Op op;
        ValId a = 0;
        ValId b = 0;
        ValId c = 0;
        Vector val;   // vector-valued nodes
        Tensor2 mat;  // matrix leaves
        Vector aux;   // op-specific constant (mse target)
        Vector grad;
        Tensor2 mgrad;
    };

    const Node& node(ValId id) const;
    ValId push(Node n);
    void check_vector_node(ValId id, const char* who) const;

    std::vector<Node> nodes_;
    bool has_grads_ = false;
};

}  // namespace piad::numerics

#endif  // PIAD_NUMERICS_HPP
