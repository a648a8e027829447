#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace flowtriage::ad {

using Matrix = Eigen::MatrixXd;

/// Handle to a tape node.
struct Var {
    std::int32_t index = -1;
};

/// Minimal reverse-mode tape over dense matrices. Nodes are created in
/// forward order and back-propagated in reverse creation order; values live on
/// the tape, so handles stay valid until clear(). Only what the graph network
/// needs is implemented.
class Tape {
public:
    /// Leaf that accumulates a gradient.
    Var input(Matrix value);
    /// Leaf with no gradient (annotations, adjacency, labels).
    Var constant(Matrix value);

    Var matmul(Var a, Var b);
    Var add(Var a, Var b);
    /// rows(a) x k plus a 1 x k bias broadcast over rows.
    Var add_rowwise(Var a, Var bias);
    Var hadamard(Var a, Var b);
    /// Elementwise 1 - a.
    Var one_minus(Var a);
    Var sigmoid(Var a);
    Var tanh(Var a);
    /// Horizontal concatenation [a | b].
    Var hconcat(Var a, Var b);
    /// Column sums: n x k -> 1 x k.
    Var sum_rows(Var a);
    /// Scale row i of a (n x k) by the scalar in column vector s (n x 1).
    Var scale_rows(Var a, Var s);
    /// Sparse row aggregation: out has out_rows rows and for every (src, dst)
    /// pair accumulates out.row(dst) += a.row(src), in pair order.
    Var scatter_add(Var a, std::vector<std::pair<std::int32_t, std::int32_t>> pairs,
                    Eigen::Index out_rows);
    /// Class-weighted softmax cross-entropy of 1 x k logits against a class
    /// index; returns a 1 x 1 scalar node.
    Var softmax_cross_entropy(Var logits, std::size_t true_class, double weight);
    /// Row-batched form: n x k logits, one class and weight per row; the
    /// scalar result is the weighted sum over rows.
    Var softmax_cross_entropy(Var logits, const std::vector<std::size_t>& classes,
                              const std::vector<double>& weights);

    const Matrix& value(Var v) const { return nodes_[static_cast<std::size_t>(v.index)].value; }
    const Matrix& grad(Var v) const { return nodes_[static_cast<std::size_t>(v.index)].grad; }

    /// Seed d(output)=1 and run the reverse sweep; output must be 1 x 1.
    void backward(Var output);

    void clear() { nodes_.clear(); }
    std::size_t size() const { return nodes_.size(); }

private:
    enum class Op {
        leaf,
        matmul,
        add,
        add_rowwise,
        hadamard,
        one_minus,
        sigmoid,
        tanh,
        hconcat,
        sum_rows,
        scale_rows,
        scatter_add,
        softmax_xent,
    };

    struct Node {
        Op op = Op::leaf;
        std::int32_t a = -1;
        std::int32_t b = -1;
        bool needs_grad = false;
        Matrix value;
        Matrix grad;
        // softmax_xent bookkeeping
        std::vector<std::size_t> classes;
        std::vector<double> weights;
        // scatter_add bookkeeping
        std::vector<std::pair<std::int32_t, std::int32_t>> pairs;
    };

    Var push(Node node);
    Node& at(Var v) { return nodes_[static_cast<std::size_t>(v.index)]; }

    std::vector<Node> nodes_;
};

}  // namespace flowtriage::ad
