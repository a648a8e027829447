#include "flowtriage/autodiff.hpp"

#include <cmath>

#include "flowtriage/common.hpp"

namespace flowtriage::ad {

Var Tape::push(Node node) {
    node.grad = Matrix::Zero(node.value.rows(), node.value.cols());
    nodes_.push_back(std::move(node));
    return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
}

Var Tape::input(Matrix value) {
    Node n;
    n.op = Op::leaf;
    n.needs_grad = true;
    n.value = std::move(value);
    return push(std::move(n));
}

Var Tape::constant(Matrix value) {
    Node n;
    n.op = Op::leaf;
    n.needs_grad = false;
    n.value = std::move(value);
    return push(std::move(n));
}

namespace {

bool same_shape(const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols();
}

}  // namespace

Var Tape::matmul(Var a, Var b) {
    const Matrix& va = value(a);
    const Matrix& vb = value(b);
    if (va.cols() != vb.rows()) throw Error("shape", "matmul inner dimensions disagree");
    Node n;
    n.op = Op::matmul;
    n.a = a.index;
    n.b = b.index;
    n.needs_grad = at(a).needs_grad || at(b).needs_grad;
    n.value = va * vb;
    return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
    if (!same_shape(value(a), value(b))) throw Error("shape", "add shapes disagree");
    Node n;
    n.op = Op::add;
    n.a = a.index;
    n.b = b.index;
    n.needs_grad = at(a).needs_grad || at(b).needs_grad;
    n.value = value(a) + value(b);
    return push(std::move(n));
}

Var Tape::add_rowwise(Var a, Var bias) {
    const Matrix& va = value(a);
    const Matrix& vb = value(bias);
    if (vb.rows() != 1 || vb.cols() != va.cols())
        throw Error("shape", "row-wise bias must be 1 x cols(a)");
    Node n;
    n.op = Op::add_rowwise;
    n.a = a.index;
    n.b = bias.index;
    n.needs_grad = at(a).needs_grad || at(bias).needs_grad;
    n.value = va.rowwise() + vb.row(0);
    return push(std::move(n));
}

Var Tape::hadamard(Var a, Var b) {
    if (!same_shape(value(a), value(b))) throw Error("shape", "hadamard shapes disagree");
    Node n;
    n.op = Op::hadamard;
    n.a = a.index;
    n.b = b.index;
    n.needs_grad = at(a).needs_grad || at(b).needs_grad;
    n.value = value(a).cwiseProduct(value(b));
    return push(std::move(n));
}

Var Tape::one_minus(Var a) {
    Node n;
    n.op = Op::one_minus;
    n.a = a.index;
    n.needs_grad = at(a).needs_grad;
    n.value = (1.0 - value(a).array()).matrix();
    return push(std::move(n));
}

Var Tape::sigmoid(Var a) {
    Node n;
    n.op = Op::sigmoid;
    n.a = a.index;
    n.needs_grad = at(a).needs_grad;
    n.value = (1.0 / (1.0 + (-value(a).array()).exp())).matrix();
    return push(std::move(n));
}

Var Tape::tanh(Var a) {
    Node n;
    n.op = Op::tanh;
    n.a = a.index;
    n.needs_grad = at(a).needs_grad;
    n.value = value(a).array().tanh().matrix();
    return push(std::move(n));
}

Var Tape::hconcat(Var a, Var b) {
    const Matrix& va = value(a);
    const Matrix& vb = value(b);
    if (va.rows() != vb.rows()) throw Error("shape", "hconcat row counts disagree");
    Node n;
    n.op = Op::hconcat;
    n.a = a.index;
    n.b = b.index;
    n.needs_grad = at(a).needs_grad || at(b).needs_grad;
    n.value.resize(va.rows(), va.cols() + vb.cols());
    n.value << va, vb;
    return push(std::move(n));
}

Var Tape::sum_rows(Var a) {
    Node n;
    n.op = Op::sum_rows;
    n.a = a.index;
    n.needs_grad = at(a).needs_grad;
    n.value = value(a).colwise().sum();
    return push(std::move(n));
}

Var Tape::scale_rows(Var a, Var s) {
    const Matrix& va = value(a);
    const Matrix& vs = value(s);
    if (vs.cols() != 1 || vs.rows() != va.rows())
        throw Error("shape", "row scale must be rows(a) x 1");
    Node n;
    n.op = Op::scale_rows;
    n.a = a.index;
    n.b = s.index;
    n.needs_grad = at(a).needs_grad || at(s).needs_grad;
    n.value = va.array().colwise() * vs.col(0).array();
    return push(std::move(n));
}

Var Tape::scatter_add(Var a, std::vector<std::pair<std::int32_t, std::int32_t>> pairs,
                      Eigen::Index out_rows) {
    const Matrix& va = value(a);
    for (const auto& [src, dst] : pairs) {
        if (src < 0 || src >= va.rows() || dst < 0 || dst >= out_rows)
            throw Error("shape", "scatter pair out of range");
    }
    Node n;
    n.op = Op::scatter_add;
    n.a = a.index;
    n.needs_grad = at(a).needs_grad;
    n.value = Matrix::Zero(out_rows, va.cols());
    for (const auto& [src, dst] : pairs) n.value.row(dst) += va.row(src);
    n.pairs = std::move(pairs);
    return push(std::move(n));
}

Var Tape::softmax_cross_entropy(Var logits, std::size_t true_class, double weight) {
    return softmax_cross_entropy(logits, std::vector<std::size_t>{true_class},
                                 std::vector<double>{weight});
}

Var Tape::softmax_cross_entropy(Var logits, const std::vector<std::size_t>& classes,
                                const std::vector<double>& weights) {
    const Matrix& z = value(logits);
    if (static_cast<std::size_t>(z.rows()) != classes.size() || classes.size() != weights.size())
        throw Error("shape", "one class and weight per logits row required");
    Node n;
    n.op = Op::softmax_xent;
    n.a = logits.index;
    n.needs_grad = at(logits).needs_grad;
    n.classes = classes;
    n.weights = weights;
    double total = 0.0;
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
        if (static_cast<Eigen::Index>(classes[static_cast<std::size_t>(r)]) >= z.cols())
            throw Error("shape", "true class out of range");
        const double zmax = z.row(r).maxCoeff();
        const double lse = zmax + std::log((z.row(r).array() - zmax).exp().sum());
        total += weights[static_cast<std::size_t>(r)] *
                 (lse - z(r, static_cast<Eigen::Index>(classes[static_cast<std::size_t>(r)])));
    }
    n.value = Matrix::Constant(1, 1, total);
    return push(std::move(n));
}

void Tape::backward(Var output) {
    Node& out = at(output);
    if (out.value.rows() != 1 || out.value.cols() != 1)
        throw Error("shape", "backward output must be a scalar");

    for (auto& n : nodes_) n.grad.setZero();
    out.grad(0, 0) = 1.0;

    for (std::size_t k = nodes_.size(); k-- > 0;) {
        const Node& n = nodes_[k];
        if (!n.needs_grad || n.op == Op::leaf) continue;
        const Matrix& g = n.grad;
        Node* na = n.a >= 0 ? &nodes_[static_cast<std::size_t>(n.a)] : nullptr;
        Node* nb = n.b >= 0 ? &nodes_[static_cast<std::size_t>(n.b)] : nullptr;

        switch (n.op) {
            case Op::matmul:
                if (na->needs_grad) na->grad.noalias() += g * nb->value.transpose();
                if (nb->needs_grad) nb->grad.noalias() += na->value.transpose() * g;
                break;
            case Op::add:
                if (na->needs_grad) na->grad += g;
                if (nb->needs_grad) nb->grad += g;
                break;
            case Op::add_rowwise:
                if (na->needs_grad) na->grad += g;
                if (nb->needs_grad) nb->grad += g.colwise().sum();
                break;
            case Op::hadamard:
                if (na->needs_grad) na->grad += g.cwiseProduct(nb->value);
                if (nb->needs_grad) nb->grad += g.cwiseProduct(na->value);
                break;
            case Op::one_minus:
                if (na->needs_grad) na->grad -= g;
                break;
            case Op::sigmoid:
                if (na->needs_grad)
                    na->grad.array() += g.array() * n.value.array() * (1.0 - n.value.array());
                break;
            case Op::tanh:
                if (na->needs_grad)
                    na->grad.array() += g.array() * (1.0 - n.value.array().square());
                break;
            case Op::hconcat:
                if (na->needs_grad) na->grad += g.leftCols(na->value.cols());
                if (nb->needs_grad) nb->grad += g.rightCols(nb->value.cols());
                break;
            case Op::sum_rows:
                if (na->needs_grad) na->grad += g.replicate(na->value.rows(), 1);
                break;
            case Op::scale_rows:
                if (na->needs_grad)
                    na->grad.array() += g.array().colwise() * nb->value.col(0).array();
                if (nb->needs_grad)
                    nb->grad.col(0).array() += (g.array() * na->value.array()).rowwise().sum();
                break;
            case Op::scatter_add:
                if (na->needs_grad) {
                    for (const auto& [src, dst] : n.pairs) na->grad.row(src) += g.row(dst);
                }
                break;
            case Op::softmax_xent: {
                if (!na->needs_grad) break;
                const Matrix& z = na->value;
                for (Eigen::Index r = 0; r < z.rows(); ++r) {
                    const double zmax = z.row(r).maxCoeff();
                    Eigen::RowVectorXd soft = (z.row(r).array() - zmax).exp().matrix();
                    soft /= soft.sum();
                    soft(static_cast<Eigen::Index>(n.classes[static_cast<std::size_t>(r)])) -= 1.0;
                    na->grad.row(r) += g(0, 0) * n.weights[static_cast<std::size_t>(r)] * soft;
                }
                break;
            }
            case Op::leaf:
                break;
        }
    }
}

}  // namespace flowtriage::ad
