#include "topoae/diffnet/tape.hpp"

#include <string>

#include "topoae/errors.hpp"

namespace topoae::diffnet {

const Matrix& Var::value() const {
  if (!tape_) throw ArgumentError("Var: use of an unbound variable");
  return tape_->value(id_);
}

Var Tape::leaf(Matrix value, bool trainable) {
  Node n;
  n.op = Op::kLeaf;
  n.value = std::move(value);
  n.needs_grad = trainable;
  return record(std::move(n));
}

Var Tape::record(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::accumulate(int id, const Matrix& g) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (!n.needs_grad) return;
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

Matrix Tape::grad(Var v) const {
  const Node& n = node(v.id());
  if (n.grad.size() == 0) return Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::backward(Var root) {
  if (root.tape() != this) throw ArgumentError("backward: root belongs to another tape");
  if (root.rows() != 1 || root.cols() != 1) throw ArgumentError("backward: root must be scalar");
  for (auto& n : nodes_) n.grad.resize(0, 0);
  accumulate(root.id(), Matrix::Ones(1, 1));

  for (int id = root.id(); id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.needs_grad || n.grad.size() == 0 || n.op == Op::kLeaf) continue;
    const Matrix& g = n.grad;
    const auto need = [this](int i) { return i >= 0 && nodes_[static_cast<std::size_t>(i)].needs_grad; };
    const auto val = [this](int i) -> const Matrix& { return nodes_[static_cast<std::size_t>(i)].value; };

    switch (n.op) {
      case Op::kLeaf:
        break;
      case Op::kMatMul:
        if (need(n.a)) accumulate(n.a, g * val(n.b).transpose());
        if (need(n.b)) accumulate(n.b, val(n.a).transpose() * g);
        break;
      case Op::kAdd:
        accumulate(n.a, g);
        accumulate(n.b, g);
        break;
      case Op::kSub:
        accumulate(n.a, g);
        if (need(n.b)) accumulate(n.b, -g);
        break;
      case Op::kHadamard:
        if (need(n.a)) accumulate(n.a, g.cwiseProduct(val(n.b)));
        if (need(n.b)) accumulate(n.b, g.cwiseProduct(val(n.a)));
        break;
      case Op::kScale:
        accumulate(n.a, n.s * g);
        break;
      case Op::kShift:
        accumulate(n.a, g);
        break;
      case Op::kAddBias:
        accumulate(n.a, g);
        if (need(n.b)) accumulate(n.b, g.rowwise().sum());
        break;
      case Op::kSin:
        accumulate(n.a, g.cwiseProduct(val(n.a).array().cos().matrix()));
        break;
      case Op::kCos:
        accumulate(n.a, -g.cwiseProduct(val(n.a).array().sin().matrix()));
        break;
      case Op::kTanh:
        accumulate(n.a, g.cwiseProduct((1.0 - n.value.array().square()).matrix()));
        break;
      case Op::kRepeatCols: {
        const Matrix& a = val(n.a);
        Matrix ga = Matrix::Zero(a.rows(), a.cols());
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
          ga.col(j) = g.middleCols(j * n.k, n.k).rowwise().sum();
        }
        accumulate(n.a, ga);
        break;
      }
      case Op::kTileCols: {
        const Eigen::Index w = val(n.a).cols();
        Matrix ga = g.leftCols(w);
        for (Eigen::Index t = 1; t < n.k; ++t) ga += g.middleCols(t * w, w);
        accumulate(n.a, ga);
        break;
      }
      case Op::kRowAffine:
        accumulate(n.a, g.array().colwise() * n.gain.array());
        break;
      case Op::kTranspose:
        accumulate(n.a, g.transpose());
        break;
      case Op::kTrace: {
        const Matrix& a = val(n.a);
        accumulate(n.a, g(0, 0) * Matrix::Identity(a.rows(), a.cols()));
        break;
      }
      case Op::kSum: {
        const Matrix& a = val(n.a);
        accumulate(n.a, Matrix::Constant(a.rows(), a.cols(), g(0, 0)));
        break;
      }
      case Op::kSumSquares:
        accumulate(n.a, (2.0 * g(0, 0)) * val(n.a));
        break;
    }
  }
}

namespace {

Tape& same_tape(Var a, Var b) {
  if (!a.valid() || !b.valid() || a.tape() != b.tape()) {
    throw ArgumentError("diffnet: operands must live on the same tape");
  }
  return *a.tape();
}

Tape& tape_of(Var a) {
  if (!a.valid()) throw ArgumentError("diffnet: use of an unbound variable");
  return *a.tape();
}

std::string shape(Var v) {
  return std::to_string(v.rows()) + "x" + std::to_string(v.cols());
}

Var unary(Var a, Tape::Node n) {
  Tape& t = tape_of(a);
  n.a = a.id();
  n.needs_grad = t.needs_grad(a.id());
  return t.record(std::move(n));
}

Var unary(Var a, Tape::Op op, Matrix value) {
  Tape::Node n;
  n.op = op;
  n.value = std::move(value);
  return unary(a, std::move(n));
}

Var binary(Var a, Var b, Tape::Op op, Matrix value) {
  Tape& t = same_tape(a, b);
  Tape::Node n;
  n.op = op;
  n.a = a.id();
  n.b = b.id();
  n.value = std::move(value);
  n.needs_grad = t.needs_grad(a.id()) || t.needs_grad(b.id());
  return t.record(std::move(n));
}

void require_same_shape(Var a, Var b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ArgumentError(std::string(what) + ": shape mismatch " + shape(a) + " vs " + shape(b));
  }
}

}  // namespace

Var matmul(Var a, Var b) {
  same_tape(a, b);
  if (a.cols() != b.rows()) {
    throw ArgumentError("matmul: inner dimensions differ " + shape(a) + " * " + shape(b));
  }
  return binary(a, b, Tape::Op::kMatMul, a.value() * b.value());
}

Var add(Var a, Var b) {
  same_tape(a, b);
  require_same_shape(a, b, "add");
  return binary(a, b, Tape::Op::kAdd, a.value() + b.value());
}

Var sub(Var a, Var b) {
  same_tape(a, b);
  require_same_shape(a, b, "sub");
  return binary(a, b, Tape::Op::kSub, a.value() - b.value());
}

Var hadamard(Var a, Var b) {
  same_tape(a, b);
  require_same_shape(a, b, "hadamard");
  return binary(a, b, Tape::Op::kHadamard, a.value().cwiseProduct(b.value()));
}

Var scale(Var a, double s) {
  Tape::Node n;
  n.op = Tape::Op::kScale;
  n.value = s * a.value();
  n.s = s;
  return unary(a, std::move(n));
}

Var shift(Var a, double s) {
  return unary(a, Tape::Op::kShift, (a.value().array() + s).matrix());
}

Var add_bias(Var z, Var bias) {
  same_tape(z, bias);
  if (bias.cols() != 1 || bias.rows() != z.rows()) {
    throw ArgumentError("add_bias: bias must be a column of height " + std::to_string(z.rows()));
  }
  Matrix v = z.value();
  v.colwise() += bias.value().col(0);
  return binary(z, bias, Tape::Op::kAddBias, std::move(v));
}

Var sin(Var a) { return unary(a, Tape::Op::kSin, a.value().array().sin().matrix()); }
Var cos(Var a) { return unary(a, Tape::Op::kCos, a.value().array().cos().matrix()); }
Var tanh(Var a) { return unary(a, Tape::Op::kTanh, a.value().array().tanh().matrix()); }

Var repeat_cols(Var a, Eigen::Index k) {
  if (k < 1) throw ArgumentError("repeat_cols: k must be >= 1");
  const Matrix& v = a.value();
  Matrix out(v.rows(), v.cols() * k);
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    out.middleCols(j * k, k) = v.col(j).replicate(1, k);
  }
  Tape::Node n;
  n.op = Tape::Op::kRepeatCols;
  n.value = std::move(out);
  n.k = k;
  return unary(a, std::move(n));
}

Var tile_cols(Var a, Eigen::Index k) {
  if (k < 1) throw ArgumentError("tile_cols: k must be >= 1");
  Tape::Node n;
  n.op = Tape::Op::kTileCols;
  n.value = a.value().replicate(1, k);
  n.k = k;
  return unary(a, std::move(n));
}

Var row_affine(Var a, const Vector& gain, const Vector& bias) {
  if (gain.size() != a.rows() || bias.size() != a.rows()) {
    throw ArgumentError("row_affine: gain/bias length must equal row count");
  }
  Tape::Node n;
  n.op = Tape::Op::kRowAffine;
  n.value = (a.value().array().colwise() * gain.array()).colwise() + bias.array();
  n.gain = gain;
  n.bias = bias;
  return unary(a, std::move(n));
}

Var transpose(Var a) { return unary(a, Tape::Op::kTranspose, a.value().transpose()); }

Var trace(Var a) {
  if (a.rows() != a.cols()) throw ArgumentError("trace: matrix must be square");
  return unary(a, Tape::Op::kTrace, Matrix::Constant(1, 1, a.value().trace()));
}

Var sum(Var a) { return unary(a, Tape::Op::kSum, Matrix::Constant(1, 1, a.value().sum())); }

Var sum_squares(Var a) {
  return unary(a, Tape::Op::kSumSquares, Matrix::Constant(1, 1, a.value().squaredNorm()));
}

}  // namespace topoae::diffnet
