#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace topoae::diffnet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class Tape;

// Handle to a node on a Tape. Cheap to copy; only valid while its tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  int id() const { return id_; }
  Tape* tape() const { return tape_; }
  bool valid() const { return tape_ != nullptr; }

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Reverse-mode differentiation over dense matrices. Values are computed
// eagerly when a node is recorded; backward() sweeps the recorded nodes in
// reverse order. Nodes that do not depend on a trainable leaf are skipped.
class Tape {
 public:
  enum class Op {
    kLeaf,
    kMatMul,
    kAdd,
    kSub,
    kHadamard,
    kScale,
    kShift,
    kAddBias,
    kSin,
    kCos,
    kTanh,
    kRepeatCols,
    kTileCols,
    kRowAffine,
    kTranspose,
    kTrace,
    kSum,
    kSumSquares,
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Matrix value, bool trainable = true);
  Var constant(Matrix value) { return leaf(std::move(value), false); }

  // Root must be 1x1. Gradients accumulate across calls.
  void backward(Var root);

  // Gradient of the last backward root with respect to v; zeros if v was
  // not reached.
  Matrix grad(Var v) const;

  const Matrix& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  bool needs_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].needs_grad; }
  std::size_t size() const { return nodes_.size(); }

  struct Node {
    Op op = Op::kLeaf;
    int a = -1;
    int b = -1;
    Matrix value;
    Matrix grad;
    bool needs_grad = false;
    double s = 0.0;
    Eigen::Index k = 0;
    Vector gain;
    Vector bias;
  };

  Var record(Node node);
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }

 private:
  void accumulate(int id, const Matrix& g);
  std::vector<Node> nodes_;
};

// Primitives. All throw ArgumentError on shape mismatch or when operands
// live on different tapes.
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var hadamard(Var a, Var b);
Var scale(Var a, double s);
Var shift(Var a, double s);
// z + bias * 1^T for a column vector bias.
Var add_bias(Var z, Var bias);
Var sin(Var a);
Var cos(Var a);
Var tanh(Var a);
// Each column repeated k times in place: [c0 c0 .. c1 c1 ..].
Var repeat_cols(Var a, Eigen::Index k);
// Whole matrix repeated side by side k times: [A A .. A].
Var tile_cols(Var a, Eigen::Index k);
// gain_i * a_ij + bias_i with constant vectors.
Var row_affine(Var a, const Vector& gain, const Vector& bias);
Var transpose(Var a);
Var trace(Var a);
Var sum(Var a);
Var sum_squares(Var a);

}  // namespace topoae::diffnet
