// Minimal reverse-mode automatic differentiation over small dense buffers.
//
// A Tape is an append-only list of primitive ops in topological order.
// Graphs are built eagerly (values computed at construction). For hot loops
// the same graph can be re-evaluated: overwrite leaves with set_value() and
// call recompute(). backward() fills gradients of a scalar output w.r.t.
// every node; forward tangents (JVPs) are available via Jvp.
//
// 64-bit floats throughout. The primitive set is deliberately small so each
// backward rule stays auditable; every primitive has a finite-difference
// test.
#pragma once

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "adcs/errors.hpp"

namespace adcs::ad {

using Mat = Eigen::MatrixXd;

enum class Op {
  Leaf,
  Add,
  Sub,
  Neg,
  Hadamard,
  Scale,      // tensor * scalar node
  MatMul,
  Transpose,
  Entry,      // single element -> 1x1
  VCat,       // stack two column vectors
  AddRowVec,  // matrix + broadcast row vector
  SumAll,     // -> 1x1
  Tanh,
  Softplus,
  Relu,
  Sin,
  Cos,
  Exp,
  Sqrt,
  Recip,
  SoftmaxRows,  // row-wise softmax
  MaxRows,      // column-wise max over rows -> 1 x n
  Detach,
  // Analytic coefficients for SO(3)/SE(3) maps, as functions of u = theta^2
  // (resp. of the rotation-matrix trace). Each switches to a series below a
  // small-angle threshold inside the primitive, so graph topology never
  // depends on the operand value.
  ExpCoeffA,    // sin(s)/s,        s = sqrt(u)
  ExpCoeffB,    // (1-cos(s))/u
  ExpCoeffC,    // (1 - A(u))/u
  VinvCoeff,    // 1/u - (1+cos s)/(2 s sin s)
  RotLogCoeff,  // theta/(2 sin theta), from trace
};

class Tape;

struct Var {
  Tape* tape = nullptr;
  int id = -1;
  bool valid() const { return tape != nullptr && id >= 0; }
};

namespace detail {

// The closed forms cancel catastrophically for small u, so the series
// threshold sits well above the usual small-angle cutoffs: at u = 1e-4 the
// truncated series is already exact to machine precision.
inline constexpr double kCoeffSeriesU = 1e-4;

inline double coeff_A(double u) {
  if (u < kCoeffSeriesU) return 1.0 - u / 6.0 + u * u / 120.0;
  const double s = std::sqrt(u);
  return std::sin(s) / s;
}
inline double coeff_A_du(double u) {
  if (u < kCoeffSeriesU) return -1.0 / 6.0 + u / 60.0 - u * u / 1680.0;
  const double s = std::sqrt(u);
  return (std::cos(s) - coeff_A(u)) / (2.0 * u);
}
inline double coeff_B(double u) {
  if (u < kCoeffSeriesU) return 0.5 - u / 24.0 + u * u / 720.0;
  return (1.0 - std::cos(std::sqrt(u))) / u;
}
inline double coeff_B_du(double u) {
  if (u < kCoeffSeriesU) return -1.0 / 24.0 + u / 360.0 - u * u / 13440.0;
  return (coeff_A(u) / 2.0 - coeff_B(u)) / u;
}
inline double coeff_C(double u) {
  if (u < kCoeffSeriesU) return 1.0 / 6.0 - u / 120.0 + u * u / 5040.0;
  return (1.0 - coeff_A(u)) / u;
}
inline double coeff_C_du(double u) {
  if (u < kCoeffSeriesU) return -1.0 / 120.0 + u / 2520.0 - u * u / 120960.0;
  return (-coeff_A_du(u) - coeff_C(u)) / u;
}
inline double coeff_vinv(double u) {
  if (u < kCoeffSeriesU) return 1.0 / 12.0 + u / 720.0 + u * u / 30240.0;
  const double s = std::sqrt(u);
  return 1.0 / u - (1.0 + std::cos(s)) / (2.0 * s * std::sin(s));
}
inline double coeff_vinv_du(double u) {
  if (u < kCoeffSeriesU) return 1.0 / 720.0 + u / 15120.0 + u * u / 403200.0;
  const double s = std::sqrt(u);
  const double sn = std::sin(s), cs = std::cos(s);
  // d/ds of (1+cos s)/(2 s sin s)
  const double denom = 2.0 * s * sn;
  const double dfds = (-sn * denom - (1.0 + cs) * 2.0 * (sn + s * cs)) / (denom * denom);
  return -1.0 / (u * u) - dfds / (2.0 * s);
}
inline double rotlog_coeff(double tr) {
  if (tr <= -1.0 + 1e-6) throw AngleNearPi();
  const double c = std::min(1.0, std::max(-1.0, (tr - 1.0) / 2.0));
  const double theta = std::acos(c);
  if (theta < 1e-2) {
    const double w = theta * theta;
    return 0.5 + w / 12.0 + 7.0 * w * w / 720.0;
  }
  return theta / (2.0 * std::sin(theta));
}
inline double rotlog_coeff_dtr(double tr) {
  if (tr <= -1.0 + 1e-6) throw AngleNearPi();
  const double c = std::min(1.0, std::max(-1.0, (tr - 1.0) / 2.0));
  const double theta = std::acos(c);
  if (theta < 1e-2) {
    const double w = theta * theta;
    return -1.0 / 12.0 - w / 30.0;
  }
  const double sn = std::sin(theta);
  return -(sn - theta * std::cos(theta)) / (4.0 * sn * sn * sn);
}

inline double softplus(double x) {
  return x > 30.0 ? x : std::log1p(std::exp(x));
}
inline double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

}  // namespace detail

class Tape {
 public:
  struct Node {
    Op op;
    int a = -1, b = -1;
    int i = 0, j = 0;  // Entry coordinates
    Mat val;
    Mat grad;
  };

  int size() const { return static_cast<int>(nodes_.size()); }
  const Mat& val(Var v) const { return nodes_[v.id].val; }
  const Mat& grad(Var v) const { return nodes_[v.id].grad; }
  double scalar(Var v) const { return nodes_[v.id].val(0, 0); }

  Var leaf(const Mat& value) {
    Node n;
    n.op = Op::Leaf;
    n.val = value;
    return push(std::move(n));
  }
  Var leaf(double value) { return leaf(Mat::Constant(1, 1, value)); }

  void set_value(Var v, const Mat& value) {
    Node& n = nodes_[v.id];
    if (n.op != Op::Leaf) throw Error("set_value on non-leaf node");
    if (n.val.rows() != value.rows() || n.val.cols() != value.cols())
      throw Error("set_value shape mismatch");
    n.val = value;
  }
  void set_value(Var v, double value) { set_value(v, Mat::Constant(1, 1, value)); }

  // Re-runs the forward pass over the whole graph (leaves keep their values).
  void recompute() {
    for (int i = 0; i < size(); ++i)
      if (nodes_[i].op != Op::Leaf) compute(nodes_[i]);
  }

  // Gradients of a scalar output w.r.t. every node at or below it.
  void backward(Var out) {
    Node& o = nodes_[out.id];
    if (o.val.rows() != 1 || o.val.cols() != 1) throw NonScalarOutput();
    for (Node& n : nodes_) {
      n.grad.resize(n.val.rows(), n.val.cols());
      n.grad.setZero();
    }
    o.grad(0, 0) = 1.0;
    for (int i = out.id; i >= 0; --i) pull(i);
  }

  // Forward-mode tangent sweep: seeds a tangent on one leaf, returns the
  // directional derivative of each requested output.
  class Jvp {
   public:
    explicit Jvp(Tape& t) : t_(t) { tan_.resize(t.size()); }
    void run(Var seed_leaf, const Mat& tangent) {
      if (static_cast<int>(tan_.size()) != t_.size()) tan_.resize(t_.size());
      for (int i = 0; i < t_.size(); ++i) {
        const Tape::Node& n = t_.nodes_[i];
        tan_[i].resize(n.val.rows(), n.val.cols());
        tan_[i].setZero();
      }
      tan_[seed_leaf.id] = tangent;
      for (int i = 0; i < t_.size(); ++i) t_.push_tangent(i, tan_);
    }
    double at(Var out) const { return tan_[out.id](0, 0); }
    const Mat& tangent(Var out) const { return tan_[out.id]; }

   private:
    Tape& t_;
    std::vector<Mat> tan_;
  };

  // --- op builders -----------------------------------------------------

  Var add(Var a, Var b) { return binary(Op::Add, a, b); }
  Var sub(Var a, Var b) { return binary(Op::Sub, a, b); }
  Var neg(Var a) { return unary(Op::Neg, a); }
  Var hadamard(Var a, Var b) { return binary(Op::Hadamard, a, b); }
  Var scale(Var a, Var s) {
    require(nodes_[s.id].val.size() == 1, "scale expects a scalar second operand");
    return binary(Op::Scale, a, s);
  }
  Var matmul(Var a, Var b) {
    require(nodes_[a.id].val.cols() == nodes_[b.id].val.rows(), "matmul inner dims");
    return binary(Op::MatMul, a, b);
  }
  Var transpose(Var a) { return unary(Op::Transpose, a); }
  Var entry(Var a, int i, int j) {
    require(i < nodes_[a.id].val.rows() && j < nodes_[a.id].val.cols(), "entry out of range");
    Node n;
    n.op = Op::Entry;
    n.a = a.id;
    n.i = i;
    n.j = j;
    return pushc(std::move(n));
  }
  Var vcat(Var a, Var b) {
    require(nodes_[a.id].val.cols() == 1 && nodes_[b.id].val.cols() == 1,
            "vcat expects column vectors");
    return binary(Op::VCat, a, b);
  }
  Var add_rowvec(Var a, Var r) {
    require(nodes_[r.id].val.rows() == 1 &&
                nodes_[r.id].val.cols() == nodes_[a.id].val.cols(),
            "add_rowvec shape");
    return binary(Op::AddRowVec, a, r);
  }
  Var sum(Var a) { return unary(Op::SumAll, a); }
  Var tanh(Var a) { return unary(Op::Tanh, a); }
  Var softplus(Var a) { return unary(Op::Softplus, a); }
  Var relu(Var a) { return unary(Op::Relu, a); }
  Var sin(Var a) { return unary(Op::Sin, a); }
  Var cos(Var a) { return unary(Op::Cos, a); }
  Var exp(Var a) { return unary(Op::Exp, a); }
  Var sqrt(Var a) { return unary(Op::Sqrt, a); }
  Var recip(Var a) { return unary(Op::Recip, a); }
  Var softmax_rows(Var a) { return unary(Op::SoftmaxRows, a); }
  Var max_rows(Var a) { return unary(Op::MaxRows, a); }
  Var detach(Var a) { return unary(Op::Detach, a); }
  Var exp_coeff_a(Var u) { return unary_scalar(Op::ExpCoeffA, u); }
  Var exp_coeff_b(Var u) { return unary_scalar(Op::ExpCoeffB, u); }
  Var exp_coeff_c(Var u) { return unary_scalar(Op::ExpCoeffC, u); }
  Var vinv_coeff(Var u) { return unary_scalar(Op::VinvCoeff, u); }
  Var rotlog_coeff(Var tr) { return unary_scalar(Op::RotLogCoeff, tr); }

 private:
  std::vector<Node> nodes_;

  static void require(bool ok, const char* what) {
    if (!ok) throw Error(what);
  }

  Var push(Node&& n) {
    nodes_.push_back(std::move(n));
    return Var{this, size() - 1};
  }
  Var pushc(Node&& n) {
    nodes_.push_back(std::move(n));
    compute(nodes_.back());
    return Var{this, size() - 1};
  }
  Var unary(Op op, Var a) {
    Node n;
    n.op = op;
    n.a = a.id;
    return pushc(std::move(n));
  }
  Var unary_scalar(Op op, Var a) {
    require(nodes_[a.id].val.size() == 1, "coefficient ops expect scalars");
    return unary(op, a);
  }
  Var binary(Op op, Var a, Var b) {
    require(a.tape == this && b.tape == this, "vars from another tape");
    if (op == Op::Add || op == Op::Sub || op == Op::Hadamard)
      require(nodes_[a.id].val.rows() == nodes_[b.id].val.rows() &&
                  nodes_[a.id].val.cols() == nodes_[b.id].val.cols(),
              "elementwise shape mismatch");
    Node n;
    n.op = op;
    n.a = a.id;
    n.b = b.id;
    return pushc(std::move(n));
  }

  void compute(Node& n) {
    const Mat& A = n.a >= 0 ? nodes_[n.a].val : n.val;
    switch (n.op) {
      case Op::Leaf:
        break;
      case Op::Add:
        n.val = A + nodes_[n.b].val;
        break;
      case Op::Sub:
        n.val = A - nodes_[n.b].val;
        break;
      case Op::Neg:
        n.val = -A;
        break;
      case Op::Hadamard:
        n.val = A.cwiseProduct(nodes_[n.b].val);
        break;
      case Op::Scale:
        n.val = A * nodes_[n.b].val(0, 0);
        break;
      case Op::MatMul:
        n.val = A * nodes_[n.b].val;
        break;
      case Op::Transpose:
        n.val = A.transpose();
        break;
      case Op::Entry:
        n.val = Mat::Constant(1, 1, A(n.i, n.j));
        break;
      case Op::VCat: {
        const Mat& B = nodes_[n.b].val;
        n.val.resize(A.rows() + B.rows(), 1);
        n.val << A, B;
        break;
      }
      case Op::AddRowVec:
        n.val = A.rowwise() + nodes_[n.b].val.row(0);
        break;
      case Op::SumAll:
        n.val = Mat::Constant(1, 1, A.sum());
        break;
      case Op::Tanh:
        n.val = A.array().tanh();
        break;
      case Op::Softplus:
        n.val = A.unaryExpr([](double x) { return detail::softplus(x); });
        break;
      case Op::Relu:
        n.val = A.cwiseMax(0.0);
        break;
      case Op::Sin:
        n.val = A.array().sin();
        break;
      case Op::Cos:
        n.val = A.array().cos();
        break;
      case Op::Exp:
        n.val = A.array().exp();
        break;
      case Op::Sqrt:
        n.val = A.array().sqrt();
        break;
      case Op::Recip:
        n.val = A.cwiseInverse();
        break;
      case Op::SoftmaxRows: {
        n.val.resizeLike(A);
        for (int r = 0; r < A.rows(); ++r) {
          const double m = A.row(r).maxCoeff();
          Eigen::ArrayXd e = (A.row(r).array() - m).exp();
          n.val.row(r) = (e / e.sum()).matrix();
        }
        break;
      }
      case Op::MaxRows:
        n.val.resize(1, A.cols());
        for (int c = 0; c < A.cols(); ++c) n.val(0, c) = A.col(c).maxCoeff();
        break;
      case Op::Detach:
        n.val = A;
        break;
      case Op::ExpCoeffA:
        n.val = Mat::Constant(1, 1, detail::coeff_A(A(0, 0)));
        break;
      case Op::ExpCoeffB:
        n.val = Mat::Constant(1, 1, detail::coeff_B(A(0, 0)));
        break;
      case Op::ExpCoeffC:
        n.val = Mat::Constant(1, 1, detail::coeff_C(A(0, 0)));
        break;
      case Op::VinvCoeff:
        n.val = Mat::Constant(1, 1, detail::coeff_vinv(A(0, 0)));
        break;
      case Op::RotLogCoeff:
        n.val = Mat::Constant(1, 1, detail::rotlog_coeff(A(0, 0)));
        break;
    }
  }

  // Propagate nodes_[i].grad into its parents' grads.
  void pull(int i) {
    Node& n = nodes_[i];
    if (n.op == Op::Leaf || n.op == Op::Detach) {
      if (n.op == Op::Detach) return;  // gradient stops here
      return;
    }
    const Mat& g = n.grad;
    Mat& ga = nodes_[n.a].grad;
    const Mat& A = nodes_[n.a].val;
    switch (n.op) {
      case Op::Add:
        ga += g;
        nodes_[n.b].grad += g;
        break;
      case Op::Sub:
        ga += g;
        nodes_[n.b].grad -= g;
        break;
      case Op::Neg:
        ga -= g;
        break;
      case Op::Hadamard:
        ga += g.cwiseProduct(nodes_[n.b].val);
        nodes_[n.b].grad += g.cwiseProduct(A);
        break;
      case Op::Scale:
        ga += g * nodes_[n.b].val(0, 0);
        nodes_[n.b].grad(0, 0) += g.cwiseProduct(A).sum();
        break;
      case Op::MatMul:
        ga += g * nodes_[n.b].val.transpose();
        nodes_[n.b].grad += A.transpose() * g;
        break;
      case Op::Transpose:
        ga += g.transpose();
        break;
      case Op::Entry:
        ga(n.i, n.j) += g(0, 0);
        break;
      case Op::VCat:
        ga += g.topRows(A.rows());
        nodes_[n.b].grad += g.bottomRows(nodes_[n.b].val.rows());
        break;
      case Op::AddRowVec:
        ga += g;
        nodes_[n.b].grad += g.colwise().sum();
        break;
      case Op::SumAll:
        ga.array() += g(0, 0);
        break;
      case Op::Tanh:
        ga += g.cwiseProduct((1.0 - n.val.array().square()).matrix());
        break;
      case Op::Softplus:
        ga += g.cwiseProduct(A.unaryExpr([](double x) { return detail::sigmoid(x); }));
        break;
      case Op::Relu:
        ga += g.cwiseProduct(
            A.unaryExpr([](double x) { return x > 0.0 ? 1.0 : 0.0; }));
        break;
      case Op::Sin:
        ga += g.cwiseProduct(A.array().cos().matrix());
        break;
      case Op::Cos:
        ga -= g.cwiseProduct(A.array().sin().matrix());
        break;
      case Op::Exp:
        ga += g.cwiseProduct(n.val);
        break;
      case Op::Sqrt:
        ga += g.cwiseProduct((0.5 * n.val.cwiseInverse().array()).matrix());
        break;
      case Op::Recip:
        ga -= g.cwiseProduct(n.val.cwiseProduct(n.val));
        break;
      case Op::SoftmaxRows:
        for (int r = 0; r < A.rows(); ++r) {
          const double dot = n.val.row(r).dot(g.row(r));
          ga.row(r) += n.val.row(r).cwiseProduct(g.row(r).array().matrix()) -
                       dot * n.val.row(r);
        }
        break;
      case Op::MaxRows:
        for (int c = 0; c < A.cols(); ++c) {
          int arg = 0;
          A.col(c).maxCoeff(&arg);
          ga(arg, c) += g(0, c);
        }
        break;
      case Op::ExpCoeffA:
        ga(0, 0) += g(0, 0) * detail::coeff_A_du(A(0, 0));
        break;
      case Op::ExpCoeffB:
        ga(0, 0) += g(0, 0) * detail::coeff_B_du(A(0, 0));
        break;
      case Op::ExpCoeffC:
        ga(0, 0) += g(0, 0) * detail::coeff_C_du(A(0, 0));
        break;
      case Op::VinvCoeff:
        ga(0, 0) += g(0, 0) * detail::coeff_vinv_du(A(0, 0));
        break;
      case Op::RotLogCoeff:
        ga(0, 0) += g(0, 0) * detail::rotlog_coeff_dtr(A(0, 0));
        break;
      case Op::Leaf:
      case Op::Detach:
        break;
    }
  }

  // Forward-mode rule for node i given parent tangents.
  void push_tangent(int i, std::vector<Mat>& tan) {
    const Node& n = nodes_[i];
    if (n.op == Op::Leaf) return;
    const Mat& A = nodes_[n.a].val;
    const Mat& dA = tan[n.a];
    Mat& d = tan[i];
    switch (n.op) {
      case Op::Add:
        d = dA + tan[n.b];
        break;
      case Op::Sub:
        d = dA - tan[n.b];
        break;
      case Op::Neg:
        d = -dA;
        break;
      case Op::Hadamard:
        d = dA.cwiseProduct(nodes_[n.b].val) + A.cwiseProduct(tan[n.b]);
        break;
      case Op::Scale:
        d = dA * nodes_[n.b].val(0, 0) + A * tan[n.b](0, 0);
        break;
      case Op::MatMul:
        d = dA * nodes_[n.b].val + A * tan[n.b];
        break;
      case Op::Transpose:
        d = dA.transpose();
        break;
      case Op::Entry:
        d(0, 0) = dA(n.i, n.j);
        break;
      case Op::VCat:
        d << dA, tan[n.b];
        break;
      case Op::AddRowVec:
        d = dA.rowwise() + tan[n.b].row(0);
        break;
      case Op::SumAll:
        d(0, 0) = dA.sum();
        break;
      case Op::Tanh:
        d = dA.cwiseProduct((1.0 - n.val.array().square()).matrix());
        break;
      case Op::Softplus:
        d = dA.cwiseProduct(A.unaryExpr([](double x) { return detail::sigmoid(x); }));
        break;
      case Op::Relu:
        d = dA.cwiseProduct(
            A.unaryExpr([](double x) { return x > 0.0 ? 1.0 : 0.0; }));
        break;
      case Op::Sin:
        d = dA.cwiseProduct(A.array().cos().matrix());
        break;
      case Op::Cos:
        d = -dA.cwiseProduct(A.array().sin().matrix());
        break;
      case Op::Exp:
        d = dA.cwiseProduct(n.val);
        break;
      case Op::Sqrt:
        d = dA.cwiseProduct((0.5 * n.val.cwiseInverse().array()).matrix());
        break;
      case Op::Recip:
        d = -dA.cwiseProduct(n.val.cwiseProduct(n.val));
        break;
      case Op::SoftmaxRows:
        d.resizeLike(A);
        for (int r = 0; r < A.rows(); ++r) {
          const double dot = n.val.row(r).dot(dA.row(r));
          d.row(r) = n.val.row(r).cwiseProduct(dA.row(r)) - dot * n.val.row(r);
        }
        break;
      case Op::MaxRows:
        for (int c = 0; c < A.cols(); ++c) {
          int arg = 0;
          A.col(c).maxCoeff(&arg);
          d(0, c) = dA(arg, c);
        }
        break;
      case Op::Detach:
        d.setZero();
        break;
      case Op::ExpCoeffA:
        d(0, 0) = dA(0, 0) * detail::coeff_A_du(A(0, 0));
        break;
      case Op::ExpCoeffB:
        d(0, 0) = dA(0, 0) * detail::coeff_B_du(A(0, 0));
        break;
      case Op::ExpCoeffC:
        d(0, 0) = dA(0, 0) * detail::coeff_C_du(A(0, 0));
        break;
      case Op::VinvCoeff:
        d(0, 0) = dA(0, 0) * detail::coeff_vinv_du(A(0, 0));
        break;
      case Op::RotLogCoeff:
        d(0, 0) = dA(0, 0) * detail::rotlog_coeff_dtr(A(0, 0));
        break;
      case Op::Leaf:
        break;
    }
  }
};

// --- free-function sugar ----------------------------------------------

inline Var operator+(Var a, Var b) { return a.tape->add(a, b); }
inline Var operator-(Var a, Var b) { return a.tape->sub(a, b); }
inline Var operator-(Var a) { return a.tape->neg(a); }
inline Var operator*(Var a, Var b) { return a.tape->matmul(a, b); }

}  // namespace adcs::ad
