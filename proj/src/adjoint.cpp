#include "gcde/adjoint.hpp"

#include "gcde/linalg.hpp"

namespace gcde {
namespace {

void require_gcde_shapes(const Matrix& a, const Matrix& h, const Matrix& w,
                         const Matrix& adj, const char* op) {
  if (a.rows() != a.cols() || a.cols() != h.rows() || h.cols() != w.rows() ||
      w.rows() != w.cols()) {
    throw ShapeError(std::string(op) + ": incompatible shapes A " +
                     a.shape_string() + ", H " + h.shape_string() + ", W " +
                     w.shape_string());
  }
  if (!adj.same_shape(h)) {
    throw ShapeError(std::string(op) + ": adjoint is " + adj.shape_string() +
                     ", expected the state shape " + h.shape_string());
  }
}

}  // namespace

Matrix vjp_sandwich(const Matrix& x, const Matrix& y, const Matrix& upstream) {
  if (x.empty() || y.empty() || upstream.empty()) {
    throw ShapeError("vjp_sandwich: empty operand");
  }
  if (upstream.rows() != x.rows() || upstream.cols() != y.cols()) {
    throw ShapeError("vjp_sandwich: upstream " + upstream.shape_string() +
                     " does not match output shape " +
                     std::to_string(x.rows()) + "x" +
                     std::to_string(y.cols()));
  }
  return matmul(matmul(transpose(x), upstream), transpose(y));
}

Matrix vjp_left(const Matrix& x, const Matrix& upstream) {
  if (x.empty() || upstream.empty()) {
    throw ShapeError("vjp_left: empty operand");
  }
  if (upstream.rows() != x.rows()) {
    throw ShapeError("vjp_left: upstream " + upstream.shape_string() +
                     " does not match multiplier " + x.shape_string());
  }
  return matmul(transpose(x), upstream);
}

Matrix adjoint_state_rhs(const Matrix& a, const Matrix& w, const Matrix& h,
                         const Matrix& adj, bool check_symmetry) {
  require_gcde_shapes(a, h, w, adj, "adjoint_state_rhs");
  if (check_symmetry && max_symmetry_violation(a) > kSymmetryTol) {
    throw ValidationError("adjoint_state_rhs: adjacency is not symmetric "
                          "within " + std::to_string(kSymmetryTol));
  }
  const Matrix z = matmul(matmul(a, h), w);
  const Matrix gated = step_mask(adj, z);
  return scale(matmul(matmul(transpose(a), gated), transpose(w)), -1.0);
}

Matrix weight_grad_rhs(const Matrix& a, const Matrix& h, const Matrix& w,
                       const Matrix& adj) {
  require_gcde_shapes(a, h, w, adj, "weight_grad_rhs");
  const Matrix ah = matmul(a, h);
  const Matrix gated = step_mask(adj, matmul(ah, w));
  return scale(matmul(transpose(ah), gated), -1.0);
}

}  // namespace gcde
