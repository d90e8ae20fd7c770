#pragma once

#include "gcde/matrix.hpp"

namespace gcde {

/// Closed-form VJPs for the maps A -> X*A*Y and A -> X*A, plus their GCDE
/// specializations. None of these ever materializes an unrolled Jacobian:
/// every intermediate has one of the operand shapes.

/// VJP of C = X*A*Y with respect to A: returns X^T * upstream * Y^T, shaped
/// like A (n x p). upstream is shaped like C (m x q). Sign-free; the adjoint
/// ODE owns its minus.
Matrix vjp_sandwich(const Matrix& x, const Matrix& y, const Matrix& upstream);

/// VJP of B = X*A with respect to A: returns X^T * upstream, shaped like A.
Matrix vjp_left(const Matrix& x, const Matrix& upstream);

/// Right-hand side of the adjoint state ODE for dH/dt = relu(A*H*W):
///
///   -A^T * (adj (*) step(Z)) * W^T,   Z = A*H*W.
///
/// The computation uses A^T so it stays correct for non-symmetric A; with
/// check_symmetry (the default) a ValidationError enforces the GCDE premise
/// that A is symmetric to 1e-9, where A^T * ... equals the textbook A * ...
Matrix adjoint_state_rhs(const Matrix& a, const Matrix& w, const Matrix& h,
                         const Matrix& adj, bool check_symmetry = true);

/// Integrand of the weight-gradient integral, signed for reverse-time
/// accumulation:
///
///   -(A*H)^T * (adj (*) step(Z)),   Z = A*H*W,   shape C x C.
Matrix weight_grad_rhs(const Matrix& a, const Matrix& h, const Matrix& w,
                       const Matrix& adj);

}  // namespace gcde
