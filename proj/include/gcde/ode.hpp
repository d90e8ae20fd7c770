#pragma once

#include <cstddef>
#include <vector>

#include "gcde/matrix.hpp"

namespace gcde {

enum class SolverMethod { Euler, Rk4 };

const char* to_string(SolverMethod method) noexcept;

/// Fixed-step explicit solver settings. steps >= 1.
struct SolverConfig {
  SolverMethod method = SolverMethod::Rk4;
  std::size_t steps = 100;
};

/// The graph neural ODE dH/dt = relu(A*H*W) on [t0, t1].
class GcdeModel {
 public:
  /// Validates: adjacency square and symmetric to kSymmetryTol, weights
  /// square, t1 > t0, all entries finite.
  GcdeModel(Matrix adjacency, Matrix weights, double t0, double t1);

  const Matrix& adjacency() const noexcept { return adjacency_; }
  const Matrix& weights() const noexcept { return weights_; }
  double t0() const noexcept { return t0_; }
  double t1() const noexcept { return t1_; }

  std::size_t node_count() const noexcept { return adjacency_.rows(); }
  std::size_t channel_count() const noexcept { return weights_.rows(); }

  /// Same graph and time span with different convolution weights.
  GcdeModel with_weights(Matrix weights) const;

 private:
  Matrix adjacency_;
  Matrix weights_;
  double t0_;
  double t1_;
};

/// Checkpoints of a forward solve. times has steps+1 entries, exactly
/// t0 + k*(t1-t0)/steps; states[k] is H(times[k]), one N x C matrix each
/// (no single monolithic buffer).
struct Trajectory {
  std::vector<double> times;
  std::vector<Matrix> states;
};

/// How H(t) is supplied while integrating backward:
///  - StoredTrajectory: re-anchor H at every grid point from the forward
///    trajectory (trustworthy, needs the stored states);
///  - AugmentedRecompute: re-integrate H in reverse time alongside the
///    adjoint, storing nothing (the memory-faithful neural-ODE method).
enum class BackwardMode { StoredTrajectory, AugmentedRecompute };

struct BackwardResult {
  Matrix state_grad;   // dL/dH(t0), N x C
  Matrix weight_grad;  // dL/dW, C x C
};

/// relu(A*h*W); h must be N x C.
Matrix gcde_rhs(const GcdeModel& model, const Matrix& h);

/// Fixed-step explicit integration from t0 to t1, both endpoints included.
/// Throws DivergenceError (with the offending grid index) if the state goes
/// non-finite.
Trajectory integrate_forward(const GcdeModel& model, const Matrix& h0,
                             const SolverConfig& cfg);

/// Integrates the coupled backward system from t1 to t0: the adjoint
/// a(t) = dL/dH(t) seeded with loss_grad_at_t1, and the weight-gradient
/// accumulator whose rate is weight_grad_rhs. The forward trajectory must
/// lie on the same grid as cfg (matching steps; no interpolation happens).
BackwardResult integrate_backward(const GcdeModel& model,
                                  const Trajectory& forward,
                                  const Matrix& loss_grad_at_t1,
                                  const SolverConfig& cfg, BackwardMode mode);

}  // namespace gcde
