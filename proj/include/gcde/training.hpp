#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "gcde/matrix.hpp"
#include "gcde/ode.hpp"

namespace gcde {

/// |Z| threshold below which a movable pre-activation counts as too close
/// to the ReLU kink for finite differences to mean anything.
inline constexpr double kKinkThreshold = 0.05;

/// Supervised regression fixture: initial node features and the target
/// state at t1. node_mask (0/1 per node, optional) restricts the loss to a
/// subset of nodes.
struct Dataset {
  Matrix h0;
  Matrix target;
  std::optional<Vector> node_mask;
};

struct TrainConfig {
  double learning_rate = 0.01;
  std::size_t epochs = 100;
  SolverConfig solver;
  std::uint64_t seed = 0;
};

/// Analytic-vs-numeric gradient comparison. The error figures are computed
/// from the two stored matrices on demand, never cached separately.
class GradientReport {
 public:
  GradientReport(Matrix analytic, Matrix numeric, bool kink_warning);

  const Matrix& analytic() const noexcept { return analytic_; }
  const Matrix& numeric() const noexcept { return numeric_; }

  /// True when some pre-activation entry that can move under the checked
  /// perturbations sits within kKinkThreshold of the ReLU kink somewhere on
  /// the trajectory.
  bool kink_warning() const noexcept { return kink_warning_; }

  double max_abs_err() const;
  double norm_rel_err() const;

 private:
  Matrix analytic_;
  Matrix numeric_;
  bool kink_warning_;
};

struct FitResult {
  GcdeModel model;
  std::vector<double> loss_history;  // one entry per completed epoch
  bool diverged = false;
};

/// Masked mean squared error and its gradient with respect to pred:
///   loss = sum(mask .* (pred - target)^2) / (2 * |masked entries|)
///   grad = mask .* (pred - target) / |masked entries|
/// where |masked entries| counts matrix entries in unmasked rows.
std::pair<double, Matrix> mse_loss(const Matrix& pred, const Dataset& ds);

/// End-to-end check of the adjoint weight gradient: analytic dL/dW from
/// integrate_backward against central finite differences of the full
/// forward-solve loss in every W entry.
GradientReport grad_check(const GcdeModel& model, const Dataset& ds,
                          const SolverConfig& cfg, double eps);

/// Full-batch gradient descent on W. Deterministic; stops early with
/// diverged=true (partial history preserved) if the loss goes non-finite.
FitResult fit(const GcdeModel& model, const Dataset& ds,
              const TrainConfig& tc);

}  // namespace gcde
