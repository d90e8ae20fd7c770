#include "gcde/training.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "gcde/linalg.hpp"

namespace gcde {
namespace {

// Number of loss entries: every channel of every unmasked node.
std::size_t masked_entry_count(const Dataset& ds) {
  if (!ds.node_mask) {
    return ds.target.size();
  }
  std::size_t nodes = 0;
  for (double m : *ds.node_mask) nodes += m > 0.0 ? 1 : 0;
  return nodes * ds.target.cols();
}

void validate_dataset(const Dataset& ds, const char* op) {
  if (ds.h0.empty() || ds.target.empty() || !ds.h0.same_shape(ds.target)) {
    throw ShapeError(std::string(op) + ": features " + ds.h0.shape_string() +
                     " and targets " + ds.target.shape_string() +
                     " must share one N x C shape");
  }
  if (ds.node_mask) {
    if (ds.node_mask->size() != ds.h0.rows()) {
      throw ShapeError(std::string(op) + ": node mask has " +
                       std::to_string(ds.node_mask->size()) +
                       " entries for " + std::to_string(ds.h0.rows()) +
                       " nodes");
    }
    for (double m : *ds.node_mask) {
      if (m != 0.0 && m != 1.0) {
        throw ValidationError(std::string(op) +
                              ": node mask entries must be 0 or 1");
      }
    }
  }
}

// True when some |Z| < kKinkThreshold entry can actually move under a
// perturbation of W. Z(i,j) responds to W through row i of A*H; a frozen
// row (all zeros, e.g. with zero adjacency) keeps step(Z) constant and
// finite differences exact, so it raises no warning.
bool kink_proximity(const GcdeModel& model, const Trajectory& traj) {
  for (const Matrix& h : traj.states) {
    const Matrix ah = matmul(model.adjacency(), h);
    const Matrix z = matmul(ah, model.weights());
    for (std::size_t i = 0; i < z.rows(); ++i) {
      bool row_movable = false;
      for (std::size_t k = 0; k < ah.cols(); ++k) {
        if (ah(i, k) != 0.0) {
          row_movable = true;
          break;
        }
      }
      if (!row_movable) continue;
      for (std::size_t j = 0; j < z.cols(); ++j) {
        if (std::abs(z(i, j)) < kKinkThreshold) return true;
      }
    }
  }
  return false;
}

}  // namespace

GradientReport::GradientReport(Matrix analytic, Matrix numeric,
                               bool kink_warning)
    : analytic_(std::move(analytic)),
      numeric_(std::move(numeric)),
      kink_warning_(kink_warning) {
  if (!analytic_.same_shape(numeric_)) {
    throw ShapeError("gradient report: analytic " + analytic_.shape_string() +
                     " vs numeric " + numeric_.shape_string());
  }
}

double GradientReport::max_abs_err() const {
  return max_abs_diff(analytic_, numeric_);
}

double GradientReport::norm_rel_err() const {
  return gcde::norm_rel_err(analytic_, numeric_);
}

std::pair<double, Matrix> mse_loss(const Matrix& pred, const Dataset& ds) {
  validate_dataset(ds, "mse_loss");
  if (!pred.same_shape(ds.target)) {
    throw ShapeError("mse_loss: prediction " + pred.shape_string() +
                     " vs target " + ds.target.shape_string());
  }
  const std::size_t count = masked_entry_count(ds);
  if (count == 0) {
    throw ValidationError("mse_loss: node mask selects no nodes");
  }

  double loss = 0.0;
  Matrix grad(pred.rows(), pred.cols());
  for (std::size_t i = 0; i < pred.rows(); ++i) {
    const double m = ds.node_mask ? (*ds.node_mask)[i] : 1.0;
    for (std::size_t j = 0; j < pred.cols(); ++j) {
      const double diff = m * (pred(i, j) - ds.target(i, j));
      loss += diff * diff;
      grad(i, j) = diff / static_cast<double>(count);
    }
  }
  loss /= 2.0 * static_cast<double>(count);
  return {loss, grad};
}

GradientReport grad_check(const GcdeModel& model, const Dataset& ds,
                          const SolverConfig& cfg, double eps) {
  if (!(eps > 0.0)) {
    throw ValidationError("grad_check: eps must be positive");
  }
  validate_dataset(ds, "grad_check");

  const Trajectory traj = integrate_forward(model, ds.h0, cfg);
  const auto [loss, loss_grad] = mse_loss(traj.states.back(), ds);
  (void)loss;
  const BackwardResult back = integrate_backward(
      model, traj, loss_grad, cfg, BackwardMode::StoredTrajectory);

  const std::size_t c = model.channel_count();
  Matrix numeric(c, c);
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      Matrix wplus = model.weights();
      Matrix wminus = model.weights();
      wplus(i, j) += eps;
      wminus(i, j) -= eps;
      const double lp =
          mse_loss(integrate_forward(model.with_weights(std::move(wplus)),
                                     ds.h0, cfg)
                       .states.back(),
                   ds)
              .first;
      const double lm =
          mse_loss(integrate_forward(model.with_weights(std::move(wminus)),
                                     ds.h0, cfg)
                       .states.back(),
                   ds)
              .first;
      numeric(i, j) = (lp - lm) / (2.0 * eps);
    }
  }

  return GradientReport(back.weight_grad, std::move(numeric),
                        kink_proximity(model, traj));
}

FitResult fit(const GcdeModel& model, const Dataset& ds,
              const TrainConfig& tc) {
  if (tc.learning_rate < 0.0 || !std::isfinite(tc.learning_rate)) {
    throw ValidationError("fit: learning rate must be finite and >= 0");
  }
  if (tc.epochs == 0) {
    throw ValidationError("fit: epoch count must be >= 1");
  }
  validate_dataset(ds, "fit");

  GcdeModel current = model;
  FitResult result{current, {}, false};
  result.loss_history.reserve(tc.epochs);
  for (std::size_t epoch = 0; epoch < tc.epochs; ++epoch) {
    Trajectory traj;
    try {
      traj = integrate_forward(current, ds.h0, tc.solver);
    } catch (const DivergenceError&) {
      result.diverged = true;
      break;
    }
    const auto [loss, loss_grad] = mse_loss(traj.states.back(), ds);
    if (!std::isfinite(loss)) {
      result.diverged = true;
      break;
    }
    result.loss_history.push_back(loss);

    const BackwardResult back = integrate_backward(
        current, traj, loss_grad, tc.solver, BackwardMode::StoredTrajectory);
    Matrix w = current.weights();
    axpy(w, -tc.learning_rate, back.weight_grad);
    current = current.with_weights(std::move(w));
  }
  result.model = std::move(current);
  return result;
}

}  // namespace gcde
