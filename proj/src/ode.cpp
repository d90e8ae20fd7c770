#include "gcde/ode.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "gcde/adjoint.hpp"
#include "gcde/linalg.hpp"

namespace gcde {

const char* to_string(SolverMethod method) noexcept {
  return method == SolverMethod::Euler ? "euler" : "rk4";
}

GcdeModel::GcdeModel(Matrix adjacency, Matrix weights, double t0, double t1)
    : adjacency_(std::move(adjacency)),
      weights_(std::move(weights)),
      t0_(t0),
      t1_(t1) {
  if (adjacency_.empty() || adjacency_.rows() != adjacency_.cols()) {
    throw ShapeError("model: adjacency must be square, got " +
                     adjacency_.shape_string());
  }
  if (weights_.empty() || weights_.rows() != weights_.cols()) {
    throw ShapeError("model: weights must be square, got " +
                     weights_.shape_string());
  }
  if (!adjacency_.all_finite() || !weights_.all_finite()) {
    throw ValidationError("model: non-finite entries in adjacency or weights");
  }
  if (max_symmetry_violation(adjacency_) > kSymmetryTol) {
    throw ValidationError("model: adjacency is not symmetric within " +
                          std::to_string(kSymmetryTol));
  }
  if (!std::isfinite(t0_) || !std::isfinite(t1_) || !(t1_ > t0_)) {
    throw ValidationError("model: time span requires finite t1 > t0");
  }
}

GcdeModel GcdeModel::with_weights(Matrix weights) const {
  return GcdeModel(adjacency_, std::move(weights), t0_, t1_);
}

Matrix gcde_rhs(const GcdeModel& model, const Matrix& h) {
  if (h.rows() != model.node_count() || h.cols() != model.channel_count()) {
    throw ShapeError("gcde_rhs: state is " + h.shape_string() +
                     ", model expects " +
                     std::to_string(model.node_count()) + "x" +
                     std::to_string(model.channel_count()));
  }
  return relu(matmul(matmul(model.adjacency(), h), model.weights()));
}

namespace {

void validate_solver(const SolverConfig& cfg) {
  if (cfg.steps == 0) {
    throw ValidationError("solver: step count must be >= 1");
  }
}

// One explicit step of size dt (dt < 0 integrates in reverse time). State
// needs copy construction plus an axpy overload.
template <typename State, typename Rhs, typename Axpy>
State explicit_step(const State& s, double dt, SolverMethod method, Rhs&& rhs,
                    Axpy&& axpy_into) {
  if (method == SolverMethod::Euler) {
    State next = s;
    axpy_into(next, dt, rhs(s));
    return next;
  }
  const State k1 = rhs(s);
  State stage = s;
  axpy_into(stage, dt / 2.0, k1);
  const State k2 = rhs(stage);
  stage = s;
  axpy_into(stage, dt / 2.0, k2);
  const State k3 = rhs(stage);
  stage = s;
  axpy_into(stage, dt, k3);
  const State k4 = rhs(stage);
  State next = s;
  axpy_into(next, dt / 6.0, k1);
  axpy_into(next, dt / 3.0, k2);
  axpy_into(next, dt / 3.0, k3);
  axpy_into(next, dt / 6.0, k4);
  return next;
}

// Reverse-time state: hidden state, adjoint, and the weight-gradient
// accumulator. Every component is one of the operand shapes (N x C or
// C x C); nothing here scales with (N*C)^2.
struct CoupledBackwardState {
  Matrix h;
  Matrix a;
  Matrix gw;
};

CoupledBackwardState backward_rhs(const GcdeModel& model,
                                  const CoupledBackwardState& s) {
  // Adjacency symmetry was validated when the model was built.
  return {gcde_rhs(model, s.h),
          adjoint_state_rhs(model.adjacency(), model.weights(), s.h, s.a,
                            /*check_symmetry=*/false),
          weight_grad_rhs(model.adjacency(), s.h, model.weights(), s.a)};
}

void backward_axpy(CoupledBackwardState& y, double alpha,
                   const CoupledBackwardState& x) {
  axpy(y.h, alpha, x.h);
  axpy(y.a, alpha, x.a);
  axpy(y.gw, alpha, x.gw);
}

}  // namespace

Trajectory integrate_forward(const GcdeModel& model, const Matrix& h0,
                             const SolverConfig& cfg) {
  validate_solver(cfg);
  if (h0.rows() != model.node_count() ||
      h0.cols() != model.channel_count()) {
    throw ShapeError("integrate_forward: initial state is " +
                     h0.shape_string() + ", model expects " +
                     std::to_string(model.node_count()) + "x" +
                     std::to_string(model.channel_count()));
  }
  if (!h0.all_finite()) {
    throw ValidationError("integrate_forward: non-finite initial state");
  }

  const double dt = (model.t1() - model.t0()) / static_cast<double>(cfg.steps);
  Trajectory traj;
  traj.times.reserve(cfg.steps + 1);
  traj.states.reserve(cfg.steps + 1);
  traj.times.push_back(model.t0());
  traj.states.push_back(h0);

  Matrix h = h0;
  const auto rhs = [&model](const Matrix& state) {
    return gcde_rhs(model, state);
  };
  const auto axpy_into = [](Matrix& y, double alpha, const Matrix& x) {
    axpy(y, alpha, x);
  };
  for (std::size_t k = 0; k < cfg.steps; ++k) {
    h = explicit_step(h, dt, cfg.method, rhs, axpy_into);
    if (!h.all_finite()) {
      throw DivergenceError("integrate_forward: state diverged at grid point " +
                            std::to_string(k + 1),
                            k + 1);
    }
    traj.times.push_back(model.t0() + static_cast<double>(k + 1) * dt);
    traj.states.push_back(h);
  }
  return traj;
}

BackwardResult integrate_backward(const GcdeModel& model,
                                  const Trajectory& forward,
                                  const Matrix& loss_grad_at_t1,
                                  const SolverConfig& cfg, BackwardMode mode) {
  validate_solver(cfg);
  const std::size_t n = model.node_count();
  const std::size_t c = model.channel_count();
  if (loss_grad_at_t1.rows() != n || loss_grad_at_t1.cols() != c) {
    throw ShapeError("integrate_backward: loss gradient is " +
                     loss_grad_at_t1.shape_string() + ", expected " +
                     std::to_string(n) + "x" + std::to_string(c));
  }
  if (forward.times.size() != cfg.steps + 1 ||
      forward.states.size() != forward.times.size()) {
    throw ValidationError(
        "integrate_backward: trajectory has " +
        std::to_string(forward.times.size()) + " grid points, config expects " +
        std::to_string(cfg.steps + 1));
  }
  const double dt = (model.t1() - model.t0()) / static_cast<double>(cfg.steps);
  const double time_tol =
      1e-12 * std::max({1.0, std::abs(model.t0()), std::abs(model.t1())});
  for (std::size_t k = 0; k < forward.times.size(); ++k) {
    const double expected = model.t0() + static_cast<double>(k) * dt;
    if (std::abs(forward.times[k] - expected) > time_tol) {
      throw ValidationError(
          "integrate_backward: trajectory grid does not match the model's "
          "time span at index " + std::to_string(k));
    }
    if (forward.states[k].rows() != n || forward.states[k].cols() != c) {
      throw ValidationError(
          "integrate_backward: trajectory state " + std::to_string(k) +
          " is " + forward.states[k].shape_string() + ", expected " +
          std::to_string(n) + "x" + std::to_string(c));
    }
  }

  CoupledBackwardState s{forward.states.back(), loss_grad_at_t1,
                         Matrix(c, c)};
  const auto rhs = [&model](const CoupledBackwardState& state) {
    return backward_rhs(model, state);
  };
  for (std::size_t k = cfg.steps; k > 0; --k) {
    if (mode == BackwardMode::StoredTrajectory) {
      // Re-anchor the hidden state so reverse-time drift cannot accumulate;
      // stages inside the step still evolve the coupled system.
      s.h = forward.states[k];
    }
    s = explicit_step(s, -dt, cfg.method, rhs, backward_axpy);
    if (!s.h.all_finite() || !s.a.all_finite() || !s.gw.all_finite()) {
      throw DivergenceError(
          "integrate_backward: state diverged at grid point " +
          std::to_string(k - 1),
          k - 1);
    }
  }
  return {std::move(s.a), std::move(s.gw)};
}

}  // namespace gcde
