// Command-line front end for the GCDE workbench: forward solves, adjoint
// gradient checks, unrolled-Jacobian dumps, and gradient-descent training,
// all over plain text matrix/graph files.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "gcde/io.hpp"
#include "gcde/jacobian.hpp"
#include "gcde/linalg.hpp"
#include "gcde/ode.hpp"
#include "gcde/training.hpp"

namespace fs = std::filesystem;

namespace {

// Exit codes are a stable contract.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;  // usage, parse, or validation failure
constexpr int kExitDivergence = 2;
constexpr int kExitKink = 3;
constexpr int kExitSizeGuard = 4;

constexpr double kGradCheckTol = 1e-4;

struct RunConfig {
  std::string graph;
  std::string features;
  std::string weights;
  std::string targets;
  double t0 = 0.0;
  double t1 = 1.0;
  std::string solver = "rk4";
  std::size_t steps = 100;
  double lr = 0.01;
  std::size_t epochs = 100;
  std::uint64_t seed = 0;
  double eps = 1e-5;
  std::string out = ".";
  bool write_trajectory = false;
};

gcde::SolverConfig solver_config(const RunConfig& rc) {
  return {rc.solver == "euler" ? gcde::SolverMethod::Euler
                               : gcde::SolverMethod::Rk4,
          rc.steps};
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

// Flat "key = value" config, '#' comments. Applied before CLI parsing, so
// command-line flags override config values.
void apply_config_file(RunConfig& rc, const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw gcde::ParseError(path + ": cannot open for reading");
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw gcde::ParseError(path + ":" + std::to_string(line_no) +
                             ": expected \"key = value\"");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "graph") rc.graph = value;
      else if (key == "features") rc.features = value;
      else if (key == "weights") rc.weights = value;
      else if (key == "targets") rc.targets = value;
      else if (key == "t0") rc.t0 = std::stod(value);
      else if (key == "t1") rc.t1 = std::stod(value);
      else if (key == "solver") rc.solver = value;
      else if (key == "steps") rc.steps = std::stoull(value);
      else if (key == "lr") rc.lr = std::stod(value);
      else if (key == "epochs") rc.epochs = std::stoull(value);
      else if (key == "seed") rc.seed = std::stoull(value);
      else if (key == "eps") rc.eps = std::stod(value);
      else if (key == "out") rc.out = value;
      else {
        throw gcde::ParseError(path + ":" + std::to_string(line_no) +
                               ": unknown config key \"" + key + "\"");
      }
    } catch (const std::invalid_argument&) {
      throw gcde::ParseError(path + ":" + std::to_string(line_no) +
                             ": bad value for \"" + key + "\"");
    } catch (const std::out_of_range&) {
      throw gcde::ParseError(path + ":" + std::to_string(line_no) +
                             ": value out of range for \"" + key + "\"");
    }
  }
  if (rc.solver != "euler" && rc.solver != "rk4") {
    throw gcde::ParseError(path + ": solver must be euler or rk4");
  }
}

// --config is consumed before CLI11 runs so the file can seed defaults.
std::string find_config_arg(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) return argv[i + 1];
    if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
  }
  return "";
}

void require_inputs(const RunConfig& rc, bool needs_targets) {
  const auto missing = [](const char* flag) {
    throw gcde::ValidationError(std::string("missing required input: give ") +
                                flag + " on the command line or in --config");
  };
  if (rc.graph.empty()) missing("--graph");
  if (rc.features.empty()) missing("--features");
  if (rc.weights.empty()) missing("--weights");
  if (needs_targets && rc.targets.empty()) missing("--targets");
}

struct LoadedProblem {
  gcde::GcdeModel model;
  gcde::Matrix h0;
};

LoadedProblem load_problem(const RunConfig& rc) {
  gcde::Matrix adjacency = gcde::io::load_graph(rc.graph);
  gcde::Matrix h0 = gcde::io::load_matrix(rc.features);
  gcde::Matrix weights = gcde::io::load_matrix(rc.weights);
  gcde::GcdeModel model(std::move(adjacency), std::move(weights), rc.t0,
                        rc.t1);
  if (h0.rows() != model.node_count() ||
      h0.cols() != model.channel_count()) {
    throw gcde::ShapeError("features are " + h0.shape_string() +
                           " but graph/weights describe a " +
                           std::to_string(model.node_count()) + "x" +
                           std::to_string(model.channel_count()) +
                           " problem");
  }
  return {std::move(model), std::move(h0)};
}

std::string out_path(const RunConfig& rc, const std::string& name) {
  fs::create_directories(rc.out);
  return (fs::path(rc.out) / name).string();
}

int cmd_forward(const RunConfig& rc) {
  require_inputs(rc, false);
  const LoadedProblem p = load_problem(rc);
  const gcde::Trajectory traj =
      gcde::integrate_forward(p.model, p.h0, solver_config(rc));

  const std::string final_path = out_path(rc, "h_t1.txt");
  gcde::io::save_matrix(traj.states.back(), final_path);
  std::printf("wrote %s\n", final_path.c_str());

  if (rc.write_trajectory) {
    const fs::path dir = fs::path(rc.out) / "trajectory";
    fs::create_directories(dir);
    gcde::Matrix times(traj.times.size(), 1, traj.times);
    gcde::io::save_matrix(times, (dir / "times.txt").string());
    char name[32];
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
      std::snprintf(name, sizeof name, "state_%05zu.txt", k);
      gcde::io::save_matrix(traj.states[k], (dir / name).string());
    }
    std::printf("wrote %zu trajectory states under %s\n", traj.states.size(),
                dir.string().c_str());
  }
  return kExitOk;
}

int cmd_gradcheck(const RunConfig& rc) {
  require_inputs(rc, true);
  const LoadedProblem p = load_problem(rc);
  const gcde::Dataset ds{p.h0, gcde::io::load_matrix(rc.targets),
                         std::nullopt};
  const gcde::GradientReport report =
      gcde::grad_check(p.model, ds, solver_config(rc), rc.eps);

  const auto print_matrix = [](const char* label, const gcde::Matrix& m) {
    std::printf("%s %zux%zu\n", label, m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
      for (std::size_t j = 0; j < m.cols(); ++j) {
        std::printf("%s%s", j == 0 ? "  " : " ",
                    gcde::io::format_double(m(i, j)).c_str());
      }
      std::printf("\n");
    }
  };
  print_matrix("analytic", report.analytic());
  print_matrix("numeric", report.numeric());
  std::printf("max_abs_err %s\n",
              gcde::io::format_double(report.max_abs_err()).c_str());
  std::printf("norm_rel_err %s\n",
              gcde::io::format_double(report.norm_rel_err()).c_str());
  std::printf("kink_warning %d\n", report.kink_warning() ? 1 : 0);

  if (report.kink_warning()) {
    std::fprintf(stderr,
                 "gradcheck: pre-activations sit within %g of the relu kink; "
                 "finite differences are unreliable here\n",
                 gcde::kKinkThreshold);
    return kExitKink;
  }
  if (!(report.norm_rel_err() <= kGradCheckTol)) {
    std::fprintf(stderr, "gradcheck: norm_rel_err %g exceeds %g\n",
                 report.norm_rel_err(), kGradCheckTol);
    return kExitUsage;
  }
  return kExitOk;
}

int cmd_jacobian(const RunConfig& rc) {
  require_inputs(rc, false);
  const LoadedProblem p = load_problem(rc);
  // Beyond kOracleCellLimit cells the library refuses; main() maps that to
  // the size-guard exit code.
  const gcde::UnrolledJacobian state = gcde::gcde_jacobian_wrt_state(
      p.model.adjacency(), p.model.weights(), p.h0);
  const gcde::UnrolledJacobian weights = gcde::gcde_jacobian_wrt_weights(
      p.model.adjacency(), p.h0, p.model.weights());

  const std::string state_path = out_path(rc, "jacobian_state.txt");
  const std::string weights_path = out_path(rc, "jacobian_weights.txt");
  gcde::io::save_matrix(state.inner, state_path);
  gcde::io::save_matrix(weights.inner, weights_path);

  std::printf("state jacobian %zux%zu -> %s\n", state.inner.rows(),
              state.inner.cols(), state_path.c_str());
  std::printf("weights jacobian %zux%zu -> %s\n", weights.inner.rows(),
              weights.inner.cols(), weights_path.c_str());
  return kExitOk;
}

int cmd_train(const RunConfig& rc) {
  require_inputs(rc, true);
  const LoadedProblem p = load_problem(rc);
  const gcde::Dataset ds{p.h0, gcde::io::load_matrix(rc.targets),
                         std::nullopt};
  const gcde::TrainConfig tc{rc.lr, rc.epochs, solver_config(rc), rc.seed};
  const gcde::FitResult result = gcde::fit(p.model, ds, tc);

  gcde::io::save_matrix(result.model.weights(), out_path(rc, "w_final.txt"));
  gcde::io::save_loss_history(result.loss_history,
                              out_path(rc, "loss_history.txt"));
  if (result.diverged) {
    std::fprintf(stderr, "train: loss diverged after %zu epochs\n",
                 result.loss_history.size());
    return kExitDivergence;
  }
  std::printf("epochs %zu\n", result.loss_history.size());
  std::printf("initial_loss %s\n",
              gcde::io::format_double(result.loss_history.front()).c_str());
  std::printf("final_loss %s\n",
              gcde::io::format_double(result.loss_history.back()).c_str());
  return kExitOk;
}

void add_common_options(CLI::App* cmd, RunConfig& rc, std::string& config) {
  // Presence is validated after config merging, hence no required() here.
  cmd->add_option("--config", config, "flat key = value config file");
  cmd->add_option("--graph", rc.graph, "graph file");
  cmd->add_option("--features", rc.features,
                  "initial node features (N x C)");
  cmd->add_option("--weights", rc.weights, "convolution weights (C x C)");
  cmd->add_option("--targets", rc.targets, "regression targets (N x C)");
  cmd->add_option("--t0", rc.t0, "start time");
  cmd->add_option("--t1", rc.t1, "end time");
  cmd->add_option("--solver", rc.solver, "integration method")
      ->check(CLI::IsMember({"euler", "rk4"}));
  cmd->add_option("--steps", rc.steps, "fixed step count")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--lr", rc.lr, "learning rate");
  cmd->add_option("--epochs", rc.epochs, "training epochs");
  cmd->add_option("--seed", rc.seed, "fixture seed (runs are deterministic)");
  cmd->add_option("--eps", rc.eps, "finite-difference step");
  cmd->add_option("--out", rc.out, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graph-convolutional neural ODE workbench"};
  app.require_subcommand(1);

  RunConfig rc;
  std::string config_path;
  int status = kExitOk;

  CLI::App* forward =
      app.add_subcommand("forward", "integrate the ODE, write H(t1)");
  add_common_options(forward, rc, config_path);
  forward->add_flag("--write-trajectory", rc.write_trajectory,
                    "also dump every stored state");
  forward->callback([&] { status = cmd_forward(rc); });

  CLI::App* gradcheck = app.add_subcommand(
      "gradcheck", "adjoint dL/dW against central finite differences");
  add_common_options(gradcheck, rc, config_path);
  gradcheck->callback([&] { status = cmd_gradcheck(rc); });

  CLI::App* jacobian = app.add_subcommand(
      "jacobian", "dump the unrolled state/weight Jacobians at H(t0)");
  add_common_options(jacobian, rc, config_path);
  jacobian->callback([&] { status = cmd_jacobian(rc); });

  CLI::App* train = app.add_subcommand(
      "train", "gradient descent on W, write weights and loss history");
  add_common_options(train, rc, config_path);
  train->callback([&] { status = cmd_train(rc); });

  try {
    const std::string pre = find_config_arg(argc, argv);
    if (!pre.empty()) apply_config_file(rc, pre);
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const gcde::OracleSizeError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSizeGuard;
  } catch (const gcde::DivergenceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return status;
}
