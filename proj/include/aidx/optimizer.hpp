#pragma once

#include "aidx/crossbar.hpp"

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace aidx::opt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Objective = std::function<double(const Vector&)>;
using GradientFn = std::function<Vector(const Vector&)>;

enum class Status {
    converged_gradient,
    converged_step,
    converged_simplex,
    max_iterations,
    line_search_failed,
};

std::string to_string(Status s);

struct TraceRow {
    int iteration = 0;
    double f = 0.0;
    double grad_norm = 0.0;   ///< inf-norm; simplex f-spread for Nelder-Mead
    double step_norm = 0.0;   ///< inf-norm
    long evals = 0;           ///< cumulative objective evaluations
    Vector x;
};

/// Quasi-Newton bookkeeping for one BFGS iteration.
struct OptimizerState {
    Vector x_k;
    Matrix b_k;
    Vector grad_k;
    Vector p_k, s_k, y_k;
    double alpha_k = 0.0;
    int iteration = 0;
    int skipped_updates = 0;
};

struct Result {
    Vector x;
    double f = 0.0;
    Status status = Status::max_iterations;
    long evals = 0;
    std::vector<TraceRow> trace;
    OptimizerState state;   ///< final BFGS state (empty for Nelder-Mead)

    bool converged() const
    {
        return status == Status::converged_gradient || status == Status::converged_step ||
               status == Status::converged_simplex;
    }
};

struct FdOptions {
    double rel_step = 1e-6;
    double min_step = 1e-6;
    ExecPolicy policy = ExecPolicy::serial;   ///< parallel requires a thread-safe objective
};

/// Central differences. Throws SimulationError on a non-finite probe value.
Vector fd_gradient(const Objective& f, const Vector& x, const FdOptions& opt = {}, long* evals = nullptr);

struct BfgsOptions {
    double tol = 1e-8;
    int max_iter = 200;
    double c1 = 1e-4;
    double shrink = 0.5;
    double alpha_min = 1e-12;
    double curvature_eps = 1e-10;
    FdOptions fd{};
};

/// BFGS with B_0 = I. `grad` defaults to fd_gradient of f.
Result bfgs_minimize(const Objective& f, const Vector& x0, const BfgsOptions& opt = {},
                     const GradientFn& grad = nullptr);

struct NelderMeadOptions {
    double tol = 1e-12;
    int max_iter = 5000;
    double reflect = 1.0;
    double expand = 2.0;
    double contract = 0.5;
    double shrink = 0.5;
};

Result nelder_mead_minimize(const Objective& f, const Vector& x0, const NelderMeadOptions& opt = {});

struct ScalarMin {
    double x = 0.0;
    double f = 0.0;
    int evals = 0;
};

/// Golden-section search for a unimodal function on [lo, hi].
ScalarMin golden_section(const std::function<double(double)>& f, double lo, double hi, double tol);

/// iteration,f,grad_norm,step_norm,evals
void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace);

} // namespace aidx::opt
