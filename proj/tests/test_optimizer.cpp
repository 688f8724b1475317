#include "aidx/error.hpp"
#include "aidx/optimizer.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace aidx;
using opt::Vector;
using opt::Matrix;

namespace {

struct Quadratic {
    Matrix Q;
    Vector b;

    double operator()(const Vector& x) const { return 0.5 * x.dot(Q * x) - b.dot(x); }
    Vector grad(const Vector& x) const { return Q * x - b; }
    Vector solution() const { return Q.ldlt().solve(b); }
};

Quadratic random_spd(int n, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Matrix M(n, n);
    for (auto& e : M.reshaped()) e = nd(rng);
    Quadratic q{M * M.transpose() + n * Matrix::Identity(n, n), Vector(n)};
    for (auto& e : q.b) e = nd(rng);
    return q;
}

double rosenbrock(const Vector& x) { return std::pow(1 - x[0], 2) + 100 * std::pow(x[1] - x[0] * x[0], 2); }

Vector rosenbrock_grad(const Vector& x)
{
    Vector g(2);
    g[0] = -2 * (1 - x[0]) - 400 * x[0] * (x[1] - x[0] * x[0]);
    g[1] = 200 * (x[1] - x[0] * x[0]);
    return g;
}

} // namespace

class BfgsQuadratic : public ::testing::TestWithParam<int> {};

TEST_P(BfgsQuadratic, SolvesWithinDimensionPlusTwoIterations)
{
    const int n = GetParam();
    const auto q = random_spd(n, 100 + n);
    opt::BfgsOptions o;
    o.tol = 1e-10;
    const auto r = opt::bfgs_minimize(q, Vector::Zero(n), o, [&](const Vector& x) { return q.grad(x); });
    EXPECT_TRUE(r.converged());
    EXPECT_LE(r.state.iteration, n + 2);
    EXPECT_LE((r.x - q.solution()).cwiseAbs().maxCoeff(), 1e-6);
}

INSTANTIATE_TEST_SUITE_P(Sizes, BfgsQuadratic, ::testing::Range(2, 11));

TEST(Bfgs, RosenbrockFromClassicStart)
{
    Vector x0(2);
    x0 << -1.2, 1.0;
    opt::BfgsOptions o;
    o.tol = 1e-12;
    const auto r = opt::bfgs_minimize(rosenbrock, x0, o, rosenbrock_grad);
    EXPECT_LT(r.f, 1e-10);
    EXPECT_LE(r.state.iteration, 200);
}

TEST(Bfgs, EveryAcceptedStepSatisfiesArmijo)
{
    Vector x0(2);
    x0 << -1.2, 1.0;
    opt::BfgsOptions o;
    o.tol = 1e-12;
    const auto r = opt::bfgs_minimize(rosenbrock, x0, o, rosenbrock_grad);
    ASSERT_GT(r.trace.size(), 2u);
    for (std::size_t k = 1; k < r.trace.size(); ++k) {
        const auto& a = r.trace[k - 1];
        const auto& b = r.trace[k];
        const double predicted = rosenbrock_grad(a.x).dot(b.x - a.x);
        EXPECT_LT(predicted, 0.0);
        EXPECT_LE(b.f, a.f + o.c1 * predicted) << "iteration " << k;
    }
}

TEST(Bfgs, FiniteDifferenceGradientConverges)
{
    const auto q = random_spd(4, 7);
    opt::BfgsOptions o;
    o.tol = 1e-8;
    const auto r = opt::bfgs_minimize(q, Vector::Zero(4), o);
    EXPECT_LE((r.x - q.solution()).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Bfgs, StartAtOptimumStopsImmediately)
{
    const auto q = random_spd(3, 9);
    const auto r = opt::bfgs_minimize(q, q.solution(), {}, [&](const Vector& x) { return q.grad(x); });
    EXPECT_EQ(r.status, opt::Status::converged_gradient);
    EXPECT_EQ(r.state.iteration, 0);
}

TEST(Bfgs, HessianApproximationStaysSymmetricPositiveDefinite)
{
    Vector x0(2);
    x0 << -1.2, 1.0;
    opt::BfgsOptions o;
    o.max_iter = 15;
    const auto r = opt::bfgs_minimize(rosenbrock, x0, o, rosenbrock_grad);
    const auto& B = r.state.b_k;
    EXPECT_LE((B - B.transpose()).cwiseAbs().maxCoeff(), 1e-12 * B.cwiseAbs().maxCoeff());
    EXPECT_EQ(Eigen::LLT<Matrix>(B).info(), Eigen::Success);
}

TEST(Bfgs, NonFiniteStartIsASimulationError)
{
    EXPECT_THROW(opt::bfgs_minimize([](const Vector&) { return NAN; }, Vector::Zero(1)), SimulationError);
}

TEST(FiniteDifference, MatchesAnalyticGradient)
{
    Vector x(2);
    x << 0.3, -0.8;
    const auto g = opt::fd_gradient(rosenbrock, x);
    EXPECT_LE((g - rosenbrock_grad(x)).cwiseAbs().maxCoeff(), 1e-5);
    opt::FdOptions par;
    par.policy = ExecPolicy::parallel;
    long evals = 0;
    EXPECT_EQ(opt::fd_gradient(rosenbrock, x, par, &evals), g);
    EXPECT_EQ(evals, 4);
}

TEST(NelderMead, AgreesWithDirectSolveOnQuadratics)
{
    for (int n : {2, 3, 5}) {
        const auto q = random_spd(n, 30 + n);
        const auto r = opt::nelder_mead_minimize(q, Vector::Zero(n));
        EXPECT_LE((r.x - q.solution()).cwiseAbs().maxCoeff(), 1e-3) << "n = " << n;
    }
}

TEST(GoldenSection, FindsInteriorAndBoundaryMinima)
{
    const auto in = opt::golden_section([](double x) { return (x - 0.3) * (x - 0.3); }, 0.0, 1.0, 1e-8);
    EXPECT_NEAR(in.x, 0.3, 1e-7);
    const auto edge = opt::golden_section([](double x) { return x; }, 0.0, 0.5, 1e-6);
    EXPECT_EQ(edge.x, 0.0);
}

TEST(Trace, CsvHasHeaderAndOneRowPerIteration)
{
    const auto q = random_spd(2, 3);
    const auto r = opt::bfgs_minimize(q, Vector::Zero(2), {}, [&](const Vector& x) { return q.grad(x); });
    std::ostringstream os;
    opt::write_trace_csv(os, r.trace);
    const auto s = os.str();
    EXPECT_EQ(s.rfind("iteration,f,grad_norm,step_norm,evals\n", 0), 0u);
    EXPECT_EQ(static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')), r.trace.size() + 1);
}
