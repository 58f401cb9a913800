#include "resest/median.hpp"

#include <algorithm>
#include <cmath>

#include "resest/errors.hpp"
#include "resest/integrate.hpp"

namespace resest {

namespace {

double saturate(double s, double eps) {
  if (eps <= 0.0) return sgn(s);
  return std::clamp(s / eps, -1.0, 1.0);
}

}  // namespace

MedianSet median_set(std::span<const double> values, std::span<const int> indicators) {
  if (values.size() != indicators.size()) throw DimensionError("median_set: size mismatch");
  std::vector<double> picked;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (indicators[i] != 0) picked.push_back(values[i]);
  if (picked.empty()) throw NoIndicatedValues();
  std::sort(picked.begin(), picked.end());
  const std::size_t S = picked.size();
  if (S % 2 == 1) return {picked[S / 2], picked[S / 2]};
  return {picked[S / 2 - 1], picked[S / 2]};
}

double centralized_median_rhs(double xhat, std::span<const double> values,
                              std::span<const int> indicators) {
  if (values.size() != indicators.size()) throw DimensionError("centralized_median_rhs: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    acc += static_cast<double>(indicators[i]) * sgn(values[i] - xhat);
  return acc;
}

void distributed_median_rhs(const Vector& x, std::span<const double> values,
                            std::span<const int> indicators, double gamma,
                            const Topology& topology, Vector& out, double saturation_eps) {
  const std::size_t N = topology.node_count();
  if (static_cast<std::size_t>(x.size()) != N || values.size() != N || indicators.size() != N)
    throw DimensionError("distributed_median_rhs: size mismatch");
  out.resize(x.size());
  for (std::size_t i = 0; i < N; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    double coupling = 0.0;
    for (std::size_t j : topology.neighbors(i)) coupling += x(static_cast<Eigen::Index>(j)) - x(ii);
    out(ii) = static_cast<double>(indicators[i]) * saturate(values[i] - x(ii), saturation_eps) +
              gamma * coupling;
  }
}

Vector distributed_median_rhs(const Vector& x, std::span<const double> values,
                              std::span<const int> indicators, double gamma,
                              const Topology& topology) {
  Vector out;
  distributed_median_rhs(x, values, indicators, gamma, topology, out);
  return out;
}

void MedianProblem::validate() const {
  const std::size_t N = topology.node_count();
  if (N == 0 || values.size() != N || indicators.size() != N)
    throw DimensionError("median problem: values, indicators and topology must agree in size");
  for (int s : indicators)
    if (s != 0 && s != 1) throw DomainError("median problem: indicators must be 0 or 1");
  if (std::none_of(indicators.begin(), indicators.end(), [](int s) { return s == 1; }))
    throw NoIndicatedValues();
  if (!(gamma > 0.0)) throw DomainError("median problem: gamma must be positive");
}

double default_median_horizon(const MedianProblem& problem, const Vector& x0, double tail_fraction) {
  problem.validate();
  const std::size_t N = problem.topology.node_count();
  const MedianSet m = median_set(problem.values, problem.indicators);
  double lo = m.lower, hi = m.upper;
  for (std::size_t i = 0; i < N; ++i) {
    if (problem.indicators[i] != 0) {
      lo = std::min(lo, problem.values[i]);
      hi = std::max(hi, problem.values[i]);
    }
  }
  double reach = 0.0;
  for (Eigen::Index i = 0; i < x0.size(); ++i) reach = std::max(reach, m.distance(x0(i)));
  const double D = reach + (hi - lo);
  const double lambda2 = N >= 2 ? algebraic_connectivity(laplacian(problem.topology)) : 1.0;
  double transient = 2.0 * static_cast<double>(N) * D;
  if (N >= 2) transient += 10.0 / (problem.gamma * lambda2);
  transient = std::max(transient, 1.0);
  return transient / (1.0 - tail_fraction);
}

MedianRun run_median_solver(const MedianProblem& problem, const Vector& x0,
                            const MedianRunOptions& options) {
  problem.validate();
  const std::size_t N = problem.topology.node_count();
  if (static_cast<std::size_t>(x0.size()) != N) throw DimensionError("run_median_solver: x0 size");
  if (!(options.dt > 0.0)) throw DomainError("run_median_solver: dt must be positive");
  if (!(options.tail_fraction > 0.0 && options.tail_fraction <= 1.0))
    throw DomainError("run_median_solver: tail fraction must lie in (0, 1]");

  MedianRun run;
  run.median = median_set(problem.values, problem.indicators);
  if (N >= 2) {
    run.lambda2 = algebraic_connectivity(laplacian(problem.topology));
    run.bound = theorem1_bound(N, problem.gamma, run.lambda2);
  }
  const double horizon =
      options.horizon > 0.0 ? options.horizon : default_median_horizon(problem, x0, options.tail_fraction);
  const auto steps = static_cast<std::size_t>(std::llround(horizon / options.dt));
  const std::size_t tail_first = steps - static_cast<std::size_t>(
      std::floor(options.tail_fraction * static_cast<double>(steps)));
  run.tail_start = static_cast<double>(tail_first) * options.dt;

  auto rhs = [&](double, const Vector& x, Vector& out) {
    distributed_median_rhs(x, problem.values, problem.indicators, problem.gamma, problem.topology,
                           out, options.saturation_eps);
  };
  auto spread = [&](const Vector& x) {
    double d = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) d = std::max(d, run.median.distance(x(i)));
    return d;
  };

  Vector x = x0;
  Rk4Workspace ws;
  const std::size_t every = std::max<std::size_t>(1, options.record_every);
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * options.dt;
    const double d = spread(x);
    if (k >= tail_first) run.tail_distance = std::max(run.tail_distance, d);
    if (k % every == 0 || k == steps) {
      run.times.push_back(t);
      run.states.push_back(x);
      run.distance.push_back(d);
    }
    if (k == steps) break;
    rk4_step(x, t, options.dt, rhs, ws);
  }
  return run;
}

double theorem1_bound(std::size_t N, double gamma, double lambda2) {
  if (N == 0 || !(gamma > 0.0) || !(lambda2 > 0.0))
    throw DomainError("theorem1_bound: N, gamma and lambda_2 must be positive");
  return 2.0 * std::sqrt(static_cast<double>(N)) / (gamma * lambda2);
}

}  // namespace resest
