// Distributed median solver: median sets, the centralized signum gradient
// flow, its networked counterpart with Laplacian coupling, and the
// steady-state bound 2 sqrt(N) / (gamma lambda_2).
#pragma once

#include <span>
#include <vector>

#include "resest/graph.hpp"
#include "resest/linalg.hpp"

namespace resest {

/// sgn(s) with sgn(0) = 0.
inline double sgn(double s) { return static_cast<double>((s > 0.0) - (s < 0.0)); }

/// Median of the indicated values: a point for an odd count, the closed
/// interval between the two middle values for an even count.
struct MedianSet {
  double lower = 0.0;
  double upper = 0.0;
  bool singleton() const { return lower == upper; }
  double distance(double x) const {
    if (x > upper) return x - upper;
    if (x < lower) return lower - x;
    return 0.0;
  }
};

/// Throws NoIndicatedValues when every indicator is zero.
MedianSet median_set(std::span<const double> values, std::span<const int> indicators);

/// sum_i s_i sgn(z_i - xhat).
double centralized_median_rhs(double xhat, std::span<const double> values,
                              std::span<const int> indicators);

/// Component i: s_i sgn(z_i - x_i) + gamma sum_{j in N_i} (x_j - x_i).
/// With `saturation_eps > 0` the signum is replaced by sat(s / eps).
void distributed_median_rhs(const Vector& x, std::span<const double> values,
                            std::span<const int> indicators, double gamma,
                            const Topology& topology, Vector& out, double saturation_eps = 0.0);
Vector distributed_median_rhs(const Vector& x, std::span<const double> values,
                              std::span<const int> indicators, double gamma,
                              const Topology& topology);

struct MedianProblem {
  std::vector<double> values;
  std::vector<int> indicators;
  Topology topology;
  double gamma = 1.0;

  /// Throws DimensionError / DomainError / NoIndicatedValues.
  void validate() const;
};

struct MedianRunOptions {
  double horizon = 0.0;  ///< <= 0 selects default_median_horizon
  double dt = 1e-3;
  double tail_fraction = 0.2;
  double saturation_eps = 0.0;  ///< 0 keeps the exact signum
  std::size_t record_every = 1;
};

struct MedianRun {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<double> distance;  ///< max_i dist(x_i, median set), per recorded sample
  MedianSet median;
  double tail_start = 0.0;
  double tail_distance = 0.0;  ///< sup over every step in the tail window
  double lambda2 = 0.0;
  double bound = 0.0;  ///< theorem1_bound(N, gamma, lambda2)
};

/// Settling time estimate used when no horizon is given: 10/(gamma lambda_2)
/// for the consensus transient plus 2 N D for the average to cross the
/// value range, D being the largest distance from x0 to the median set plus
/// the spread of the indicated values. The tail window is appended on top.
double default_median_horizon(const MedianProblem& problem, const Vector& x0,
                              double tail_fraction = 0.2);

/// Integrates the networked flow with fixed-step RK4 from x0.
MedianRun run_median_solver(const MedianProblem& problem, const Vector& x0,
                            const MedianRunOptions& options = {});

/// 2 sqrt(N) / (gamma lambda_2). Throws DomainError for nonpositive arguments.
double theorem1_bound(std::size_t N, double gamma, double lambda2);

}  // namespace resest
