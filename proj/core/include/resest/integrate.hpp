// Fixed-step classical Runge-Kutta stepping shared by every simulator in the
// library. All callers go through the same arithmetic, so two systems with
// bitwise-equal right-hand sides produce bitwise-equal trajectories.
#pragma once

#include "resest/linalg.hpp"

namespace resest {

struct Rk4Workspace {
  Vector k1, k2, k3, k4, stage;
  void resize(Eigen::Index n) {
    k1.resize(n);
    k2.resize(n);
    k3.resize(n);
    k4.resize(n);
    stage.resize(n);
  }
};

/// One RK4 step of x' = f(t, x). `f(t, x, out)` must fully overwrite `out`.
template <typename Rhs>
void rk4_step(Vector& x, double t, double dt, Rhs&& f, Rk4Workspace& ws) {
  if (ws.k1.size() != x.size()) ws.resize(x.size());
  const double half = 0.5 * dt;
  f(t, x, ws.k1);
  ws.stage = x + half * ws.k1;
  f(t + half, ws.stage, ws.k2);
  ws.stage = x + half * ws.k2;
  f(t + half, ws.stage, ws.k3);
  ws.stage = x + dt * ws.k3;
  f(t + dt, ws.stage, ws.k4);
  x += (dt / 6.0) * (ws.k1 + 2.0 * ws.k2 + 2.0 * ws.k3 + ws.k4);
}

}  // namespace resest
