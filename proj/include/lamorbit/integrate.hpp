#pragma once

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "lamorbit/types.hpp"

// Explicit embedded Runge-Kutta 5(4) pair (Dormand-Prince coefficients) with
// PI step-size control, 4th-order dense output, event detection on the dense
// output, and an optional post-step hook (used for Hamiltonian projection).

namespace lamorbit::ode {

using Rhs = std::function<void(double t, const double* y, double* dydt)>;

struct Config {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double h0 = 0.0;      // 0: choose automatically
  double h_max = 0.0;   // 0: |t1 - t0|
  long max_steps = 1000000;
  // Called after every accepted step; may adjust the state in place
  // (e.g. projection back onto an energy level).
  std::function<void(double t, double* y)> post_step;
};

struct Event {
  std::function<double(double t, const double* y)> g;
  int direction = 0;     // +1: increasing crossings, -1: decreasing, 0: both
  bool terminal = false;
};

struct EventHit {
  int index = -1;
  double t = 0.0;
  std::vector<double> y;
};

enum class IntegrateStatus { Ok, TerminalEvent, MaxSteps, StepUnderflow };

/// One accepted step's dense-output data (quartic Hermite-type interpolant).
struct DenseSegment {
  double t0 = 0.0;
  double h = 0.0;
  std::vector<double> c1, c2, c3, c4, c5;
};

struct Result {
  IntegrateStatus status = IntegrateStatus::Ok;
  std::string message;
  std::vector<double> t;                  // accepted step times (incl. t0)
  std::vector<std::vector<double>> y;     // states at those times
  std::vector<DenseSegment> dense;
  std::vector<EventHit> events;
  long n_accepted = 0;
  long n_rejected = 0;

  bool ok() const { return status == IntegrateStatus::Ok || status == IntegrateStatus::TerminalEvent; }
  double t_final() const { return t.back(); }
  const std::vector<double>& y_final() const { return y.back(); }

  /// Evaluate the dense output at time s (must lie inside the covered span).
  void eval(double s, double* out) const;
  std::vector<double> eval(double s) const;
};

Result integrate(const Rhs& f, std::span<const double> y0, double t0, double t1,
                 const Config& cfg = {}, const std::vector<Event>& events = {});

/// Project x onto the level set {H = mu} along grad H(x) by a 1D Newton.
/// Throws std::domain_error if the initial defect exceeds 0.1 * (1 + |mu|);
/// returns the projected state (|H - mu| <= tol, at most 8 iterations).
State4 project_to_level(const State4& x, double mu, double tol = 1e-13);

}  // namespace lamorbit::ode
