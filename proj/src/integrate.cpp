#include "lamorbit/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lamorbit/model.hpp"

namespace lamorbit::ode {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense-output weights (Hairer/Norsett/Wanner CONTD5).
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

void dense_eval(const DenseSegment& s, double tq, double* out) {
  const std::size_t n = s.c1.size();
  const double th = (tq - s.t0) / s.h;
  const double th1 = 1.0 - th;
  for (std::size_t i = 0; i < n; ++i)
    out[i] = s.c1[i] + th * (s.c2[i] + th1 * (s.c3[i] + th * (s.c4[i] + th1 * s.c5[i])));
}

bool crossing(double g0, double g1, int direction) {
  if (g0 == 0.0 || g1 == 0.0) return g0 != g1 && (g1 == 0.0);
  if (g0 * g1 > 0.0) return false;
  if (direction > 0) return g0 < 0.0;
  if (direction < 0) return g0 > 0.0;
  return true;
}

}  // namespace

void Result::eval(double s, double* out) const {
  if (dense.empty()) throw std::runtime_error("dense output empty");
  // Locate the segment containing s (steps may run in either direction).
  const bool fwd = dense.front().h > 0.0;
  std::size_t lo = 0, hi = dense.size();
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    const bool left = fwd ? (s < dense[mid].t0) : (s > dense[mid].t0);
    if (left)
      hi = mid;
    else
      lo = mid;
  }
  dense_eval(dense[lo], s, out);
}

std::vector<double> Result::eval(double s) const {
  std::vector<double> out(dense.front().c1.size());
  eval(s, out.data());
  return out;
}

Result integrate(const Rhs& f, std::span<const double> y0, double t0, double t1,
                 const Config& cfg, const std::vector<Event>& events) {
  const std::size_t n = y0.size();
  Result res;
  res.t.push_back(t0);
  res.y.emplace_back(y0.begin(), y0.end());
  if (t1 == t0) return res;

  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  const double hmax = cfg.h_max > 0.0 ? cfg.h_max : span;

  std::vector<double> y(y0.begin(), y0.end()), ynew(n), yerr(n), ysti(n);
  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
  std::vector<double> g_prev(events.size()), g_curr(events.size());

  double t = t0;
  f(t, y.data(), k1.data());

  // Initial step size: crude but scale-aware.
  double h = cfg.h0;
  if (h == 0.0) {
    double dmax = 0.0, ymax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dmax = std::max(dmax, std::abs(k1[i]));
      ymax = std::max(ymax, std::abs(y[i]));
    }
    const double scale = (1.0 + ymax);
    h = dmax > 0.0 ? 0.01 * scale / dmax : 1e-4 * span;
    h = std::min(h, hmax);
  }
  h = std::min(std::abs(h), hmax) * dir;

  for (std::size_t e = 0; e < events.size(); ++e) g_prev[e] = events[e].g(t, y.data());

  double err_old = 1e-4;
  while (res.n_accepted + res.n_rejected < cfg.max_steps) {
    const double remaining = t1 - t;
    if (dir * remaining <= 1e-14 * std::max(1.0, std::abs(t1))) break;
    if (std::abs(h) > std::abs(remaining)) h = remaining;
    if (std::abs(h) < 1e-15 * std::max(1.0, std::abs(t))) {
      res.status = IntegrateStatus::StepUnderflow;
      res.message = "step size underflow";
      return res;
    }

    auto stage = [&](double c, std::vector<double>& kout, auto&&... terms) {
      for (std::size_t i = 0; i < n; ++i) ysti[i] = y[i] + h * (... + terms(i));
      f(t + c * h, ysti.data(), kout.data());
    };
    stage(c2, k2, [&](std::size_t i) { return a21 * k1[i]; });
    stage(c3, k3, [&](std::size_t i) { return a31 * k1[i]; },
          [&](std::size_t i) { return a32 * k2[i]; });
    stage(c4, k4, [&](std::size_t i) { return a41 * k1[i]; },
          [&](std::size_t i) { return a42 * k2[i]; },
          [&](std::size_t i) { return a43 * k3[i]; });
    stage(c5, k5, [&](std::size_t i) { return a51 * k1[i]; },
          [&](std::size_t i) { return a52 * k2[i]; },
          [&](std::size_t i) { return a53 * k3[i]; },
          [&](std::size_t i) { return a54 * k4[i]; });
    stage(1.0, k6, [&](std::size_t i) { return a61 * k1[i]; },
          [&](std::size_t i) { return a62 * k2[i]; },
          [&](std::size_t i) { return a63 * k3[i]; },
          [&](std::size_t i) { return a64 * k4[i]; },
          [&](std::size_t i) { return a65 * k5[i]; });
    for (std::size_t i = 0; i < n; ++i)
      ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    f(t + h, ynew.data(), k7.data());

    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ei =
          h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err += (ei / sc) * (ei / sc);
    }
    err = std::sqrt(err / static_cast<double>(n));

    if (err <= 1.0) {
      // Accept; record dense output before any post-step adjustment.
      DenseSegment seg;
      seg.t0 = t;
      seg.h = h;
      seg.c1.assign(y.begin(), y.end());
      seg.c2.resize(n);
      seg.c3.resize(n);
      seg.c4.resize(n);
      seg.c5.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double dy = ynew[i] - y[i];
        seg.c2[i] = dy;
        seg.c3[i] = h * k1[i] - dy;
        seg.c4[i] = dy - h * k7[i] - seg.c3[i];
        seg.c5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] +
                         d7 * k7[i]);
      }
      res.dense.push_back(std::move(seg));

      const double t_new = t + h;
      bool terminal_hit = false;
      double t_cut = t_new;

      if (!events.empty()) {
        int best = -1;
        double t_best = t_new;
        std::vector<double> ytmp(n);
        for (std::size_t e = 0; e < events.size(); ++e) {
          g_curr[e] = events[e].g(t_new, ynew.data());
          if (!crossing(g_prev[e], g_curr[e], events[e].direction)) continue;
          // Bisection on the dense output to 1e-12 absolute in time.
          double lo = t, hi = t_new, glo = g_prev[e];
          while (std::abs(hi - lo) > 1e-12) {
            const double mid = 0.5 * (lo + hi);
            dense_eval(res.dense.back(), mid, ytmp.data());
            const double gm = events[e].g(mid, ytmp.data());
            if ((glo <= 0.0 && gm <= 0.0) || (glo >= 0.0 && gm >= 0.0)) {
              lo = mid;
              glo = gm;
            } else {
              hi = mid;
            }
          }
          const double t_ev = 0.5 * (lo + hi);
          dense_eval(res.dense.back(), t_ev, ytmp.data());
          res.events.push_back({static_cast<int>(e), t_ev, ytmp});
          if (events[e].terminal && (best < 0 || dir * (t_ev - t_best) < 0.0)) {
            best = static_cast<int>(e);
            t_best = t_ev;
          }
        }
        if (best >= 0) {
          terminal_hit = true;
          t_cut = t_best;
          // Drop recorded crossings that lie beyond the cut.
          std::erase_if(res.events,
                        [&](const EventHit& eh) { return dir * (eh.t - t_cut) > 0.0; });
        }
      }

      ++res.n_accepted;
      if (terminal_hit) {
        std::vector<double> ycut(n);
        dense_eval(res.dense.back(), t_cut, ycut.data());
        res.t.push_back(t_cut);
        res.y.push_back(std::move(ycut));
        res.status = IntegrateStatus::TerminalEvent;
        return res;
      }

      t = t_new;
      y = ynew;
      if (cfg.post_step) {
        cfg.post_step(t, y.data());
        for (std::size_t e = 0; e < events.size(); ++e) g_curr[e] = events[e].g(t, y.data());
      }
      f(t, y.data(), k1.data());  // refresh (post_step may have moved y; FSAL otherwise)
      res.t.push_back(t);
      res.y.push_back(y);
      g_prev = g_curr;

      const double fac =
          0.9 * std::pow(err > 0 ? err : 1e-16, -0.14) * std::pow(err_old, 0.08);
      err_old = std::max(err, 1e-4);
      h *= std::clamp(fac, 0.2, 5.0);
      if (std::abs(h) > hmax) h = hmax * dir;
    } else {
      ++res.n_rejected;
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
    }
  }

  if (dir * (t1 - t) > 1e-14 * std::max(1.0, std::abs(t1))) {
    res.status = IntegrateStatus::MaxSteps;
    res.message = "max_steps exceeded";
  }
  return res;
}

State4 project_to_level(const State4& x, double mu, double tol) {
  const double defect = std::abs(model::hamiltonian(x) - mu);
  if (defect > 0.1 * (1.0 + std::abs(mu)))
    throw std::domain_error("project_to_level: initial defect too large");
  State4 p = x;
  const State4 g0 = model::hamiltonian_gradient(x);
  double s = 0.0;
  for (int it = 0; it < 8; ++it) {
    const State4 xs = x + s * g0;
    const double r = model::hamiltonian(xs) - mu;
    if (std::abs(r) <= tol) {
      p = xs;
      return p;
    }
    const State4 gs = model::hamiltonian_gradient(xs);
    const double dr = gs.u * g0.u + gs.v * g0.v + gs.w * g0.w + gs.z * g0.z;
    if (dr == 0.0) break;
    s -= r / dr;
  }
  const State4 xs = x + s * g0;
  if (std::abs(model::hamiltonian(xs) - mu) <= 10.0 * tol) return xs;
  throw std::runtime_error("project_to_level: Newton did not converge");
}

}  // namespace lamorbit::ode
