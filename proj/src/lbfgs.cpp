#include "httn/optim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace httn::optim {

std::string to_string(LbfgsStatus status) {
  switch (status) {
    case LbfgsStatus::kConverged: return "converged";
    case LbfgsStatus::kMaxIterations: return "max_iterations";
    case LbfgsStatus::kLineSearchFailed: return "line_search_failed";
    case LbfgsStatus::kNonFinite: return "non_finite";
  }
  return "unknown";
}

namespace {

struct Point {
  double alpha = 0.0;
  double f = 0.0;
  double slope = 0.0;  // directional derivative
  Eigen::VectorXd x;
  Eigen::VectorXd g;
};

// Minimizer of the cubic through (a, fa, da) and (b, fb, db), clamped to the
// interior of [a, b]; falls back to bisection when the cubic is degenerate.
double cubic_minimizer(const Point& a, const Point& b) {
  const double lo = std::min(a.alpha, b.alpha);
  const double hi = std::max(a.alpha, b.alpha);
  const double d1 = a.slope + b.slope - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
  const double disc = d1 * d1 - a.slope * b.slope;
  double t = 0.5 * (lo + hi);
  if (disc >= 0.0) {
    const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
    const double denom = b.slope - a.slope + 2.0 * d2;
    if (denom != 0.0) t = b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / denom;
  }
  const double margin = 0.1 * (hi - lo);
  if (!std::isfinite(t) || t < lo + margin || t > hi - margin) t = 0.5 * (lo + hi);
  return t;
}

class LineSearch {
 public:
  LineSearch(const Objective& f, const Eigen::VectorXd& x0, double f0, const Eigen::VectorXd& dir,
             double slope0, const LbfgsOptions& opt, std::size_t& evaluations)
      : f_(f), x0_(x0), f0_(f0), dir_(dir), slope0_(slope0), opt_(opt), evals_(evaluations) {}

  // Returns true on a point satisfying the strong Wolfe conditions; `best`
  // always holds the lowest finite point evaluated.
  bool run(double alpha_init, Point& out, Point& best) {
    best.f = std::numeric_limits<double>::infinity();
    Point prev{0.0, f0_, slope0_, x0_, {}};
    double alpha = alpha_init;
    for (std::size_t i = 0; i < opt_.max_line_search_evaluations; ++i) {
      Point cur = evaluate(alpha);
      track(cur, best);
      if (!std::isfinite(cur.f)) {
        alpha = 0.5 * (prev.alpha + alpha);
        continue;
      }
      if (cur.f > f0_ + opt_.c1 * alpha * slope0_ || (i > 0 && cur.f >= prev.f))
        return zoom(prev, cur, out, best);
      if (std::abs(cur.slope) <= -opt_.c2 * slope0_) {
        out = cur;
        return true;
      }
      if (cur.slope >= 0.0) return zoom(cur, prev, out, best);
      prev = cur;
      alpha *= 2.0;
    }
    return false;
  }

 private:
  Point evaluate(double alpha) {
    Point p;
    p.alpha = alpha;
    p.x = x0_ + alpha * dir_;
    p.g.resize(p.x.size());
    p.f = f_(p.x, p.g);
    ++evals_;
    p.slope = p.g.dot(dir_);
    if (!std::isfinite(p.slope) || !p.g.allFinite()) p.f = std::numeric_limits<double>::quiet_NaN();
    return p;
  }

  static void track(const Point& p, Point& best) {
    if (std::isfinite(p.f) && p.f < best.f) best = p;
  }

  bool zoom(Point lo, Point hi, Point& out, Point& best) {
    for (std::size_t i = 0; i < opt_.max_line_search_evaluations; ++i) {
      if (std::abs(hi.alpha - lo.alpha) < 1e-16 * std::max(1.0, lo.alpha)) return false;
      Point cur = evaluate(cubic_minimizer(lo, hi));
      track(cur, best);
      if (!std::isfinite(cur.f) || cur.f > f0_ + opt_.c1 * cur.alpha * slope0_ || cur.f >= lo.f) {
        hi = cur;
        if (!std::isfinite(cur.f)) hi.f = std::numeric_limits<double>::max(), hi.slope = 0.0;
        continue;
      }
      if (std::abs(cur.slope) <= -opt_.c2 * slope0_) {
        out = cur;
        return true;
      }
      if (cur.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
      lo = cur;
    }
    return false;
  }

  const Objective& f_;
  const Eigen::VectorXd& x0_;
  double f0_;
  const Eigen::VectorXd& dir_;
  double slope0_;
  const LbfgsOptions& opt_;
  std::size_t& evals_;
};

}  // namespace

LbfgsResult lbfgs_minimize(const Objective& f, Eigen::VectorXd x0, const LbfgsOptions& options) {
  LbfgsResult result;
  Eigen::VectorXd g(x0.size());
  double fx = f(x0, g);
  result.evaluations = 1;
  result.x = x0;
  result.value = fx;
  if (!std::isfinite(fx) || !g.allFinite()) {
    result.status = LbfgsStatus::kNonFinite;
    return result;
  }
  result.trace.push_back(fx);

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  Eigen::VectorXd x = x0;
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    if (g.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance) {
      result.status = LbfgsStatus::kConverged;
      break;
    }
    // two-loop recursion
    Eigen::VectorXd q = g;
    std::vector<double> a(s_hist.size());
    for (std::size_t k = s_hist.size(); k-- > 0;) {
      a[k] = rho_hist[k] * s_hist[k].dot(q);
      q -= a[k] * y_hist[k];
    }
    double gamma = 1.0;
    if (!s_hist.empty()) gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    Eigen::VectorXd dir = -gamma * q;
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      const double b = rho_hist[k] * y_hist[k].dot(dir);
      dir -= (a[k] + b) * s_hist[k];
    }
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      s_hist.clear(), y_hist.clear(), rho_hist.clear();
      dir = -g;
      slope = -g.squaredNorm();
    }
    const double alpha0 = s_hist.empty() ? std::min(1.0, 1.0 / g.lpNorm<Eigen::Infinity>()) : 1.0;

    Point accepted, best;
    LineSearch ls(f, x, fx, dir, slope, options, result.evaluations);
    const bool ok = ls.run(alpha0, accepted, best);
    if (!ok) {
      if (std::isfinite(best.f) && best.f < fx) {
        accepted = best;
      } else {
        result.status = LbfgsStatus::kLineSearchFailed;
        result.iterations = it;
        break;
      }
    }
    const Eigen::VectorXd s = accepted.x - x;
    const Eigen::VectorXd y = accepted.g - g;
    const double sy = s.dot(y);
    const double previous = fx;
    x = accepted.x;
    fx = accepted.f;
    g = accepted.g;
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
      if (s_hist.size() > options.memory) {
        s_hist.pop_front(), y_hist.pop_front(), rho_hist.pop_front();
      }
    }
    if (fx < result.value) {
      result.value = fx;
      result.x = x;
    }
    result.trace.push_back(result.value);
    result.iterations = it + 1;
    if (std::abs(previous - fx) <= options.function_tolerance * std::max(1.0, std::abs(fx))) {
      result.status = LbfgsStatus::kConverged;
      break;
    }
  }
  return result;
}

}  // namespace httn::optim
