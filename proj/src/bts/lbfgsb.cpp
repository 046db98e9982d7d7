#include "plume/bts/lbfgsb.hpp"

#include "plume/core/error.hpp"

#include <cmath>
#include <deque>

namespace plume::bts {

namespace {

/// Active variables: on a bound with the descent direction pointing out.
Eigen::Array<bool, Eigen::Dynamic, 1> free_set(const Eigen::VectorXd& x, const Eigen::VectorXd& g, const Box& box) {
  return !(((x.array() <= box.lower.array()) && (g.array() > 0.0)) ||
           ((x.array() >= box.upper.array()) && (g.array() < 0.0)));
}

double projected_gradient_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& g, const Box& box) {
  return (x - box.project(x - g)).cwiseAbs().maxCoeff();
}

struct Pair {
  Eigen::VectorXd s, y;
  double rho;
};

}  // namespace

LbfgsResult minimize_box(const Objective& f, const Eigen::VectorXd& x0, const Box& box, const LbfgsOptions& options) {
  const Eigen::Index n = x0.size();
  if (box.lower.size() != n || box.upper.size() != n) throw DomainError("bound vectors do not match the variable count");
  if ((box.lower.array() > box.upper.array()).any()) throw DomainError("lower bound exceeds upper bound");

  LbfgsResult res;
  res.x = box.project(x0);
  Eigen::VectorXd g(n);
  res.f = f(res.x, g);
  if (!std::isfinite(res.f) || !g.allFinite()) {
    res.status = LbfgsStatus::NonFinite;
    return res;
  }
  res.trace.push_back(res.f);
  if (n == 0 || projected_gradient_norm(res.x, g, box) <= options.pg_tol) {
    res.status = LbfgsStatus::Converged;
    return res;
  }

  std::deque<Pair> memory;
  Eigen::VectorXd x_new(n), g_new(n), d(n), q(n);
  std::vector<double> alpha;
  constexpr double kArmijo = 1e-4;
  constexpr int kMaxBacktracks = 50;

  for (int it = 0; it < options.max_iter; ++it) {
    const auto free = free_set(res.x, g, box);
    const Eigen::VectorXd g_free = free.select(g, 0.0);

    bool steepest = memory.empty();
    if (!steepest) {
      // Two-loop recursion on the free subspace.
      q = g_free;
      alpha.assign(memory.size(), 0.0);
      for (std::size_t i = memory.size(); i-- > 0;) {
        alpha[i] = memory[i].rho * memory[i].s.dot(q);
        q -= alpha[i] * memory[i].y;
      }
      const Pair& last = memory.back();
      q *= last.s.dot(last.y) / last.y.squaredNorm();
      for (std::size_t i = 0; i < memory.size(); ++i) {
        const double beta = memory[i].rho * memory[i].y.dot(q);
        q += (alpha[i] - beta) * memory[i].s;
      }
      d = free.select(-q, 0.0);
      if (!(d.dot(g_free) < 0.0)) steepest = true;
    }
    double step = 1.0;
    if (steepest) {
      d = -g_free;
      // First step of unit length in the max-norm keeps the initial probe on scale.
      const double dmax = d.cwiseAbs().maxCoeff();
      step = memory.empty() && dmax > 0.0 ? std::min(1.0, 1.0 / dmax) : 1.0;
    }

    bool accepted = false;
    double f_new = 0.0;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      x_new = box.project(res.x + step * d);
      f_new = f(x_new, g_new);
      if (!std::isfinite(f_new) || !g_new.allFinite()) {
        step *= 0.5;
        continue;
      }
      if (f_new <= res.f + kArmijo * g.dot(x_new - res.x) && f_new <= res.f) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!std::isfinite(f_new) || !g_new.allFinite()) {
        res.status = LbfgsStatus::NonFinite;
        res.iterations = it;
        return res;
      }
      if (!memory.empty()) {
        // The quasi-Newton model went stale; retry from steepest descent.
        memory.clear();
        continue;
      }
      res.status = LbfgsStatus::Converged;
      res.iterations = it;
      return res;
    }

    Pair p{x_new - res.x, g_new - g, 0.0};
    const double sy = p.s.dot(p.y);
    if (sy > 1e-12 * p.s.norm() * p.y.norm() && sy > 0.0) {
      p.rho = 1.0 / sy;
      memory.push_back(std::move(p));
      if (static_cast<int>(memory.size()) > options.memory) memory.pop_front();
    }
    const double f_old = res.f;
    res.x = x_new;
    res.f = f_new;
    g = g_new;
    res.trace.push_back(res.f);
    res.iterations = it + 1;
    if (std::abs(f_old - f_new) <= options.tol * std::max(std::abs(f_old), std::abs(f_new)) ||
        projected_gradient_norm(res.x, g, box) <= options.pg_tol) {
      res.status = LbfgsStatus::Converged;
      return res;
    }
  }
  res.status = LbfgsStatus::MaxIterations;
  return res;
}

}  // namespace plume::bts
