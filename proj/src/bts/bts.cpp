#include "plume/bts/bts.hpp"

#include "plume/bts/lbfgsb.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace plume::bts {

namespace {

/// Clean-set statistics: the first term equals spread + ||L_off - mean||^2,
/// so each evaluation costs O(B) for it instead of O(nB).
struct CleanStats {
  Spectrum mean;
  double spread = 0.0;
};

CleanStats clean_stats(const RowMatrix& clean) {
  CleanStats s;
  s.mean = clean.colwise().mean().transpose();
  s.spread = (clean.rowwise() - s.mean.transpose()).rowwise().squaredNorm().mean();
  return s;
}

double evaluate(const CleanStats& cs, const RowMatrix& contaminated, const Spectrum& l_off, const RowMatrix& psi,
                const Spectrum& t, Spectrum& g_l, RowMatrix& g_psi, Spectrum& g_t) {
  const Spectrum dc = l_off - cs.mean;
  double value = cs.spread + dc.squaredNorm();
  g_l = 2.0 * dc;
  const auto m = contaminated.rows();
  g_psi.resize(m, l_off.size());
  g_t = Spectrum::Zero(l_off.size());
  if (m == 0) return value;
  const double w = 1.0 / static_cast<double>(m);
  Spectrum sum_r = Spectrum::Zero(l_off.size());
  double sq = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const Spectrum r = contaminated.row(i).transpose() - l_off - psi.row(i).transpose().cwiseProduct(t);
    sq += r.squaredNorm();
    sum_r += r;
    g_psi.row(i) = (-2.0 * w) * r.cwiseProduct(t).transpose();
    g_t -= (2.0 * w) * r.cwiseProduct(psi.row(i).transpose());
  }
  value += w * sq;
  g_l -= (2.0 * w) * sum_r;
  return value;
}

Eigen::VectorXd pack(const BtsPoint& p) {
  const Eigen::Index b = p.l_off.size();
  const Eigen::Index m = p.psi.rows();
  Eigen::VectorXd x(b * (m + 2));
  x.head(b) = p.l_off;
  x.segment(b, m * b) = Eigen::Map<const Eigen::VectorXd>(p.psi.data(), m * b);
  x.tail(b) = p.t;
  return x;
}

BtsPoint unpack(const Eigen::VectorXd& x, Eigen::Index b, Eigen::Index m) {
  BtsPoint p;
  p.l_off = x.head(b);
  p.psi = Eigen::Map<const RowMatrix>(x.data() + b, m, b);
  p.t = x.tail(b);
  return p;
}

BtsSolution to_solution(const LbfgsResult& r, Eigen::Index b, Eigen::Index m) {
  BtsPoint p = unpack(r.x, b, m);
  BtsSolution s;
  s.l_off = std::move(p.l_off);
  s.psi = std::move(p.psi);
  s.t = std::move(p.t);
  s.objective = r.f;
  s.converged = r.status == LbfgsStatus::Converged;
  s.iterations = r.iterations;
  s.trace = r.trace;
  return s;
}

}  // namespace

void BtsProblem::validate() const {
  if (clean.rows() < 1) throw DomainError("BTS needs at least one clean pixel");
  if (clean.cols() < 1) throw DomainError("BTS needs at least one band");
  if (contaminated.rows() > 0 && contaminated.cols() != clean.cols()) {
    throw DomainError("clean and contaminated band counts differ");
  }
  if (!clean.allFinite() || !contaminated.allFinite()) throw DomainError("BTS data must be finite");
}

BtsObjective bts_objective(const BtsPoint& point, const BtsProblem& problem) {
  problem.validate();
  const auto b = problem.clean.cols();
  if (point.l_off.size() != b || point.t.size() != b || point.psi.rows() != problem.contaminated.rows() ||
      (point.psi.rows() > 0 && point.psi.cols() != b)) {
    throw DomainError("BTS point shape does not match the problem");
  }
  BtsObjective out;
  out.value = evaluate(clean_stats(problem.clean), problem.contaminated, point.l_off, point.psi, point.t,
                       out.gradient.l_off, out.gradient.psi, out.gradient.t);
  return out;
}

BtsPoint initial_point(const BtsProblem& problem) {
  problem.validate();
  const auto b = problem.clean.cols();
  const auto m = problem.contaminated.rows();
  const bool absorb = problem.sign_mode == SignMode::Absorption;
  BtsPoint p;
  p.l_off = problem.clean.colwise().mean().transpose();
  p.t = Spectrum::Ones(b);
  p.psi = RowMatrix::Zero(m, b);
  if (m == 0) return p;

  const RowMatrix residual = problem.contaminated.rowwise() - p.l_off.transpose();
  const Spectrum mean_r = residual.colwise().mean().transpose();
  const Spectrum part = (absorb ? Spectrum(-mean_r) : mean_r).cwiseMax(0.0);
  const double peak = part.maxCoeff();
  if (peak > 0.0) p.t = (part / peak).cwiseMin(1.0);
  const double tt = p.t.squaredNorm();
  for (Eigen::Index i = 0; i < m; ++i) {
    double c = residual.row(i).dot(p.t.transpose()) / tt;
    c = absorb ? std::min(c, 0.0) : std::max(c, 0.0);
    p.psi.row(i).setConstant(c);
  }
  return p;
}

BtsSolution solve_bts(const BtsProblem& problem, const BtsOptions& options) {
  problem.validate();
  if (options.max_iter < 0) throw DomainError("max_iter must be non-negative");
  if (!(options.tol >= 0.0)) throw DomainError("tol must be non-negative");
  const auto b = problem.clean.cols();
  const auto m = problem.contaminated.rows();
  const CleanStats cs = clean_stats(problem.clean);

  constexpr double kInf = std::numeric_limits<double>::infinity();
  Box box{Eigen::VectorXd::Constant(b * (m + 2), -kInf), Eigen::VectorXd::Constant(b * (m + 2), kInf)};
  if (problem.sign_mode == SignMode::Absorption) {
    box.upper.segment(b, m * b).setZero();
  } else {
    box.lower.segment(b, m * b).setZero();
  }
  box.lower.tail(b).setZero();
  box.upper.tail(b).setOnes();

  Spectrum g_l, g_t;
  RowMatrix g_psi;
  const Objective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    const Eigen::Map<const Spectrum> l_off(x.data(), b);
    const Eigen::Map<const RowMatrix> psi(x.data() + b, m, b);
    const Eigen::Map<const Spectrum> t(x.data() + b * (m + 1), b);
    const double v = evaluate(cs, problem.contaminated, l_off, psi, t, g_l, g_psi, g_t);
    grad.resize(x.size());
    grad.head(b) = g_l;
    grad.segment(b, m * b) = Eigen::Map<const Eigen::VectorXd>(g_psi.data(), m * b);
    grad.tail(b) = g_t;
    return v;
  };

  LbfgsOptions lo;
  lo.max_iter = options.max_iter;
  lo.tol = options.tol;
  const LbfgsResult r = minimize_box(f, pack(initial_point(problem)), box, lo);
  BtsSolution sol = to_solution(r, b, m);
  if (r.status == LbfgsStatus::NonFinite) throw BtsNumericalError("BTS objective became non-finite", std::move(sol));
  return sol;
}

void write_trace_csv(const BtsSolution& solution, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << "iteration,objective\n";
  os.precision(17);
  for (std::size_t i = 0; i < solution.trace.size(); ++i) os << i << ',' << solution.trace[i] << '\n';
}

}  // namespace plume::bts
