// Primal-dual interior point method for the programs of maxent.hpp.
//
// Pipeline: presolve (fixed variables, empty and forcing rows) -> column and
// row scaling -> inequality rows get slacks s >= 0 -> barrier iterations on
//
//   [ H + Sigma + rho I    M^T   ] [ dx ]   [ r1 ]
//   [ M                 -delta I ] [ -dy] = [ r2 ]
//
// where H is the (diagonal) Hessian of the entropy terms and Sigma the bound
// barrier terms. The matrix is symmetric quasi-definite, so a sparse LDL^T
// without pivoting exists for any fill-reducing ordering. Iterative
// refinement against the unregularized matrix recovers accuracy lost to
// rho and delta. The barrier parameter follows the monotone Fiacco-McCormick
// rule: it is reduced once the barrier subproblem is solved to within 10 mu.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

#include "cattle/maxent.hpp"

namespace cattle::maxent {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

struct RowEntry {
  int col;
  double value;
};

using Rows = std::vector<std::vector<RowEntry>>;

Rows to_rows(const std::vector<Entry>& entries, int rows, int cols) {
  Rows out(static_cast<std::size_t>(rows));
  for (const auto& e : entries) {
    if (e.row < 0 || e.row >= rows || e.col < 0 || e.col >= cols) {
      throw std::invalid_argument("constraint entry out of range");
    }
    if (e.value == 0.0) continue;
    out[e.row].push_back({e.col, e.value});
  }
  for (auto& r : out) {
    std::sort(r.begin(), r.end(), [](const auto& a, const auto& b) { return a.col < b.col; });
    std::vector<RowEntry> merged;
    for (const auto& e : r) {
      if (!merged.empty() && merged.back().col == e.col) {
        merged.back().value += e.value;
      } else {
        merged.push_back(e);
      }
    }
    std::erase_if(merged, [](const auto& e) { return e.value == 0.0; });
    r = std::move(merged);
  }
  return out;
}

struct Presolve {
  std::vector<char> fixed;
  std::vector<double> value;
  std::vector<int> eq_keep;  // original eq rows kept
  std::vector<int> in_keep;
  std::vector<double> eq_rhs;  // rhs of kept rows after moving fixed columns
  std::vector<double> in_rhs;
  int fixed_count = 0;
  bool infeasible = false;
  std::string why;
};

Presolve presolve(const EntropyProgram& p, const Rows& eq, const Rows& in, double feas_tol) {
  const int n = p.variables();
  Presolve ps;
  ps.fixed.assign(n, 0);
  ps.value.assign(n, 0.0);
  for (int j = 0; j < n; ++j) {
    const double lo = p.lower[j], hi = p.upper[j];
    if (lo > hi) {
      ps.infeasible = true;
      ps.why = "variable " + std::to_string(j) + " has lower bound above upper bound";
      return ps;
    }
    if (lo == hi) {
      ps.fixed[j] = 1;
      ps.value[j] = lo;
    }
  }

  const int me = static_cast<int>(eq.size());
  const int mi = static_cast<int>(in.size());
  std::vector<char> eq_active(me, 1), in_active(mi, 1);

  auto fix_at = [&](int j, double v) {
    if (!ps.fixed[j]) {
      ps.fixed[j] = 1;
      ps.value[j] = v;
    }
  };

  // Returns false on proven infeasibility.
  auto process = [&](const std::vector<RowEntry>& row, double rhs0, bool is_eq,
                     char& active) -> bool {
    double rhs = rhs0;
    double min_act = 0.0, max_act = 0.0;
    int free_count = 0;
    for (const auto& e : row) {
      if (ps.fixed[e.col]) {
        rhs -= e.value * ps.value[e.col];
        continue;
      }
      ++free_count;
      const double lo = p.lower[e.col], hi = p.upper[e.col];
      min_act += e.value > 0 ? e.value * lo : e.value * hi;
      max_act += e.value > 0 ? e.value * hi : e.value * lo;
    }
    const double slack_tol = feas_tol * (1.0 + std::abs(rhs0));
    if (free_count == 0) {
      const bool ok = is_eq ? std::abs(rhs) <= slack_tol : rhs >= -slack_tol;
      if (!ok) return false;
      active = 0;
      return true;
    }
    const double force_tol = 1e-12 * (1.0 + std::abs(rhs));
    auto force = [&](bool at_min) {
      for (const auto& e : row) {
        if (ps.fixed[e.col]) continue;
        const bool use_lower = (e.value > 0) == at_min;
        fix_at(e.col, use_lower ? p.lower[e.col] : p.upper[e.col]);
      }
      active = 0;
    };
    if (std::isfinite(min_act)) {
      if (rhs < min_act - slack_tol) return false;
      if (rhs <= min_act + force_tol) {
        force(true);
        return true;
      }
    }
    if (is_eq && std::isfinite(max_act)) {
      if (rhs > max_act + slack_tol) return false;
      if (rhs >= max_act - force_tol) {
        force(false);
        return true;
      }
    }
    if (!is_eq && std::isfinite(max_act) && max_act <= rhs) active = 0;  // redundant
    return true;
  };

  for (bool changed = true; changed;) {
    changed = false;
    const int before = static_cast<int>(std::count(ps.fixed.begin(), ps.fixed.end(), 1));
    for (int i = 0; i < me; ++i) {
      if (!eq_active[i]) continue;
      if (!process(eq[i], p.b_eq[i], true, eq_active[i])) {
        ps.infeasible = true;
        ps.why = "equality row " + std::to_string(i) + " cannot be satisfied within bounds";
        return ps;
      }
    }
    for (int i = 0; i < mi; ++i) {
      if (!in_active[i]) continue;
      if (!process(in[i], p.b_in[i], false, in_active[i])) {
        ps.infeasible = true;
        ps.why = "inequality row " + std::to_string(i) + " cannot be satisfied within bounds";
        return ps;
      }
    }
    const int after = static_cast<int>(std::count(ps.fixed.begin(), ps.fixed.end(), 1));
    changed = after != before;
  }

  auto reduced_rhs = [&](const std::vector<RowEntry>& row, double rhs) {
    for (const auto& e : row) {
      if (ps.fixed[e.col]) rhs -= e.value * ps.value[e.col];
    }
    return rhs;
  };
  for (int i = 0; i < me; ++i) {
    if (!eq_active[i]) continue;
    ps.eq_keep.push_back(i);
    ps.eq_rhs.push_back(reduced_rhs(eq[i], p.b_eq[i]));
  }
  for (int i = 0; i < mi; ++i) {
    if (!in_active[i]) continue;
    ps.in_keep.push_back(i);
    ps.in_rhs.push_back(reduced_rhs(in[i], p.b_in[i]));
  }
  ps.fixed_count = static_cast<int>(std::count(ps.fixed.begin(), ps.fixed.end(), 1));
  return ps;
}

struct ScaledTerm {
  double weight;
  double scale;
  double offset;
};

/// The reduced, scaled problem in the variables v = (x_free / sigma, slacks).
struct Reduced {
  int n = 0;   // free structural variables
  int mi = 0;  // inequality rows (= slack variables)
  int me = 0;
  std::vector<int> orig;        // reduced -> original variable
  std::vector<double> sigma;    // column scale (x = sigma * v)
  std::vector<double> row_scale;
  SpMat m;                      // (me + mi) x (n + mi)
  Vec b;
  Vec lo, hi;
  std::vector<std::vector<ScaledTerm>> terms;  // per structural variable
  Vec cost;
  double omega = 1.0;  // objective scale
};

Reduced build_reduced(const EntropyProgram& p, const Rows& eq, const Rows& in, const Presolve& ps,
                      bool lp_mode) {
  Reduced r;
  const int n_all = p.variables();
  std::vector<int> red(n_all, -1);
  for (int j = 0; j < n_all; ++j) {
    if (!ps.fixed[j]) {
      red[j] = static_cast<int>(r.orig.size());
      r.orig.push_back(j);
    }
  }
  r.n = static_cast<int>(r.orig.size());
  r.me = static_cast<int>(ps.eq_keep.size());
  r.mi = static_cast<int>(ps.in_keep.size());
  const int nv = r.n + r.mi;
  const int m = r.me + r.mi;

  std::vector<std::vector<ScaledTerm>> by_var(n_all);
  if (!lp_mode) {
    for (const auto& t : p.entropy) {
      if (t.weight != 0.0) by_var[t.index].push_back({t.weight, t.scale, t.offset});
    }
  }
  r.sigma.assign(r.n, 1.0);
  r.terms.assign(r.n, {});
  for (int k = 0; k < r.n; ++k) {
    const int j = r.orig[k];
    double s = 0.0;
    for (const auto& t : by_var[j]) s = std::max(s, t.scale);
    if (s > 0.0) {
      r.sigma[k] = 1.0 / s;
    } else if (p.typical[j] > 0.0) {
      r.sigma[k] = p.typical[j];
    }
    for (const auto& t : by_var[j]) r.terms[k].push_back({t.weight, t.scale * r.sigma[k], t.offset});
  }

  // Row scaling by the largest coefficient magnitude after column scaling.
  std::vector<Eigen::Triplet<double>> trip;
  r.row_scale.assign(m, 1.0);
  r.b.resize(m);
  auto add_row = [&](int ri, const std::vector<RowEntry>& row, double rhs, bool with_slack) {
    double big = 0.0;
    for (const auto& e : row) {
      if (red[e.col] >= 0) big = std::max(big, std::abs(e.value * r.sigma[red[e.col]]));
    }
    const double rs = big > 0.0 ? 1.0 / big : 1.0;
    r.row_scale[ri] = rs;
    for (const auto& e : row) {
      if (red[e.col] < 0) continue;
      trip.emplace_back(ri, red[e.col], e.value * r.sigma[red[e.col]] * rs);
    }
    if (with_slack) trip.emplace_back(ri, r.n + (ri - r.me), 1.0);
    r.b[ri] = rhs * rs;
  };
  for (int i = 0; i < r.me; ++i) add_row(i, eq[ps.eq_keep[i]], ps.eq_rhs[i], false);
  for (int i = 0; i < r.mi; ++i) add_row(r.me + i, in[ps.in_keep[i]], ps.in_rhs[i], true);
  r.m.resize(m, nv);
  r.m.setFromTriplets(trip.begin(), trip.end());
  r.m.makeCompressed();

  r.lo.resize(nv);
  r.hi.resize(nv);
  for (int k = 0; k < r.n; ++k) {
    const int j = r.orig[k];
    r.lo[k] = p.lower[j] / r.sigma[k];
    r.hi[k] = p.upper[j] / r.sigma[k];
  }
  for (int k = r.n; k < nv; ++k) {
    r.lo[k] = 0.0;
    r.hi[k] = kInf;
  }

  r.cost = Vec::Zero(nv);
  if (!p.cost.empty()) {
    for (int k = 0; k < r.n; ++k) r.cost[k] = p.cost[r.orig[k]] * r.sigma[k];
  }
  double big = 1.0;
  for (int k = 0; k < r.n; ++k) {
    big = std::max(big, std::abs(r.cost[k]));
    double w = 0.0;
    for (const auto& t : r.terms[k]) w += t.weight * t.scale;
    big = std::max(big, w);
  }
  r.omega = 1.0 / big;
  return r;
}

/// Gradient and Hessian diagonal of omega * F at v.
void objective_derivatives(const Reduced& r, const Vec& v, Vec& g, Vec& h) {
  const int nv = static_cast<int>(v.size());
  g = r.omega * r.cost;
  h = Vec::Zero(nv);
  for (int k = 0; k < r.n; ++k) {
    for (const auto& t : r.terms[k]) {
      const double u = t.scale * v[k];
      const double a = u + t.offset;
      g[k] += r.omega * t.weight * t.scale * (std::log(a) + u / a);
      h[k] += r.omega * t.weight * t.scale * t.scale * (1.0 / a + t.offset / (a * a));
    }
  }
}

double scaled_objective(const Reduced& r, const Vec& v) {
  double f = r.cost.dot(v);
  for (int k = 0; k < r.n; ++k) {
    for (const auto& t : r.terms[k]) {
      const double u = t.scale * v[k];
      if (u != 0.0) f += t.weight * u * std::log(u + t.offset);
    }
  }
  return f;
}

struct IpmResult {
  Vec v, y, zl, zu;
  bool converged = false;
  bool unbounded = false;
  int iterations = 0;
  double dual_res = 0.0;
  double primal_res = 0.0;
  double comp = 0.0;
  std::string message;
};

class KktSolver {
 public:
  KktSolver(const SpMat& m, int nv) : nv_(nv), m_rows_(static_cast<int>(m.rows())) {
    const int dim = nv + m_rows_;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(m.nonZeros() + dim);
    for (int i = 0; i < dim; ++i) trip.emplace_back(i, i, 1.0);
    for (int col = 0; col < m.outerSize(); ++col) {
      for (SpMat::InnerIterator it(m, col); it; ++it) {
        trip.emplace_back(nv + static_cast<int>(it.row()), col, it.value());
      }
    }
    k_.resize(dim, dim);
    k_.setFromTriplets(trip.begin(), trip.end());
    k_.makeCompressed();
    diag_.resize(dim);
    for (int i = 0; i < dim; ++i) diag_[i] = &k_.coeffRef(i, i);
    ldlt_.analyzePattern(k_);
  }

  /// Factorizes with the given primal diagonal; returns false on failure.
  bool factorize(const Vec& primal_diag, double rho, double delta) {
    for (int i = 0; i < nv_; ++i) *diag_[i] = primal_diag[i] + rho;
    for (int i = 0; i < m_rows_; ++i) *diag_[nv_ + i] = -delta;
    rho_ = rho;
    delta_ = delta;
    ldlt_.factorize(k_);
    if (ldlt_.info() != Eigen::Success) return false;
    const Vec d = ldlt_.vectorD();
    for (int i = 0; i < d.size(); ++i) {
      if (!std::isfinite(d[i]) || d[i] == 0.0) return false;
    }
    return true;
  }

  double last_residual = 0.0;
  Vec solve(const Vec& rhs, int refinements = 3) {
    Vec sol = ldlt_.solve(rhs);
    double prev = residual(rhs, sol).lpNorm<Eigen::Infinity>();
    for (int it = 0; it < refinements && prev > 0.0; ++it) {
      const Vec res = residual(rhs, sol);
      const Vec cand = sol + ldlt_.solve(res);
      const double now = residual(rhs, cand).lpNorm<Eigen::Infinity>();
      if (!(now < prev)) break;
      sol = cand;
      prev = now;
    }
    last_residual = prev;
    return sol;
  }

 private:
  /// rhs - K0 sol, where K0 excludes the regularization.
  Vec residual(const Vec& rhs, const Vec& sol) const {
    Vec ks = k_.selfadjointView<Eigen::Lower>() * sol;
    ks.head(nv_) -= rho_ * sol.head(nv_);
    ks.tail(m_rows_) += delta_ * sol.tail(m_rows_);
    return rhs - ks;
  }

  int nv_;
  int m_rows_;
  SpMat k_;
  std::vector<double*> diag_;
  double rho_ = 0.0, delta_ = 0.0;
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
};

double max_step(const Vec& v, const Vec& dv, const Vec& lo, const Vec& hi, double tau) {
  double alpha = 1.0;
  for (int i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0 && std::isfinite(lo[i])) {
      alpha = std::min(alpha, -tau * (v[i] - lo[i]) / dv[i]);
    } else if (dv[i] > 0.0 && std::isfinite(hi[i])) {
      alpha = std::min(alpha, tau * (hi[i] - v[i]) / dv[i]);
    }
  }
  return alpha;
}

double max_dual_step(const Vec& z, const Vec& dz, double tau) {
  double alpha = 1.0;
  for (int i = 0; i < z.size(); ++i) {
    if (dz[i] < 0.0 && z[i] > 0.0) alpha = std::min(alpha, -tau * z[i] / dz[i]);
  }
  return alpha;
}

IpmResult interior_point(const Reduced& r, const Tolerances& tol) {
  const int nv = r.n + r.mi;
  const int m = r.me + r.mi;
  IpmResult res;
  if (nv == 0) {
    res.v = Vec::Zero(0);
    res.y = Vec::Zero(m);
    res.zl = res.zu = Vec::Zero(0);
    res.primal_res = m > 0 ? r.b.lpNorm<Eigen::Infinity>() : 0.0;
    res.converged = res.primal_res <= tol.feasibility;
    return res;
  }

  std::vector<char> has_lo(nv), has_hi(nv);
  for (int i = 0; i < nv; ++i) {
    has_lo[i] = std::isfinite(r.lo[i]);
    has_hi[i] = std::isfinite(r.hi[i]);
  }

  // Starting point: interval midpoints, else 0 pushed inside the bounds.
  Vec v(nv);
  for (int i = 0; i < r.n; ++i) {
    double x0 = 0.0;
    if (has_lo[i] && has_hi[i]) {
      x0 = 0.5 * (r.lo[i] + r.hi[i]);
    } else if (has_lo[i]) {
      x0 = std::max(0.0, r.lo[i]);
    } else if (has_hi[i]) {
      x0 = std::min(0.0, r.hi[i]);
    }
    const double width = has_lo[i] && has_hi[i] ? r.hi[i] - r.lo[i] : kInf;
    if (has_lo[i]) {
      const double push = std::min(1e-2 * std::max(1.0, std::abs(r.lo[i])), 0.25 * width);
      x0 = std::max(x0, r.lo[i] + push);
    }
    if (has_hi[i]) {
      const double push = std::min(1e-2 * std::max(1.0, std::abs(r.hi[i])), 0.25 * width);
      x0 = std::min(x0, r.hi[i] - push);
    }
    v[i] = x0;
  }
  {
    const Vec act = r.m.leftCols(r.n) * v.head(r.n);
    for (int i = 0; i < r.mi; ++i) v[r.n + i] = std::max(1e-2, r.b[r.me + i] - act[r.me + i]);
  }
  Vec y = Vec::Zero(m);
  Vec zl = Vec::Zero(nv), zu = Vec::Zero(nv);
  for (int i = 0; i < nv; ++i) {
    if (has_lo[i]) zl[i] = 1.0;
    if (has_hi[i]) zu[i] = 1.0;
  }

  const double b_norm = r.b.size() ? r.b.lpNorm<Eigen::Infinity>() : 0.0;
  int pairs = 0;
  for (int i = 0; i < nv; ++i) pairs += has_lo[i] + has_hi[i];
  const double mu_min = std::min(tol.kkt, tol.gap) / (10.0 * std::max(1, pairs));
  double mu = 0.1;
  KktSolver kkt(r.m, nv);
  double rho = 1e-10, delta = 1e-12;

  Vec g, h;
  auto residuals = [&](const Vec& vv, const Vec& yy, const Vec& zzl, const Vec& zzu, Vec& rd,
                       Vec& rp, double& comp_max, double& comp_sum, double& bar_err,
                       double mu_now) {
    objective_derivatives(r, vv, g, h);
    rd = g - r.m.transpose() * yy - zzl + zzu;
    rp = r.b - r.m * vv;
    comp_max = 0.0;
    comp_sum = 0.0;
    double dev = 0.0;
    for (int i = 0; i < nv; ++i) {
      if (has_lo[i]) {
        const double c = (vv[i] - r.lo[i]) * zzl[i];
        comp_max = std::max(comp_max, c);
        comp_sum += c;
        dev = std::max(dev, std::abs(c - mu_now));
      }
      if (has_hi[i]) {
        const double c = (r.hi[i] - vv[i]) * zzu[i];
        comp_max = std::max(comp_max, c);
        comp_sum += c;
        dev = std::max(dev, std::abs(c - mu_now));
      }
    }
    bar_err = std::max({rd.lpNorm<Eigen::Infinity>(), rp.lpNorm<Eigen::Infinity>(), dev});
  };

  Vec rd, rp;
  double comp_max = 0.0, comp_sum = 0.0, bar_err = 0.0;
  double best_err = kInf;
  IpmResult best;

  const bool trace = std::getenv("CATTLE_IPM_TRACE") != nullptr;
  for (int it = 0; it <= tol.max_iterations; ++it) {
    residuals(v, y, zl, zu, rd, rp, comp_max, comp_sum, bar_err, mu);
    const double dual_norm = rd.lpNorm<Eigen::Infinity>();
    const double primal_norm = rp.lpNorm<Eigen::Infinity>();
    const double obj = r.omega * scaled_objective(r, v);
    const double overall =
        std::max({primal_norm / (1.0 + b_norm), dual_norm, comp_max});
    if (trace) {
      std::fprintf(stderr, "ipm %3d mu %.2e obj %.10e rp %.2e rd %.2e comp %.2e gap %.2e\n", it,
                   mu, obj, primal_norm, dual_norm, comp_max, comp_sum);
    }
    if (overall < best_err) {
      best_err = overall;
      best.v = v;
      best.y = y;
      best.zl = zl;
      best.zu = zu;
      best.iterations = it;
      best.dual_res = dual_norm;
      best.primal_res = primal_norm;
      best.comp = comp_max;
    }
    if (primal_norm <= tol.feasibility * (1.0 + b_norm) && dual_norm <= tol.kkt &&
        comp_max <= tol.kkt && comp_sum <= tol.gap * (1.0 + std::abs(obj))) {
      res.v = v;
      res.y = y;
      res.zl = zl;
      res.zu = zu;
      res.converged = true;
      res.iterations = it;
      res.dual_res = dual_norm;
      res.primal_res = primal_norm;
      res.comp = comp_max;
      return res;
    }
    if (it == tol.max_iterations) break;
    if (v.lpNorm<Eigen::Infinity>() > 1e14) {
      best.unbounded = true;
      best.message = "iterates diverged";
      break;
    }

    // Barrier parameter update.
    while (mu > mu_min && bar_err <= 10.0 * mu) {
      mu = std::max(mu_min, std::min(0.2 * mu, std::pow(mu, 1.5)));
      residuals(v, y, zl, zu, rd, rp, comp_max, comp_sum, bar_err, mu);
    }

    Vec sigma = Vec::Zero(nv);
    Vec r1 = -g + r.m.transpose() * y;
    for (int i = 0; i < nv; ++i) {
      if (has_lo[i]) {
        const double gap_l = v[i] - r.lo[i];
        sigma[i] += zl[i] / gap_l;
        r1[i] += mu / gap_l;
      }
      if (has_hi[i]) {
        const double gap_u = r.hi[i] - v[i];
        sigma[i] += zu[i] / gap_u;
        r1[i] -= mu / gap_u;
      }
    }
    const Vec pdiag = h + sigma;
    bool ok = false;
    for (int attempt = 0; attempt < 8 && !ok; ++attempt) {
      ok = kkt.factorize(pdiag, rho, delta);
      if (!ok) {
        rho *= 100.0;
        delta *= 100.0;
      }
    }
    if (!ok) {
      best.message = "KKT factorization failed";
      break;
    }
    Vec rhs(nv + m);
    rhs.head(nv) = r1;
    rhs.tail(m) = rp;
    const Vec sol = kkt.solve(rhs);
    const Vec dv = sol.head(nv);
    const Vec dy = -sol.tail(m);
    Vec dzl = Vec::Zero(nv), dzu = Vec::Zero(nv);
    for (int i = 0; i < nv; ++i) {
      if (has_lo[i]) {
        const double gap_l = v[i] - r.lo[i];
        dzl[i] = mu / gap_l - zl[i] - zl[i] / gap_l * dv[i];
      }
      if (has_hi[i]) {
        const double gap_u = r.hi[i] - v[i];
        dzu[i] = mu / gap_u - zu[i] + zu[i] / gap_u * dv[i];
      }
    }
    if (!dv.allFinite() || !dy.allFinite()) {
      best.message = "non-finite Newton step";
      break;
    }
    const double tau = std::clamp(1.0 - mu, 0.99, 1.0 - 1e-8);
    double ap = max_step(v, dv, r.lo, r.hi, tau);
    double ad = std::min(max_dual_step(zl, dzl, tau), max_dual_step(zu, dzu, tau));

    // Backtrack while the barrier error grows markedly.
    Vec nv_v, nv_y, nv_zl, nv_zu;
    for (int bt = 0;; ++bt) {
      nv_v = v + ap * dv;
      nv_y = y + ap * dy;
      nv_zl = zl + ad * dzl;
      nv_zu = zu + ad * dzu;
      Vec trd, trp;
      double tcm = 0.0, tcs = 0.0, terr = 0.0;
      // Near the solution a step can land on a bound through rounding alone.
      bool interior = true;
      for (int i = 0; i < nv && interior; ++i) {
        interior = (!has_lo[i] || nv_v[i] > r.lo[i]) && (!has_hi[i] || nv_v[i] < r.hi[i]);
      }
      if (!interior && bt < 60) {
        ap *= 0.5;
        ad *= 0.5;
        continue;
      }
      residuals(nv_v, nv_y, nv_zl, nv_zu, trd, trp, tcm, tcs, terr, mu);
      if (std::isfinite(terr) && (terr <= 2.0 * bar_err || bt >= 6)) break;
      ap *= 0.5;
      ad *= 0.5;
    }
    if (trace) std::fprintf(stderr, "   step ap %.3e ad %.3e kres %.2e\n", ap, ad, kkt.last_residual);
    v = std::move(nv_v);
    y = std::move(nv_y);
    zl = std::move(nv_zl);
    zu = std::move(nv_zu);
    // Keep bound multipliers within a band around mu / gap.
    for (int i = 0; i < nv; ++i) {
      constexpr double kappa = 1e10;
      if (has_lo[i]) {
        const double gap_l = v[i] - r.lo[i];
        zl[i] = std::clamp(zl[i], mu / (kappa * gap_l), kappa * mu / gap_l);
      }
      if (has_hi[i]) {
        const double gap_u = r.hi[i] - v[i];
        zu[i] = std::clamp(zu[i], mu / (kappa * gap_u), kappa * mu / gap_u);
      }
    }
  }
  if (best.message.empty()) best.message = "iteration limit reached";
  return best;
}

struct Assembled {
  Rows eq, in;
};

SolveReport finish(const EntropyProgram& p, const Assembled& a, const Presolve& ps,
                   const Reduced& r, const IpmResult& ipm, bool lp_mode) {
  SolveReport rep;
  const int n_all = p.variables();
  rep.x.assign(n_all, 0.0);
  for (int j = 0; j < n_all; ++j) {
    if (ps.fixed[j]) rep.x[j] = ps.value[j];
  }
  for (int k = 0; k < r.n; ++k) {
    double x = r.sigma[k] * ipm.v[k];
    x = std::clamp(x, p.lower[r.orig[k]], p.upper[r.orig[k]]);
    rep.x[r.orig[k]] = x;
  }
  rep.iterations = ipm.iterations;
  rep.kkt_residual = ipm.dual_res;
  rep.complementarity = ipm.comp;
  rep.fixed_by_presolve = ps.fixed_count;
  rep.message = ipm.message;

  rep.eq_multipliers.assign(p.equalities(), 0.0);
  rep.ineq_multipliers.assign(p.inequalities(), 0.0);
  rep.lower_multipliers.assign(n_all, 0.0);
  rep.upper_multipliers.assign(n_all, 0.0);
  for (int i = 0; i < r.me; ++i) {
    rep.eq_multipliers[ps.eq_keep[i]] = r.row_scale[i] * ipm.y[i] / r.omega;
  }
  for (int i = 0; i < r.mi; ++i) {
    rep.ineq_multipliers[ps.in_keep[i]] =
        std::max(0.0, -r.row_scale[r.me + i] * ipm.y[r.me + i] / r.omega);
  }
  for (int k = 0; k < r.n; ++k) {
    rep.lower_multipliers[r.orig[k]] = ipm.zl[k] / (r.omega * r.sigma[k]);
    rep.upper_multipliers[r.orig[k]] = ipm.zu[k] / (r.omega * r.sigma[k]);
  }

  for (int i = 0; i < p.equalities(); ++i) {
    double act = 0.0;
    for (const auto& e : a.eq[i]) act += e.value * rep.x[e.col];
    rep.eq_residual = std::max(rep.eq_residual, std::abs(act - p.b_eq[i]));
  }
  for (int i = 0; i < p.inequalities(); ++i) {
    double act = 0.0;
    for (const auto& e : a.in[i]) act += e.value * rep.x[e.col];
    rep.ineq_residual = std::max(rep.ineq_residual, act - p.b_in[i]);
  }
  for (int j = 0; j < n_all; ++j) {
    rep.bound_residual =
        std::max({rep.bound_residual, p.lower[j] - rep.x[j], rep.x[j] - p.upper[j]});
  }
  if (lp_mode) {
    rep.objective = 0.0;
    for (std::size_t j = 0; j < p.cost.size(); ++j) rep.objective += p.cost[j] * rep.x[j];
  } else {
    rep.objective = entropy_objective(p, rep.x);
  }
  return rep;
}

double rhs_norm(const EntropyProgram& p) {
  double b = 0.0;
  for (double v : p.b_eq) b = std::max(b, std::abs(v));
  for (double v : p.b_in) b = std::max(b, std::abs(v));
  return b;
}

void validate_program(const EntropyProgram& p) {
  const auto n = static_cast<std::size_t>(p.variables());
  if (p.upper.size() != n || p.typical.size() != n) {
    throw std::invalid_argument("inconsistent variable arrays");
  }
  if (!p.cost.empty() && p.cost.size() != n) throw std::invalid_argument("cost length mismatch");
  for (const auto& t : p.entropy) {
    if (t.index < 0 || static_cast<std::size_t>(t.index) >= n) {
      throw std::invalid_argument("entropy term index out of range");
    }
    if (t.weight < 0.0 || t.scale <= 0.0 || t.offset < 0.0) {
      throw std::invalid_argument("entropy terms need weight >= 0, scale > 0, offset >= 0");
    }
    if (p.lower[t.index] < 0.0) {
      throw std::invalid_argument("entropy variable " + std::to_string(t.index) +
                                  " must have a non-negative lower bound");
    }
  }
  std::vector<char> seen(n, 0);
  for (const auto& e : p.a_eq) seen.at(e.col) = 1;
  for (const auto& e : p.a_in) seen.at(e.col) = 1;
  for (std::size_t j = 0; j < n; ++j) {
    if (!seen[j] && !std::isfinite(p.lower[j]) && !std::isfinite(p.upper[j])) {
      throw std::invalid_argument("variable " + std::to_string(j) +
                                  " appears in no constraint and has no bound");
    }
  }
}

SolveReport solve_impl(const EntropyProgram& p, const Tolerances& tol, bool lp_mode,
                       bool check_infeasible) {
  validate_program(p);
  Assembled a{to_rows(p.a_eq, p.equalities(), p.variables()),
              to_rows(p.a_in, p.inequalities(), p.variables())};
  const Presolve ps = presolve(p, a.eq, a.in, tol.feasibility);
  if (ps.infeasible) {
    SolveReport rep;
    rep.status = SolveStatus::Infeasible;
    rep.x.assign(p.variables(), 0.0);
    for (int j = 0; j < p.variables(); ++j) {
      rep.x[j] = std::isfinite(p.lower[j]) ? p.lower[j] : (std::isfinite(p.upper[j]) ? p.upper[j] : 0.0);
    }
    rep.message = ps.why;
    return rep;
  }
  const Reduced r = build_reduced(p, a.eq, a.in, ps, lp_mode);
  const IpmResult ipm = interior_point(r, tol);
  SolveReport rep = finish(p, a, ps, r, ipm, lp_mode);

  const double feas = tol.feasibility * (1.0 + rhs_norm(p));
  if (ipm.converged && rep.eq_residual <= feas && rep.ineq_residual <= feas) {
    rep.status = SolveStatus::Optimal;
    rep.message.clear();
  } else if (ipm.unbounded) {
    rep.status = SolveStatus::Unbounded;
  } else {
    rep.status = SolveStatus::MaxIter;
    if (check_infeasible) {
      const auto viol = minimum_violation(p, tol);
      if (viol.status == SolveStatus::Optimal && viol.violation > feas) {
        rep.status = SolveStatus::Infeasible;
        rep.message = "minimum constraint violation " + std::to_string(viol.violation);
      }
    }
  }
  return rep;
}

}  // namespace

SolveReport solve_entropy(const EntropyProgram& p, const Tolerances& tol) {
  return solve_impl(p, tol, false, true);
}

SolveReport solve_lp(const EntropyProgram& p, const Tolerances& tol) {
  return solve_impl(p, tol, true, true);
}

ViolationReport minimum_violation(const EntropyProgram& p, const Tolerances& tol) {
  EntropyProgram e;
  const int n = p.variables();
  for (int j = 0; j < n; ++j) e.add_variable(p.lower[j], p.upper[j], {}, p.typical[j]);
  e.a_eq = p.a_eq;
  e.b_eq = p.b_eq;
  e.a_in = p.a_in;
  e.b_in = p.b_in;
  for (int i = 0; i < p.equalities(); ++i) {
    const double typ = 1.0 + std::abs(p.b_eq[i]);
    const int plus = e.add_variable(0.0, kInf, {}, typ);
    const int minus = e.add_variable(0.0, kInf, {}, typ);
    e.a_eq.push_back({i, plus, 1.0});
    e.a_eq.push_back({i, minus, -1.0});
    e.set_cost(plus, 1.0);
    e.set_cost(minus, 1.0);
  }
  for (int i = 0; i < p.inequalities(); ++i) {
    const int over = e.add_variable(0.0, kInf, {}, 1.0 + std::abs(p.b_in[i]));
    e.a_in.push_back({i, over, -1.0});
    e.set_cost(over, 1.0);
  }
  if (e.cost.empty()) e.cost.assign(e.lower.size(), 0.0);

  const SolveReport lp = solve_impl(e, tol, true, false);
  ViolationReport out;
  out.status = lp.status;
  out.x.assign(lp.x.begin(), lp.x.begin() + n);
  const Rows eq = to_rows(p.a_eq, p.equalities(), n);
  const Rows in = to_rows(p.a_in, p.inequalities(), n);
  for (int i = 0; i < p.equalities(); ++i) {
    double act = 0.0;
    for (const auto& en : eq[i]) act += en.value * out.x[en.col];
    out.violation += std::abs(act - p.b_eq[i]);
  }
  for (int i = 0; i < p.inequalities(); ++i) {
    double act = 0.0;
    for (const auto& en : in[i]) act += en.value * out.x[en.col];
    out.violation += std::max(0.0, act - p.b_in[i]);
  }
  return out;
}

}  // namespace cattle::maxent
