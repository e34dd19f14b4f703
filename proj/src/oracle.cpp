#include "otmatch/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace otmatch {

namespace {

// ---------------------------------------------------------------------------
// Transportation simplex
// ---------------------------------------------------------------------------

struct Cell {
  int x = -1, y = -1;
  bool operator==(const Cell&) const = default;
};

struct SimplexTableau {
  int n = 0, m = 0;
  std::vector<double> value;  // row-major allocations
  std::vector<char> basic;    // row-major basis membership

  double& at(int x, int y) { return value[x * m + y]; }
  bool is_basic(int x, int y) const { return basic[x * m + y] != 0; }
};

// Northwest-corner start; advances one index per step, so exactly
// n + m - 1 cells enter the basis and they form a spanning staircase tree.
SimplexTableau northwest_corner(const std::vector<double>& p, const std::vector<double>& q) {
  SimplexTableau t;
  t.n = static_cast<int>(p.size());
  t.m = static_cast<int>(q.size());
  t.value.assign(static_cast<size_t>(t.n) * t.m, 0.0);
  t.basic.assign(static_cast<size_t>(t.n) * t.m, 0);

  std::vector<double> rem_p = p, rem_q = q;
  int i = 0, j = 0;
  while (true) {
    t.basic[i * t.m + j] = 1;
    const double alloc = std::min(rem_p[i], rem_q[j]);
    t.value[i * t.m + j] = alloc;
    rem_p[i] -= alloc;
    rem_q[j] -= alloc;
    if (i == t.n - 1 && j == t.m - 1) break;
    if (j == t.m - 1)
      ++i;
    else if (i == t.n - 1)
      ++j;
    else if (rem_p[i] <= rem_q[j])
      ++i;
    else
      ++j;
  }
  return t;
}

// Solves u_x + v_y = c_xy over the basis tree, rooted at u_0 = 0.
void compute_duals(const SimplexTableau& t, const std::vector<double>& c,
                   std::vector<double>& u, std::vector<double>& v) {
  const int n = t.n, m = t.m;
  u.assign(n, 0.0);
  v.assign(m, 0.0);
  std::vector<char> u_set(n, 0), v_set(m, 0);
  std::vector<std::vector<int>> rows(n), cols(m);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < m; ++y)
      if (t.is_basic(x, y)) {
        rows[x].push_back(y);
        cols[y].push_back(x);
      }

  std::queue<int> queue;  // nodes: 0..n-1 rows, n..n+m-1 columns
  u_set[0] = 1;
  queue.push(0);
  while (!queue.empty()) {
    const int node = queue.front();
    queue.pop();
    if (node < n) {
      for (int y : rows[node])
        if (!v_set[y]) {
          v[y] = c[node * m + y] - u[node];
          v_set[y] = 1;
          queue.push(n + y);
        }
    } else {
      const int y = node - n;
      for (int x : cols[y])
        if (!u_set[x]) {
          u[x] = c[x * m + y] - v[y];
          u_set[x] = 1;
          queue.push(x);
        }
    }
  }
  for (int x = 0; x < n; ++x)
    if (!u_set[x]) throw std::runtime_error("transportation basis is not a spanning tree");
  for (int y = 0; y < m; ++y)
    if (!v_set[y]) throw std::runtime_error("transportation basis is not a spanning tree");
}

// Unique alternating path of basic cells from row x0 to column y0.
std::vector<Cell> basis_path(const SimplexTableau& t, int x0, int y0) {
  const int n = t.n, m = t.m;
  std::vector<int> parent(n + m, -2);
  std::queue<int> queue;
  parent[x0] = -1;
  queue.push(x0);
  while (!queue.empty()) {
    const int node = queue.front();
    queue.pop();
    if (node == n + y0) break;
    if (node < n) {
      for (int y = 0; y < m; ++y)
        if (t.is_basic(node, y) && parent[n + y] == -2) {
          parent[n + y] = node;
          queue.push(n + y);
        }
    } else {
      const int y = node - n;
      for (int x = 0; x < n; ++x)
        if (t.is_basic(x, y) && parent[x] == -2) {
          parent[x] = n + y;
          queue.push(x);
        }
    }
  }
  if (parent[n + y0] == -2) throw std::runtime_error("transportation basis path not found");

  std::vector<Cell> path;
  int node = n + y0;
  while (parent[node] != -1) {
    const int prev = parent[node];
    if (node < n)
      path.push_back({node, prev - n});
    else
      path.push_back({prev, node - n});
    node = prev;
  }
  std::reverse(path.begin(), path.end());  // now runs from x0 towards y0
  return path;
}

}  // namespace

OracleResult solve_lp_centralized(const LinearEqualityInstance& inst) {
  inst.validate();
  const int n = inst.n(), m = inst.m();
  std::vector<double> c(static_cast<size_t>(n) * m);
  double cscale = 1.0;
  for (int e = 0; e < n * m; ++e) {
    c[e] = inst.gamma[e] + inst.delta[e];
    cscale = std::max(cscale, std::abs(c[e]));
  }
  const double tol = 1e-10 * cscale;

  SimplexTableau t = northwest_corner(inst.target_mass, inst.source_mass);
  std::vector<double> u, v;

  const long max_pivots = 1000000;
  for (long pivot = 0;; ++pivot) {
    if (pivot >= max_pivots) throw std::runtime_error("transportation simplex did not terminate");
    compute_duals(t, c, u, v);

    // Bland's rule: first improving cell in row-major order.
    int ex = -1, ey = -1;
    for (int x = 0; x < n && ex < 0; ++x)
      for (int y = 0; y < m; ++y)
        if (!t.is_basic(x, y) && c[x * m + y] - u[x] - v[y] > tol) {
          ex = x;
          ey = y;
          break;
        }
    if (ex < 0) break;  // optimal

    const std::vector<Cell> path = basis_path(t, ex, ey);
    // Entering cell gets '+'; the path alternates starting with '-' at the
    // cell sharing the entering row.
    std::vector<Cell> minus;
    for (size_t i = 0; i < path.size(); i += 2) minus.push_back(path[i]);

    double theta = std::numeric_limits<double>::infinity();
    for (const Cell& cell : minus) theta = std::min(theta, t.at(cell.x, cell.y));
    Cell leaving{-1, -1};
    for (const Cell& cell : minus)
      if (t.at(cell.x, cell.y) == theta) {
        if (leaving.x < 0 || cell.x < leaving.x || (cell.x == leaving.x && cell.y < leaving.y))
          leaving = cell;
      }

    t.at(ex, ey) += theta;
    for (size_t i = 0; i < path.size(); ++i) {
      if (i % 2 == 0)
        t.at(path[i].x, path[i].y) -= theta;
      else
        t.at(path[i].x, path[i].y) += theta;
    }
    t.basic[leaving.x * m + leaving.y] = 0;
    t.basic[ex * m + ey] = 1;
    t.at(leaving.x, leaving.y) = 0.0;
  }

  OracleResult out;
  out.method = "transport_simplex";
  out.plan = t.value;
  out.u = u;
  out.v = v;
  for (int e = 0; e < n * m; ++e) out.value += c[e] * t.value[e];
  return out;
}

// ---------------------------------------------------------------------------
// Grid oracle
// ---------------------------------------------------------------------------

namespace {

struct EdgeEvaluator {
  double lin = 0.0, quad = 0.0, log_gain = 0.0, constant = 0.0;
  double step1_gain = 0.0, step1_cap = 0.0, step2_gain = 0.0, step2_cap = 0.0;

  double value(double a) const {
    double s = constant + lin * a - quad * a * a;
    if (log_gain != 0.0) s += log_gain * std::log1p(a);
    if (step1_gain != 0.0) s += step1_gain * std::min(a, step1_cap);
    if (step2_gain != 0.0) s += step2_gain * std::min(a, step2_cap);
    return s;
  }
  double slope_bound(double ub) const {
    return std::abs(lin) + 2.0 * quad * ub + log_gain + step1_gain + step2_gain;
  }
};

EdgeEvaluator make_evaluator(const EdgePair& utils) {
  const UtilityCoefficients f = coefficients(utils.f);
  const UtilityCoefficients g = coefficients(utils.g);
  EdgeEvaluator e;
  e.lin = f.lin + g.lin;
  e.quad = f.quad + g.quad;
  e.log_gain = f.log_gain + g.log_gain;
  e.constant = f.constant + g.constant;
  e.step1_gain = f.step_gain;
  e.step1_cap = f.step_cap;
  e.step2_gain = g.step_gain;
  e.step2_cap = g.step_cap;
  return e;
}

// Reduced row echelon elimination of the equality-agent constraints.
// Each pivot variable becomes an affine function of the free ones.
struct Elimination {
  std::vector<int> free_vars;
  struct PivotExpr {
    int var = -1;
    double rhs = 0.0;
    std::vector<double> coef;  // over free_vars
  };
  std::vector<PivotExpr> pivots;
};

Elimination eliminate_equalities(const ProblemInstance& inst) {
  const int ne = inst.n_edges();
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  for (int x = 0; x < inst.n_targets(); ++x) {
    if (inst.targets[x].lower != inst.targets[x].upper) continue;
    std::vector<double> row(ne, 0.0);
    for (int e : inst.edges_of_target[x]) row[e] = 1.0;
    rows.push_back(std::move(row));
    rhs.push_back(inst.targets[x].lower);
  }
  for (int y = 0; y < inst.n_sources(); ++y) {
    if (inst.sources[y].lower != inst.sources[y].upper) continue;
    std::vector<double> row(ne, 0.0);
    for (int e : inst.edges_of_source[y]) row[e] = 1.0;
    rows.push_back(std::move(row));
    rhs.push_back(inst.sources[y].lower);
  }

  const double tol = 1e-9;
  const int nr = static_cast<int>(rows.size());
  std::vector<int> pivot_col;
  int r = 0;
  for (int col = 0; col < ne && r < nr; ++col) {
    int best = -1;
    double best_mag = tol;
    for (int i = r; i < nr; ++i)
      if (std::abs(rows[i][col]) > best_mag) {
        best = i;
        best_mag = std::abs(rows[i][col]);
      }
    if (best < 0) continue;
    std::swap(rows[r], rows[best]);
    std::swap(rhs[r], rhs[best]);
    const double inv = 1.0 / rows[r][col];
    for (int j = 0; j < ne; ++j) rows[r][j] *= inv;
    rhs[r] *= inv;
    for (int i = 0; i < nr; ++i) {
      if (i == r || rows[i][col] == 0.0) continue;
      const double factor = rows[i][col];
      for (int j = 0; j < ne; ++j) rows[i][j] -= factor * rows[r][j];
      rhs[i] -= factor * rhs[r];
    }
    pivot_col.push_back(col);
    ++r;
  }
  for (int i = r; i < nr; ++i)
    if (std::abs(rhs[i]) > 1e-8)
      throw std::runtime_error("grid_search_oracle: equality constraints are inconsistent "
                               "(empty feasible set)");

  Elimination elim;
  std::vector<char> is_pivot(ne, 0);
  for (int col : pivot_col) is_pivot[col] = 1;
  for (int e = 0; e < ne; ++e)
    if (!is_pivot[e]) elim.free_vars.push_back(e);
  for (int i = 0; i < r; ++i) {
    Elimination::PivotExpr expr;
    expr.var = pivot_col[i];
    expr.rhs = rhs[i];
    for (int f : elim.free_vars) expr.coef.push_back(rows[i][f]);
    elim.pivots.push_back(std::move(expr));
  }
  return elim;
}

}  // namespace

OracleResult grid_search_oracle(const ProblemInstance& inst, double resolution) {
  if (!(resolution > 0.0)) throw std::invalid_argument("grid_search_oracle: resolution must be positive");
  const int ne = inst.n_edges();
  if (ne == 0) throw std::invalid_argument("grid_search_oracle: instance has no edges");

  const Elimination elim = eliminate_equalities(inst);
  const int d = static_cast<int>(elim.free_vars.size());
  if (d > 4)
    throw std::invalid_argument("grid_search_oracle: " + std::to_string(d) +
                                " free dimensions exceed the supported 4");

  std::vector<EdgeEvaluator> eval(ne);
  for (int e = 0; e < ne; ++e) eval[e] = make_evaluator(inst.utilities[e]);

  // Per-edge box from the two incident agents' upper bounds.
  std::vector<double> ub(ne);
  for (int e = 0; e < ne; ++e)
    ub[e] = std::min(inst.targets[inst.edges[e].target].upper,
                     inst.sources[inst.edges[e].source].upper);

  double mass_scale = 1.0;
  for (const auto& t : inst.targets) mass_scale = std::max(mass_scale, t.upper);
  for (const auto& s : inst.sources)
    mass_scale = std::max(mass_scale, std::isfinite(s.upper) ? s.upper : 1.0);
  const double feas_tol = 1e-9 * mass_scale;

  std::vector<double> plan(ne, 0.0);
  auto assemble = [&](const std::vector<double>& free_vals) -> bool {
    for (int i = 0; i < d; ++i) plan[elim.free_vars[i]] = free_vals[i];
    for (const auto& piv : elim.pivots) {
      double val = piv.rhs;
      for (int i = 0; i < d; ++i) val -= piv.coef[i] * free_vals[i];
      if (val < -feas_tol) return false;
      plan[piv.var] = std::max(val, 0.0);
    }
    for (int x = 0; x < inst.n_targets(); ++x) {
      double sum = 0.0;
      for (int e : inst.edges_of_target[x]) sum += plan[e];
      if (sum < inst.targets[x].lower - feas_tol || sum > inst.targets[x].upper + feas_tol)
        return false;
    }
    for (int y = 0; y < inst.n_sources(); ++y) {
      double sum = 0.0;
      for (int e : inst.edges_of_source[y]) sum += plan[e];
      if (sum < inst.sources[y].lower - feas_tol || sum > inst.sources[y].upper + feas_tol)
        return false;
    }
    return true;
  };
  auto objective = [&]() {
    double total = 0.0;
    for (int e = 0; e < ne; ++e) total += eval[e].value(plan[e]);
    return total;
  };

  double best_value = -std::numeric_limits<double>::infinity();
  Plan best_plan;
  std::vector<double> best_free(d, 0.0);
  auto consider = [&](const std::vector<double>& free_vals) {
    if (!assemble(free_vals)) return;
    const double value = objective();
    if (value > best_value || (value == best_value && plan < best_plan)) {
      best_value = value;
      best_plan = plan;
      best_free = free_vals;
    }
  };

  if (d == 0) {
    if (!assemble({}))
      throw std::runtime_error("grid_search_oracle: empty feasible set at the given resolution");
    OracleResult out;
    out.method = "grid";
    out.plan = plan;
    out.value = objective();
    out.resolution = 0.0;
    return out;
  }

  constexpr int kPointsByDim[5] = {0, 4097, 513, 101, 41};
  const int points = kPointsByDim[d];

  std::vector<double> lo(d, 0.0), hi(d);
  for (int i = 0; i < d; ++i) hi[i] = ub[elim.free_vars[i]];

  double pitch = 0.0;
  std::vector<double> free_vals(d);
  for (int level = 0; level < 64; ++level) {
    pitch = 0.0;
    std::vector<double> step(d);
    for (int i = 0; i < d; ++i) {
      step[i] = (hi[i] - lo[i]) / (points - 1);
      pitch = std::max(pitch, step[i]);
    }

    std::vector<int> idx(d, 0);
    while (true) {
      for (int i = 0; i < d; ++i) free_vals[i] = lo[i] + step[i] * idx[i];
      consider(free_vals);
      int carry = d - 1;
      while (carry >= 0 && ++idx[carry] == points) idx[carry--] = 0;
      if (carry < 0) break;
    }
    if (best_plan.empty())
      throw std::runtime_error("grid_search_oracle: empty feasible set at the given resolution");

    if (pitch <= resolution) break;
    // Zoom in around the incumbent; the incumbent itself stays a candidate,
    // so the best value never decreases.
    for (int i = 0; i < d; ++i) {
      const double half = 2.0 * step[i];
      lo[i] = std::max(0.0, best_free[i] - half);
      hi[i] = std::min(ub[elim.free_vars[i]], best_free[i] + half);
      if (hi[i] <= lo[i]) hi[i] = lo[i] + resolution;
    }
    consider(best_free);
  }

  OracleResult out;
  out.method = "grid";
  out.plan = best_plan;
  out.value = best_value;
  out.resolution = pitch;
  double lipschitz = 0.0;
  for (int e = 0; e < ne; ++e)
    lipschitz += eval[e].slope_bound(std::isfinite(ub[e]) ? ub[e] : mass_scale);
  out.value_tolerance = lipschitz * out.resolution * d;
  return out;
}

}  // namespace otmatch
