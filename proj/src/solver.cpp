#include "yamabe/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace yamabe {

void SolverOptions::validate() const {
  if (mesh_nodes < 16) throw std::invalid_argument("SolverOptions: mesh_nodes >= 16");
  if (!(tolerance > 0)) throw std::invalid_argument("SolverOptions: tolerance > 0");
  if (restarts < 1) throw std::invalid_argument("SolverOptions: restarts >= 1");
  if (refinement_levels < 1)
    throw std::invalid_argument("SolverOptions: refinement_levels >= 1");
}

namespace {

double dot(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0;
  for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(const std::vector<double>& x) { return std::sqrt(dot(x, x)); }

Field clamped(const Field& u) {
  Field out = u;
  for (double& x : out.v) x = std::max(x, 0.0);
  return out;
}

// Tridiagonal matrix with optional cyclic corner entries (periodic wrap).
struct TriMatrix {
  std::vector<double> diag, lower, upper;  // lower[i] = A[i][i-1], upper[i] = A[i][i+1]
  double corner_lo = 0;  // A[N-1][0]
  double corner_hi = 0;  // A[0][N-1]
  bool cyclic = false;

  void init(int n) {
    diag.assign(n, 0.0);
    lower.assign(n, 0.0);
    upper.assign(n, 0.0);
    corner_lo = corner_hi = 0;
    cyclic = false;
  }

  // Thomas algorithm; returns false on a vanishing pivot.
  static bool solve_plain(std::vector<double> d, std::vector<double> lo,
                          std::vector<double> up, std::vector<double> rhs,
                          std::vector<double>& x) {
    const int n = static_cast<int>(d.size());
    for (int i = 1; i < n; ++i) {
      if (std::abs(d[i - 1]) < 1e-300) return false;
      const double w = lo[i] / d[i - 1];
      d[i] -= w * up[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    if (std::abs(d[n - 1]) < 1e-300) return false;
    x.assign(n, 0.0);
    x[n - 1] = rhs[n - 1] / d[n - 1];
    for (int i = n - 2; i >= 0; --i) x[i] = (rhs[i] - up[i] * x[i + 1]) / d[i];
    return true;
  }

  // Sherman-Morrison reduction for the cyclic corners.
  bool solve(const std::vector<double>& rhs, std::vector<double>& x) const {
    const int n = static_cast<int>(diag.size());
    if (n == 1) {
      const double a = diag[0] + (cyclic ? corner_lo + corner_hi : 0.0);
      if (std::abs(a) < 1e-300) return false;
      x.assign(1, rhs[0] / a);
      return true;
    }
    if (!cyclic || (corner_lo == 0 && corner_hi == 0))
      return solve_plain(diag, lower, upper, rhs, x);
    const double alpha = diag[0] != 0 ? -diag[0] : -1.0;
    std::vector<double> d = diag;
    d[0] -= alpha;
    d[n - 1] -= corner_lo * corner_hi / alpha;
    std::vector<double> u(n, 0.0);
    u[0] = alpha;
    u[n - 1] = corner_lo;
    std::vector<double> y, z;
    if (!solve_plain(d, lower, upper, rhs, y)) return false;
    if (!solve_plain(d, lower, upper, u, z)) return false;
    const double vy = y[0] + corner_hi / alpha * y[n - 1];
    const double vz = 1.0 + z[0] + corner_hi / alpha * z[n - 1];
    if (std::abs(vz) < 1e-300) return false;
    x.assign(n, 0.0);
    for (int i = 0; i < n; ++i) x[i] = y[i] - z[i] * (vy / vz);
    return true;
  }
};

// Assembles H = hessian(E) - mu * hessian(G) + tau * I.
void assemble_kkt_matrix(const Mesh& mesh, const Field& u, double a, double b,
                         double mu, double tau, TriMatrix& H) {
  const int n = mesh.model().dim;
  const int N = mesh.dofs();
  const double cg = gradient_coefficient(n);
  const double p = exponent_p(n), q = exponent_q(n);
  H.init(N);

  auto add = [&](int i, int j, double v) {
    if (i == j) {
      H.diag[i] += v;
    } else if (j == i + 1) {
      H.upper[i] += v;
    } else if (j == i - 1) {
      H.lower[i] += v;
    } else if (i == N - 1 && j == 0) {
      H.corner_lo += v;
      H.cyclic = true;
    } else if (i == 0 && j == N - 1) {
      H.corner_hi += v;
      H.cyclic = true;
    } else {
      throw std::logic_error("kkt matrix: unexpected coupling");
    }
  };

  auto abspow = [](double x, double e) { return std::pow(std::abs(x), e); };

  for (const auto& c : mesh.cells()) {
    const double k = 2.0 * cg * c.w_measure / (c.dt * c.dt);
    add(c.a, c.a, k + 2.0 * c.c_aa);
    add(c.b, c.b, k + 2.0 * c.c_bb);
    add(c.a, c.b, -k + 2.0 * c.c_ab);
    add(c.b, c.a, -k + 2.0 * c.c_ab);
    // Constraint Hessian from the gauss points.
    for (int j = 0; j < 4; ++j) {
      const double pa = 1.0 - c.xi[j], pb = c.xi[j];
      const double uj = pa * u[c.a] + pb * u[c.b];
      double h = 0;
      if (a > 0) h += a * p * (p - 1) * c.wA[j] * abspow(uj, p - 2);
      if (b > 0 && c.wL[j] != 0.0) h += b * q * (q - 1) * c.wL[j] * abspow(uj, q - 2);
      if (h != 0.0) {
        add(c.a, c.a, -mu * h * pa * pa);
        add(c.b, c.b, -mu * h * pb * pb);
        add(c.a, c.b, -mu * h * pa * pb);
        add(c.b, c.a, -mu * h * pa * pb);
      }
    }
  }
  const auto& sc = mesh.sliver_curvature();
  const auto& sv = mesh.sliver_volume();
  const auto& sl = mesh.sliver_lateral();
  for (int i = 0; i < N; ++i) {
    double d = 2.0 * sc[i] + tau;
    if (a > 0 && sv[i] != 0.0) d -= mu * a * p * (p - 1) * sv[i] * abspow(u[i], p - 2);
    if (b > 0 && sl[i] != 0.0) d -= mu * b * q * (q - 1) * sl[i] * abspow(u[i], q - 2);
    H.diag[i] += d;
  }
  for (const auto& f : mesh.boundary_faces()) {
    double d = 4.0 * (n - 1.0) * f.mean_curvature * f.area;
    if (b > 0) d -= mu * b * q * (q - 1) * f.area * abspow(u[f.dof], q - 2);
    H.diag[f.dof] += d;
  }
}

// Newton refinement on the Euler-Lagrange system F = grad E - mu grad G = 0,
// G = 1, from a near-minimizer. Returns the polished iterate when the
// stationarity residual improves; falls back to the input otherwise.
void newton_polish(const Mesh& mesh, double a, double b, const SolverOptions& opts,
                   Field& u, double& E, double& residual) {
  const int N = mesh.dofs();
  std::vector<double> gE, gG, F(N), x1, x2;
  TriMatrix H;

  auto eval_residual = [&](const Field& w, double& mu_out) {
    energy_gradient(mesh, w, gE);
    constraint_gradient(mesh, w, a, b, gG);
    const double gg = dot(gG, gG);
    mu_out = gg > 0 ? dot(gE, gG) / gg : 0.0;
    for (int i = 0; i < N; ++i) {
      F[i] = gE[i] - mu_out * gG[i];
      if (w[i] <= 0.0 && F[i] > 0.0) F[i] = 0.0;  // active bound
    }
    return norm2(F) / std::max(norm2(gE), 1e-300);
  };

  Field best = u;
  double mu = 0;
  double best_res = eval_residual(best, mu);
  double tau = 0;

  Field cur = best;
  double cur_mu = mu;
  for (int it = 0; it < 60; ++it) {
    double res = eval_residual(cur, cur_mu);
    if (res < best_res) {
      best = cur;
      best_res = res;
    }
    if (res <= 1e-13) break;

    assemble_kkt_matrix(mesh, cur, a, b, cur_mu, tau, H);
    const double gcur = constraint(mesh, cur, a, b);
    // Bordered solve: H du - gG dmu = -F,  gG . du = 1 - G.
    if (!H.solve(F, x1) || !H.solve(gG, x2)) {
      tau = tau == 0 ? 1e-8 : tau * 10;
      if (tau > 1e6) break;
      continue;
    }
    const double denom = dot(gG, x2);
    if (std::abs(denom) < 1e-300) break;
    // du = -x1 + dmu * x2 with gG.du = 1 - G.
    const double dmu = (1.0 - gcur + dot(gG, x1)) / denom;
    bool improved = false;
    double alpha = 1.0;
    for (int ls = 0; ls < 12; ++ls) {
      Field trial = cur;
      for (int i = 0; i < N; ++i)
        trial[i] = std::max(cur[i] + alpha * (-x1[i] + dmu * x2[i]), 0.0);
      double tmu;
      const double tres = eval_residual(trial, tmu);
      if (tres < res * (1.0 - 1e-3 * alpha)) {
        cur = std::move(trial);
        cur_mu = tmu;
        improved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!improved) {
      tau = tau == 0 ? 1e-8 * H.diag[0] : tau * 10;
      if (!(tau < 1e8)) break;
    } else {
      tau = 0;
    }
  }

  // Re-project the polish result onto the constraint and keep it if the
  // stationarity residual is no worse than the input's.
  Field cand = normalize(mesh, clamped(best), a, b);
  double cand_mu;
  const double cand_res = eval_residual(cand, cand_mu);
  const double cand_E = energy(mesh, cand).total;
  if (cand_res <= residual || cand_E < E - 1e-12 * std::abs(E)) {
    u = std::move(cand);
    E = cand_E;
    residual = cand_res;
  }
}

struct DescentResult {
  Field u;
  double value = 0;
  double residual = std::numeric_limits<double>::infinity();
  bool converged = false;
};

// Projected gradient descent on {constraint == 1}: Jacobi-preconditioned
// directions with Barzilai-Borwein steps, safeguarded by a nonmonotone
// (Grippo-Lampariello-Lucidi) backtracking line search; the iterate is
// re-projected by clamping at zero and re-normalizing after every trial.
// Mutates (u, E); returns the final relative stationarity residual.
double bb_phase(const Mesh& mesh, double a, double b, const SolverOptions& opts,
                double stop_tol, int max_iters, Field& u, double& E,
                bool& converged) {
  const int N = mesh.dofs();
  double residual = std::numeric_limits<double>::infinity();
  converged = false;

  std::vector<double> D;
  energy_hessian_diag(mesh, D);
  double dmax = 0;
  for (double d : D) dmax = std::max(dmax, std::abs(d));
  for (double& d : D) d = std::max(d, 1e-8 * dmax);

  std::vector<double> gE, gG, r(N), dir(N);
  std::vector<double> prev_u, prev_dir;
  std::vector<double> hist;  // recent accepted energies for the GLL test
  hist.push_back(E);

  double step = opts.step_init;
  for (int it = 0; it < max_iters; ++it) {
    energy_gradient(mesh, u, gE);
    constraint_gradient(mesh, u, a, b, gG);

    // True (L2) projected gradient: the reported stationarity residual.
    const double gg = dot(gG, gG);
    const double mu = gg > 0 ? dot(gE, gG) / gg : 0.0;
    for (int i = 0; i < N; ++i) {
      r[i] = gE[i] - mu * gG[i];
      if (u[i] <= 0.0 && r[i] > 0.0) r[i] = 0.0;  // active bound, KKT-consistent
    }
    const double rn = norm2(r);
    const double gn = std::max(norm2(gE), 1e-300);
    residual = rn / gn;
    if (residual <= stop_tol || rn <= 1e-14 * (1.0 + std::abs(E))) {
      converged = true;
      break;
    }

    // Search direction: Jacobi-preconditioned gradient projected onto the
    // constraint tangent in the D-inner-product.
    double num = 0, den = 0;
    for (int i = 0; i < N; ++i) {
      num += gE[i] * gG[i] / D[i];
      den += gG[i] * gG[i] / D[i];
    }
    const double muD = den > 0 ? num / den : 0.0;
    for (int i = 0; i < N; ++i) {
      dir[i] = -(gE[i] - muD * gG[i]) / D[i];
      if (u[i] <= 0.0 && dir[i] < 0.0) dir[i] = 0.0;
    }
    double dirg = 0;  // directional derivative along dir
    for (int i = 0; i < N; ++i) dirg += dir[i] * gE[i];
    if (dirg >= 0) {
      // Preconditioned direction lost descent (active-set change); fall
      // back to the plain projected gradient.
      for (int i = 0; i < N; ++i) dir[i] = -r[i];
      dirg = -rn * rn;
    }

    // BB1 step from the last accepted move, measured along the direction.
    if (!prev_u.empty()) {
      double dd = 0, dg = 0;
      for (int i = 0; i < N; ++i) {
        const double du = u[i] - prev_u[i];
        dd += du * du;
        dg += du * (dir[i] - prev_dir[i]);
      }
      step = dg < 0 ? dd / (-dg) : opts.step_init;
    }
    step = std::clamp(step, 1e-14, 1e6);

    const double emax = *std::max_element(hist.begin(), hist.end());
    bool accepted = false;
    double s = step;
    prev_u = u.v;
    prev_dir = dir;
    for (int ls = 0; ls < 44; ++ls) {
      Field trial = u;
      for (int i = 0; i < N; ++i) trial[i] = u[i] + s * dir[i];
      trial = normalize(mesh, clamped(trial), a, b);
      const double Et = energy(mesh, trial).total;
      if (Et <= emax + opts.armijo_c * s * dirg) {
        u = std::move(trial);
        E = Et;
        accepted = true;
        break;
      }
      s *= opts.backtrack;
    }
    if (!accepted) break;  // step underflow: stagnation at precision limits
    hist.push_back(E);
    if (hist.size() > 8) hist.erase(hist.begin());
  }
  return residual;
}

// Distance from each node to the nearest boundary-mass point (faces, or
// anywhere on the lateral boundary, in which case the profile is flat).
std::vector<double> boundary_distance(const Mesh& mesh) {
  std::vector<double> d(mesh.dofs(), 0.0);
  if (mesh.model().fiber == FiberKind::HalfSphere) return d;
  std::vector<double> bts;
  for (const auto& f : mesh.boundary_faces()) bts.push_back(mesh.node_t()[f.dof]);
  if (bts.empty()) return d;
  for (int i = 0; i < mesh.dofs(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (double bt : bts) best = std::min(best, std::abs(mesh.node_t()[i] - bt));
    d[i] = best;
  }
  return d;
}

double circle_dist(double t, double c, double span) {
  double d = std::abs(t - c);
  return std::min(d, span - d);
}

Field make_start(const Mesh& mesh, int profile, std::uint64_t seed, int restart) {
  const auto& ts = mesh.node_t();
  const int N = mesh.dofs();
  Field u{std::vector<double>(N, 1.0)};
  switch (profile) {
    case 0:  // constant
      return u;
    case 1: {  // bubble peaked in the widest segment
      int best_seg = 0;
      double best_w = -1;
      const auto& segs = mesh.model().segments;
      for (size_t s = 0; s < segs.size(); ++s) {
        const double w = std::max(segs[s].warp.value(0.5 * (segs[s].t_begin + segs[s].t_end)),
                                  std::max(segs[s].warp.value(segs[s].t_begin),
                                           segs[s].warp.value(segs[s].t_end)));
        if (w > best_w) {
          best_w = w;
          best_seg = static_cast<int>(s);
        }
      }
      const double tc = 0.5 * (segs[best_seg].t_begin + segs[best_seg].t_end);
      const double span = mesh.model().total_length();
      const bool per = mesh.model().periodic();
      for (int i = 0; i < N; ++i) {
        const double d = per ? circle_dist(ts[i], tc, span) : std::abs(ts[i] - tc);
        u[i] = std::sqrt(1.0 / std::cosh(d));
      }
      return u;
    }
    case 2: {  // boundary-concentrated ramp
      auto d = boundary_distance(mesh);
      const double dmax = *std::max_element(d.begin(), d.end());
      if (dmax <= 0) return u;  // lateral boundary everywhere: constant is apt
      for (int i = 0; i < N; ++i) {
        const double x = 1.0 - d[i] / dmax;
        u[i] = 0.15 + x * x;
      }
      return u;
    }
    default: {  // seeded random, positive
      std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (restart + 1)));
      std::normal_distribution<double> g(0.0, 0.5);
      for (int i = 0; i < N; ++i) u[i] = std::exp(g(rng));
      return u;
    }
  }
}

}  // namespace

YamabeEstimate minimize_on_mesh(std::shared_ptr<const Mesh> mesh, double a, double b,
                                const SolverOptions& opts, const Field* warm_start) {
  opts.validate();
  check_constraint_weights(*mesh, a, b);

  YamabeEstimate best;
  best.a = a;
  best.b = b;
  best.mesh = mesh;

  auto consider = [&](const DescentResult& r) {
    const bool better =
        !std::isfinite(best.value) || r.value < best.value - 1e-15 ||
        (std::abs(r.value - best.value) <= 1e-12 * std::abs(best.value) &&
         r.residual < best.euler_lagrange_residual);
    if (better) {
      best.value = r.value;
      best.minimizer = r.u;
      best.euler_lagrange_residual = r.residual;
      best.converged = r.converged;
    }
  };

  if (warm_start != nullptr)
    consider(descend(*mesh, *warm_start, a, b, opts));
  const int starts = warm_start ? std::max(1, opts.restarts - 2) : opts.restarts;
  for (int k = 0; k < starts; ++k)
    consider(descend(*mesh, make_start(*mesh, k % 4 == 3 ? 3 : k % 4, opts.seed, k), a, b, opts));
  return best;
}

YamabeEstimate minimize_energy(const ModelManifold& m, double a, double b,
                               const SolverOptions& opts) {
  opts.validate();
  auto mesh = std::make_shared<const Mesh>(m, opts.mesh_nodes);
  return minimize_on_mesh(std::move(mesh), a, b, opts);
}

YamabeEstimate refine_and_extrapolate(const ModelManifold& m, double a, double b,
                                      const SolverOptions& opts) {
  opts.validate();
  if (opts.refinement_levels < 2)
    throw std::invalid_argument("refine_and_extrapolate: refinement_levels >= 2");

  YamabeEstimate est;
  bool monotone = true;
  std::vector<double> values;
  std::shared_ptr<const Mesh> mesh = std::make_shared<const Mesh>(m, opts.mesh_nodes);
  for (int level = 0; level < opts.refinement_levels; ++level) {
    YamabeEstimate cur;
    if (level == 0) {
      cur = minimize_on_mesh(mesh, a, b, opts);
    } else {
      auto finer = std::make_shared<const Mesh>(mesh->refined());
      Field warm = interpolate(*mesh, est.minimizer, *finer);
      mesh = finer;
      cur = minimize_on_mesh(mesh, a, b, opts, &warm);
    }
    cur.mesh_level = level;
    // Nested spaces: the discrete minimum must not rise under refinement.
    if (level > 0 && cur.value > est.value + 1e-10 * std::max(1.0, std::abs(est.value)))
      monotone = false;
    values.push_back(cur.value);
    est = std::move(cur);
  }
  est.level_values = values;
  est.monotone_levels = monotone;

  const auto& v = est.level_values;
  const int L = static_cast<int>(v.size());
  const double d1 = v[L - 2] - v[L - 1];
  est.extrapolated_value = std::abs(d1) > 0 ? v[L - 1] + d1 / 3.0 : v[L - 1];
  if (L >= 3) {
    const double d0 = v[L - 3] - v[L - 2];
    if (d0 * d1 > 0 && std::abs(d1) > 1e-300) est.observed_order = std::log2(d0 / d1);
  }
  return est;
}

std::vector<std::pair<double, YamabeEstimate>> lambda_sweep(
    const ModelManifold& m, const std::vector<double>& lambda_grid,
    const SolverOptions& opts) {
  opts.validate();
  std::vector<double> grid = lambda_grid;
  std::sort(grid.begin(), grid.end());
  for (double l : grid)
    if (l < 0 || l > 1) throw std::invalid_argument("lambda_sweep: lambda in [0,1]");

  auto mesh = std::make_shared<const Mesh>(m, opts.mesh_nodes);
  std::vector<std::pair<double, YamabeEstimate>> out;
  const Field* warm = nullptr;
  for (double l : grid) {
    YamabeEstimate e = minimize_on_mesh(mesh, l, 1.0 - l, opts, warm);
    out.emplace_back(l, std::move(e));
    warm = &out.back().second.minimizer;
  }
  return out;
}

double closed_form_sphere(int n) {
  if (n < 3) throw std::invalid_argument("closed_form_sphere: n >= 3");
  return n * (n - 1.0) * std::pow(unit_sphere_area(n), 2.0 / n);
}

HemisphereClosedForm closed_form_hemisphere(int n, double lambda) {
  if (n < 3) throw std::invalid_argument("closed_form_hemisphere: n >= 3");
  if (lambda < 0 || lambda > 1)
    throw std::invalid_argument("closed_form_hemisphere: lambda in [0,1]");
  const double vol = 0.5 * unit_sphere_area(n);
  const double area = unit_sphere_area(n - 1);
  const double denom = lambda * std::pow(vol, double(n - 2) / n) +
                       (1.0 - lambda) * std::pow(area, double(n - 2) / (n - 1));
  HemisphereClosedForm cf;
  cf.paper_value = n * (n - 2.0) * vol / (4.0 * denom);
  cf.energy_scale_value = cf.paper_value * gradient_coefficient(n);
  return cf;
}

}  // namespace yamabe
