#include "yamabe/functional.hpp"

#include <cmath>

namespace yamabe {

EnergyBreakdown energy(const Mesh& mesh, const Field& u) {
  if (u.size() != mesh.dofs())
    throw std::invalid_argument("energy: field does not match mesh");
  const int n = mesh.model().dim;
  const double cg = gradient_coefficient(n);
  const double p = exponent_p(n), q = exponent_q(n);

  EnergyBreakdown e;
  for (const auto& c : mesh.cells()) {
    const double ua = u[c.a], ub = u[c.b];
    const double du = (ub - ua) / c.dt;
    e.gradient_term += cg * du * du * c.w_measure;
    e.curvature_term += c.c_aa * ua * ua + 2.0 * c.c_ab * ua * ub + c.c_bb * ub * ub;
    for (int j = 0; j < 4; ++j) {
      const double uj = std::abs((1.0 - c.xi[j]) * ua + c.xi[j] * ub);
      e.interior_mass += c.wA[j] * std::pow(uj, p);
      if (c.wL[j] != 0.0) e.boundary_mass += c.wL[j] * std::pow(uj, q);
    }
  }
  const auto& sv = mesh.sliver_volume();
  const auto& sc = mesh.sliver_curvature();
  const auto& sl = mesh.sliver_lateral();
  for (int i = 0; i < mesh.dofs(); ++i) {
    if (sv[i] == 0.0 && sc[i] == 0.0 && sl[i] == 0.0) continue;
    const double ui = std::abs(u[i]);
    e.curvature_term += sc[i] * u[i] * u[i];
    e.interior_mass += sv[i] * std::pow(ui, p);
    if (sl[i] != 0.0) e.boundary_mass += sl[i] * std::pow(ui, q);
  }
  for (const auto& f : mesh.boundary_faces()) {
    const double ub = u[f.dof];
    e.boundary_term += 2.0 * (n - 1.0) * f.mean_curvature * f.area * ub * ub;
    e.boundary_mass += f.area * std::pow(std::abs(ub), q);
  }
  e.total = e.gradient_term + e.curvature_term + e.boundary_term;
  return e;
}

void check_constraint_weights(const Mesh& mesh, double a, double b) {
  if (a < 0 || b < 0 || (a == 0 && b == 0))
    throw std::invalid_argument("constraint: weights must be >= 0 and not both zero");
  if (a == 0 && !mesh.model().has_boundary_mass())
    throw ConstraintUnreachable("constraint with a = 0 is unreachable on '" +
                                mesh.model().name + "' (no boundary mass)");
}

double constraint(const Mesh& mesh, const Field& u, double a, double b) {
  check_constraint_weights(mesh, a, b);
  const EnergyBreakdown e = energy(mesh, u);
  return a * e.interior_mass + b * e.boundary_mass;
}

double normalization_constant(const Mesh& mesh, const Field& u, double a, double b) {
  check_constraint_weights(mesh, a, b);
  const EnergyBreakdown e = energy(mesh, u);
  const double I = e.interior_mass, B = e.boundary_mass;
  const int n = mesh.model().dim;
  const double p = exponent_p(n), q = exponent_q(n);

  const double aI = a * I, bB = b * B;
  if (aI <= 0 && bB <= 0) throw ConstraintUnreachable("normalize: zero field");
  if (bB <= 0) return std::pow(aI, -1.0 / p);
  if (aI <= 0) return std::pow(bB, -1.0 / q);

  // g(c) = aI c^p + bB c^q is strictly increasing; bracket and bisect,
  // polishing with Newton, to relative accuracy 1e-12.
  auto g = [&](double c) { return aI * std::pow(c, p) + bB * std::pow(c, q) - 1.0; };
  double hi = std::min(std::pow(aI, -1.0 / p), std::pow(bB, -1.0 / q));
  double lo = std::pow(aI + bB, -1.0 / q);
  while (g(lo) > 0) lo *= 0.5;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    const double dg = aI * p * std::pow(mid, p - 1) + bB * q * std::pow(mid, q - 1);
    double nxt = mid - gm / dg;
    if (!(nxt > lo && nxt < hi)) nxt = mid;
    if (g(nxt) > 0)
      hi = nxt;
    else
      lo = nxt;
    if (hi - lo <= 1e-13 * hi) break;
  }
  return 0.5 * (lo + hi);
}

Field normalize(const Mesh& mesh, const Field& u, double a, double b) {
  const double c = normalization_constant(mesh, u, a, b);
  Field out = u;
  for (double& x : out.v) x *= c;
  return out;
}

double holder_mass_bound(const ModelManifold& m, double lambda) {
  if (!(lambda > 0)) throw std::invalid_argument("holder_mass_bound: lambda must be > 0");
  const int n = m.dim;
  return std::pow(lambda, -(1.0 - 2.0 / n)) * std::pow(m.volume(), 2.0 / n);
}

double holder_boundary_mass_bound(const ModelManifold& m, double lambda) {
  if (!(lambda < 1))
    throw std::invalid_argument("holder_boundary_mass_bound: lambda must be < 1");
  const int n = m.dim;
  return std::pow(1.0 - lambda, -double(n - 2) / (n - 1)) *
         std::pow(m.boundary_area(), 1.0 / (n - 1));
}

double l2_mass(const Mesh& mesh, const Field& u) {
  double s = 0;
  for (const auto& c : mesh.cells())
    for (int j = 0; j < 4; ++j) {
      const double uj = (1.0 - c.xi[j]) * u[c.a] + c.xi[j] * u[c.b];
      s += c.wA[j] * uj * uj;
    }
  const auto& sv = mesh.sliver_volume();
  for (int i = 0; i < mesh.dofs(); ++i) s += sv[i] * u[i] * u[i];
  return s;
}

void energy_gradient(const Mesh& mesh, const Field& u, std::vector<double>& grad) {
  const int n = mesh.model().dim;
  const double cg = gradient_coefficient(n);
  grad.assign(mesh.dofs(), 0.0);
  for (const auto& c : mesh.cells()) {
    const double ua = u[c.a], ub = u[c.b];
    const double k = 2.0 * cg * c.w_measure * (ub - ua) / (c.dt * c.dt);
    grad[c.a] += -k + 2.0 * (c.c_aa * ua + c.c_ab * ub);
    grad[c.b] += k + 2.0 * (c.c_bb * ub + c.c_ab * ua);
  }
  const auto& sc = mesh.sliver_curvature();
  for (int i = 0; i < mesh.dofs(); ++i)
    if (sc[i] != 0.0) grad[i] += 2.0 * sc[i] * u[i];
  for (const auto& f : mesh.boundary_faces())
    grad[f.dof] += 4.0 * (n - 1.0) * f.mean_curvature * f.area * u[f.dof];
}

void constraint_gradient(const Mesh& mesh, const Field& u, double a, double b,
                         std::vector<double>& grad) {
  const int n = mesh.model().dim;
  const double p = exponent_p(n), q = exponent_q(n);
  grad.assign(mesh.dofs(), 0.0);
  auto signed_pow = [](double x, double e) {
    const double m = std::pow(std::abs(x), e);
    return x < 0 ? -m : m;
  };
  for (const auto& c : mesh.cells()) {
    for (int j = 0; j < 4; ++j) {
      const double pa = 1.0 - c.xi[j], pb = c.xi[j];
      const double uj = pa * u[c.a] + pb * u[c.b];
      double g = 0;
      if (a > 0) g += a * p * c.wA[j] * signed_pow(uj, p - 1);
      if (b > 0 && c.wL[j] != 0.0) g += b * q * c.wL[j] * signed_pow(uj, q - 1);
      if (g != 0.0) {
        grad[c.a] += g * pa;
        grad[c.b] += g * pb;
      }
    }
  }
  const auto& sv = mesh.sliver_volume();
  const auto& sl = mesh.sliver_lateral();
  for (int i = 0; i < mesh.dofs(); ++i) {
    if (a > 0 && sv[i] != 0.0) grad[i] += a * p * sv[i] * signed_pow(u[i], p - 1);
    if (b > 0 && sl[i] != 0.0) grad[i] += b * q * sl[i] * signed_pow(u[i], q - 1);
  }
  if (b > 0)
    for (const auto& f : mesh.boundary_faces())
      grad[f.dof] += b * q * f.area * signed_pow(u[f.dof], q - 1);
}

/// Diagonal of the Hessian of E, used as a Jacobi preconditioner.
void energy_hessian_diag(const Mesh& mesh, std::vector<double>& diag) {
  const int n = mesh.model().dim;
  const double cg = gradient_coefficient(n);
  diag.assign(mesh.dofs(), 0.0);
  for (const auto& c : mesh.cells()) {
    const double k = 2.0 * cg * c.w_measure / (c.dt * c.dt);
    diag[c.a] += k + 2.0 * c.c_aa;
    diag[c.b] += k + 2.0 * c.c_bb;
  }
  const auto& sc = mesh.sliver_curvature();
  for (int i = 0; i < mesh.dofs(); ++i) diag[i] += 2.0 * sc[i];
  for (const auto& f : mesh.boundary_faces())
    diag[f.dof] += 4.0 * (n - 1.0) * f.mean_curvature * f.area;
}

}  // namespace yamabe
