#pragma once

#include "yamabe/mesh.hpp"

namespace yamabe {

/// Term-by-term value of the energy together with the constraint masses.
/// total == gradient_term + curvature_term + boundary_term.
struct EnergyBreakdown {
  double gradient_term = 0;
  double curvature_term = 0;
  double boundary_term = 0;
  double total = 0;
  double interior_mass = 0;  // int |u|^p dV
  double boundary_mass = 0;  // int_boundary |u|^q dsigma
};

/// Raised when a constraint cannot be met on a model (a = 0 on a model
/// without boundary mass, or a zero field).
class ConstraintUnreachable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Evaluates the energy
///   E(u) = (4(n-1)/(n-2)) int u'^2 A dt + int R u^2 A dt
///          + 2(n-1) sum_faces H u^2 A
/// together with the p- and q-masses, on the mesh quadrature.
EnergyBreakdown energy(const Mesh& mesh, const Field& u);

/// a * interior_mass + b * boundary_mass. Requires (a, b) != (0, 0),
/// a, b >= 0, and a > 0 whenever the model carries no boundary mass.
double constraint(const Mesh& mesh, const Field& u, double a, double b);

void check_constraint_weights(const Mesh& mesh, double a, double b);

/// Scales u so that constraint(mesh, c*u, a, b) == 1. The scale c is the
/// unique positive root of a c^p I + b c^q B = 1, found to relative
/// accuracy 1e-12 (closed form when a or b vanishes).
Field normalize(const Mesh& mesh, const Field& u, double a, double b);

/// The scale factor used by normalize.
double normalization_constant(const Mesh& mesh, const Field& u, double a, double b);

/// Hoelder bound on int u^2 dV for u with lambda * interior mass <= 1:
/// lambda^{-(1-2/n)} Vol(M)^{2/n}.
double holder_mass_bound(const ModelManifold& m, double lambda);

/// Boundary analogue for (1-lambda) * boundary mass <= 1:
/// (1-lambda)^{-(n-2)/(n-1)} Area^{1/(n-1)}.
double holder_boundary_mass_bound(const ModelManifold& m, double lambda);

/// int u^2 dV on the mesh quadrature (for checking the Hoelder bounds).
double l2_mass(const Mesh& mesh, const Field& u);

/// Gradients of E and of the constraint G = a I + b B with respect to
/// nodal values; used by the solver. Buffers are resized as needed.
void energy_gradient(const Mesh& mesh, const Field& u, std::vector<double>& grad);
void constraint_gradient(const Mesh& mesh, const Field& u, double a, double b,
                         std::vector<double>& grad);
void energy_hessian_diag(const Mesh& mesh, std::vector<double>& diag);

}  // namespace yamabe
