#pragma once

#include <vector>

#include "yamabe/geometry.hpp"

namespace yamabe {

/// One quadrature cell between two degrees of freedom. The measure
/// integral is exact per warp (analytic antiderivatives); nonlinear field
/// factors use a 4-point Gauss rule per cell, which integrates the
/// piecewise-linear interpolant's powers exactly up to the (negligible)
/// quadrature error of the smooth measure factor.
struct MeshCell {
  int a = -1, b = -1;   // dof indices (b wraps to 0 for the periodic cell)
  double dt = 0;        // coordinate length
  double w_measure = 0; // int_cell A dt   (gradient weight, exact)
  // Curvature quadratic form: int R A (u_a phi_a + u_b phi_b)^2.
  double c_aa = 0, c_ab = 0, c_bb = 0;
  // Gauss data for masses: u(x_j) = (1 - xi_j) u_a + xi_j u_b.
  double xi[4] = {0, 0, 0, 0};
  double wA[4] = {0, 0, 0, 0};  // gauss weight * fiber area
  double wL[4] = {0, 0, 0, 0};  // gauss weight * lateral element
};

struct BoundaryFace {
  int dof = -1;
  double area = 0;           // fiber area of the face
  double mean_curvature = 0; // outward convention, average of principal curvatures
};

/// Piecewise-linear discretization of a ModelManifold. Cell measure
/// integrals are exact per warp, so volumes and areas come out
/// quadrature-exact; pole slivers at smooth caps carry their measure as
/// node lumps (fields extend constantly there, making the lump exact).
class Mesh {
 public:
  Mesh(ModelManifold model, int nodes_per_segment);
  Mesh(ModelManifold model, const std::vector<int>& nodes_per_segment);
  /// Build from explicit node coordinates (ascending, within segment domains).
  Mesh(ModelManifold model, std::vector<std::vector<double>> segment_nodes);

  const ModelManifold& model() const { return model_; }
  int dofs() const { return static_cast<int>(t_.size()); }
  const std::vector<double>& node_t() const { return t_; }
  const std::vector<MeshCell>& cells() const { return cells_; }
  const std::vector<BoundaryFace>& boundary_faces() const { return faces_; }
  /// Pole-sliver lumps (zero away from smooth caps).
  const std::vector<double>& sliver_volume() const { return sl_vol_; }
  const std::vector<double>& sliver_curvature() const { return sl_curv_; }
  const std::vector<double>& sliver_lateral() const { return sl_lat_; }

  /// Dof index range [first, last] of a segment's nodes.
  std::pair<int, int> segment_dof_range(int segment) const;
  int segment_of_dof(int dof) const { return node_seg_[dof]; }

  /// Nested refinement: inserts the midpoint of every cell (and halves
  /// the pole slivers), doubling resolution while keeping all nodes.
  Mesh refined() const;

  double total_measure() const;   // quadrature volume == sum of cell measures
  double total_boundary_measure() const;

 private:
  void build();
  ModelManifold model_;
  std::vector<std::vector<double>> seg_nodes_;
  std::vector<double> t_;
  std::vector<int> node_seg_;
  std::vector<MeshCell> cells_;
  std::vector<BoundaryFace> faces_;
  std::vector<double> sl_vol_, sl_curv_, sl_lat_;
  std::vector<std::pair<int, int>> seg_ranges_;
  double lateral_total_ = 0;
};

/// Nodal values of a nonnegative symmetric test function on a mesh.
struct Field {
  std::vector<double> v;

  static Field constant(const Mesh& mesh, double c) {
    return Field{std::vector<double>(mesh.dofs(), c)};
  }
  int size() const { return static_cast<int>(v.size()); }
  double& operator[](int i) { return v[i]; }
  double operator[](int i) const { return v[i]; }
};

/// Linear interpolation of a field onto a (typically refined) mesh of the
/// same model.
Field interpolate(const Mesh& from, const Field& u, const Mesh& to);

}  // namespace yamabe
