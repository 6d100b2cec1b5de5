#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace yamabe {

/// Area of the unit m-sphere S^m (m >= 1).
double unit_sphere_area(int m);

/// Interior critical exponent p = 2n/(n-2).
double exponent_p(int n);

/// Boundary critical exponent q = 2(n-1)/(n-2).
double exponent_q(int n);

/// Coefficient of the gradient term, 4(n-1)/(n-2).
double gradient_coefficient(int n);

// C^2 cubic spline through (x_i, y_i) with clamped end slopes.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> x, std::vector<double> y,
              double slope_begin, double slope_end);

  double value(double t) const;
  double deriv(double t) const;
  double deriv2(double t) const;
  const std::vector<double>& knots() const { return x_; }
  const std::vector<double>& values() const { return y_; }
  double slope_begin() const { return sb_; }
  double slope_end() const { return se_; }

 private:
  int find_interval(double t) const;
  std::vector<double> x_, y_, m_;  // m_ = second derivatives at knots
  double sb_ = 0, se_ = 0;
};

enum class WarpKind { Constant, Sine, Linear, Spline };

/// Radial profile f(t) of a warped-product segment dt^2 + f(t)^2 g_fiber.
///
///   Constant: f = c0                       (c0 = cylinder radius)
///   Sine:     f = c0 sin(c2 (t - c1)/c0)   (c0 = sphere radius, c2 = +-1)
///   Linear:   f = c0 + c1 t
///   Spline:   clamped C^2 cubic
struct Warp {
  WarpKind kind = WarpKind::Constant;
  double c0 = 1.0, c1 = 0.0, c2 = 1.0;
  std::shared_ptr<const CubicSpline> spline;

  double value(double t) const;
  double deriv(double t) const;
  double deriv2(double t) const;

  /// Exact (analytic for Constant/Sine/Linear, Gauss for Spline)
  /// integral of f(t)^m over [a, b].
  double power_integral(int m, double a, double b) const;

  Warp mirrored(double c) const;  // f~(t) = f(c - t)
  Warp shifted(double dt) const;  // f~(t) = f(t - dt)

  static Warp constant(double r);
  static Warp sine(double radius, double center, double orient);
  static Warp linear(double intercept, double slope);
  static Warp from_spline(std::shared_ptr<const CubicSpline> s);
};

/// Fiber geometry of a segment. Round is the unit (n-1)-sphere,
/// Projective its antipodal quotient (areas halved), HalfSphere the
/// closed hemisphere (areas halved, equatorial lateral boundary).
enum class FiberKind { Round, Projective, HalfSphere };

int fiber_order(FiberKind k);  // measure divisor: 1 or 2

struct WarpedSegment {
  int dim = 3;  // manifold dimension n >= 3
  FiberKind fiber = FiberKind::Round;
  Warp warp;
  double t_begin = 0, t_end = 1;

  double length() const { return t_end - t_begin; }

  /// Scalar curvature R(t) of dt^2 + f^2 g_fiber; at a pole (f -> 0)
  /// the analytic limit is used for Sine and unit-slope Linear warps.
  double scalar_curvature(double t) const;

  /// Area of the fiber {t} x F, i.e. omega_{n-1} f^{n-1} / order.
  double fiber_area(double t) const;

  /// Length element of the lateral boundary (HalfSphere fibers only):
  /// omega_{n-2} f^{n-2}; zero for boundaryless fibers.
  double lateral_element(double t) const;

  double measure_integral(double a, double b) const;            // int A dt
  double curvature_measure_integral(double a, double b) const;  // int R A dt
  double lateral_measure_integral(double a, double b) const;    // int L dt
};

enum class EndKind { Boundary, SmoothCap, PeriodicJoin, ReflectionQuotient };

struct EndCondition {
  EndKind kind = EndKind::Boundary;
};

enum class Side { Left, Right };

/// An ordered chain of warped segments glued continuously, with end
/// conditions on the two extreme ends and a recorded covering multiplicity.
struct ModelManifold {
  std::string name;
  int dim = 3;
  FiberKind fiber = FiberKind::Round;
  std::vector<WarpedSegment> segments;
  EndCondition end_left, end_right;
  int covering_multiplicity = 1;

  double t_begin() const { return segments.front().t_begin; }
  double t_end() const { return segments.back().t_end; }
  double total_length() const { return t_end() - t_begin(); }

  /// Throws std::invalid_argument with a diagnostic if any type
  /// invariant fails (junction radius mismatch, bad cap, ...).
  void validate() const;

  bool periodic() const { return end_left.kind == EndKind::PeriodicJoin; }
  bool has_boundary_faces() const;
  bool has_boundary_mass() const;  // faces or lateral boundary

  double volume() const;
  double boundary_area() const;  // faces plus lateral boundary

  const WarpedSegment& segment_at(double t) const;
};

/// Mean curvature (average of principal curvatures, outward normal) of
/// the boundary face at the given end. The end must be a Boundary end.
double boundary_mean_curvature(const ModelManifold& m, Side side);

namespace models {

ModelManifold round_sphere(int n);
ModelManifold hemisphere(int n);
/// The hemisphere fibered over an axis inside its boundary: warp sin t on
/// [0, pi] with half-sphere fibers. Same manifold as hemisphere(n), with
/// the boundary realized as the lateral surface.
ModelManifold hemisphere_axial(int n);
ModelManifold cylinder(int n, double l);
ModelManifold hemi_cylinder(int n, double l);
ModelManifold schoen_product(int n, double circumference);
ModelManifold quotient_product(int n, double circumference);
ModelManifold sphere_minus_cap(int n, double t_cut);
/// Spherical cap with half-sphere fibers (core for boundary connected sums).
ModelManifold axial_cap(int n, double t_cut);
/// Round projective space: sin t on [0, pi/2] with a reflection quotient
/// at the equator.
ModelManifold rp_sphere(int n);

/// Joins two cores (each with exactly one Boundary end, equal dimension
/// and fiber kind, equal boundary radii) by a cylindrical neck of length l.
ModelManifold glued_neck(const ModelManifold& core_a, const ModelManifold& core_b,
                         double l);

}  // namespace models

/// k-fold Riemannian covering: unwraps the circle of a periodic model
/// (any k), the fiber of a projective model (k = 2), or a reflection
/// quotient end (k = 2). Volume scales by exactly k.
ModelManifold covering_unwrap(const ModelManifold& m, int k);

/// Conformal representative g -> phi(t)^2 g re-parametrized to arclength.
/// phi must be smooth, positive, and identically 1 outside (support_lo,
/// support_hi), which must lie strictly inside one segment; the deformed
/// span becomes a spline warp, the rest is shifted rigidly.
ModelManifold conformal_rescale(const ModelManifold& m,
                                const std::function<double(double)>& phi,
                                double support_lo, double support_hi,
                                int spline_knots = 129);

}  // namespace yamabe
