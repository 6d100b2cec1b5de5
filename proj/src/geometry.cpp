#include "yamabe/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace yamabe {

namespace {

constexpr double kJunctionTol = 1e-9;
constexpr double kPoleTol = 1e-12;

// 8-point Gauss-Legendre rule on [-1, 1].
constexpr double kGL8x[8] = {
    -0.9602898564975362316836, -0.7966664774136267395916,
    -0.5255324099163289858177, -0.1834346424956498049395,
    0.1834346424956498049395,  0.5255324099163289858177,
    0.7966664774136267395916,  0.9602898564975362316836};
constexpr double kGL8w[8] = {
    0.1012285362903762591525, 0.2223810344533744705444,
    0.3137066458778872873380, 0.3626837833783619829652,
    0.3626837833783619829652, 0.3137066458778872873380,
    0.2223810344533744705444, 0.1012285362903762591525};

template <typename F>
double gauss8(const F& f, double a, double b) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0;
  for (int i = 0; i < 8; ++i) s += kGL8w[i] * f(mid + half * kGL8x[i]);
  return s * half;
}

// Antiderivative of sin^m via the standard reduction formula.
double sin_power_antideriv(int m, double theta) {
  if (m == 0) return theta;
  if (m == 1) return -std::cos(theta);
  const double s = std::sin(theta), c = std::cos(theta);
  return -c * std::pow(s, m - 1) / m +
         double(m - 1) / m * sin_power_antideriv(m - 2, theta);
}

}  // namespace

double unit_sphere_area(int m) {
  if (m < 1) throw std::invalid_argument("unit_sphere_area: m must be >= 1");
  return 2.0 * std::pow(M_PI, 0.5 * (m + 1)) / std::tgamma(0.5 * (m + 1));
}

double exponent_p(int n) { return 2.0 * n / (n - 2.0); }
double exponent_q(int n) { return 2.0 * (n - 1.0) / (n - 2.0); }
double gradient_coefficient(int n) { return 4.0 * (n - 1.0) / (n - 2.0); }

// ---------------------------------------------------------------------------
// CubicSpline

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y,
                         double slope_begin, double slope_end)
    : x_(std::move(x)), y_(std::move(y)), sb_(slope_begin), se_(slope_end) {
  const int n = static_cast<int>(x_.size());
  if (n < 2 || y_.size() != x_.size())
    throw std::invalid_argument("CubicSpline: need >= 2 knots, sizes equal");
  for (int i = 0; i + 1 < n; ++i)
    if (!(x_[i] < x_[i + 1]))
      throw std::invalid_argument("CubicSpline: knots must increase");

  // Clamped spline: solve the tridiagonal system for second derivatives.
  std::vector<double> a(n), b(n), c(n), d(n);
  const double h0 = x_[1] - x_[0];
  b[0] = 2 * h0;
  c[0] = h0;
  d[0] = 6 * ((y_[1] - y_[0]) / h0 - sb_);
  for (int i = 1; i < n - 1; ++i) {
    const double hl = x_[i] - x_[i - 1], hr = x_[i + 1] - x_[i];
    a[i] = hl;
    b[i] = 2 * (hl + hr);
    c[i] = hr;
    d[i] = 6 * ((y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl);
  }
  const double hn = x_[n - 1] - x_[n - 2];
  a[n - 1] = hn;
  b[n - 1] = 2 * hn;
  d[n - 1] = 6 * (se_ - (y_[n - 1] - y_[n - 2]) / hn);

  // Thomas algorithm.
  for (int i = 1; i < n; ++i) {
    const double w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    d[i] -= w * d[i - 1];
  }
  m_.assign(n, 0.0);
  m_[n - 1] = d[n - 1] / b[n - 1];
  for (int i = n - 2; i >= 0; --i) m_[i] = (d[i] - c[i] * m_[i + 1]) / b[i];
}

int CubicSpline::find_interval(double t) const {
  const int n = static_cast<int>(x_.size());
  if (t <= x_.front()) return 0;
  if (t >= x_.back()) return n - 2;
  int i = int(std::upper_bound(x_.begin(), x_.end(), t) - x_.begin()) - 1;
  return std::clamp(i, 0, n - 2);
}

double CubicSpline::value(double t) const {
  const int i = find_interval(t);
  const double h = x_[i + 1] - x_[i], u = x_[i + 1] - t, v = t - x_[i];
  return (m_[i] * u * u * u + m_[i + 1] * v * v * v) / (6 * h) +
         (y_[i] / h - m_[i] * h / 6) * u + (y_[i + 1] / h - m_[i + 1] * h / 6) * v;
}

double CubicSpline::deriv(double t) const {
  const int i = find_interval(t);
  const double h = x_[i + 1] - x_[i], u = x_[i + 1] - t, v = t - x_[i];
  return (-m_[i] * u * u + m_[i + 1] * v * v) / (2 * h) +
         (y_[i + 1] - y_[i]) / h - (m_[i + 1] - m_[i]) * h / 6;
}

double CubicSpline::deriv2(double t) const {
  const int i = find_interval(t);
  const double h = x_[i + 1] - x_[i];
  return (m_[i] * (x_[i + 1] - t) + m_[i + 1] * (t - x_[i])) / h;
}

// ---------------------------------------------------------------------------
// Warp

Warp Warp::constant(double r) {
  if (!(r > 0)) throw std::invalid_argument("constant warp: radius must be > 0");
  Warp w;
  w.kind = WarpKind::Constant;
  w.c0 = r;
  return w;
}

Warp Warp::sine(double radius, double center, double orient) {
  if (!(radius > 0)) throw std::invalid_argument("sine warp: radius must be > 0");
  if (orient != 1.0 && orient != -1.0)
    throw std::invalid_argument("sine warp: orient must be +-1");
  Warp w;
  w.kind = WarpKind::Sine;
  w.c0 = radius;
  w.c1 = center;
  w.c2 = orient;
  return w;
}

Warp Warp::linear(double intercept, double slope) {
  Warp w;
  w.kind = WarpKind::Linear;
  w.c0 = intercept;
  w.c1 = slope;
  return w;
}

Warp Warp::from_spline(std::shared_ptr<const CubicSpline> s) {
  Warp w;
  w.kind = WarpKind::Spline;
  w.spline = std::move(s);
  return w;
}

double Warp::value(double t) const {
  switch (kind) {
    case WarpKind::Constant: return c0;
    case WarpKind::Sine: return c0 * std::sin(c2 * (t - c1) / c0);
    case WarpKind::Linear: return c0 + c1 * t;
    case WarpKind::Spline: return spline->value(t);
  }
  return 0;
}

double Warp::deriv(double t) const {
  switch (kind) {
    case WarpKind::Constant: return 0;
    case WarpKind::Sine: return c2 * std::cos(c2 * (t - c1) / c0);
    case WarpKind::Linear: return c1;
    case WarpKind::Spline: return spline->deriv(t);
  }
  return 0;
}

double Warp::deriv2(double t) const {
  switch (kind) {
    case WarpKind::Constant: return 0;
    case WarpKind::Sine: return -std::sin(c2 * (t - c1) / c0) / c0;
    case WarpKind::Linear: return 0;
    case WarpKind::Spline: return spline->deriv2(t);
  }
  return 0;
}

double Warp::power_integral(int m, double a, double b) const {
  if (m < 0) throw std::invalid_argument("power_integral: negative power");
  switch (kind) {
    case WarpKind::Constant:
      return std::pow(c0, m) * (b - a);
    case WarpKind::Sine: {
      const double ta = c2 * (a - c1) / c0, tb = c2 * (b - c1) / c0;
      return std::pow(c0, m + 1) *
             (sin_power_antideriv(m, tb) - sin_power_antideriv(m, ta)) * c2;
    }
    case WarpKind::Linear: {
      if (std::abs(c1) < 1e-300) return std::pow(c0, m) * (b - a);
      const double fa = c0 + c1 * a, fb = c0 + c1 * b;
      return (std::pow(fb, m + 1) - std::pow(fa, m + 1)) / (c1 * (m + 1));
    }
    case WarpKind::Spline: {
      // Subdivide at interior knots so each piece is a polynomial.
      const auto& xs = spline->knots();
      double total = 0, lo = a;
      for (double x : xs) {
        if (x > lo && x < b) {
          total += gauss8([&](double t) { return std::pow(spline->value(t), m); }, lo, x);
          lo = x;
        }
      }
      total += gauss8([&](double t) { return std::pow(spline->value(t), m); }, lo, b);
      return total;
    }
  }
  return 0;
}

Warp Warp::mirrored(double c) const {
  switch (kind) {
    case WarpKind::Constant: return *this;
    case WarpKind::Sine: return sine(c0, c - c1, -c2);
    case WarpKind::Linear: return linear(c0 + c1 * c, -c1);
    case WarpKind::Spline: {
      const auto& xs = spline->knots();
      const auto& ys = spline->values();
      std::vector<double> nx(xs.size()), ny(ys.size());
      for (size_t i = 0; i < xs.size(); ++i) {
        nx[i] = c - xs[xs.size() - 1 - i];
        ny[i] = ys[ys.size() - 1 - i];
      }
      auto s = std::make_shared<CubicSpline>(std::move(nx), std::move(ny),
                                             -spline->slope_end(), -spline->slope_begin());
      return from_spline(std::move(s));
    }
  }
  return *this;
}

Warp Warp::shifted(double dt) const {
  switch (kind) {
    case WarpKind::Constant: return *this;
    case WarpKind::Sine: return sine(c0, c1 + dt, c2);
    case WarpKind::Linear: return linear(c0 - c1 * dt, c1);
    case WarpKind::Spline: {
      std::vector<double> nx = spline->knots();
      for (double& x : nx) x += dt;
      auto s = std::make_shared<CubicSpline>(std::move(nx), spline->values(),
                                             spline->slope_begin(), spline->slope_end());
      return from_spline(std::move(s));
    }
  }
  return *this;
}

// ---------------------------------------------------------------------------
// WarpedSegment

int fiber_order(FiberKind k) { return k == FiberKind::Round ? 1 : 2; }

double WarpedSegment::scalar_curvature(double t) const {
  const double f = warp.value(t);
  if (std::abs(f) < kPoleTol) {
    // Pole: use the analytic limit where one exists.
    if (warp.kind == WarpKind::Sine) return dim * (dim - 1.0) / (warp.c0 * warp.c0);
    if (warp.kind == WarpKind::Linear && std::abs(std::abs(warp.c1) - 1.0) < 1e-12)
      return 0.0;
    throw std::domain_error("scalar_curvature: warp vanishes without analytic limit");
  }
  const double fp = warp.deriv(t), fpp = warp.deriv2(t);
  return (dim - 1.0) * (-2.0 * fpp / f + (dim - 2.0) * (1.0 - fp * fp) / (f * f));
}

double WarpedSegment::fiber_area(double t) const {
  return unit_sphere_area(dim - 1) * std::pow(warp.value(t), dim - 1) /
         fiber_order(fiber);
}

double WarpedSegment::lateral_element(double t) const {
  if (fiber != FiberKind::HalfSphere) return 0.0;
  return unit_sphere_area(dim - 2) * std::pow(warp.value(t), dim - 2);
}

double WarpedSegment::measure_integral(double a, double b) const {
  return unit_sphere_area(dim - 1) * warp.power_integral(dim - 1, a, b) /
         fiber_order(fiber);
}

double WarpedSegment::curvature_measure_integral(double a, double b) const {
  const double omega = unit_sphere_area(dim - 1) / fiber_order(fiber);
  switch (warp.kind) {
    case WarpKind::Sine:
      return dim * (dim - 1.0) / (warp.c0 * warp.c0) * measure_integral(a, b);
    case WarpKind::Constant:
      return (dim - 1.0) * (dim - 2.0) / (warp.c0 * warp.c0) * measure_integral(a, b);
    case WarpKind::Linear:
      // R f^{n-1} = (n-1)(n-2)(1-c1^2) f^{n-3}
      return (dim - 1.0) * (dim - 2.0) * (1.0 - warp.c1 * warp.c1) * omega *
             warp.power_integral(dim - 3, a, b);
    case WarpKind::Spline:
      return gauss8([&](double t) { return scalar_curvature(t) * fiber_area(t); }, a, b);
  }
  return 0;
}

double WarpedSegment::lateral_measure_integral(double a, double b) const {
  if (fiber != FiberKind::HalfSphere) return 0.0;
  return unit_sphere_area(dim - 2) * warp.power_integral(dim - 2, a, b);
}

// ---------------------------------------------------------------------------
// ModelManifold

void ModelManifold::validate() const {
  if (dim < 3) throw std::invalid_argument("model '" + name + "': dimension must be >= 3");
  if (segments.empty()) throw std::invalid_argument("model '" + name + "': no segments");
  for (size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    if (s.dim != dim || s.fiber != fiber)
      throw std::invalid_argument("model '" + name +
                                  "': segments must share dimension and fiber kind");
    if (!(s.t_begin < s.t_end))
      throw std::invalid_argument("model '" + name + "': empty segment domain");
    // Positivity probe on the open interior.
    for (int j = 1; j < 16; ++j) {
      const double t = s.t_begin + (s.t_end - s.t_begin) * j / 16.0;
      if (!(s.warp.value(t) > 0))
        throw std::invalid_argument("model '" + name + "': warp not positive inside segment " +
                                    std::to_string(i));
    }
    if (i + 1 < segments.size()) {
      const auto& nxt = segments[i + 1];
      if (std::abs(s.t_end - nxt.t_begin) > kJunctionTol)
        throw std::invalid_argument("model '" + name + "': segment domains not contiguous");
      const double ra = s.warp.value(s.t_end), rb = nxt.warp.value(nxt.t_begin);
      if (std::abs(ra - rb) > kJunctionTol * std::max(1.0, std::abs(ra)))
        throw std::invalid_argument("model '" + name + "': radius mismatch at junction t=" +
                                    std::to_string(s.t_end) + " (" + std::to_string(ra) +
                                    " vs " + std::to_string(rb) + ")");
    }
  }
  if (covering_multiplicity < 1)
    throw std::invalid_argument("model '" + name + "': covering multiplicity must be >= 1");

  auto check_end = [&](const EndCondition& e, Side side) {
    const auto& seg = side == Side::Left ? segments.front() : segments.back();
    const double t = side == Side::Left ? seg.t_begin : seg.t_end;
    if (e.kind == EndKind::SmoothCap) {
      if (std::abs(seg.warp.value(t)) > kJunctionTol)
        throw std::invalid_argument("model '" + name + "': smooth cap requires warp -> 0");
      if (std::abs(std::abs(seg.warp.deriv(t)) - 1.0) > 1e-9)
        throw std::invalid_argument("model '" + name +
                                    "': smooth cap requires |warp'| -> 1 at the pole");
    }
  };
  check_end(end_left, Side::Left);
  check_end(end_right, Side::Right);

  const bool lp = end_left.kind == EndKind::PeriodicJoin;
  const bool rp = end_right.kind == EndKind::PeriodicJoin;
  if (lp != rp)
    throw std::invalid_argument("model '" + name + "': periodic join needs both ends");
  if (lp) {
    const auto& a = segments.front();
    const auto& b = segments.back();
    if (std::abs(a.warp.value(a.t_begin) - b.warp.value(b.t_end)) > kJunctionTol ||
        std::abs(a.warp.deriv(a.t_begin) - b.warp.deriv(b.t_end)) > kJunctionTol)
      throw std::invalid_argument("model '" + name +
                                  "': periodic ends must match warp value and derivative");
  }
}

bool ModelManifold::has_boundary_faces() const {
  return end_left.kind == EndKind::Boundary || end_right.kind == EndKind::Boundary;
}

bool ModelManifold::has_boundary_mass() const {
  return has_boundary_faces() || fiber == FiberKind::HalfSphere;
}

double ModelManifold::volume() const {
  double v = 0;
  for (const auto& s : segments) v += s.measure_integral(s.t_begin, s.t_end);
  return v;
}

double ModelManifold::boundary_area() const {
  double a = 0;
  if (end_left.kind == EndKind::Boundary)
    a += segments.front().fiber_area(segments.front().t_begin);
  if (end_right.kind == EndKind::Boundary)
    a += segments.back().fiber_area(segments.back().t_end);
  for (const auto& s : segments) a += s.lateral_measure_integral(s.t_begin, s.t_end);
  return a;
}

const WarpedSegment& ModelManifold::segment_at(double t) const {
  for (const auto& s : segments)
    if (t >= s.t_begin - kJunctionTol && t <= s.t_end + kJunctionTol) return s;
  throw std::out_of_range("segment_at: t outside model domain");
}

double boundary_mean_curvature(const ModelManifold& m, Side side) {
  const EndCondition& e = side == Side::Left ? m.end_left : m.end_right;
  if (e.kind != EndKind::Boundary)
    throw std::invalid_argument("boundary_mean_curvature: not a Boundary end");
  const auto& seg = side == Side::Left ? m.segments.front() : m.segments.back();
  const double t = side == Side::Left ? seg.t_begin : seg.t_end;
  const double sign = side == Side::Right ? 1.0 : -1.0;
  return sign * seg.warp.deriv(t) / seg.warp.value(t);
}

// ---------------------------------------------------------------------------
// Builders

namespace models {

namespace {
ModelManifold one_segment(std::string name, int n, FiberKind fiber, Warp w, double t0,
                          double t1, EndKind left, EndKind right) {
  ModelManifold m;
  m.name = std::move(name);
  m.dim = n;
  m.fiber = fiber;
  m.segments.push_back({n, fiber, w, t0, t1});
  m.end_left = {left};
  m.end_right = {right};
  m.validate();
  return m;
}
}  // namespace

ModelManifold round_sphere(int n) {
  return one_segment("round_sphere(" + std::to_string(n) + ")", n, FiberKind::Round,
                     Warp::sine(1, 0, 1), 0, M_PI, EndKind::SmoothCap, EndKind::SmoothCap);
}

ModelManifold hemisphere(int n) {
  return one_segment("hemisphere(" + std::to_string(n) + ")", n, FiberKind::Round,
                     Warp::sine(1, 0, 1), 0, M_PI / 2, EndKind::SmoothCap,
                     EndKind::Boundary);
}

ModelManifold hemisphere_axial(int n) {
  return one_segment("hemisphere_axial(" + std::to_string(n) + ")", n,
                     FiberKind::HalfSphere, Warp::sine(1, 0, 1), 0, M_PI,
                     EndKind::SmoothCap, EndKind::SmoothCap);
}

ModelManifold cylinder(int n, double l) {
  if (!(l > 0)) throw std::invalid_argument("cylinder: length must be > 0");
  return one_segment("cylinder(" + std::to_string(n) + ")", n, FiberKind::Round,
                     Warp::constant(1), 0, l, EndKind::Boundary, EndKind::Boundary);
}

ModelManifold hemi_cylinder(int n, double l) {
  if (!(l > 0)) throw std::invalid_argument("hemi_cylinder: length must be > 0");
  return one_segment("hemi_cylinder(" + std::to_string(n) + ")", n, FiberKind::HalfSphere,
                     Warp::constant(1), 0, l, EndKind::Boundary, EndKind::Boundary);
}

ModelManifold schoen_product(int n, double circumference) {
  if (!(circumference > 0))
    throw std::invalid_argument("schoen_product: circumference must be > 0");
  return one_segment("schoen_product(" + std::to_string(n) + ")", n, FiberKind::Round,
                     Warp::constant(1), 0, circumference, EndKind::PeriodicJoin,
                     EndKind::PeriodicJoin);
}

ModelManifold quotient_product(int n, double circumference) {
  if (!(circumference > 0))
    throw std::invalid_argument("quotient_product: circumference must be > 0");
  auto m = one_segment("quotient_product(" + std::to_string(n) + ")", n,
                       FiberKind::Projective, Warp::constant(1), 0, circumference,
                       EndKind::PeriodicJoin, EndKind::PeriodicJoin);
  m.covering_multiplicity = 2;
  return m;
}

ModelManifold sphere_minus_cap(int n, double t_cut) {
  if (!(t_cut > 0 && t_cut < M_PI))
    throw std::invalid_argument("sphere_minus_cap: need 0 < t_cut < pi");
  return one_segment("sphere_minus_cap(" + std::to_string(n) + ")", n, FiberKind::Round,
                     Warp::sine(1, 0, 1), 0, t_cut, EndKind::SmoothCap, EndKind::Boundary);
}

ModelManifold axial_cap(int n, double t_cut) {
  if (!(t_cut > 0 && t_cut < M_PI))
    throw std::invalid_argument("axial_cap: need 0 < t_cut < pi");
  return one_segment("axial_cap(" + std::to_string(n) + ")", n, FiberKind::HalfSphere,
                     Warp::sine(1, 0, 1), 0, t_cut, EndKind::SmoothCap, EndKind::Boundary);
}

ModelManifold rp_sphere(int n) {
  return one_segment("rp_sphere(" + std::to_string(n) + ")", n, FiberKind::Round,
                     Warp::sine(1, 0, 1), 0, M_PI / 2, EndKind::SmoothCap,
                     EndKind::ReflectionQuotient);
}

ModelManifold glued_neck(const ModelManifold& core_a, const ModelManifold& core_b,
                         double l) {
  if (!(l > 0)) throw std::invalid_argument("glued_neck: neck length must be > 0");
  if (core_a.end_right.kind != EndKind::Boundary ||
      core_b.end_right.kind != EndKind::Boundary)
    throw std::invalid_argument("glued_neck: cores must expose their Boundary end on the right");
  if (core_a.dim != core_b.dim || core_a.fiber != core_b.fiber)
    throw std::invalid_argument("glued_neck: cores must share dimension and fiber kind");

  const auto& sa = core_a.segments.back();
  const auto& sb = core_b.segments.back();
  const double ra = sa.warp.value(sa.t_end);
  const double rb = sb.warp.value(sb.t_end);
  if (std::abs(ra - rb) > 1e-9 * std::max(1.0, ra))
    throw std::invalid_argument("glued_neck: fiber radius mismatch (" + std::to_string(ra) +
                                " vs " + std::to_string(rb) + ")");

  ModelManifold m;
  m.name = "glued_neck(" + core_a.name + "," + core_b.name + ",l=" + std::to_string(l) + ")";
  m.dim = core_a.dim;
  m.fiber = core_a.fiber;
  m.end_left = core_a.end_left;
  m.end_right = core_b.end_left;

  const double ta = core_a.t_end();
  for (const auto& s : core_a.segments) m.segments.push_back(s);
  m.segments.push_back({m.dim, m.fiber, Warp::constant(ra), ta, ta + l});
  // Mirror core_b about the far neck junction.
  const double c = (ta + l) + core_b.t_end();
  for (auto it = core_b.segments.rbegin(); it != core_b.segments.rend(); ++it) {
    WarpedSegment s = *it;
    s.warp = s.warp.mirrored(c);
    const double nb = c - s.t_end, ne = c - s.t_begin;
    s.t_begin = nb;
    s.t_end = ne;
    m.segments.push_back(s);
  }
  m.validate();
  return m;
}

}  // namespace models

ModelManifold covering_unwrap(const ModelManifold& m, int k) {
  if (k < 1) throw std::invalid_argument("covering_unwrap: k must be >= 1");
  if (k == 1) return m;

  if (m.fiber == FiberKind::Projective && k == 2) {
    ModelManifold c = m;
    c.name = m.name + " fiber-double-cover";
    c.fiber = FiberKind::Round;
    c.covering_multiplicity = 1;
    for (auto& s : c.segments) s.fiber = FiberKind::Round;
    c.validate();
    return c;
  }

  if (m.periodic()) {
    ModelManifold c = m;
    c.name = m.name + " x" + std::to_string(k) + "-cover";
    c.covering_multiplicity = 1;
    c.segments.clear();
    const double L = m.total_length();
    for (int j = 0; j < k; ++j) {
      for (const auto& s : m.segments) {
        WarpedSegment ns = s;
        ns.warp = s.warp.shifted(j * L);
        ns.t_begin = s.t_begin + j * L;
        ns.t_end = s.t_end + j * L;
        c.segments.push_back(ns);
      }
    }
    c.validate();
    return c;
  }

  if (m.end_right.kind == EndKind::ReflectionQuotient && k == 2) {
    ModelManifold c = m;
    c.name = m.name + " reflection-double-cover";
    c.covering_multiplicity = 1;
    c.end_right = m.end_left;
    const double cc = 2.0 * m.t_end();
    for (auto it = m.segments.rbegin(); it != m.segments.rend(); ++it) {
      WarpedSegment s = *it;
      s.warp = s.warp.mirrored(cc);
      const double nb = cc - s.t_end, ne = cc - s.t_begin;
      s.t_begin = nb;
      s.t_end = ne;
      c.segments.push_back(s);
    }
    c.validate();
    return c;
  }

  throw std::invalid_argument("covering_unwrap: unwrap incompatible with model topology");
}

ModelManifold conformal_rescale(const ModelManifold& m,
                                const std::function<double(double)>& phi,
                                double support_lo, double support_hi, int spline_knots) {
  // Locate the segment that contains the deformation support.
  int seg_idx = -1;
  for (size_t i = 0; i < m.segments.size(); ++i) {
    const auto& s = m.segments[i];
    if (support_lo > s.t_begin && support_hi < s.t_end) {
      seg_idx = static_cast<int>(i);
      break;
    }
  }
  if (seg_idx < 0)
    throw std::invalid_argument(
        "conformal_rescale: support must lie strictly inside one segment");
  if (spline_knots < 8) spline_knots = 8;

  // New arclength tau(t) = t_begin + int_{t_begin}^t phi; phi == 1 off support.
  auto tau_of = [&](double t) {
    if (t <= support_lo) return t;
    double acc = support_lo;
    const int pieces = 64;
    const double hi = std::min(t, support_hi);
    const double h = (hi - support_lo) / pieces;
    for (int i = 0; i < pieces; ++i)
      acc += gauss8(phi, support_lo + i * h, support_lo + (i + 1) * h);
    if (t > support_hi) acc += t - support_hi;
    return acc;
  };
  const double shift = tau_of(m.t_end()) - m.t_end();  // total length change

  ModelManifold out = m;
  out.name = m.name + " (conformal representative)";
  out.segments.clear();
  for (int i = 0; i < static_cast<int>(m.segments.size()); ++i) {
    const auto& s = m.segments[i];
    if (i < seg_idx) {
      out.segments.push_back(s);
      continue;
    }
    if (i > seg_idx) {
      WarpedSegment ns = s;
      ns.warp = s.warp.shifted(shift);
      ns.t_begin += shift;
      ns.t_end += shift;
      out.segments.push_back(ns);
      continue;
    }
    // Split: [t_begin, lo] unchanged, [lo, hi] spline, [hi, t_end] shifted.
    if (support_lo > s.t_begin) {
      WarpedSegment pre = s;
      pre.t_end = support_lo;
      out.segments.push_back(pre);
    }
    std::vector<double> xs(spline_knots), ys(spline_knots);
    for (int j = 0; j < spline_knots; ++j) {
      const double t = support_lo + (support_hi - support_lo) * j / (spline_knots - 1.0);
      xs[j] = tau_of(t);
      ys[j] = phi(t) * s.warp.value(t);
    }
    // Clamped slopes: d(phi f)/dtau = (phi f)'/phi; phi == 1 with phi' == 0
    // at the support edges.
    const double s0 = s.warp.deriv(support_lo), s1 = s.warp.deriv(support_hi);
    WarpedSegment mid = s;
    mid.warp = Warp::from_spline(std::make_shared<CubicSpline>(xs, ys, s0, s1));
    mid.t_begin = xs.front();
    mid.t_end = xs.back();
    out.segments.push_back(mid);
    if (support_hi < s.t_end) {
      WarpedSegment post = s;
      post.warp = s.warp.shifted(shift);
      post.t_begin = xs.back();
      post.t_end = s.t_end + shift;
      out.segments.push_back(post);
    }
  }
  out.validate();
  return out;
}

}  // namespace yamabe
