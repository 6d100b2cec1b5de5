#include "yamabe/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace yamabe {

namespace {

bool open_left(const ModelManifold& m) {
  return m.end_left.kind == EndKind::SmoothCap;
}
bool open_right(const ModelManifold& m) {
  return m.end_right.kind == EndKind::SmoothCap || m.periodic();
}

std::vector<std::vector<double>> make_layout(const ModelManifold& m,
                                             const std::vector<int>& counts) {
  const int nseg = static_cast<int>(m.segments.size());
  if (static_cast<int>(counts.size()) != nseg)
    throw std::invalid_argument("mesh: one node count per segment required");
  std::vector<std::vector<double>> nodes(nseg);
  for (int i = 0; i < nseg; ++i) {
    const auto& s = m.segments[i];
    const int M = counts[i];
    if (M < 2) throw std::invalid_argument("mesh: need at least 2 nodes per segment");
    const bool lo = (i == 0) && open_left(m);
    const bool ro = (i == nseg - 1) && open_right(m);
    const bool rp = (i == nseg - 1) && m.periodic();
    const double a = s.t_begin, b = s.t_end;
    std::vector<double>& v = nodes[i];
    v.resize(M);
    if (rp) {
      // Circle: node at a, none at b; uniform spacing b-a over M cells.
      const double d = (b - a) / M;
      for (int j = 0; j < M; ++j) v[j] = a + j * d;
    } else if (lo && ro) {
      const double d = (b - a) / M;
      for (int j = 0; j < M; ++j) v[j] = a + (j + 0.5) * d;
    } else if (lo) {
      const double d = (b - a) / (M - 0.5);
      for (int j = 0; j < M; ++j) v[j] = a + (j + 0.5) * d;
      v[M - 1] = b;
    } else if (ro) {
      const double d = (b - a) / (M - 0.5);
      for (int j = 0; j < M; ++j) v[j] = a + j * d;
      v[M - 1] = b - 0.5 * d;
    } else {
      const double d = (b - a) / (M - 1);
      for (int j = 0; j < M; ++j) v[j] = a + j * d;
      v[0] = a;
      v[M - 1] = b;
    }
  }
  return nodes;
}

}  // namespace

Mesh::Mesh(ModelManifold model, int nodes_per_segment) : model_(std::move(model)) {
  model_.validate();
  seg_nodes_ = make_layout(
      model_, std::vector<int>(model_.segments.size(), nodes_per_segment));
  build();
}

Mesh::Mesh(ModelManifold model, const std::vector<int>& nodes_per_segment)
    : model_(std::move(model)) {
  model_.validate();
  seg_nodes_ = make_layout(model_, nodes_per_segment);
  build();
}

Mesh::Mesh(ModelManifold model, std::vector<std::vector<double>> segment_nodes)
    : model_(std::move(model)), seg_nodes_(std::move(segment_nodes)) {
  model_.validate();
  build();
}

void Mesh::build() {
  const int nseg = static_cast<int>(model_.segments.size());
  if (static_cast<int>(seg_nodes_.size()) != nseg)
    throw std::invalid_argument("mesh: node lists do not match segments");

  t_.clear();
  node_seg_.clear();
  cells_.clear();
  faces_.clear();
  seg_ranges_.assign(nseg, {0, 0});

  // Global dof list with shared junction nodes.
  std::vector<std::vector<int>> dof(nseg);
  for (int i = 0; i < nseg; ++i) {
    const auto& s = model_.segments[i];
    const auto& v = seg_nodes_[i];
    if (v.size() < 2) throw std::invalid_argument("mesh: need >= 2 nodes per segment");
    for (size_t j = 0; j + 1 < v.size(); ++j)
      if (!(v[j] < v[j + 1]))
        throw std::invalid_argument("mesh: nodes must strictly increase");
    if (v.front() < s.t_begin - 1e-12 || v.back() > s.t_end + 1e-12)
      throw std::invalid_argument("mesh: nodes outside segment domain");
    if (i > 0) {
      if (std::abs(v[0] - s.t_begin) > 1e-12)
        throw std::invalid_argument("mesh: junction node missing on the right side");
      if (std::abs(seg_nodes_[i - 1].back() - model_.segments[i - 1].t_end) > 1e-12)
        throw std::invalid_argument("mesh: junction node missing on the left side");
    }
    dof[i].resize(v.size());
    for (size_t j = 0; j < v.size(); ++j) {
      if (i > 0 && j == 0) {
        dof[i][0] = dof[i - 1].back();  // shared junction dof
        continue;
      }
      dof[i][j] = static_cast<int>(t_.size());
      t_.push_back(v[j]);
      node_seg_.push_back(i);
    }
    seg_ranges_[i] = {dof[i].front(), dof[i].back()};
  }

  const int N = dofs();
  sl_vol_.assign(N, 0.0);
  sl_curv_.assign(N, 0.0);
  sl_lat_.assign(N, 0.0);

  // 4-point Gauss-Legendre on [-1, 1].
  static const double gx[4] = {-0.8611363115940525752239, -0.3399810435848562648027,
                               0.3399810435848562648027, 0.8611363115940525752239};
  static const double gw[4] = {0.3478548451374538573731, 0.6521451548625461426269,
                               0.6521451548625461426269, 0.3478548451374538573731};

  lateral_total_ = 0;
  auto make_cell = [&](const WarpedSegment& s, int da, int db, double x, double y) {
    MeshCell c;
    c.a = da;
    c.b = db;
    c.dt = y - x;
    c.w_measure = s.measure_integral(x, y);
    lateral_total_ += s.lateral_measure_integral(x, y);
    const double mid = 0.5 * (x + y), half = 0.5 * (y - x);
    for (int j = 0; j < 4; ++j) {
      const double t = mid + half * gx[j];
      c.xi[j] = (t - x) / c.dt;
      c.wA[j] = gw[j] * half * s.fiber_area(t);
      c.wL[j] = gw[j] * half * s.lateral_element(t);
      const double ra = gw[j] * half * s.scalar_curvature(t) * s.fiber_area(t);
      const double pa = 1.0 - c.xi[j], pb = c.xi[j];
      c.c_aa += ra * pa * pa;
      c.c_ab += ra * pa * pb;
      c.c_bb += ra * pb * pb;
    }
    cells_.push_back(c);
  };

  auto add_sliver = [&](const WarpedSegment& s, int d, double x, double y) {
    sl_vol_[d] += s.measure_integral(x, y);
    sl_curv_[d] += s.curvature_measure_integral(x, y);
    sl_lat_[d] += s.lateral_measure_integral(x, y);
  };

  for (int i = 0; i < nseg; ++i) {
    const auto& s = model_.segments[i];
    const auto& v = seg_nodes_[i];
    for (size_t j = 0; j + 1 < v.size(); ++j)
      make_cell(s, dof[i][j], dof[i][j + 1], v[j], v[j + 1]);
  }

  // Pole slivers at smooth caps: the interval between the pole and the
  // first node carries measure but no gradient (fields extend constantly).
  if (open_left(model_) && !model_.periodic()) {
    const auto& s = model_.segments.front();
    if (seg_nodes_.front().front() > s.t_begin + 1e-15)
      add_sliver(s, dof.front().front(), s.t_begin, seg_nodes_.front().front());
  }
  if (model_.end_right.kind == EndKind::SmoothCap) {
    const auto& s = model_.segments.back();
    if (seg_nodes_.back().back() < s.t_end - 1e-15)
      add_sliver(s, dof.back().back(), seg_nodes_.back().back(), s.t_end);
  }

  if (model_.periodic()) {
    // Wrap cell closing the circle: [last node, t_end] glued to dof 0.
    const auto& s = model_.segments.back();
    const double x = seg_nodes_.back().back(), y = s.t_end;
    if (y - x > 1e-15) make_cell(s, dof.back().back(), dof.front().front(), x, y);
  }

  if (model_.end_left.kind == EndKind::Boundary) {
    const auto& s = model_.segments.front();
    faces_.push_back({dof.front().front(), s.fiber_area(s.t_begin),
                      boundary_mean_curvature(model_, Side::Left)});
  }
  if (model_.end_right.kind == EndKind::Boundary) {
    const auto& s = model_.segments.back();
    faces_.push_back({dof.back().back(), s.fiber_area(s.t_end),
                      boundary_mean_curvature(model_, Side::Right)});
  }
}

std::pair<int, int> Mesh::segment_dof_range(int segment) const {
  return seg_ranges_.at(segment);
}

Mesh Mesh::refined() const {
  std::vector<std::vector<double>> nodes(seg_nodes_.size());
  for (size_t i = 0; i < seg_nodes_.size(); ++i) {
    const auto& v = seg_nodes_[i];
    auto& out = nodes[i];
    // Halve any leading sliver first so the node list stays sorted.
    if (i == 0 && open_left(model_) && !model_.periodic()) {
      const double a = model_.segments.front().t_begin;
      if (v.front() > a + 1e-15) out.push_back(0.5 * (a + v.front()));
    }
    for (size_t j = 0; j < v.size(); ++j) {
      out.push_back(v[j]);
      if (j + 1 < v.size()) out.push_back(0.5 * (v[j] + v[j + 1]));
    }
    if (i + 1 == seg_nodes_.size()) {
      const double b = model_.segments.back().t_end;
      if (model_.end_right.kind == EndKind::SmoothCap && v.back() < b - 1e-15)
        out.push_back(0.5 * (v.back() + b));
      if (model_.periodic() && v.back() < b - 1e-15)
        out.push_back(0.5 * (v.back() + b));
    }
  }
  return Mesh(model_, std::move(nodes));
}

double Mesh::total_measure() const {
  double s = 0;
  for (const auto& c : cells_) s += c.w_measure;
  for (double w : sl_vol_) s += w;
  return s;
}

double Mesh::total_boundary_measure() const {
  double s = lateral_total_;
  for (const auto& f : faces_) s += f.area;
  for (double w : sl_lat_) s += w;
  return s;
}

Field interpolate(const Mesh& from, const Field& u, const Mesh& to) {
  if (u.size() != from.dofs())
    throw std::invalid_argument("interpolate: field/mesh size mismatch");
  const auto& ts = from.node_t();
  Field out{std::vector<double>(to.dofs(), 0.0)};
  for (int i = 0; i < to.dofs(); ++i) {
    const double t = to.node_t()[i];
    if (t <= ts.front()) {
      // Periodic layouts place the first node at the seam, so this is
      // the pole-sliver region (constant extension) or the seam itself.
      out[i] = u[0];
      continue;
    }
    if (t >= ts.back()) {
      if (from.model().periodic()) {
        const double cell = (from.model().t_end() - ts.back());
        const double w = cell > 0 ? (t - ts.back()) / cell : 0.0;
        out[i] = (1 - w) * u[u.size() - 1] + w * u[0];
      } else {
        out[i] = u[u.size() - 1];
      }
      continue;
    }
    const int k =
        int(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin()) - 1;
    const double w = (t - ts[k]) / (ts[k + 1] - ts[k]);
    out[i] = (1 - w) * u[k] + w * u[k + 1];
  }
  return out;
}

}  // namespace yamabe
