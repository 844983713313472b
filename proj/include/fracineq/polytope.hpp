// Convex polytopes in dimension 1-3 in vertex representation: hulls,
// Minkowski sums, volumes, support functions and point distances.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace fracineq {

using Point = Eigen::VectorXd;

namespace detail {

inline bool lex_less(const Point& a, const Point& b) {
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    if (a(k) < b(k)) return true;
    if (a(k) > b(k)) return false;
  }
  return false;
}

inline double cross2(const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return (a - o).x() * (b - o).y() - (a - o).y() * (b - o).x();
}

/// Indices of the counter-clockwise hull of 2D points, starting at the
/// lexicographically smallest point; collinear boundary points dropped.
inline std::vector<std::size_t> monotone_chain(const std::vector<Eigen::Vector2d>& pts, double eps) {
  std::vector<std::size_t> idx(pts.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return pts[a].x() < pts[b].x() || (pts[a].x() == pts[b].x() && pts[a].y() < pts[b].y());
  });
  if (idx.size() < 3) return idx;
  std::vector<std::size_t> hull(2 * idx.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    while (k >= 2 && cross2(pts[hull[k - 2]], pts[hull[k - 1]], pts[idx[i]]) <= eps) --k;
    hull[k++] = idx[i];
  }
  for (std::size_t i = idx.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross2(pts[hull[k - 2]], pts[hull[k - 1]], pts[idx[i]]) <= eps) --k;
    hull[k++] = idx[i];
  }
  hull.resize(k - 1);
  return hull;
}

struct Triangle {
  std::array<std::size_t, 3> v;
  Eigen::Vector3d normal;  // unit, outward
  double offset;           // normal . x <= offset inside
};

inline Triangle make_triangle(const std::vector<Eigen::Vector3d>& p, std::size_t a, std::size_t b, std::size_t c,
                              const Eigen::Vector3d& inside) {
  Eigen::Vector3d nrm = (p[b] - p[a]).cross(p[c] - p[a]);
  nrm.normalize();
  Triangle t{{a, b, c}, nrm, nrm.dot(p[a])};
  if (nrm.dot(inside) > t.offset) {
    std::swap(t.v[1], t.v[2]);
    t.normal = -nrm;
    t.offset = -t.offset;
  }
  return t;
}

/// Incremental 3D hull of points that span R^3. Returns outward triangles
/// over indices into `p`; `eps` is the visibility threshold on distances.
inline std::vector<Triangle> hull3(const std::vector<Eigen::Vector3d>& p, double eps) {
  const std::size_t n = p.size();
  // Initial tetrahedron from well-spread points.
  std::size_t i0 = 0, i1 = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (detail::lex_less(p[i], p[i0])) i0 = i;
  }
  double best = -1;
  for (std::size_t i = 0; i < n; ++i)
    if ((p[i] - p[i0]).norm() > best) best = (p[i] - p[i0]).norm(), i1 = i;
  std::size_t i2 = 0;
  best = -1;
  for (std::size_t i = 0; i < n; ++i) {
    const double area = (p[i1] - p[i0]).cross(p[i] - p[i0]).norm();
    if (area > best) best = area, i2 = i;
  }
  std::size_t i3 = 0;
  best = -1;
  const Eigen::Vector3d base = (p[i1] - p[i0]).cross(p[i2] - p[i0]).normalized();
  for (std::size_t i = 0; i < n; ++i) {
    const double h = std::abs(base.dot(p[i] - p[i0]));
    if (h > best) best = h, i3 = i;
  }
  const Eigen::Vector3d inside = (p[i0] + p[i1] + p[i2] + p[i3]) / 4.0;
  std::vector<Triangle> faces{make_triangle(p, i0, i1, i2, inside), make_triangle(p, i0, i1, i3, inside),
                              make_triangle(p, i0, i2, i3, inside), make_triangle(p, i1, i2, i3, inside)};

  for (std::size_t q = 0; q < n; ++q) {
    if (q == i0 || q == i1 || q == i2 || q == i3) continue;
    std::vector<char> visible(faces.size(), 0);
    bool any = false;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      if (faces[f].normal.dot(p[q]) - faces[f].offset > eps) visible[f] = 1, any = true;
    }
    if (!any) continue;
    // Horizon: directed edges of visible faces whose reverse is not visible.
    std::map<std::pair<std::size_t, std::size_t>, int> edge_count;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      if (!visible[f]) continue;
      for (int e = 0; e < 3; ++e) edge_count[{faces[f].v[e], faces[f].v[(e + 1) % 3]}]++;
    }
    std::vector<Triangle> next;
    next.reserve(faces.size() + 8);
    for (std::size_t f = 0; f < faces.size(); ++f)
      if (!visible[f]) next.push_back(faces[f]);
    for (const auto& [edge, count] : edge_count) {
      if (edge_count.count({edge.second, edge.first})) continue;
      Triangle t{{edge.first, edge.second, q}, Eigen::Vector3d::Zero(), 0.0};
      Eigen::Vector3d nrm = (p[t.v[1]] - p[t.v[0]]).cross(p[t.v[2]] - p[t.v[0]]);
      t.normal = nrm.normalized();
      t.offset = t.normal.dot(p[t.v[0]]);
      next.push_back(t);
    }
    faces = std::move(next);
  }
  return faces;
}

inline double point_segment_distance(const Point& x, const Point& a, const Point& b) {
  const Point ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (x - a).norm();
  const double t = std::clamp((x - a).dot(ab) / len2, 0.0, 1.0);
  return (x - (a + t * ab)).norm();
}

/// Closest-point distance from x to triangle abc in R^3.
inline double point_triangle_distance(const Eigen::Vector3d& x, const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                      const Eigen::Vector3d& c) {
  const Eigen::Vector3d ab = b - a, ac = c - a, ap = x - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return (x - a).norm();
  const Eigen::Vector3d bp = x - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return (x - b).norm();
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return (x - (a + d1 / (d1 - d3) * ab)).norm();
  const Eigen::Vector3d cp = x - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return (x - c).norm();
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return (x - (a + d2 / (d2 - d6) * ac)).norm();
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0)
    return (x - (b + (d4 - d3) / ((d4 - d3) + (d5 - d6)) * (c - b))).norm();
  const double denom = 1.0 / (va + vb + vc);
  return (x - (a + ab * (vb * denom) + ac * (vc * denom))).norm();
}

}  // namespace detail

/// Nonempty convex polytope conv(vertices) in R^n, n in {1,2,3}. The vertex
/// list is reduced to the extreme points on construction.
class Polytope {
 public:
  /// Relative tolerance for hull predicates.
  static constexpr double kEps = 1e-12;

  explicit Polytope(std::vector<Point> points) {
    if (points.empty()) throw std::invalid_argument("polytope needs at least one point");
    n_ = static_cast<int>(points.front().size());
    if (n_ < 1 || n_ > 3) throw std::invalid_argument("polytopes are limited to dimensions 1, 2 and 3");
    for (const auto& q : points) {
      if (q.size() != n_) throw std::invalid_argument("polytope points have different dimensions");
      if (!q.allFinite()) throw std::invalid_argument("polytope point is not finite");
    }
    build(std::move(points));
  }

  static Polytope box(const Point& lo, const Point& hi) {
    const int n = static_cast<int>(lo.size());
    std::vector<Point> pts;
    for (int mask = 0; mask < (1 << n); ++mask) {
      Point q(n);
      for (int k = 0; k < n; ++k) q(k) = (mask >> k) & 1 ? hi(k) : lo(k);
      pts.push_back(q);
    }
    return Polytope(std::move(pts));
  }

  static Polytope cube(int n, double side = 1.0) {
    return box(Point::Zero(n), Point::Constant(n, side));
  }

  static Polytope segment(const Point& a, const Point& b) { return Polytope({a, b}); }

  static Polytope cross_polytope(int n, double radius = 1.0) {
    std::vector<Point> pts;
    for (int k = 0; k < n; ++k)
      for (double s : {-radius, radius}) {
        Point q = Point::Zero(n);
        q(k) = s;
        pts.push_back(q);
      }
    return Polytope(std::move(pts));
  }

  /// Regular k-gon inscribed in the circle of given radius and centre.
  static Polytope regular_polygon(int k, double radius, const Eigen::Vector2d& center = Eigen::Vector2d::Zero()) {
    if (k < 3) throw std::invalid_argument("regular polygon needs k >= 3");
    std::vector<Point> pts;
    for (int i = 0; i < k; ++i) {
      const double t = 2.0 * std::numbers::pi * i / k;
      pts.push_back(Point(center + radius * Eigen::Vector2d(std::cos(t), std::sin(t))));
    }
    return Polytope(std::move(pts));
  }

  int dimension() const noexcept { return n_; }
  const std::vector<Point>& vertices() const& noexcept { return vertices_; }
  std::vector<Point> vertices() && noexcept { return std::move(vertices_); }
  std::size_t size() const noexcept { return vertices_.size(); }
  int affine_dimension() const noexcept { return affine_dim_; }
  bool full_dimensional() const noexcept { return affine_dim_ == n_; }

  /// Outward facet normals (rows) and offsets: x inside iff A x <= b.
  /// Empty unless full-dimensional.
  const Eigen::MatrixXd& facet_normals() const noexcept { return a_; }
  const Eigen::VectorXd& facet_offsets() const noexcept { return b_; }

  /// Largest absolute coordinate (at least 1); sets the tolerance scale.
  double scale() const noexcept { return scale_; }

  bool contains(const Point& x, double tol = 1e-12) const {
    if (x.size() != n_) throw std::invalid_argument("point has the wrong dimension");
    if (full_dimensional()) return ((a_ * x - b_).array() <= tol * scale_).all();
    return distance(x) <= tol * scale_;
  }

  /// Euclidean distance from x to the polytope.
  double distance(const Point& x) const {
    if (x.size() != n_) throw std::invalid_argument("point has the wrong dimension");
    if (full_dimensional() && ((a_ * x - b_).array() <= 0.0).all()) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    switch (affine_dim_) {
      case 0:
        return (x - vertices_.front()).norm();
      case 1:
        return detail::point_segment_distance(x, vertices_.front(), vertices_.back());
      default:
        break;
    }
    if (n_ == 2) {
      for (std::size_t k = 0; k < vertices_.size(); ++k)
        best = std::min(best,
                        detail::point_segment_distance(x, vertices_[k], vertices_[(k + 1) % vertices_.size()]));
      return best;
    }
    const Eigen::Vector3d x3 = x;
    for (const auto& t : triangles_)
      best = std::min(best, detail::point_triangle_distance(x3, vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]));
    return best;
  }

  /// n-dimensional volume; zero for lower-dimensional polytopes.
  double volume() const {
    if (!full_dimensional()) return 0.0;
    if (n_ == 1) return vertices_.back()(0) - vertices_.front()(0);
    if (n_ == 2) {
      double twice = 0.0;
      for (std::size_t k = 0; k < vertices_.size(); ++k) {
        const auto& p = vertices_[k];
        const auto& q = vertices_[(k + 1) % vertices_.size()];
        twice += p(0) * q(1) - p(1) * q(0);
      }
      return 0.5 * twice;
    }
    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    for (const auto& v : vertices_) c += v;
    c /= static_cast<double>(vertices_.size());
    double six = 0.0;
    for (const auto& t : triangles_) {
      Eigen::Matrix3d m;
      m.col(0) = vertices_[t[0]] - c;
      m.col(1) = vertices_[t[1]] - c;
      m.col(2) = vertices_[t[2]] - c;
      six += m.determinant();
    }
    return six / 6.0;
  }

  double support(const Point& u) const {
    if (u.size() != n_) throw std::invalid_argument("direction has the wrong dimension");
    if (u.isZero(0.0)) throw std::invalid_argument("support function needs a nonzero direction");
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& v : vertices_) best = std::max(best, u.dot(v));
    return best;
  }

  Point vertex_centroid() const {
    Point c = Point::Zero(n_);
    for (const auto& v : vertices_) c += v;
    return c / static_cast<double>(vertices_.size());
  }

 private:
  void build(std::vector<Point> pts) {
    scale_ = 1.0;
    for (const auto& q : pts) scale_ = std::max(scale_, q.cwiseAbs().maxCoeff());
    const double eps = kEps * scale_;

    // Merge every point lying within eps of an earlier kept one; clusters from
    // different corners can interleave in lexicographic order.
    std::sort(pts.begin(), pts.end(), detail::lex_less);
    std::vector<Point> kept;
    for (auto& q : pts) {
      bool dup = false;
      for (auto it = kept.rbegin(); it != kept.rend() && q(0) - (*it)(0) <= eps; ++it)
        if ((q - *it).norm() <= eps) {
          dup = true;
          break;
        }
      if (!dup) kept.push_back(std::move(q));
    }
    pts = std::move(kept);

    // Affine hull dimension and an orthonormal basis of it.
    Point origin = pts.front();
    Eigen::MatrixXd diffs(n_, static_cast<Eigen::Index>(pts.size()));
    for (std::size_t k = 0; k < pts.size(); ++k) diffs.col(static_cast<Eigen::Index>(k)) = pts[k] - origin;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(diffs, Eigen::ComputeThinU);
    affine_dim_ = 0;
    for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k)
      if (svd.singularValues()(k) > 1e-10 * scale_) ++affine_dim_;

    if (affine_dim_ == 0) {
      vertices_ = {pts.front()};
    } else if (affine_dim_ == 1) {
      const Point dir = svd.matrixU().col(0);
      auto [lo, hi] = std::minmax_element(pts.begin(), pts.end(),
                                          [&](const Point& a, const Point& b) { return dir.dot(a) < dir.dot(b); });
      vertices_ = {*lo, *hi};
      std::sort(vertices_.begin(), vertices_.end(), detail::lex_less);
    } else if (affine_dim_ == 2) {
      // In the plane keep the standard basis so the chain is counter-clockwise.
      const Eigen::MatrixXd basis = n_ == 2 ? Eigen::MatrixXd::Identity(2, 2) : Eigen::MatrixXd(svd.matrixU().leftCols(2));
      std::vector<Eigen::Vector2d> proj;
      for (const auto& q : pts) proj.push_back(basis.transpose() * (q - origin));
      for (std::size_t k : detail::monotone_chain(proj, eps * scale_)) vertices_.push_back(pts[k]);
      if (n_ == 3) {
        for (std::size_t k = 1; k + 1 < vertices_.size(); ++k) triangles_.push_back({0, k, k + 1});
      }
    } else {
      build_3d(pts, eps);
    }
    build_halfspaces();
  }

  void build_3d(const std::vector<Point>& pts, double eps) {
    std::vector<Eigen::Vector3d> p3;
    for (const auto& q : pts) p3.push_back(q);
    auto faces = detail::hull3(p3, eps);
    // Keep only points whose incident facet normals span R^3; this drops
    // points interior to facets or edges, then rebuild on the survivors.
    std::map<std::size_t, std::vector<Eigen::Vector3d>> incident;
    for (const auto& f : faces)
      for (auto v : f.v) incident[v].push_back(f.normal);
    std::vector<Eigen::Vector3d> extreme;
    for (const auto& [v, normals] : incident) {
      Eigen::MatrixXd m(3, static_cast<Eigen::Index>(normals.size()));
      for (std::size_t k = 0; k < normals.size(); ++k) m.col(static_cast<Eigen::Index>(k)) = normals[k];
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
      if (svd.singularValues().size() == 3 && svd.singularValues()(2) > 1e-9) extreme.push_back(p3[v]);
    }
    std::sort(extreme.begin(), extreme.end(), [](const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
      return detail::lex_less(a, b);
    });
    faces = detail::hull3(extreme, eps);
    std::set<std::size_t> used;
    for (const auto& f : faces)
      for (auto v : f.v) used.insert(v);
    std::map<std::size_t, std::size_t> remap;
    for (auto v : used) {
      remap[v] = vertices_.size();
      vertices_.push_back(extreme[v]);
    }
    for (const auto& f : faces) {
      triangles_.push_back({remap[f.v[0]], remap[f.v[1]], remap[f.v[2]]});
      normals3_.push_back(f.normal);
      offsets3_.push_back(f.offset);
    }
  }

  void build_halfspaces() {
    if (!full_dimensional()) return;
    std::vector<Point> rows;
    std::vector<double> offs;
    auto add = [&](const Point& nrm, double off) {
      for (std::size_t k = 0; k < rows.size(); ++k)
        if ((rows[k] - nrm).norm() < 1e-12) return;
      rows.push_back(nrm);
      offs.push_back(off);
    };
    if (n_ == 1) {
      add(Point::Constant(1, -1.0), -vertices_.front()(0));
      add(Point::Constant(1, 1.0), vertices_.back()(0));
    } else if (n_ == 2) {
      for (std::size_t k = 0; k < vertices_.size(); ++k) {
        const Point& p = vertices_[k];
        const Point& q = vertices_[(k + 1) % vertices_.size()];
        Point nrm(2);
        nrm << q(1) - p(1), p(0) - q(0);
        nrm.normalize();
        add(nrm, nrm.dot(p));
      }
    } else {
      for (std::size_t k = 0; k < normals3_.size(); ++k) add(Point(normals3_[k]), offsets3_[k]);
    }
    a_.resize(static_cast<Eigen::Index>(rows.size()), n_);
    b_.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
      a_.row(static_cast<Eigen::Index>(k)) = rows[k].transpose();
      b_(static_cast<Eigen::Index>(k)) = offs[k];
    }
  }

  int n_ = 0;
  int affine_dim_ = 0;
  double scale_ = 1.0;
  std::vector<Point> vertices_;
  std::vector<std::array<std::size_t, 3>> triangles_;
  std::vector<Eigen::Vector3d> normals3_;
  std::vector<double> offsets3_;
  Eigen::MatrixXd a_;
  Eigen::VectorXd b_;
};

inline Polytope minkowski_sum(const Polytope& a, const Polytope& b) {
  if (a.dimension() != b.dimension()) throw std::invalid_argument("Minkowski sum of polytopes of different dimension");
  std::vector<Point> pts;
  pts.reserve(a.size() * b.size());
  for (const auto& u : a.vertices())
    for (const auto& v : b.vertices()) pts.push_back(u + v);
  return Polytope(std::move(pts));
}

/// Minkowski sum of a nonempty list, folded left to right.
inline Polytope minkowski_sum(const std::vector<Polytope>& ks) {
  if (ks.empty()) throw std::invalid_argument("Minkowski sum of an empty list");
  Polytope acc = ks.front();
  for (std::size_t k = 1; k < ks.size(); ++k) acc = minkowski_sum(acc, ks[k]);
  return acc;
}

inline Polytope scale(const Polytope& a, double c) {
  if (!(c >= 0.0)) throw std::invalid_argument("scale factor must be nonnegative");
  std::vector<Point> pts;
  for (const auto& v : a.vertices()) pts.push_back(c * v);
  return Polytope(std::move(pts));
}

inline Polytope translate(const Polytope& a, const Point& t) {
  std::vector<Point> pts;
  for (const auto& v : a.vertices()) pts.push_back(v + t);
  return Polytope(std::move(pts));
}

/// Same vertex sets up to `tol` (vertex lists are canonically ordered).
inline bool approx_equal(const Polytope& a, const Polytope& b, double tol = 1e-12) {
  if (a.dimension() != b.dimension() || a.size() != b.size()) return false;
  const double t = tol * std::max(a.scale(), b.scale());
  for (const auto& u : a.vertices()) {
    bool found = false;
    for (const auto& v : b.vertices()) found = found || (u - v).norm() <= t;
    if (!found) return false;
  }
  return true;
}

}  // namespace fracineq
