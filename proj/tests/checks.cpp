#include "checks.hpp"

#include <cmath>
#include <random>

#include "umix/polynomial.hpp"

namespace umix::checks {

namespace {

struct RingFixture {
  MeshHierarchy meshes{16};
  Discretization d;
  explicit RingFixture(int k) : d(meshes.level(0), make_domain(Geometry::Ring, 0), k) {}
};

// Random polynomial of total degree <= deg with a fixed seed.
ScalarField random_polynomial(int deg, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd c(monomial_count(deg));
  for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = dist(rng);
  return [c, deg](const Point2& x) { return monomials(deg, x.x(), x.y()).dot(c); };
}

}  // namespace

double commuting_interpolation_defect(int k) {
  RingFixture f(k);
  const int deg = k + 1;
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd ca(monomial_count(deg)), cb(monomial_count(deg));
  for (Eigen::Index i = 0; i < ca.size(); ++i) ca[i] = dist(rng);
  for (Eigen::Index i = 0; i < cb.size(); ++i) cb[i] = dist(rng);
  const Eigen::VectorXd dxa = (ca.transpose() * derivative_x(deg)).transpose();
  const Eigen::VectorXd dyb = (cb.transpose() * derivative_y(deg)).transpose();
  const VectorField u = [&](const Point2& x) {
    const Eigen::VectorXd m = monomials(deg, x.x(), x.y());
    return Point2(m.dot(ca), m.dot(cb));
  };
  const ScalarField divu = [&](const Point2& x) {
    const Eigen::VectorXd m = monomials(deg, x.x(), x.y());
    return m.dot(dxa) + m.dot(dyb);
  };
  const Eigen::VectorXd lhs = div_map(f.d.rt, f.d.q) * interpolate_rt(f.d.rt, u);
  const Eigen::VectorXd rhs = project_l2(f.d.q, divu, Measure::ActiveMesh, 2 * k + 4);
  return (lhs - rhs).cwiseAbs().maxCoeff() / std::max(rhs.cwiseAbs().maxCoeff(), 1e-300);
}

double gp_kernel_defect_rt(int k, GPVariant variant) {
  RingFixture f(k);
  const ScalarField a = random_polynomial(k, 21), b = random_polynomial(k, 22);
  const Eigen::VectorXd x = interpolate_rt(f.d.rt, [&](const Point2& p) { return Point2(a(p), b(p)); });
  GPConfig cfg;
  cfg.variant = variant;
  cfg.facets = f.d.patches.gp_facets;
  const SpMat J = assemble_gp(cfg, f.d.rt);
  return (J * x).norm() / (J.norm() * x.norm());
}

double gp_kernel_defect_dg(int k, GPVariant variant) {
  RingFixture f(k);
  const Eigen::VectorXd x = project_l2(f.d.q, random_polynomial(k, 31), Measure::ActiveMesh, 2 * k + 2);
  GPConfig cfg;
  cfg.variant = variant;
  cfg.facets = f.d.patches.gp_facets;
  const SpMat J = assemble_gp(cfg, f.d.q);
  return (J * x).norm() / (J.norm() * x.norm());
}

double e0_pairing_defect(int k) {
  RingFixture f(k);
  const ScalarField q = [](const Point2& x) { return std::exp(x.x()) * std::sin(3.0 * x.y()) + x.x() * x.y(); };
  const int qdeg = 2 * k + 8;
  // E0 q: full-element mass matrix applied inversely to the moments over T ∩ Omega.
  const Eigen::VectorXd mom = assemble_source_rhs(f.d.q, q, Measure::Omega, qdeg);
  const SpMat M = assemble_dg_mass(f.d.q, Measure::ActiveMesh);
  Eigen::SimplicialLLT<SpMat> llt(M);
  const Eigen::VectorXd e0 = llt.solve(mom);

  std::mt19937 rng(41);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    Eigen::VectorXd r(f.d.q.ndofs());
    for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = dist(rng);
    double lhs = 0.0, rhs = 0.0, qn = 0.0, rn = 0.0;
    for (int e : f.d.active.elements) {
      const Rule full = f.d.cut.full_rule(e, qdeg);
      const Eigen::VectorXd ev = eval_dg(f.d.q, e0, e, full.points), rv = eval_dg(f.d.q, r, e, full.points);
      lhs += full.weights.dot(ev.cwiseProduct(rv));
      rn += full.weights.dot(rv.cwiseProduct(rv));
      const Rule part = f.d.cut.volume_rule(e, qdeg);
      const Eigen::VectorXd rp = eval_dg(f.d.q, r, e, part.points);
      for (Eigen::Index i = 0; i < part.size(); ++i) {
        const double qi = q(part.points.col(i));
        rhs += part.weights[i] * qi * rp[i];
        qn += part.weights[i] * qi * qi;
      }
    }
    worst = std::max(worst, std::abs(lhs - rhs) / std::sqrt(qn * rn));
  }
  return worst;
}

double polygon_monomial_integral(const std::vector<Point2>& poly, int a, int b) {
  // Green: int x^a y^b dA = 1/(a+1) * oint x^(a+1) y^b dy, with the edge
  // integrals expanded binomially in the edge parameter.
  const auto binom = [](int n, int r) {
    double v = 1.0;
    for (int i = 1; i <= r; ++i) v = v * (n - r + i) / i;
    return v;
  };
  double total = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& p = poly[i];
    const Point2 d = poly[(i + 1) % n] - p;
    double edge = 0.0;
    for (int s = 0; s <= a + 1; ++s)
      for (int t = 0; t <= b; ++t)
        edge += binom(a + 1, s) * binom(b, t) * std::pow(p.x(), a + 1 - s) * std::pow(d.x(), s) *
                std::pow(p.y(), b - t) * std::pow(d.y(), t) / (s + t + 1);
    total += edge * d.y();
  }
  return total / (a + 1);
}

std::vector<Point2> clip_half_plane(const std::vector<Point2>& poly, const Point2& n, double c) {
  std::vector<Point2> out;
  const std::size_t m = poly.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Point2& p = poly[i];
    const Point2& q = poly[(i + 1) % m];
    const double sp = n.dot(p) - c, sq = n.dot(q) - c;
    if (sp <= 0.0) out.push_back(p);
    if ((sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0)) out.push_back(p + sp / (sp - sq) * (q - p));
  }
  return out;
}

double quadrature_oracle_defect(int degree) {
  MeshHierarchy meshes{16};
  const BackgroundMesh& mesh = meshes.level(0);

  struct Case {
    DomainDescription domain;
    std::vector<std::pair<Point2, double>> half_planes;
  };
  std::vector<Case> cases;
  {
    const ConvexPolygon sq = rotated_square();
    Case c{sq, {}};
    for (std::size_t i = 0; i < sq.vertices.size(); ++i) {
      const Point2 a = sq.vertices[i], b = sq.vertices[(i + 1) % sq.vertices.size()];
      const Point2 n = Point2(b.y() - a.y(), a.x() - b.x()).normalized();
      c.half_planes.emplace_back(n, n.dot(a));
    }
    cases.push_back(std::move(c));
  }
  {
    const Point2 n = Point2(0.6, 0.8);
    const double off = 0.1234;
    LevelSet ls;
    ls.value = [n, off](const Point2& x) { return n.dot(x) - off; };
    ls.gradient = [n](const Point2&) { return n; };
    ls.subdivision_depth = 0;
    cases.push_back({ls, {{n, off}}});
  }

  double worst = 0.0;
  for (const Case& c : cases) {
    const CutMesh cut(mesh, c.domain);
    for (int e = 0; e < mesh.num_elements(); ++e) {
      if (!cut.cut(e)) continue;
      std::vector<Point2> poly;
      for (int v : mesh.elements[e]) poly.push_back(mesh.vertices[v]);
      for (const auto& [n, off] : c.half_planes) poly = clip_half_plane(poly, n, off);
      const Rule r = cut.volume_rule(e, degree);
      const double scale = mesh.area(e);
      for (int s = 0; s <= degree; ++s) {
        for (int a = s; a >= 0; --a) {
          const int b = s - a;
          double q = 0.0;
          for (Eigen::Index i = 0; i < r.size(); ++i)
            q += r.weights[i] * std::pow(r.points(0, i), a) * std::pow(r.points(1, i), b);
          const double exact = poly.size() >= 3 ? polygon_monomial_integral(poly, a, b) : 0.0;
          worst = std::max(worst, std::abs(q - exact) / scale);
        }
      }
    }
  }
  return worst;
}

}  // namespace umix::checks
