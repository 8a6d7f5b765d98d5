#include "isolab/monodromy.hpp"

#include <algorithm>
#include <cmath>

#include "isolab/odeint.hpp"

namespace isolab {

namespace {

const C kI(0.0, 1.0);

double seg_point_dist(const C& a, const C& b, const C& p) {
  const C d = b - a;
  const double len2 = std::norm(d);
  if (len2 == 0.0) return std::abs(p - a);
  double t = ((p - a) * std::conj(d)).real() / len2;
  t = std::clamp(t, 0.0, 1.0);
  return std::abs(p - (a + t * d));
}

}  // namespace

Mat2c LinearSystem::coefficient(const C& lambda) const {
  Mat2c a = poly_part;
  for (const Pole& p : poles) a += p.residue / (lambda - p.position);
  return a;
}

double LinearSystem::scale() const {
  double s = 1.0;
  for (size_t i = 0; i < poles.size(); ++i) {
    s = std::max(s, std::abs(poles[i].position));
    for (size_t j = i + 1; j < poles.size(); ++j)
      s = std::max(s, std::abs(poles[i].position - poles[j].position));
  }
  return s;
}

double LinearSystem::min_gap(const C& p) const {
  double g = std::numeric_limits<double>::infinity();
  for (const Pole& q : poles) {
    const double d = std::abs(q.position - p);
    if (d > 1e-12 * scale()) g = std::min(g, d);
  }
  return g;
}

bool LinearSystem::has_poly_part() const { return mnorm(poly_part) > 0.0; }

const Mat2c& LinearSystem::residue_at(const C& position) const {
  const double tol = 1e-9 * scale();
  for (const Pole& p : poles)
    if (std::abs(p.position - position) <= tol) return p.residue;
  throw ConfigError("no pole at the requested position");
}

Path segment_path(const C& from, const C& to) {
  Path p;
  p.base_point = from;
  p.vertices = {from, to};
  p.orientation = 0;
  return p;
}

Path lasso(const LinearSystem& sys, const C& base, const C& pole,
           int circle_vertices) {
  const double r = sys.min_gap(pole) / 3.0;
  const C dir = base - pole;
  if (std::abs(dir) <= 2.0 * r)
    throw ConfigError("lasso base point too close to the pole");
  const double phi0 = std::arg(dir);
  Path p;
  p.base_point = base;
  p.orientation = +1;
  p.vertices.push_back(base);
  const int n = std::max(circle_vertices, 8);
  for (int j = 0; j <= n; ++j) {
    const double phi = phi0 + 2.0 * kPi * j / n;
    p.vertices.push_back(pole + r * std::exp(kI * phi));
  }
  p.vertices.push_back(base);
  return p;
}

Path big_circle_loop(const LinearSystem& sys, const C& base, int orientation,
                     int circle_vertices) {
  if (orientation != 1 && orientation != -1)
    throw ConfigError("big circle orientation must be +-1");
  double r = std::abs(base);
  for (const Pole& p : sys.poles) r = std::max(r, std::abs(p.position));
  r = 3.0 * std::max(1.0, r);
  const double psi = std::arg(base);
  Path p;
  p.base_point = base;
  p.orientation = orientation;
  p.vertices.push_back(base);
  const int n = std::max(circle_vertices, 12);
  for (int j = 0; j <= n; ++j) {
    const double phi = psi + orientation * 2.0 * kPi * j / n;
    p.vertices.push_back(r * std::exp(kI * phi));
  }
  p.vertices.push_back(base);
  return p;
}

Path arc_path(double radius, double angle_from, double angle_to,
              int vertices_per_half_turn) {
  const double sweep = angle_to - angle_from;
  const int n = std::max(
      2, static_cast<int>(std::ceil(std::abs(sweep) / kPi *
                                    vertices_per_half_turn)));
  Path p;
  p.orientation = 0;
  for (int j = 0; j <= n; ++j) {
    const double phi = angle_from + sweep * j / n;
    p.vertices.push_back(radius * std::exp(kI * phi));
  }
  p.base_point = p.vertices.front();
  return p;
}

Mat2c transfer(const LinearSystem& sys, const Path& path, double tol) {
  if (tol < 1e-13 || tol > 1e-6)
    throw ConfigError("transfer tolerance outside [1e-13, 1e-6]");
  if (path.vertices.size() < 2)
    throw ConfigError("transfer path needs at least two vertices");
  const double guard = 1e-3 * sys.scale();
  for (size_t i = 0; i + 1 < path.vertices.size(); ++i)
    for (const Pole& p : sys.poles)
      if (seg_point_dist(path.vertices[i], path.vertices[i + 1],
                         p.position) <= guard)
        throw PoleProximity("path segment " + std::to_string(i) +
                            " within 1e-3 * scale of a pole");
  Mat2c t = Mat2c::Identity();
  for (size_t i = 0; i + 1 < path.vertices.size(); ++i) {
    const C a = path.vertices[i], b = path.vertices[i + 1];
    if (std::abs(b - a) == 0.0) continue;
    t = detail::dopri5(
        t,
        [&](double s, const Mat2c& y) {
          return Mat2c((b - a) * (sys.coefficient(a + s * (b - a)) * y));
        },
        0.0, 1.0, tol);
  }
  return t;
}

Mat2c LocalFrame::eval(const C& lambda) const {
  const C w = lambda - pole;
  return Mat2c((psi0 + psi1 * w) *
               exp_sigma3(C(0.5) * exponent * std::log(w)));
}

LocalFrame local_frame(const LinearSystem& sys, const C& pole, double radius) {
  const Mat2c& a = sys.residue_at(pole);
  if (!(radius > 0.0) || radius >= sys.min_gap(pole) / 2.0)
    throw ConfigError("local frame radius must lie in (0, min_gap/2)");
  EigenPair2 ep = eig2(a);
  const C theta = ep.r1 - ep.r2;  // traceless residue: r1 = -r2 = theta/2
  if (dist_to_int(theta) <= 1e-6)
    throw ResonantExponent("local exponent within 1e-6 of an integer");

  LocalFrame f;
  f.pole = pole;
  f.exponent = theta;
  f.psi0 = ep.vectors;
  f.radius = radius;

  // B = constant term of A(lambda) at the pole; the first correction X
  // solves X + X L - L X = psi0^{-1} B psi0 with L = (theta/2) sigma3.
  Mat2c b = sys.poly_part;
  for (const Pole& q : sys.poles) {
    if (std::abs(q.position - pole) <= 1e-9 * sys.scale()) continue;
    b += q.residue / (pole - q.position);
  }
  const Mat2c g = inv2(f.psi0) * b * f.psi0;
  Mat2c x;
  x(0, 0) = g(0, 0);
  x(1, 1) = g(1, 1);
  x(0, 1) = g(0, 1) / (C(1) - theta);
  x(1, 0) = g(1, 0) / (C(1) + theta);
  f.psi1 = Mat2c(f.psi0 * x);
  return f;
}

std::vector<Mat2c> infinity_tail(const LinearSystem& sys, int terms) {
  if (sys.has_poly_part())
    throw ConfigError("infinity tail requires a vanishing constant term");
  if (terms < 0) throw ConfigError("infinity tail needs terms >= 0");
  const C th = sys.theta_inf;
  // Residue sum must equal -(theta_inf/2) sigma3.
  Mat2c b1 = Mat2c::Zero();
  for (const Pole& p : sys.poles) b1 += p.residue;
  if (mnorm(Mat2c(b1 + C(0.5) * th * sigma3<double>())) >
      1e-9 * std::max(1.0, std::abs(th)))
    throw ConstraintViolation(
        "residue sum does not match the exponent at infinity");

  std::vector<Mat2c> tail;
  std::vector<Mat2c> psi;  // psi[0] = I, psi[m] = m-th coefficient
  psi.push_back(Mat2c::Identity());
  for (int m = 1; m <= terms; ++m) {
    if (std::abs(th - C(m)) <= 1e-6 || std::abs(th + C(m)) <= 1e-6)
      throw ResonantExponent("exponent at infinity within 1e-6 of +-" +
                             std::to_string(m));
    Mat2c rhs = Mat2c::Zero();
    for (int k = 2; k <= m + 1; ++k) {
      Mat2c bk = Mat2c::Zero();
      for (const Pole& p : sys.poles)
        bk += p.residue * std::pow(p.position, k - 1);
      rhs += bk * psi[m + 1 - k];
    }
    Mat2c pm;
    pm(0, 0) = -rhs(0, 0) / C(m);
    pm(1, 1) = -rhs(1, 1) / C(m);
    pm(0, 1) = rhs(0, 1) / (th - C(m));
    pm(1, 0) = -rhs(1, 0) / (th + C(m));
    psi.push_back(pm);
    tail.push_back(pm);
  }
  return tail;
}

Mat2c frame_at_regular_infinity(const LinearSystem& sys, const C& lambda,
                                int terms) {
  const std::vector<Mat2c> tail = infinity_tail(sys, terms);
  Mat2c phi = Mat2c::Identity();
  C power(1.0);
  for (const Mat2c& psi_m : tail) {
    power /= lambda;
    phi += psi_m * power;
  }
  return Mat2c(phi * exp_sigma3(C(-0.5) * sys.theta_inf * std::log(lambda)));
}

Mat2c frame_from_infinity(const LinearSystem& sys, const C& base, double tol,
                          int terms) {
  const double r = 1e3 * sys.scale();
  const C anchor = r * std::exp(kI * (kPi / 2.0 - 0.1));
  const Mat2c f = frame_at_regular_infinity(sys, anchor, terms);
  return Mat2c(transfer(sys, segment_path(anchor, base), tol) * f);
}

Mat2c loop_monodromy(const LinearSystem& sys, const Mat2c& base_frame,
                     const Path& loop, double tol) {
  return Mat2c(inv2(base_frame) * transfer(sys, loop, tol) * base_frame);
}

const Mat2c& MonodromyPoint::m(const std::string& key) const {
  auto it = matrices.find(key);
  if (it == matrices.end())
    throw ConfigError("monodromy point has no matrix '" + key + "'");
  return it->second;
}

namespace {

// Cyclic product per kind, in application order (rightmost factor first):
//   all-regular: M_inf * M_1 * M_t * M_0  (increasing Re applied first)
//   irregular, base below: M_0 * M_1 * M_inf
//   irregular, base above: M_inf * M_1 * M_0
Mat2c cyclic_product(const MonodromyPoint& mp) {
  switch (mp.kind) {
    case MonodromyKind::P6:
      if (mp.matrices.count("t"))
        return Mat2c(mp.m("inf") * mp.m("1") * mp.m("t") * mp.m("0"));
      return Mat2c(mp.m("inf") * mp.m("1") * mp.m("0"));
    case MonodromyKind::P5:
      return Mat2c(mp.m("0") * mp.m("1") * mp.m("inf"));
    case MonodromyKind::P5Tilde:
      return Mat2c(mp.m("inf") * mp.m("1") * mp.m("0"));
  }
  throw ConfigError("unknown monodromy kind");
}

C theta_for_key(const ThetaTuple& th, const std::string& key) {
  if (key == "0") return th.theta0;
  if (key == "1") return th.theta1;
  if (key == "t") return th.theta_t;
  return th.theta_inf;
}

}  // namespace

MonodromyResiduals validate(const MonodromyPoint& mp) {
  MonodromyResiduals r;
  r.cyclic = mnorm(Mat2c(cyclic_product(mp) - Mat2c::Identity()));
  for (const auto& [key, m] : mp.matrices) {
    r.det = std::max(r.det, std::abs(det2(m) - C(1)));
    // At the irregular point the trace carries the Stokes data, not a
    // 2 cos(pi theta) law; skip it for those kinds.
    if (key == "inf" && mp.kind != MonodromyKind::P6) continue;
    const C th = theta_for_key(mp.thetas, key);
    r.trace =
        std::max(r.trace, std::abs(tr2(m) - C(2) * std::cos(C(kPi) * th)));
  }
  return r;
}

C p6_base_point(const C& t6) {
  return (t6 + C(1)) / C(2) + kI * std::max(1.0, std::abs(t6) + 1.0);
}

MonodromyPoint monodromy_point_p6(const LinearSystem& sys, const C& base,
                                  double tol,
                                  std::optional<ThetaTuple> thetas) {
  if (sys.has_poly_part())
    throw ConfigError("all-regular monodromy point needs poly_part = 0");
  if (sys.poles.size() != 2 && sys.poles.size() != 3)
    throw ConfigError("expected two or three finite poles");

  std::vector<const Pole*> order;
  for (const Pole& p : sys.poles) order.push_back(&p);
  std::sort(order.begin(), order.end(), [](const Pole* a, const Pole* b) {
    return a->position.real() < b->position.real();
  });

  auto label_of = [&](const C& pos) -> std::string {
    if (std::abs(pos) <= 1e-9 * sys.scale()) return "0";
    if (std::abs(pos - C(1)) <= 1e-9 * sys.scale()) return "1";
    return "t";
  };

  const Mat2c frame = frame_from_infinity(sys, base, tol);

  MonodromyPoint mp;
  mp.kind = MonodromyKind::P6;
  Mat2c prod = Mat2c::Identity();  // application order: leftmost pole first
  for (const Pole* p : order) {
    const Mat2c m =
        loop_monodromy(sys, frame, lasso(sys, base, p->position), tol);
    mp.matrices[label_of(p->position)] = m;
    prod = Mat2c(m * prod);
  }
  mp.matrices["inf"] =
      loop_monodromy(sys, frame, big_circle_loop(sys, base, -1), tol);

  if (thetas) {
    mp.thetas = *thetas;
  } else {
    for (const Pole* p : order) {
      const C th = C(2) * std::sqrt(-det2(p->residue));
      const std::string key = label_of(p->position);
      if (key == "0") mp.thetas.theta0 = th;
      else if (key == "1") mp.thetas.theta1 = th;
      else mp.thetas.theta_t = th;
    }
    mp.thetas.theta_inf = sys.theta_inf;
  }

  const MonodromyResiduals res = validate(mp);
  mp.cyclic_residual = res.cyclic;
  mp.trace_residual = res.trace;
  mp.det_residual = res.det;
  if (mp.cyclic_residual > 1e-5)
    throw CyclicViolation("cyclic product residual " +
                          std::to_string(mp.cyclic_residual));
  return mp;
}

}  // namespace isolab
