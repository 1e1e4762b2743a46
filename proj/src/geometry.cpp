#include "gbvp/geometry.hpp"

#include <cmath>

namespace gbvp {

namespace {

RVec uniform_nodes(double a, double b, int n) {
  RVec v(n);
  for (int i = 0; i < n; ++i) v(i) = a + (b - a) * (double(i) + 0.5) / n;
  return v;
}

RVec fourier_nodes(int n) {
  RVec v(n);
  for (int i = 0; i < n; ++i) v(i) = 2.0 * kPi * i / n;
  return v;
}

Eigen::MatrixXd rot2(double a) {
  Eigen::MatrixXd m(2, 2);
  m << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return m;
}

}  // namespace

Geometry build_geometry(const GeometryDescriptor& d) {
  if (d.n_rad < 4 || (d.kind != "interval" && d.n_ang < 4))
    throw ConfigError("geometry: fewer than 4 nodes in a direction");
  Geometry g;
  g.n_rad = d.n_rad;

  if (d.kind == "interval") {
    g.kind = GeomKind::interval;
    g.r0 = 0.0;
    g.r1 = 1.0;
    Chart ch;
    ch.name = "line";
    ch.dim = 1;
    ch.coords = {"x"};
    ch.range = {{0.0, 1.0}};
    ch.periodic = {false};
    ch.nodes = {uniform_nodes(0.0, 1.0, d.n_rad)};
    ch.metric = [](const RVec&) {
      return Eigen::MatrixXd::Identity(1, 1);
    };
    g.charts.push_back(std::move(ch));
    BoundaryChart left;
    left.name = "left";
    left.boundary_value = 0.0;
    left.xn_sign = 1.0;   // x_n = x
    left.orient = -1.0;   // outward normal points to -x
    g.boundary.push_back(left);
    BoundaryChart right;
    right.name = "right";
    right.boundary_value = 1.0;
    right.xn_sign = -1.0;  // x_n = 1 - x
    right.orient = 1.0;
    g.boundary.push_back(right);
    return g;
  }

  if (d.kind == "annulus") {
    if (d.r0 >= d.r1) throw ConfigError("geometry: inner radius >= outer radius");
    g.kind = GeomKind::annulus;
    g.r0 = d.r0;
    g.r1 = d.r1;
    g.n_ang = d.n_ang;
    Chart ch;
    ch.name = "polar";
    ch.dim = 2;
    ch.coords = {"r", "theta"};
    ch.range = {{d.r0, d.r1}, {0.0, 2.0 * kPi}};
    ch.periodic = {false, true};
    ch.nodes = {uniform_nodes(d.r0, d.r1, d.n_rad), fourier_nodes(d.n_ang)};
    ch.metric = [](const RVec& x) {
      Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
      m(0, 0) = 1.0;
      m(1, 1) = x(0) * x(0);
      return m;
    };
    g.charts.push_back(std::move(ch));
    BoundaryChart inner;
    inner.name = "inner";
    inner.boundary_value = d.r0;
    inner.xn_sign = 1.0;  // x_n = r - r0
    inner.periodic = true;
    inner.nodes = fourier_nodes(d.n_ang);
    inner.orient = -1.0;
    g.boundary.push_back(std::move(inner));
    BoundaryChart outer;
    outer.name = "outer";
    outer.boundary_value = d.r1;
    outer.xn_sign = -1.0;  // x_n = r1 - r
    outer.periodic = true;
    outer.nodes = fourier_nodes(d.n_ang);
    outer.orient = 1.0;
    g.boundary.push_back(std::move(outer));
    return g;
  }

  if (d.kind == "disk") {
    g.kind = GeomKind::disk;
    g.r0 = 0.0;
    g.r1 = d.r1;
    g.n_ang = d.n_ang;
    Chart ch;
    ch.name = "polar";
    ch.dim = 2;
    ch.coords = {"r", "theta"};
    ch.range = {{0.0, d.r1}, {0.0, 2.0 * kPi}};
    ch.periodic = {false, true};
    // midpoint nodes keep the polar chart clear of r = 0
    ch.nodes = {uniform_nodes(0.0, d.r1, d.n_rad), fourier_nodes(d.n_ang)};
    ch.metric = [](const RVec& x) {
      Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
      m(0, 0) = 1.0;
      m(1, 1) = x(0) * x(0);
      return m;
    };
    g.charts.push_back(std::move(ch));
    Chart cap;
    cap.name = "cap";
    cap.dim = 2;
    cap.coords = {"u", "v"};
    double c = 0.35 * d.r1;
    cap.range = {{-c, c}, {-c, c}};
    cap.periodic = {false, false};
    cap.nodes = {uniform_nodes(-c, c, d.n_rad / 2), uniform_nodes(-c, c, d.n_rad / 2)};
    cap.metric = [](const RVec&) {
      return Eigen::MatrixXd::Identity(2, 2);
    };
    g.charts.push_back(std::move(cap));
    BoundaryChart rim;
    rim.name = "rim";
    rim.boundary_value = d.r1;
    rim.xn_sign = -1.0;  // x_n = r1 - r
    rim.periodic = true;
    rim.nodes = fourier_nodes(d.n_ang);
    rim.orient = 1.0;
    g.boundary.push_back(std::move(rim));
    return g;
  }

  throw ConfigError("geometry: unknown kind " + d.kind);
}

GroupAction trivial_action(const Geometry&) {
  GroupAction a;
  a.group = FiniteGroup::trivial();
  a.kind = ActionKind::trivial;
  a.angle = {0.0};
  a.map = [](int, int, const RVec& x) { return x; };
  a.dmap = [](int, int, const RVec& x) {
    return Eigen::MatrixXd::Identity(x.size(), x.size());
  };
  return a;
}

GroupAction rotation_action(const Geometry& g, int k) {
  if (g.kind == GeomKind::interval)
    throw ConfigError("rotation action needs an annulus or disk");
  GroupAction a;
  a.group = FiniteGroup::cyclic(k);
  a.kind = ActionKind::rotation;
  for (int j = 0; j < k; ++j) a.angle.push_back(2.0 * kPi * j / k);
  auto angle = a.angle;
  a.map = [angle](int gamma, int chart, const RVec& x) {
    RVec y = x;
    if (chart == 0) {
      y(1) = std::fmod(x(1) + angle[gamma], 2.0 * kPi);
      if (y(1) < 0.0) y(1) += 2.0 * kPi;
    } else {
      y = rot2(angle[gamma]) * x;
    }
    return y;
  };
  a.dmap = [angle](int gamma, int chart, const RVec& x) -> Eigen::MatrixXd {
    if (chart == 0) return Eigen::MatrixXd::Identity(x.size(), x.size());
    return rot2(angle[gamma]);
  };
  return a;
}

GroupAction reflection_action(const Geometry& g) {
  if (g.kind != GeomKind::interval)
    throw ConfigError("reflection action needs the interval");
  GroupAction a;
  a.group = FiniteGroup::cyclic(2);
  a.kind = ActionKind::reflection;
  a.angle = {0.0, 0.0};
  double s = g.r0 + g.r1;
  a.map = [s](int gamma, int, const RVec& x) {
    RVec y = x;
    if (gamma == 1) y(0) = s - x(0);
    return y;
  };
  a.dmap = [](int gamma, int, const RVec&) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(1, 1);
    if (gamma == 1) m(0, 0) = -1.0;
    return m;
  };
  return a;
}

std::function<Eigen::MatrixXd(int, const RVec&)> codifferential_lift(
    const GroupAction& a, int gamma) {
  if (gamma < 0 || gamma >= a.group.n)
    throw std::invalid_argument("codifferential_lift: element out of range");
  auto dmap = a.dmap;
  return [dmap, gamma](int chart, const RVec& x) {
    Eigen::MatrixXd d = dmap(gamma, chart, x);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(d.transpose());
    if (!lu.isInvertible())
      throw std::invalid_argument("codifferential_lift: singular differential");
    return Eigen::MatrixXd(lu.inverse());
  };
}

std::vector<FixedStratum> fixed_strata(const Geometry& g, const GroupAction& a) {
  std::vector<FixedStratum> out;
  for (const auto& cls : conjugacy_classes(a.group)) {
    FixedStratum st;
    st.gamma = cls.front();
    st.conj_class = cls;
    st.conjugators = conjugators(a.group, st.gamma, cls);
    st.centralizer = centralizer(a.group, st.gamma);
    st.normal_m = Mat(0, 0);
    st.normal_x = Mat(0, 0);

    if (st.gamma == 0) {
      st.m_shape = StratumShape::full;
      st.x_shape = StratumShape::full;
      for (int i = 0; i < int(g.boundary.size()); ++i)
        st.boundary_components.push_back(i);
      out.push_back(std::move(st));
      continue;
    }

    st.x_shape = StratumShape::empty;
    if (a.kind == ActionKind::rotation && g.kind == GeomKind::disk) {
      // only the center is fixed by a nontrivial rotation
      st.m_shape = StratumShape::point;
      st.point = RVec::Zero(2);
      st.point_chart = 1;  // cap chart covers the center
      st.angle = a.angle[st.gamma];
      st.normal_m = rot2(st.angle).cast<cplx>();
    } else if (a.kind == ActionKind::reflection && g.kind == GeomKind::interval) {
      st.m_shape = StratumShape::point;
      st.point = RVec::Constant(1, 0.5 * (g.r0 + g.r1));
      st.point_chart = 0;
      st.normal_m = -Mat::Identity(1, 1);
    } else {
      // nontrivial annulus rotations act freely
      st.m_shape = StratumShape::empty;
    }
    out.push_back(std::move(st));
  }
  return out;
}

}  // namespace gbvp
