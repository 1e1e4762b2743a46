#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <gbvp/symbol_family.hpp>

#include <cmath>
#include <functional>

using namespace gbvp;

namespace {

BoundaryFamilyDesc winding(int k, double eps0, bool degenerate = false) {
  BoundaryFamilyDesc d;
  d.kind = "winding";
  d.k = k;
  d.eps0 = eps0;
  d.degenerate = degenerate;
  return d;
}

BoundaryFamilyDesc constant(cplx v) {
  BoundaryFamilyDesc d;
  d.kind = "const";
  d.value = v;
  return d;
}

BoundaryFamilyDesc tilt(double c) {
  BoundaryFamilyDesc d;
  d.kind = "tilt";
  d.c = c;
  return d;
}

BoundaryFamilyDesc green_fam(cplx value, cplx q, double strength) {
  BoundaryFamilyDesc d;
  d.kind = "green";
  d.value = value;
  d.q = q;
  d.strength = strength;
  return d;
}

BoundaryFamilyDesc product(std::vector<BoundaryFamilyDesc> f) {
  BoundaryFamilyDesc d;
  d.kind = "product";
  d.factors = std::move(f);
  return d;
}

SymbolTermDesc term_const(int gamma, cplx v,
                          std::vector<BoundaryFamilyDesc> bd) {
  SymbolTermDesc t;
  t.gamma = gamma;
  t.interior.kind = "const";
  t.interior.value = v * Mat::Identity(1, 1);
  t.boundary = std::move(bd);
  return t;
}

SymbolTermDesc term_collar(double c, std::vector<BoundaryFamilyDesc> bd) {
  SymbolTermDesc t;
  t.gamma = 0;
  t.interior.kind = "collar_tilt";
  t.interior.c = c;
  t.boundary = std::move(bd);
  return t;
}

// fourth order central difference of a boundary symbol valued function
BoundarySymbol fd4(const std::function<BoundarySymbol(double)>& f, double h) {
  BoundarySymbol s = bs_add(f(-2.0 * h), bs_scale(f(2.0 * h), -1.0));
  s = bs_add(s, bs_scale(f(h), 8.0));
  s = bs_add(s, bs_scale(f(-h), -8.0));
  return bs_scale(s, 1.0 / (12.0 * h));
}

double dist_to(const BoundarySymbol& s, const BoundarySymbol& t) {
  return boundary_distance(s, t);
}

}  // namespace

TEST_CASE("winding family hits its faces exactly and inverts on the plateau") {
  Geometry g = build_geometry({"annulus", 1.0, 2.0, 16, 48});
  GSymbolDesc d;
  d.terms = {term_const(0, 1.0, {winding(2, 0.3), constant(1.0)})};
  GammaSymbol sym(d, g, trivial_action(g), ExtensionProfile::variant_a());

  const double th = 0.7;
  // faces of the step: pure phase on the + side, one on the - side
  BoundaryJet ap = sym.boundary(0, 0, th, 1.3, false);
  CHECK(std::abs(ap.val.q(0, 0) - std::exp(cplx(0.0, 2.0 * th))) < 1e-14);
  BoundaryJet am = sym.boundary(0, 0, th, -1.2, false);
  CHECK(std::abs(am.val.q(0, 0) - 1.0) < 1e-14);

  // inverse side is the exact operator inverse outside the unit coball
  BoundarySymbol one = BoundarySymbol::identity(1);
  for (double eta : {1.0, -1.0, 1.6, -2.4}) {
    BoundaryJet a = sym.boundary(0, 0, th, eta, false);
    BoundaryJet r = sym.boundary(0, 0, th, eta, true);
    CHECK(dist_to(compose_boundary(r.val, a.val), one) < 1e-11);
    CHECK(dist_to(compose_boundary(a.val, r.val), one) < 1e-11);
  }
  // and only an interpolation inside
  BoundaryJet a = sym.boundary(0, 0, 0.9, 0.4, false);
  BoundaryJet r = sym.boundary(0, 0, 0.9, 0.4, true);
  CHECK(dist_to(compose_boundary(r.val, a.val), one) > 1e-4);

  // the trivial outer wall is exactly the identity on both sides
  CHECK(dist_to(sym.boundary(0, 1, 0.3, 0.5, false).val, one) < 1e-15);
  CHECK(dist_to(sym.boundary(0, 1, 0.3, 0.5, true).val, one) < 1e-15);
}

TEST_CASE("degenerate winding freezes the step at one half") {
  Geometry g = build_geometry({"annulus", 1.0, 2.0, 16, 48});
  GSymbolDesc d;
  d.terms = {term_const(0, 1.0, {winding(2, 0.0, true), constant(1.0)})};
  GammaSymbol sym(d, g, trivial_action(g), ExtensionProfile::variant_a());
  for (double eta : {-1.7, 0.0, 0.6, 2.2}) {
    BoundaryJet a = sym.boundary(0, 0, 0.4, eta, false);
    cplx want = 0.5 * (1.0 + std::exp(cplx(0.0, 0.8)));
    CHECK(std::abs(a.val.q(0, 0) - want) < 1e-14);
    CHECK(dist_to(a.d[1], bs_zero(1)) < 1e-15);
  }
}

TEST_CASE("winding jets match finite differences") {
  Geometry g = build_geometry({"annulus", 1.0, 2.0, 16, 48});
  GSymbolDesc d;
  d.terms = {term_const(0, 1.0, {winding(2, 0.3), constant(1.0)})};
  GammaSymbol sym(d, g, trivial_action(g), ExtensionProfile::variant_a());

  const double th = 0.8, eta = 0.35, h = 1e-3;
  BoundaryJet j = sym.boundary(0, 0, th, eta, false);
  BoundarySymbol fd_th = fd4(
      [&](double s) { return sym.boundary(0, 0, th + s, eta, false).val; }, h);
  BoundarySymbol fd_eta = fd4(
      [&](double s) { return sym.boundary(0, 0, th, eta + s, false).val; }, h);
  CHECK(dist_to(j.d[0], fd_th) < 1e-8);
  CHECK(dist_to(j.d[1], fd_eta) < 1e-8);

  // on the plateau the eta slot vanishes identically
  BoundaryJet p = sym.boundary(0, 0, th, 1.5, false);
  CHECK(dist_to(p.d[1], bs_zero(1)) < 1e-15);
  CHECK(dist_to(p.d[0], bs_zero(1)) > 0.5);

  // inverse side jets differentiate the blend
  BoundaryJet r = sym.boundary(0, 0, th, eta, true);
  BoundarySymbol fr_th = fd4(
      [&](double s) { return sym.boundary(0, 0, th + s, eta, true).val; }, h);
  BoundarySymbol fr_eta = fd4(
      [&](double s) { return sym.boundary(0, 0, th, eta + s, true).val; }, h);
  CHECK(dist_to(r.d[0], fr_th) < 1e-8);
  CHECK(dist_to(r.d[1], fr_eta) < 1e-8);
}

TEST_CASE("tilt family is exactly invertible and twisted homogeneous") {
  Geometry g = build_geometry({"annulus", 1.0, 2.0, 16, 48});
  GSymbolDesc d;
  d.terms = {term_const(0, 1.0, {tilt(0.7), constant(1.0)})};
  GammaSymbol sym(d, g, trivial_action(g), ExtensionProfile::variant_a());

  BoundarySymbol one = BoundarySymbol::identity(1);
  for (double eta : {0.0, 0.08, 0.4, 0.9, 1.7, -2.3}) {
    BoundaryJet a = sym.boundary(0, 0, 0.5, eta, false);
    BoundaryJet r = sym.boundary(0, 0, 0.5, eta, true);
    CHECK(dist_to(compose_boundary(r.val, a.val), one) < 1e-10);
    CHECK(dist_to(compose_boundary(a.val, r.val), one) < 1e-10);
  }

  // degree zero twisted homogeneity on the plateau: a(lam eta) at xi equals
  // a(eta) at xi / lam
  const double lam = 2.5;
  for (double eta : {1.0, 1.4, -1.1}) {
    BoundaryJet a1 = sym.boundary(0, 0, 0.5, eta, false);
    BoundaryJet a2 = sym.boundary(0, 0, 0.5, lam * eta, false);
    for (double xi : {0.9, -2.1}) {
      Mat lhs = evaluate(a2.val.a, cplx(xi, 0.0));
      Mat rhs = evaluate(a1.val.a, cplx(xi / lam, 0.0));
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-13);
    }
  }
}

TEST_CASE("tilt jets match finite differences in the blend zone") {
  Geometry g = build_geometry({"annulus", 1.0, 2.0, 16, 48});
  GSymbolDesc d;
  d.terms = {term_const(0, 1.0, {tilt(0.7), constant(1.0)})};
  GammaSymbol sym(d, g, trivial_action(g), ExtensionProfile::variant_a());

  const double h = 1e-3;
  for (double eta : {0.7, 1.3}) {
    BoundaryJet j = sym.boundary(0, 0, 0.2, eta, false);
    BoundarySymbol fd_eta = fd4(
        [&](double s) { return sym.boundary(0, 0, 0.2, eta + s, false).val; },
        h);
    CHECK(dist_to(j.d[1], fd_eta) < 1e-7);
    CHECK(dist_to(j.d[0], bs_zero(1)) < 1e-15);

    BoundaryJet r = sym.boundary(0, 0, 0.2, eta, true);
    BoundarySymbol fr_eta = fd4(
        [&](double s) { return sym.boundary(0, 0, 0.2, eta + s, true).val; },
        h);
    CHECK(dist_to(r.d[1], fr_eta) < 1e-7);
  }
}

TEST_CASE("product families compose values and jets by the Leibniz rule") {
  Geometry g = build_geometry({"annulus", 1.0, 2.0, 16, 48});
  GSymbolDesc d;
  d.terms = {term_const(0, 1.0,
                        {product({tilt(0.7), winding(2, 0.3)}), constant(1.0)})};
  GammaSymbol sym(d, g, trivial_action(g), ExtensionProfile::variant_a());

  const double th = 1.1, eta = 0.55, h = 1e-3;
  BoundaryJet j = sym.boundary(0, 0, th, eta, false);
  BoundarySymbol fd_th = fd4(
      [&](double s) { return sym.boundary(0, 0, th + s, eta, false).val; }, h);
  BoundarySymbol fd_eta = fd4(
      [&](double s) { return sym.boundary(0, 0, th, eta + s, false).val; }, h);
  CHECK(dist_to(j.d[0], fd_th) < 1e-7);
  CHECK(dist_to(j.d[1], fd_eta) < 1e-7);

  // the reversed inverse side is exact on the plateau
  BoundarySymbol one = BoundarySymbol::identity(1);
  for (double eta2 : {1.0, -1.3, 2.1}) {
    BoundaryJet a = sym.boundary(0, 0, th, eta2, false);
    BoundaryJet r = sym.boundary(0, 0, th, eta2, true);
    CHECK(dist_to(compose_boundary(r.val, a.val), one) < 1e-10);
    CHECK(dist_to(compose_boundary(a.val, r.val), one) < 1e-10);
  }
}

TEST_CASE("crossed face inverse solves the twisted convolution") {
  Geometry g = build_geometry({"annulus", 1.0, 2.0, 16, 48});
  GroupAction act = rotation_action(g, 2);
  GSymbolDesc d;
  d.terms = {term_const(0, 1.0, {winding(2, 0.3), constant(1.0)}),
             term_const(1, 0.35, {constant(0.35), constant(0.35)})};
  GammaSymbol sym(d, g, act, ExtensionProfile::variant_a());

  const double th = 0.4;
  BoundarySymbol one = BoundarySymbol::identity(1);
  for (double eta : {1.4, -1.4}) {
    auto a = [&](int gm, double t) { return sym.boundary(gm, 0, t, eta, false).val; };
    auto r = [&](int gm, double t) { return sym.boundary(gm, 0, t, eta, true).val; };
    // (r * a)_e(x) = r_e(x) a_e(x) + r_s(x) a_s(x - pi)
    BoundarySymbol ce = bs_add(compose_boundary(r(0, th), a(0, th)),
                               compose_boundary(r(1, th), a(1, th - kPi)));
    BoundarySymbol cs = bs_add(compose_boundary(r(0, th), a(1, th)),
                               compose_boundary(r(1, th), a(0, th - kPi)));
    CHECK(dist_to(ce, one) < 1e-9);
    CHECK(dist_to(cs, bs_zero(1)) < 1e-9);
  }
  // inside the coball the blend is not an inverse
  BoundarySymbol ce0 =
      bs_add(compose_boundary(sym.boundary(0, 0, th, 0.3, true).val,
                              sym.boundary(0, 0, th, 0.3, false).val),
             compose_boundary(sym.boundary(1, 0, th, 0.3, true).val,
                              sym.boundary(1, 0, th - kPi, 0.3, false).val));
  CHECK(dist_to(ce0, one) > 1e-3);

  // crossed inverse side jets still match finite differences
  const double h = 1e-3, eta = 0.5;
  for (int gm : {0, 1}) {
    BoundaryJet rj = sym.boundary(gm, 0, th, eta, true);
    BoundarySymbol fr_th = fd4(
        [&](double s) { return sym.boundary(gm, 0, th + s, eta, true).val; },
        h);
    BoundarySymbol fr_eta = fd4(
        [&](double s) { return sym.boundary(gm, 0, th, eta + s, true).val; },
        h);
    CHECK(dist_to(rj.d[0], fr_th) < 1e-7);
    CHECK(dist_to(rj.d[1], fr_eta) < 1e-7);
  }
}

TEST_CASE("collar tilt interior restricts to the wall families exactly") {
  Geometry g = build_geometry({"annulus", 1.0, 2.0, 16, 48});
  GSymbolDesc d;
  d.terms = {term_collar(0.7, {product({tilt(0.7), winding(2, 0.3)}), tilt(0.7)})};
  GammaSymbol sym(d, g, trivial_action(g), ExtensionProfile::variant_a());
  CHECK(sym.compatibility_defect() < 1e-13);
  sym.check_interior();
  sym.check_boundary();
}

TEST_CASE("interior extension is homogeneous on plateau rays") {
  Geometry g = build_geometry({"annulus", 1.0, 2.0, 16, 48});
  GSymbolDesc d;
  d.terms = {term_collar(0.7, {tilt(0.7), tilt(0.7)})};
  GammaSymbol sym(d, g, trivial_action(g), ExtensionProfile::variant_a());

  RVec x(2);
  x << 1.3, 0.7;
  const double lam = 3.0;
  RVec xi(2), xil(2);
  xi << 0.6, 1.1;
  xil = lam * xi;
  for (bool r_side : {false, true}) {
    Mat a1 = sym.interior(0, 0, x, xi, r_side);
    Mat a2 = sym.interior(0, 0, x, xil, r_side);
    CHECK((a1 - a2).cwiseAbs().maxCoeff() < 1e-14);
  }
  // inside the wedge the extension is twisted instead of jointly homogeneous
  RVec xw(2), xwl(2);
  xw << 0.6, 0.8;
  xwl = lam * xw;
  Mat w1 = sym.interior(0, 0, x, xw, false);
  Mat w2 = sym.interior(0, 0, x, xwl, false);
  CHECK((w1 - w2).cwiseAbs().maxCoeff() > 1e-3);

  // the two sides are exact pointwise inverses of each other
  for (double eta : {0.3, 0.9, 1.6, -2.2}) {
    RVec xx(2);
    xx << 0.4, eta;
    Mat a = sym.interior(0, 0, x, xx, false);
    Mat r = sym.interior(0, 0, x, xx, true);
    CHECK(((a * r) - Mat::Identity(1, 1)).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("radial fibers match the direct interior evaluation") {
  Geometry g = build_geometry({"annulus", 1.0, 2.0, 16, 48});
  GSymbolDesc d;
  d.terms = {term_collar(0.7, {tilt(0.7), tilt(0.7)})};
  GammaSymbol sym(d, g, trivial_action(g), ExtensionProfile::variant_a());

  for (double r : {1.1, 1.4, 1.9})
    for (int m : {-3, -1, 0, 2}) {
      RationalFn f = sym.interior_radial(0, r, m);
      if (m == 0) CHECK(f.terms.empty());
      for (double xir : {-2.3, 0.4, 1.7}) {
        RVec x(2), xi(2);
        x << r, 0.0;
        xi << xir, double(m);
        Mat want = sym.interior(0, 0, x, xi, false);
        Mat got = evaluate(f, cplx(xir, 0.0));
        CHECK((want - got).cwiseAbs().maxCoeff() < 1e-14);
      }
    }

  // constant crossed coefficients produce constant fibers
  GroupAction act = rotation_action(g, 2);
  GSymbolDesc dc;
  dc.terms = {term_const(0, 1.0, {winding(2, 0.3), constant(1.0)}),
              term_const(1, 0.35, {constant(0.35), constant(0.35)})};
  GammaSymbol symc(dc, g, act, ExtensionProfile::variant_a());
  RationalFn fc = symc.interior_radial(1, 1.5, 4);
  CHECK(fc.terms.empty());
  CHECK(std::abs(fc.constant(0, 0) - 0.35) < 1e-15);
}

TEST_CASE("ellipticity certificates accept the bundled symbols") {
  Geometry g = build_geometry({"annulus", 1.0, 2.0, 16, 48});

  GSymbolDesc d1;
  d1.terms = {term_const(0, 1.0, {winding(2, 0.3), constant(1.0)})};
  GammaSymbol s1(d1, g, trivial_action(g), ExtensionProfile::variant_a());
  s1.check_interior();
  s1.check_boundary();
  CHECK(s1.compatibility_defect() < 1e-13);

  GroupAction act = rotation_action(g, 2);
  GSymbolDesc d2;
  d2.terms = {term_const(0, 1.0, {winding(2, 0.3), constant(1.0)}),
              term_const(1, 0.35, {constant(0.35), constant(0.35)})};
  GammaSymbol s2(d2, g, act, ExtensionProfile::variant_a());
  s2.check_interior();
  s2.check_boundary();
  CHECK(s2.compatibility_defect() < 1e-13);

  Geometry disk = build_geometry({"disk", 0.0, 2.0, 16, 48});
  GroupAction a3 = rotation_action(disk, 3);
  GSymbolDesc d3;
  d3.terms = {term_const(0, 1.0, {winding(3, 0.3)}),
              term_const(1, 0.3, {constant(0.3)}),
              term_const(2, 0.15, {constant(0.15)})};
  GammaSymbol s3(d3, disk, a3, ExtensionProfile::variant_a());
  s3.check_interior();
  s3.check_boundary();
  CHECK(s3.compatibility_defect() < 1e-13);
}

TEST_CASE("certificates locate the failures of degenerate symbols") {
  Geometry g = build_geometry({"annulus", 1.0, 2.0, 16, 48});
  GSymbolDesc d;
  d.terms = {term_const(0, 1.0, {winding(2, 0.0, true), constant(1.0)})};
  GammaSymbol sym(d, g, trivial_action(g), ExtensionProfile::variant_a());
  sym.check_interior();  // the interior is still fine
  bool threw = false;
  try {
    sym.check_boundary();
  } catch (const NotInvertibleError& e) {
    threw = true;
    CHECK(e.location.find("component 0") != std::string::npos);
    CHECK(e.location.find("theta") != std::string::npos);
  }
  CHECK(threw);

  // a singular crossed constant is caught by the interior certificate
  Geometry iv = build_geometry({"interval", 0.0, 1.0, 64, 0});
  GroupAction ref = reflection_action(iv);
  GSymbolDesc ds;
  ds.terms = {term_const(0, 1.0, {constant(1.0), constant(1.0)}),
              term_const(1, 1.0, {constant(1.0), constant(1.0)})};
  GammaSymbol ss(ds, iv, ref, ExtensionProfile::variant_a());
  CHECK_THROWS_AS(ss.check_interior(), NotInvertibleError);
  CHECK_THROWS_AS(ss.interior(0, 0, RVec::Constant(1, 0.5),
                              RVec::Constant(1, 1.0), true),
                  NotInvertibleError);
}

TEST_CASE("interval reflection symbols invert as a crossed pair") {
  Geometry g = build_geometry({"interval", 0.0, 1.0, 64, 0});
  GroupAction act = reflection_action(g);
  GSymbolDesc d;
  d.terms = {term_const(0, 1.0,
                        {green_fam(1.0, 1.3, 0.8), green_fam(1.0, 1.3, 0.8)}),
             term_const(1, 0.35,
                        {green_fam(0.35, 0.4, 0.3), green_fam(0.35, 0.4, 0.3)})};
  GammaSymbol sym(d, g, act, ExtensionProfile::variant_a());
  CHECK(sym.nd(0) == 0);
  CHECK(sym.nd(1) == 0);
  sym.check_interior();
  sym.check_boundary();
  CHECK(sym.compatibility_defect() < 1e-13);

  BoundarySymbol one = BoundarySymbol::identity(1);
  for (int bc : {0, 1}) {
    auto a = [&](int gm, int c) { return sym.boundary(gm, c, 0, 0, false).val; };
    auto r = [&](int gm, int c) { return sym.boundary(gm, c, 0, 0, true).val; };
    int other = 1 - bc;
    // the reflection swaps the two boundary points in the twisted product
    BoundarySymbol ce = bs_add(compose_boundary(r(0, bc), a(0, bc)),
                               compose_boundary(r(1, bc), a(1, other)));
    BoundarySymbol cs = bs_add(compose_boundary(r(0, bc), a(1, bc)),
                               compose_boundary(r(1, bc), a(0, other)));
    CHECK(dist_to(ce, one) < 1e-9);
    CHECK(dist_to(cs, bs_zero(1)) < 1e-9);
    CHECK(sym.boundary(0, bc, 0, 0, true).d.empty());
  }
}

TEST_CASE("block assembly is an algebra morphism") {
  // dim one blocks drawn from the concrete families: rational poles from
  // the tilt, a half line kernel from the green, phases from the winding
  Geometry g = build_geometry({"annulus", 1.0, 2.0, 16, 48});
  GSymbolDesc d;
  d.terms = {term_const(0, 1.0, {tilt(0.7), constant(1.0)})};
  GammaSymbol sym(d, g, trivial_action(g), ExtensionProfile::variant_a());

  Geometry iv = build_geometry({"interval", 0.0, 1.0, 64, 0});
  GSymbolDesc dg;
  dg.terms = {term_const(0, 1.0,
                         {green_fam(1.1, 1.3, 0.8), green_fam(0.9, 0.7, 0.25)})};
  GammaSymbol symg(dg, iv, trivial_action(iv), ExtensionProfile::variant_a());

  std::vector<BoundarySymbol> blocks{
      symg.boundary(0, 0, 0, 0, false).val,
      bs_scale(sym.boundary(0, 0, 0.8, 0.7, false).val, 0.4),
      bs_scale(sym.boundary(0, 0, 0.7, 0.5, true).val, 0.3),
      symg.boundary(0, 1, 0, 0, false).val};
  std::vector<BoundarySymbol> blocks2{
      bs_scale(sym.boundary(0, 0, 0.1, 1.2, false).val, 0.9),
      symg.boundary(0, 1, 0, 0, false).val,
      symg.boundary(0, 0, 0, 0, false).val,
      bs_scale(sym.boundary(0, 0, 0.4, -0.6, true).val, 1.1)};

  BoundarySymbol A = bs_assemble(blocks, 2);
  BoundarySymbol B = bs_assemble(blocks2, 2);

  // extraction undoes assembly
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(dist_to(bs_block(A, i, j, 1), blocks[i * 2 + j]) < 1e-13);

  // block products of the assembly match the assembled product
  BoundarySymbol AB = compose_boundary(A, B);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      BoundarySymbol want =
          bs_add(compose_boundary(blocks[i * 2 + 0], blocks2[0 * 2 + j]),
                 compose_boundary(blocks[i * 2 + 1], blocks2[1 * 2 + j]));
      CHECK(dist_to(bs_block(AB, i, j, 1), want) < 1e-11);
    }
}

TEST_CASE("descriptor validation rejects malformed input") {
  Geometry an = build_geometry({"annulus", 1.0, 2.0, 16, 48});
  Geometry iv = build_geometry({"interval", 0.0, 1.0, 64, 0});
  ExtensionProfile prof = ExtensionProfile::variant_a();

  // collar tilt needs a tangential direction
  GSymbolDesc d1;
  d1.terms = {term_collar(0.7, {green_fam(1.0, 1.3, 0.8), green_fam(1.0, 1.3, 0.8)})};
  CHECK_THROWS_AS(GammaSymbol(d1, iv, trivial_action(iv), prof), ConfigError);

  // green families live on point components only
  GSymbolDesc d2;
  d2.terms = {term_const(0, 1.0, {green_fam(1.0, 1.3, 0.8), constant(1.0)})};
  CHECK_THROWS_AS(GammaSymbol(d2, an, trivial_action(an), prof), ConfigError);

  // tilt strength must stay above -1
  GSymbolDesc d3;
  d3.terms = {term_const(0, 1.0, {tilt(-1.0), constant(1.0)})};
  CHECK_THROWS_AS(GammaSymbol(d3, an, trivial_action(an), prof), ConfigError);

  // boundary family count must match the component count
  GSymbolDesc d4;
  d4.terms = {term_const(0, 1.0, {winding(2, 0.3)})};
  CHECK_THROWS_AS(GammaSymbol(d4, an, trivial_action(an), prof), ConfigError);

  // the angular grid must be commensurate with the rotation order
  Geometry disk = build_geometry({"disk", 0.0, 2.0, 16, 64});
  GroupAction a3 = rotation_action(disk, 3);
  GSymbolDesc d5;
  d5.terms = {term_const(0, 1.0, {winding(3, 0.3)})};
  CHECK_THROWS_AS(GammaSymbol(d5, disk, a3, prof), ConfigError);

  // duplicate terms for one group element
  GSymbolDesc d6;
  d6.terms = {term_const(0, 1.0, {winding(2, 0.3), constant(1.0)}),
              term_const(0, 0.5, {constant(0.5), constant(0.5)})};
  CHECK_THROWS_AS(GammaSymbol(d6, an, trivial_action(an), prof), ConfigError);

  // unknown kinds
  GSymbolDesc d7;
  BoundaryFamilyDesc bogus;
  bogus.kind = "spiral";
  d7.terms = {term_const(0, 1.0, {bogus, constant(1.0)})};
  CHECK_THROWS_AS(GammaSymbol(d7, an, trivial_action(an), prof), ConfigError);
}

TEST_CASE("extension profiles agree on the plateau and differ inside") {
  Geometry g = build_geometry({"annulus", 1.0, 2.0, 16, 48});
  GSymbolDesc d;
  d.terms = {term_const(0, 1.0, {winding(2, 0.3), constant(1.0)})};
  GammaSymbol sa(d, g, trivial_action(g), ExtensionProfile::variant_a());
  GammaSymbol sb(d, g, trivial_action(g), ExtensionProfile::variant_b());

  for (double eta : {1.2, -1.5}) {
    for (bool r_side : {false, true}) {
      BoundaryJet ja = sa.boundary(0, 0, 0.6, eta, r_side);
      BoundaryJet jb = sb.boundary(0, 0, 0.6, eta, r_side);
      CHECK(dist_to(ja.val, jb.val) < 1e-14);
    }
  }
  BoundaryJet ja = sa.boundary(0, 0, 0.6, 0.5, false);
  BoundaryJet jb = sb.boundary(0, 0, 0.6, 0.5, false);
  CHECK(dist_to(ja.val, jb.val) > 1e-3);
}
