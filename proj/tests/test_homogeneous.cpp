#include <catch_amalgamated.hpp>

#include <random>

#include "tfb/frequency.hpp"
#include "tfb/grid.hpp"
#include "tfb/homogeneous.hpp"

using namespace tfb;

namespace {

// Continuum residual div(|t|^a grad u) / |t|^a = Lap u + (a/t) du/dt at a bulk
// point, by fourth-order central differences on the exact evaluator.  Test
// oracle, independent of the grid stencil.
template <class F>
double continuum_pde_residual(F&& u, Vec x, double a, int dim, double step = 1e-3) {
  double lap = 0.0;
  for (int i = 0; i < dim; ++i) {
    Vec p1 = x, p2 = x, m1 = x, m2 = x;
    p1[i] += step;
    p2[i] += 2 * step;
    m1[i] -= step;
    m2[i] -= 2 * step;
    lap += (-u(p2) + 16.0 * u(p1) - 30.0 * u(x) + 16.0 * u(m1) - u(m2)) / (12.0 * step * step);
  }
  Vec p1 = x, p2 = x, m1 = x, m2 = x;
  p1[dim - 1] += step;
  p2[dim - 1] += 2 * step;
  m1[dim - 1] -= step;
  m2[dim - 1] -= 2 * step;
  const double dt = (-u(p2) + 8.0 * u(p1) - 8.0 * u(m1) + u(m2)) / (12.0 * step);
  return lap + a / x[dim - 1] * dt;
}

}  // namespace

TEST_CASE("Phi family closed forms", "[homogeneous]") {
  CHECK(phi_eval(0, 0.3, -0.7, 0.4) == 1.0);
  CHECK(phi_eval(1, 3.0, 7.0, 0.123) == 3.0);
  CHECK_THAT(phi_eval(2, 1.0, 1.0, 0.5), Catch::Matchers::WithinAbs(0.0, 1e-15));
  // alpha_1 = -1/(2(1-s))
  for (double s : {0.3, 0.5, 0.75}) {
    const auto alpha = phi_coefficients(2, s);
    CHECK_THAT(alpha[1], Catch::Matchers::WithinRel(-1.0 / (2.0 * (1.0 - s)), 1e-14));
  }
}

TEST_CASE("Psi family closed forms", "[homogeneous]") {
  CHECK_THAT(psi_eval(1, 1.0, 0.0, 0.5), Catch::Matchers::WithinRel(std::sqrt(2.0), 1e-14));
  for (double s : {0.3, 0.5, 0.75}) CHECK(psi_eval(1, -1.0, 0.0, s) == 0.0);

  // polar identity sqrt(2) rho^{3/2} cos(3 theta / 2) at s = 1/2
  for (double theta : {M_PI / 3.0, 0.4, 1.9, 2.8}) {
    const double rho = 2.0;
    const double expect = std::sqrt(2.0) * std::pow(rho, 1.5) * std::cos(1.5 * theta);
    CHECK_THAT(psi_eval(1, rho * std::cos(theta), rho * std::sin(theta), 0.5),
               Catch::Matchers::WithinAbs(expect, 1e-12));
  }
}

TEST_CASE("Pi family closed forms", "[homogeneous]") {
  CHECK_THAT(pi_eval(0, PolynomialND::constant(1.0, 1), {0.5, 0.0, 0.0}, 0.25, 0.5),
             Catch::Matchers::WithinRel(0.25, 1e-14));
  CHECK(pi_eval_2d(3, 0.7, 0.0, 0.3) == 0.0);
  // m=2, p=x1^2, s=1/2: |x2| (x1^2 - x2^2/3), value 2/3 at (1,1)
  CHECK_THAT(pi_eval_2d(2, 1.0, 1.0, 0.5), Catch::Matchers::WithinRel(2.0 / 3.0, 1e-14));
  PolynomialND bad;
  bad.nvars = 1;
  bad.coeffs[{2, 0, 0}] = 1.0;
  bad.coeffs[{1, 0, 0}] = 1.0;
  CHECK_THROWS_AS(pi_eval(2, bad, {1.0, 0.0, 0.0}, 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("family homogeneity and admissible sign", "[homogeneous]") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> xd(-2.0, 2.0);
  std::uniform_real_distribution<double> yd(0.01, 2.0);
  for (double s : {0.3, 0.5, 0.75}) {
    for (Family f : {Family::Phi, Family::Psi, Family::PsiReflected, Family::Pi}) {
      for (int m : {0, 1, 2, 3}) {
        const double lambda = lambda_of(f, m, s);
        for (double t : {0.5, 2.0, 3.0}) {
          const double x = xd(rng), y = yd(rng);
          const double base = family_eval_2d(f, m, x, y, s);
          const double scaled = family_eval_2d(f, m, t * x, t * y, s);
          CHECK_THAT(scaled, Catch::Matchers::WithinRel(std::pow(t, lambda) * base, 1e-12) ||
                                 Catch::Matchers::WithinAbs(std::pow(t, lambda) * base, 1e-12));
        }
      }
    }
    // thin-trace signs of the admissible members
    for (double x : {-2.0, -0.4, 0.0, 0.4, 2.0}) {
      CHECK(phi_eval(2, x, 0.0, s) >= 0.0);
      CHECK(phi_eval(4, x, 0.0, s) >= 0.0);
      CHECK(psi_eval(1, x, 0.0, s) >= 0.0);
      CHECK(psi_eval(3, x, 0.0, s) >= 0.0);
      if (x <= 0.0) CHECK(psi_eval(1, x, 0.0, s) == 0.0);
    }
  }
}

TEST_CASE("h_lambda normalization and classification", "[homogeneous]") {
  // h_2 at s=1/2 is proportional to x1^2 - x2^2
  const double k = h_lambda_eval(2.0, 1.0, 0.0, 0.5);
  for (double x : {0.3, 1.0, -0.8}) {
    for (double y : {0.1, 0.7}) {
      CHECK_THAT(h_lambda_eval(2.0, x, y, 0.5),
                 Catch::Matchers::WithinRel(k * (x * x - y * y), 1e-12));
    }
  }
  // homogeneity of the normalized representative
  std::mt19937 rng(29);
  std::uniform_real_distribution<double> xd(-1.0, 1.0);
  const double x = xd(rng), y = std::abs(xd(rng)) + 0.01;
  CHECK_THAT(h_lambda_eval(1.5, 2.0 * x, 2.0 * y, 0.5),
             Catch::Matchers::WithinRel(std::pow(2.0, 1.5) * h_lambda_eval(1.5, x, y, 0.5),
                                        1e-12));
  CHECK_THROWS_AS(h_lambda_eval(1.37, 1.0, 1.0, 0.5), std::domain_error);

  SECTION("H(0,1) of the sampled normalized profile is 1 within 2e-3") {
    const GridSpec g = make_grid(2, 1.0, 1.0 / 256, 0.0);
    const HomogeneousProfile p = make_profile(Family::Psi, 1, 0.5);
    const ScalarField f = embed_profile(p, g);
    const double H = frequency_components(f, {0.0, 0.0, 0.0}, 1.0).H;
    CHECK_THAT(H, Catch::Matchers::WithinAbs(1.0, 2e-3));
  }
}

TEST_CASE("embedding profiles into the ambient grid", "[homogeneous]") {
  SECTION("Phi along e1 is constant in e2") {
    const GridSpec g = make_grid(3, 1.0, 0.25, 0.0);
    const ScalarField f = embed_profile(make_profile(Family::Phi, 2, 0.5), g);
    const Idx e = g.extents();
    for (int i = 0; i < e[0]; ++i)
      for (int k = 0; k < e[2]; ++k)
        for (int j = 1; j < e[1]; ++j) CHECK(f.at({i, j, k}) == f.at({i, 0, k}));
  }
  SECTION("rotated Psi matches direct 2D evaluation") {
    const GridSpec g = make_grid(3, 1.0, 0.25, 0.0);
    const double ang = M_PI / 6.0;
    const Vec e{std::cos(ang), std::sin(ang), 0.0};
    const HomogeneousProfile p = make_profile(Family::Psi, 1, 0.5, e, 2.5);
    const ScalarField f = embed_profile(p, g);
    const double K = h_lambda_normalization(1.5, 0.5);
    detail::for_each_node(g, [&](const Idx& idx) {
      const Vec x = g.node_coord(idx);
      const double expect = 2.5 * K * psi_eval(1, x[0] * e[0] + x[1] * e[1], x[2], 0.5);
      CHECK_THAT(f.at(idx), Catch::Matchers::WithinAbs(expect, 1e-12));
    });
  }
  SECTION("zero amplitude gives the zero field") {
    const GridSpec g = make_grid(2, 1.0, 0.5, 0.0);
    const ScalarField f = embed_profile(make_profile(Family::Psi, 1, 0.5, {1, 0, 0}, 0.0), g);
    for (double v : f.values) CHECK(v == 0.0);
  }
  SECTION("mismatched s is rejected") {
    const GridSpec g = make_grid(2, 1.0, 0.5, 0.4);
    CHECK_THROWS_AS(embed_profile(make_profile(Family::Psi, 1, 0.5), g), std::invalid_argument);
  }
  SECTION("spine invariance of the embedded evaluator") {
    const double ang = 0.4;
    const HomogeneousProfile p =
        make_profile(Family::Psi, 1, 0.3, {std::cos(ang), std::sin(ang), 0.0});
    const Vec spine{-std::sin(ang), std::cos(ang), 0.0};  // orthogonal in-plane direction
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> xd(-0.6, 0.6);
    for (int t = 0; t < 20; ++t) {
      const Vec x{xd(rng), xd(rng), std::abs(xd(rng))};
      Vec shifted = x;
      const double step = xd(rng);
      for (int i = 0; i < 3; ++i) shifted[i] += step * spine[i];
      CHECK_THAT(profile_eval(p, shifted, 3),
                 Catch::Matchers::WithinAbs(profile_eval(p, x, 3), 1e-12));
    }
  }
}

TEST_CASE("profile set tables", "[homogeneous]") {
  const ProfileSets phi = profile_sets(make_profile(Family::Phi, 2, 0.5), 3);
  CHECK(phi.lemma_case == 1);
  CHECK(!phi.gamma_empty());
  CHECK(phi.contact({0.0, 0.5, 0.0}, 1e-12));
  CHECK(!phi.contact({0.3, 0.5, 0.0}, 1e-12));
  CHECK(phi.free_boundary({0.0, -0.9, 0.0}, 1e-12));

  const ProfileSets psi = profile_sets(make_profile(Family::Psi, 1, 0.5), 3);
  CHECK(psi.lemma_case == 2);
  CHECK(psi.contact({-0.7, 0.2, 0.0}, 1e-12));
  CHECK(!psi.contact({0.7, 0.2, 0.0}, 1e-12));
  CHECK(psi.free_boundary({0.0, 0.2, 0.0}, 1e-12));

  const ProfileSets psir = profile_sets(make_profile(Family::PsiReflected, 1, 0.5), 3);
  CHECK(psir.contact({0.7, 0.2, 0.0}, 1e-12));
  CHECK(!psir.contact({-0.7, 0.2, 0.0}, 1e-12));

  const ProfileSets pi = profile_sets(make_profile(Family::Pi, 2, 0.5), 3);
  CHECK(pi.lemma_case == 3);
  CHECK(pi.gamma_empty());
  CHECK(pi.contact({0.7, -0.2, 0.0}, 1e-12));
  CHECK(pi.nodal({0.0, 0.4, 0.0}, 1e-12));
  CHECK(!pi.nodal({0.5, 0.4, 0.0}, 1e-12));

  CHECK_THROWS_AS(profile_sets(make_profile(Family::Phi, 3, 0.5), 3), std::invalid_argument);
}

TEST_CASE("superpositions", "[homogeneous]") {
  SECTION("single constant term reduces to the embedded family member") {
    std::vector<SuperpositionTerm> terms;
    terms.push_back({PolynomialND::constant(1.0, 1), Family::Psi, 1});
    const Superposition u = superpose_general(std::move(terms), 0.5, 3);
    std::mt19937 rng(37);
    std::uniform_real_distribution<double> xd(-1.0, 1.0);
    for (int t = 0; t < 20; ++t) {
      const Vec x{xd(rng), xd(rng), std::abs(xd(rng))};
      CHECK_THAT(u(x), Catch::Matchers::WithinAbs(psi_eval(1, x[1], x[2], 0.5), 1e-14));
    }
  }
  SECTION("non-harmonic factor is rejected with the offending multi-index") {
    std::vector<SuperpositionTerm> terms;
    terms.push_back({PolynomialND::monomial({2, 0, 0}, 1.0, 1), Family::Psi, 0});
    CHECK_THROWS_WITH(superpose_general(std::move(terms), 0.5, 3),
                      Catch::Matchers::ContainsSubstring("multi-index (0)"));
  }
  SECTION("x1 Psi_0(x2,x3) + Psi_1(x2,x3) solves the continuum equation off the ray") {
    std::vector<SuperpositionTerm> terms;
    terms.push_back({PolynomialND::monomial({1, 0, 0}, 1.0, 1), Family::Psi, 0});
    terms.push_back({PolynomialND::constant(1.0, 1), Family::Psi, 1});
    const Superposition u = superpose_general(std::move(terms), 0.5, 3);
    const Vec probes[] = {{0.4, 0.5, 0.3}, {-0.3, 0.2, 0.6}, {0.1, -0.5, 0.4}, {0.6, 0.6, 0.2}};
    for (const Vec& x : probes) {
      const double res = continuum_pde_residual(u, x, 0.0, 3);
      CHECK_THAT(res, Catch::Matchers::WithinAbs(0.0, 1e-8));
    }
  }
  SECTION("q(x'') x_n + c Phi_2(x_n, x_{n+1}) builds and solves") {
    std::vector<SuperpositionTerm> terms;
    terms.push_back({PolynomialND::monomial({1, 0, 0}, 1.0, 1), Family::Phi, 1});
    terms.push_back({PolynomialND::constant(0.7, 1), Family::Phi, 2});
    const Superposition u = superpose_general(std::move(terms), 0.5, 3);
    const Vec x{0.3, -0.4, 0.5};
    CHECK_THAT(u(x), Catch::Matchers::WithinRel(
                         0.3 * (-0.4) + 0.7 * phi_eval(2, -0.4, 0.5, 0.5), 1e-13));
    CHECK_THAT(continuum_pde_residual(u, x, 0.0, 3), Catch::Matchers::WithinAbs(0.0, 1e-8));
  }
}

TEST_CASE("sampled family members satisfy the weighted equation at O(h^2)", "[homogeneous]") {
  // max flux-form residual at a fixed margin from the contact set and the
  // plane, halving h twice; measured order must be near 2
  struct Case {
    Family f;
    int m;
  };
  for (double s : {0.3, 0.75}) {
    const double a = 1.0 - 2.0 * s;
    for (const Case c : {Case{Family::Phi, 2}, Case{Family::Psi, 1}, Case{Family::Pi, 0}}) {
      double res[3];
      for (int level = 0; level < 3; ++level) {
        const double h = 1.0 / (16 << level);
        const GridSpec g = make_grid(2, 1.0, h, a);
        const ScalarField f =
            sample(g, [&](const Vec& x) { return family_eval_2d(c.f, c.m, x[0], x[1], s); });
        res[level] = max_divergence_residual(f, [](const Vec& x) {
          return x[1] >= 0.25 && std::hypot(std::min(x[0], 0.0), x[1]) >= 0.25;
        });
      }
      const double order = std::log2(res[1] / res[2]);
      INFO(family_name(c.f) << " m=" << c.m << " s=" << s << " residuals " << res[0] << " "
                            << res[1] << " " << res[2]);
      CHECK(order > 1.7);
    }
  }
}
