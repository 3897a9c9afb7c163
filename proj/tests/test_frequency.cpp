#include <catch_amalgamated.hpp>

#include "tfb/frequency.hpp"
#include "tfb/geometry.hpp"
#include "tfb/grid.hpp"
#include "tfb/homogeneous.hpp"

using namespace tfb;

namespace {

constexpr Vec kOrigin{0.0, 0.0, 0.0};

ScalarField embed2d(Family f, int m, double s, double h, double half_width = 1.0) {
  const GridSpec g = make_grid(2, half_width, h, 1.0 - 2.0 * s);
  return embed_profile(make_profile(f, m, s), g);
}

}  // namespace

TEST_CASE("cutoff function", "[frequency]") {
  CHECK(phi_cutoff(0.0) == 1.0);
  CHECK(phi_cutoff(0.25) == 1.0);
  CHECK(phi_cutoff(0.5) == 1.0);
  CHECK(phi_cutoff(0.75) == 0.5);
  CHECK(phi_cutoff(1.0) == 0.0);
  CHECK(phi_cutoff(2.0) == 0.0);
  CHECK_THROWS_AS(phi_cutoff(-0.1), std::domain_error);
}

TEST_CASE("frequency of homogeneous profiles is the homogeneity", "[frequency]") {
  const double h = 1.0 / 256;
  SECTION("h_{1+s} at a=0 has I = 1.5") {
    const ScalarField f = embed2d(Family::Psi, 1, 0.5, h);
    for (double r : {0.1, 0.2, 0.4}) {
      CHECK_THAT(frequency_components(f, kOrigin, r).I,
                 Catch::Matchers::WithinAbs(1.5, 0.03));
    }
  }
  SECTION("Phi_2 has I = 2") {
    const ScalarField f = embed2d(Family::Phi, 2, 0.5, h);
    for (double r : {0.1, 0.2, 0.4}) {
      CHECK_THAT(frequency_components(f, kOrigin, r).I, Catch::Matchers::WithinAbs(2.0, 0.03));
    }
  }
  SECTION("constants have D = 0 and I = 0") {
    const GridSpec g = make_grid(2, 1.0, 1.0 / 64, 0.0);
    const ScalarField f = sample(g, [](const Vec&) { return 2.5; });
    const FrequencyComponents c = frequency_components(f, kOrigin, 0.25);
    CHECK(c.D == 0.0);
    CHECK(c.I == 0.0);
    CHECK(c.H > 0.0);
  }
  SECTION("identically zero field is an error") {
    const GridSpec g = make_grid(2, 1.0, 1.0 / 64, 0.0);
    CHECK_THROWS_AS(frequency_components(ScalarField(g), kOrigin, 0.25), std::domain_error);
  }
  SECTION("ball containment is enforced") {
    const ScalarField f = embed2d(Family::Psi, 1, 0.5, 1.0 / 64);
    CHECK_THROWS_AS(frequency_components(f, {0.5, 0.0, 0.0}, 0.6), std::invalid_argument);
    CHECK_THROWS_AS(frequency_components(f, {0.0, 0.5, 0.0}, 0.1), std::invalid_argument);
  }
}

TEST_CASE("frequency curves and monotonicity flags", "[frequency]") {
  const ScalarField f = embed2d(Family::Psi, 1, 0.5, 1.0 / 128);
  const double radii[] = {0.1, 0.2, 0.4};
  const FrequencyCurve curve = frequency_curve(f, kOrigin, radii, 0.05);
  REQUIRE(curve.I.size() == 3);
  for (double I : curve.I) CHECK_THAT(I, Catch::Matchers::WithinAbs(1.5, 0.05));
  CHECK(curve.monotonicity_violations == 0);

  const double one[] = {0.25};
  CHECK(frequency_curve(f, kOrigin, one).I.size() == 1);
}

TEST_CASE("differential identities of H and D", "[frequency]") {
  const double h = 1.0 / 256;
  for (double s : {0.5, 0.3}) {
    const ScalarField f = embed2d(Family::Psi, 1, s, h);
    const IdentityResiduals res = verify_frequency_identities(f, kOrigin, 0.25, 1e-3);
    INFO("s=" << s);
    CHECK(res.h_prime_rel < 0.02);
    CHECK(res.d_prime_rel < 0.02);
    CHECK(res.d_alt_rel < 0.02);
    // equality case of Cauchy-Schwarz for homogeneous fields
    CHECK(res.cauchy_schwarz > -1e-6);
    CHECK(res.cauchy_schwarz < 0.01);
  }
  const GridSpec g = make_grid(2, 1.0, 1.0 / 64, 0.0);
  CHECK_THROWS_AS(verify_frequency_identities(ScalarField(g), kOrigin, 0.25, 1e-3),
                  std::domain_error);
}

TEST_CASE("H doubling exponent", "[frequency]") {
  const double h = 1.0 / 256;
  SECTION("h_2 at n=1, a=0: H(2r)/H(r) = 2^(n+a+2 lambda) = 32") {
    const ScalarField f = embed2d(Family::Phi, 2, 0.5, h);
    const double r = 0.2;
    const double ratio = frequency_components(f, kOrigin, 2.0 * r).H /
                         frequency_components(f, kOrigin, r).H;
    CHECK_THAT(ratio, Catch::Matchers::WithinRel(32.0, 0.03));
    CHECK_THAT(h_scaling_check(f, kOrigin, r), Catch::Matchers::WithinAbs(0.0, 0.05));
  }
  SECTION("constant field doubles at the volume exponent n+a") {
    const GridSpec g = make_grid(2, 1.0, 1.0 / 128, 0.4);
    const ScalarField f = sample(g, [](const Vec&) { return 1.0; });
    const double r = 0.2;
    const double lhs = std::log2(frequency_components(f, kOrigin, 2.0 * r).H /
                                 frequency_components(f, kOrigin, r).H);
    CHECK_THAT(lhs, Catch::Matchers::WithinAbs(1.4, 0.02));
  }
  SECTION("radius beyond the box is an error") {
    const ScalarField f = embed2d(Family::Phi, 2, 0.5, 1.0 / 64);
    CHECK_THROWS_AS(h_scaling_check(f, kOrigin, 0.6), std::invalid_argument);
  }
}

TEST_CASE("radial oscillation records", "[frequency]") {
  const ScalarField f = embed2d(Family::Psi, 1, 0.5, 1.0 / 128);
  const OscillationRecord rec = delta_osc(f, kOrigin, 0.1, 0.4);
  CHECK_THAT(rec.delta, Catch::Matchers::WithinAbs(0.0, 0.02));
  CHECK(delta_osc(f, kOrigin, 0.25, 0.25).delta == 0.0);
  CHECK_THROWS_AS(delta_osc(f, kOrigin, 0.4, 0.1), std::invalid_argument);
}

TEST_CASE("L2 mass is controlled by r H", "[frequency]") {
  for (double s : {0.5, 0.3}) {
    const ScalarField f = embed2d(Family::Psi, 1, s, 1.0 / 256);
    const double a = f.spec.weight_exponent();
    for (double r : {0.2, 0.4}) {
      double l2 = 0.0;
      detail::ball_quadrature(f, kOrigin, r,
                              [&](const Vec& q, double, double u, const Vec&, double frac) {
                                l2 += u * u * std::pow(q[1], a) * frac;
                              });
      l2 *= 2.0 * f.spec.spacing() * f.spec.spacing();
      const double H = frequency_components(f, kOrigin, r).H;
      CHECK(l2 <= r * H * 1.02);
    }
  }
}

TEST_CASE("frequency is scaling invariant", "[frequency]") {
  // v(y) = c u(x0 + r y) has I_v(0, rho) = I_u(x0, rho r)
  const ScalarField u = embed2d(Family::Psi, 1, 0.5, 1.0 / 256);
  const Vec x0{0.125, 0.0, 0.0};
  for (double c : {1.0, 5.0}) {
    for (double r : {0.5, 0.25}) {
      const GridSpec vg = make_grid(2, 1.0, 1.0 / 128, 0.0);
      const ScalarField v = sample(vg, [&](const Vec& y) {
        return c * interpolate(u, {x0[0] + r * y[0], r * y[1], 0.0});
      });
      for (double rho : {0.25, 0.5}) {
        const double lhs = frequency_components(v, kOrigin, rho).I;
        const double rhs = frequency_components(u, x0, rho * r).I;
        CHECK_THAT(lhs, Catch::Matchers::WithinAbs(rhs, 0.06));
      }
    }
  }
}

TEST_CASE("maximal frequency over free boundary points", "[frequency]") {
  SECTION("spine points of an embedded profile share the frequency") {
    const GridSpec g = make_grid(3, 1.0, 1.0 / 64, 0.0);
    const ScalarField f = embed_profile(make_profile(Family::Psi, 1, 0.5), g);
    const ThinPointSet sets = extract_sets(f);
    const auto fb = sets.fb_points();
    REQUIRE(!fb.empty());
    const auto theta = theta_max(f, kOrigin, 0.3, fb);
    REQUIRE(theta.has_value());
    CHECK_THAT(*theta, Catch::Matchers::WithinAbs(1.5, 0.03));
  }
  SECTION("empty free boundary yields no value") {
    const GridSpec g = make_grid(2, 1.0, 1.0 / 32, 0.0);
    const ScalarField f = sample(g, [](const Vec&) { return 1.0; });
    CHECK(!theta_max(f, kOrigin, 0.3, {}).has_value());
  }
  SECTION("single point reduces to its frequency") {
    const ScalarField f = embed2d(Family::Psi, 1, 0.5, 1.0 / 128);
    const std::vector<Vec> fb{kOrigin};
    const auto theta = theta_max(f, kOrigin, 0.25, fb);
    REQUIRE(theta.has_value());
    CHECK(*theta == frequency_components(f, kOrigin, 0.25).I);
  }
}

TEST_CASE("almost homogeneous classification", "[frequency]") {
  const double h = 1.0 / 64;
  const GridSpec g = make_grid(2, 1.25, h, 0.0);
  const ScalarField f = embed_profile(make_profile(Family::Psi, 1, 0.5), g);
  const ThinPointSet sets = extract_sets(f);
  const auto fb = sets.fb_points();
  REQUIRE(!fb.empty());
  CHECK(classify_almost_homogeneous(f, kOrigin, 0.02, fb));
  // a center with no contact nearby is not almost homogeneous
  CHECK(!classify_almost_homogeneous(f, {0.2, 0.0, 0.0}, 1.0, fb));
}

TEST_CASE("spatial oscillation is controlled by radial oscillations", "[frequency]") {
  const GridSpec g = make_grid(3, 1.0, 1.0 / 128, 0.0);
  const ScalarField f = embed_profile(make_profile(Family::Psi, 1, 0.5), g);
  const double rho = 0.05, R = 7.0;

  SECTION("R <= 6 is rejected") {
    CHECK_THROWS_AS(spatial_osc_check(f, kOrigin, kOrigin, rho, 6.0), std::invalid_argument);
  }
  SECTION("coincident and spine-pair centers") {
    const SpatialOscRecord rec0 = spatial_osc_check(f, kOrigin, kOrigin, rho, R);
    CHECK(rec0.lhs == 0.0);
    CHECK(rec0.rhs1 <= 0.15);
    CHECK(rec0.rhs2 <= 0.15);

    const Vec x1{0.0, -0.04, 0.0}, x2{0.0, 0.04, 0.0};
    const SpatialOscRecord rec = spatial_osc_check(f, x1, x2, rho, R);
    CHECK(rec.lhs <= 0.03);
    CHECK(rec.rhs1 * rec.rhs1 <= 0.02);  // radial oscillations themselves are small
    CHECK(rec.rhs2 * rec.rhs2 <= 0.02);
  }
}
