#include <catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <random>

#include "tfb/grid.hpp"
#include "tfb/homogeneous.hpp"

using namespace tfb;

TEST_CASE("make_grid validates and counts nodes", "[grid]") {
  const GridSpec g2 = make_grid(2, 1.0, 0.25, 0.0);
  CHECK(g2.extents()[0] == 9);
  CHECK(g2.extents()[1] == 5);
  CHECK(g2.node_count() == 45);
  CHECK(g2.s() == 0.5);

  const GridSpec g3 = make_grid(3, 1.0, 0.5, -0.4);
  CHECK(g3.extents()[0] == 5);
  CHECK(g3.extents()[1] == 5);
  CHECK(g3.extents()[2] == 3);

  CHECK_THROWS_AS(make_grid(2, 1.0, 0.3, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(2, 1.0, 0.25, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(2, 1.0, 0.25, -1.5), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(4, 1.0, 0.25, 0.0), std::invalid_argument);
}

TEST_CASE("sample evaluates at nodes", "[grid]") {
  const GridSpec g = make_grid(2, 1.0, 0.5, 0.0);
  const ScalarField ones = sample(g, [](const Vec&) { return 1.0; });
  for (double v : ones.values) CHECK(v == 1.0);

  // Phi_2 at s=1/2 is x1^2 - x2^2, zero on the diagonal node (1,1)
  const ScalarField phi = sample(g, [&](const Vec& x) { return phi_eval(2, x[0], x[1], 0.5); });
  CHECK(phi.at({4, 2, 0}) == 0.0);

  // Psi_1 at s=1/2 equals sqrt(2) at (1,0)
  const ScalarField psi = sample(g, [&](const Vec& x) { return psi_eval(1, x[0], x[1], 0.5); });
  CHECK_THAT(psi.at({4, 0, 0}), Catch::Matchers::WithinAbs(std::sqrt(2.0), 1e-12));

  CHECK_THROWS_WITH(sample(g, [](const Vec& x) { return x[0] == 0.0 ? 0.0 / 0.0 : 1.0; }),
                    Catch::Matchers::ContainsSubstring("non-finite"));
}

TEST_CASE("interpolation is multilinear-exact and reflects", "[grid]") {
  const GridSpec g = make_grid(2, 1.0, 0.125, 0.0);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  const double a = coef(rng), b = coef(rng), c = coef(rng), d = coef(rng);
  const ScalarField f =
      sample(g, [&](const Vec& x) { return a + b * x[0] + c * x[1] + d * x[0] * x[1]; });

  // exact at nodes
  CHECK(interpolate(f, g.node_coord({3, 2, 0})) == f.at({3, 2, 0}));

  std::uniform_real_distribution<double> px(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double x = px(rng), y = std::abs(px(rng));
    const double expect = a + b * x + c * y + d * x * y;
    CHECK_THAT(interpolate(f, {x, y, 0.0}), Catch::Matchers::WithinAbs(expect, 1e-13));
    // reflection consistency
    CHECK(interpolate(f, {x, -y, 0.0}) == interpolate(f, {x, y, 0.0}));
  }

  const ScalarField lin = sample(g, [](const Vec& x) { return x[0]; });
  CHECK_THAT(interpolate(lin, {0.37, 0.2, 0.0}), Catch::Matchers::WithinAbs(0.37, 1e-14));
  CHECK_THROWS_AS(interpolate(lin, {1.5, 0.0, 0.0}), std::domain_error);
}

TEST_CASE("weighted divergence residual", "[grid]") {
  SECTION("exact for harmonic quadratic at a = 0") {
    const GridSpec g = make_grid(2, 1.0, 0.125, 0.0);
    const ScalarField f = sample(g, [](const Vec& x) { return x[0] * x[0] - x[1] * x[1]; });
    CHECK(max_divergence_residual(f, [](const Vec&) { return true; }) < 1e-12);
  }
  SECTION("zero for constants") {
    const GridSpec g = make_grid(3, 1.0, 0.25, 0.3);
    const ScalarField f = sample(g, [](const Vec&) { return 4.2; });
    CHECK(max_divergence_residual(f, [](const Vec&) { return true; }) < 1e-13);
  }
  SECTION("Pi_0 at a=-0.4: residual decreases under refinement away from the plane") {
    const double s = 0.7;  // a = 1-2s = -0.4
    double prev = 0.0;
    for (int level = 0; level < 3; ++level) {
      const double h = 1.0 / (16 << level);
      const GridSpec g = make_grid(2, 1.0, h, -0.4);
      const ScalarField f = sample(g, [&](const Vec& x) { return pi_eval_2d(0, x[0], x[1], s); });
      const double res =
          max_divergence_residual(f, [](const Vec& x) { return x[1] >= 0.25; });
      if (level > 0) CHECK(res < prev);
      prev = res;
    }
  }
}

TEST_CASE("field dump round-trips with a pinned little-endian header", "[grid]") {
  const GridSpec g = make_grid(2, 0.5, 0.25, -0.25);
  const ScalarField f = sample(g, [](const Vec& x) { return x[0] + 10.0 * x[1]; });
  const std::string path = "tfb_test_dump.bin";
  write_field(f, path);

  std::ifstream is(path, std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)),
                                   std::istreambuf_iterator<char>());
  REQUIRE(bytes.size() == 4 + 4 + 2 * 4 + 8 + 8 + f.values.size() * 8);
  CHECK(bytes[0] == 'T');
  CHECK(bytes[1] == 'F');
  CHECK(bytes[2] == 'B');
  CHECK(bytes[3] == '1');
  CHECK(bytes[4] == 2);  // ambient_dim, little-endian u32
  CHECK(bytes[5] == 0);
  CHECK(bytes[8] == 5);  // plane extent
  CHECK(bytes[12] == 3); // vertical extent

  const ScalarField back = read_field(path);
  CHECK(back.spec == f.spec);
  CHECK(back.values == f.values);
  std::remove(path.c_str());
}
