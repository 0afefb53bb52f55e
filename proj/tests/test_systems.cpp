#include <doctest.h>

#include <random>

#include "ghisd/dynamics.hpp"
#include "ghisd/errors.hpp"
#include "ghisd/systems.hpp"
#include "oracles.hpp"

using namespace ghisd;

namespace {

StateVector random_grid_state(const VectorFieldSystem& system, unsigned seed,
                              double amplitude = 1.0) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> uni(-amplitude, amplitude);
  StateVector s = system.make_state();
  for (Eigen::Index i = 0; i < s.size(); ++i) s.values[i] = uni(rng);
  return s;
}

}  // namespace

TEST_CASE("quartic2d field and energy") {
  auto system = make_system({.kind = SystemKind::kQuartic2d});
  REQUIRE(system->dimension() == 2);
  CHECK(system->inner_weight() == 1.0);

  StateVector min1(Eigen::Vector2d(1.0, 1.0));
  StateVector f = system->eval_field(min1);
  CHECK(f.values[0] == 0.0);
  CHECK(f.values[1] == 0.0);

  StateVector origin(Eigen::Vector2d(0.0, 0.0));
  CHECK(system->eval_energy(origin) == doctest::Approx(2.0).epsilon(1e-14));

  // F = -grad E at a generic point
  StateVector p(Eigen::Vector2d(0.3, -1.7));
  StateVector fp = system->eval_field(p);
  CHECK(fp.values[0] == doctest::Approx(-4.0 * 0.3 * (0.09 - 1.0)));
  CHECK(fp.values[1] == doctest::Approx(4.0 * 1.7 * (2.89 - 1.0)));
}

TEST_CASE("toy3d field vanishes at the tabulated source") {
  auto system = make_system({.kind = SystemKind::kToy3d});
  const auto& a1 = oracles::toy3d_table().front();
  StateVector x(a1.x);
  StateVector f = system->eval_field(x);
  CHECK(f.values.norm() <= 5e-4);  // coordinates are 4-decimal roundings
}

TEST_CASE("toy3d has no energy") {
  auto system = make_system({.kind = SystemKind::kToy3d});
  CHECK(!system->has_energy());
  StateVector x(Eigen::Vector3d(1.0, 2.0, 3.0));
  CHECK_THROWS_AS(system->eval_energy(x), UnsupportedOperation);
}

TEST_CASE("eval_field rejects dimension mismatch") {
  auto system = make_system({.kind = SystemKind::kQuartic2d});
  StateVector bad(Eigen::Vector3d(1.0, 2.0, 3.0));
  CHECK_THROWS_AS(system->eval_field(bad), ContractError);
}

TEST_CASE("allen-cahn basics") {
  SystemSpec spec{.kind = SystemKind::kAllenCahn, .kappa = 0.02, .grid_n = 32};
  auto system = make_system(spec);
  REQUIRE(system->dimension() == 32 * 32);
  CHECK(system->inner_weight() == doctest::Approx(1.0 / 1024.0));
  REQUIRE(system->grid().has_value());
  CHECK(system->grid()->spacing == doctest::Approx(1.0 / 32.0));

  SUBCASE("zero state is stationary, energy 0.25") {
    StateVector phi0 = system->make_state();
    StateVector f = system->eval_field(phi0);
    CHECK(f.values.norm() == 0.0);
    CHECK(system->eval_energy(phi0) == doctest::Approx(0.25).epsilon(1e-13));
  }
  SUBCASE("constant one is stationary with zero energy") {
    StateVector phi1 = system->make_constant_state(1.0);
    StateVector f = system->eval_field(phi1);
    CHECK(f.values.norm() == 0.0);
    CHECK(system->eval_energy(phi1) == doctest::Approx(0.0).epsilon(1e-14));
  }
  SUBCASE("energy is invariant under declared translations") {
    StateVector phi = random_grid_state(*system, 11);
    const double e0 = system->eval_energy(phi);
    CHECK(system->eval_energy(cyclic_shift(phi, 5, 0)) == doctest::Approx(e0).epsilon(1e-12));
    CHECK(system->eval_energy(cyclic_shift(phi, 0, 13)) == doctest::Approx(e0).epsilon(1e-12));
  }
}

TEST_CASE("laplacian_periodic") {
  SystemSpec spec{.kind = SystemKind::kAllenCahn, .kappa = 0.01, .grid_n = 32};
  auto system = make_system(spec);
  const int n = 32;
  const double h = 1.0 / n;

  SUBCASE("constant field maps to zero") {
    StateVector c = system->make_constant_state(3.25);
    StateVector lap = laplacian_periodic(c);
    CHECK(lap.values.cwiseAbs().maxCoeff() <= 1e-9);
  }
  SUBCASE("sin(2 pi x) is a discrete eigenfunction") {
    StateVector phi = system->make_state();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) phi.at(i, j) = std::sin(2.0 * M_PI * j * h);
    const double lambda = -(2.0 / (h * h)) * (1.0 - std::cos(2.0 * M_PI * h));
    StateVector lap = laplacian_periodic(phi);
    for (Eigen::Index i = 0; i < lap.size(); ++i)
      CHECK(lap.values[i] == doctest::Approx(lambda * phi.values[i]).epsilon(1e-10));
  }
  SUBCASE("linearity") {
    StateVector u = random_grid_state(*system, 3);
    StateVector v = random_grid_state(*system, 4);
    StateVector sum = u;
    sum.values += v.values;
    StateVector lap_sum = laplacian_periodic(sum);
    StateVector expect = laplacian_periodic(u);
    expect.values += laplacian_periodic(v).values;
    CHECK((lap_sum.values - expect.values).cwiseAbs().maxCoeff() <= 1e-8);
  }
  SUBCASE("self-adjoint under the mesh-weighted product") {
    StateVector u = random_grid_state(*system, 5);
    StateVector v = random_grid_state(*system, 6);
    const double w = system->inner_weight();
    const double lhs = weighted_dot(laplacian_periodic(u), v, w);
    const double rhs = weighted_dot(u, laplacian_periodic(v), w);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
  }
  SUBCASE("missing grid metadata is a contract violation") {
    StateVector dense(Eigen::Vector3d(1.0, 2.0, 3.0));
    CHECK_THROWS_AS(laplacian_periodic(dense), ContractError);
  }
}

TEST_CASE("sheared phase field") {
  SystemSpec ac{.kind = SystemKind::kAllenCahn, .kappa = 0.01, .grid_n = 32};
  SystemSpec sheared{.kind = SystemKind::kShearedPhaseField,
                     .kappa = 0.01,
                     .gamma = 0.16,
                     .grid_n = 32};

  SUBCASE("constant state kills the shear term") {
    auto system = make_system(sheared);
    StateVector phi1 = system->make_constant_state(1.0);
    CHECK(system->eval_field(phi1).values.norm() == 0.0);
  }
  SUBCASE("gamma = 0 agrees with allen-cahn pointwise") {
    SystemSpec zero_shear = sheared;
    zero_shear.gamma = 0.0;
    auto a = make_system(ac);
    auto b = make_system(zero_shear);
    StateVector phi = random_grid_state(*a, 21);
    StateVector fa = a->eval_field(phi);
    StateVector fb = b->eval_field(phi);
    CHECK((fa.values - fb.values).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("x-translation equivariance is exact") {
    auto system = make_system(sheared);
    StateVector phi = random_grid_state(*system, 22);
    StateVector shifted = cyclic_shift(phi, 0, 7);
    StateVector f_then_shift = cyclic_shift(system->eval_field(phi), 0, 7);
    StateVector shift_then_f = system->eval_field(shifted);
    CHECK((f_then_shift.values - shift_then_f.values).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("declared symmetries") {
    auto a = make_system(ac);
    CHECK(a->symmetry().translations == TranslationSymmetry::kXY);
    CHECK(a->symmetry().sign_flip);
    auto s = make_system(sheared);
    CHECK(s->symmetry().translations == TranslationSymmetry::kXOnly);
    CHECK(s->symmetry().sign_flip);
    auto q = make_system({.kind = SystemKind::kQuartic2d});
    CHECK(q->symmetry().translations == TranslationSymmetry::kNone);
  }
}

TEST_CASE("translation and sign equivariance of allen-cahn") {
  SystemSpec spec{.kind = SystemKind::kAllenCahn, .kappa = 0.02, .grid_n = 32};
  auto system = make_system(spec);
  StateVector phi = random_grid_state(*system, 31);

  SUBCASE("xy translation equivariance is exact") {
    for (auto [si, sj] : {std::pair{3, 0}, {0, 9}, {17, 5}}) {
      StateVector lhs = system->eval_field(cyclic_shift(phi, si, sj));
      StateVector rhs = cyclic_shift(system->eval_field(phi), si, sj);
      CHECK((lhs.values - rhs.values).cwiseAbs().maxCoeff() == 0.0);
    }
  }
  SUBCASE("sign equivariance is exact") {
    StateVector neg = phi;
    neg.values = -neg.values;
    StateVector f_neg = system->eval_field(neg);
    StateVector f = system->eval_field(phi);
    CHECK((f_neg.values + f.values).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("gradient consistency of energy and field") {
  const double eps = 1e-5;
  auto check_consistency = [&](const VectorFieldSystem& system, const StateVector& x,
                               const StateVector& u) {
    StateVector xp = x, xm = x;
    xp.values += eps * u.values;
    xm.values -= eps * u.values;
    const double fd = (system.eval_energy(xp) - system.eval_energy(xm)) / (2.0 * eps);
    const double exact = -weighted_dot(system.eval_field(x), u, system.inner_weight());
    REQUIRE(std::abs(exact) > 1e-3);  // generic direction, no accidental cancellation
    CHECK(std::abs(fd - exact) / std::abs(exact) <= 1e-5);
  };

  SUBCASE("quartic2d") {
    auto system = make_system({.kind = SystemKind::kQuartic2d});
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> uni(-2.0, 2.0);
    for (int trial = 0; trial < 5; ++trial) {
      StateVector x(Eigen::Vector2d(uni(rng), uni(rng)));
      StateVector u(Eigen::Vector2d(uni(rng), uni(rng)));
      u.values.normalize();
      check_consistency(*system, x, u);
    }
  }
  SUBCASE("allen-cahn") {
    SystemSpec spec{.kind = SystemKind::kAllenCahn, .kappa = 0.02, .grid_n = 32};
    auto system = make_system(spec);
    for (unsigned seed : {41u, 42u, 43u}) {
      StateVector x = random_grid_state(*system, seed);
      StateVector u = random_grid_state(*system, seed + 100);
      u.values /= weighted_norm(u, system->inner_weight());
      check_consistency(*system, x, u);
    }
  }
}

TEST_CASE("reversed system flips the field and finds sources as sinks") {
  SystemSpec spec{.kind = SystemKind::kToy3d, .reversed = true};
  auto reversed = make_system(spec);
  auto forward = make_system({.kind = SystemKind::kToy3d});

  StateVector x(Eigen::Vector3d(1.0, -2.0, 0.5));
  CHECK((reversed->eval_field(x).values + forward->eval_field(x).values).norm() == 0.0);

  // a1 is a source of the forward dynamics, hence a sink of the reverse:
  // plain flow of the reversed system converges to it and measures index 0.
  SearchConfig cfg;
  StateVector guess(Eigen::Vector3d(4.0, 3.5, 3.7));
  GhisdOutcome out = ghisd_run(*reversed, guess, Frame{}, cfg);
  REQUIRE(out.status == RunStatus::kConverged);
  CHECK((out.final_x.values - oracles::toy3d_table().front().x).norm() < 1e-3);
  IndexReport report = estimate_index(*reversed, out.final_x, 3, cfg);
  CHECK(report.index == 0);
}

TEST_CASE("spec validation names the offending field") {
  SystemSpec bad_kappa{.kind = SystemKind::kAllenCahn, .kappa = -1.0};
  CHECK_THROWS_WITH_AS(bad_kappa.validate(), doctest::Contains("kappa"), ValidationError);

  SystemSpec bad_n{.kind = SystemKind::kAllenCahn, .kappa = 0.02, .grid_n = 48};
  CHECK_THROWS_WITH_AS(bad_n.validate(), doctest::Contains("grid_n"), ValidationError);

  SystemSpec small_n{.kind = SystemKind::kAllenCahn, .kappa = 0.02, .grid_n = 4};
  CHECK_THROWS_AS(small_n.validate(), ValidationError);

  CHECK_THROWS_AS(system_kind_from_string("pendulum"), ValidationError);
}
