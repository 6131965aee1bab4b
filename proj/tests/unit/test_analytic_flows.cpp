#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "roughflow/analytic_flows.hpp"
#include "roughflow/circle_maps.hpp"
#include "roughflow/errors.hpp"
#include "roughflow/field.hpp"
#include "support/generators.hpp"

using namespace roughflow;

namespace {

double dist(const Point3& a, const Point3& b) { return distance(a, b); }

// Post-singular X^Theta written in matrix form: rotate (x, y) by Theta.
Point3 rotation_matrix_oracle(double theta, double t, const Point3& p) {
  const double f = std::pow(4 * t - p.z * p.z, 0.25) / std::sqrt(p.z);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {f * (c * p.x - s * p.y), f * (s * p.x + c * p.y), -std::sqrt(4 * t - p.z * p.z)};
}

std::vector<FlowSpec> all_specs() {
  return {FlowSpec::rotation(kPi / 2), FlowSpec::rotation(kPi), FlowSpec::rotation(kTwoPi),
          build_flow_from_psi(CircleMap::identity()), build_flow_from_psi(CircleMap::psi1()),
          build_flow_from_psi(CircleMap::psi2())};
}

}  // namespace

TEST(SingularTime, Examples) {
  EXPECT_EQ(singular_time({0.5, 0, 1}), 0.25);
  EXPECT_EQ(singular_time({0, 0, 2}), 1.0);
  EXPECT_NEAR(singular_time({0.1, 0.1, 0.2}), 0.01, 1e-17);
  EXPECT_THROW((void)singular_time({0, 0, -1}), DomainError);
  EXPECT_THROW((void)singular_time({3, 0, 1}), DomainError);
}

TEST(FlowEval, NamedExamples) {
  const auto rot = FlowSpec::rotation(kPi);
  EXPECT_LT(dist(flow_eval(rot, 2.0, {0, 0, -1}), {0, 0, -3}), 1e-15);
  EXPECT_LT(dist(flow_eval(rot, 0.5, {1, 0, 1}), {-1, 0, -1}), 1e-15);
  const auto id = build_flow_from_psi(CircleMap::identity());
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const double th = gen::random_angle(rng);
    const Point3 p = lift_upper(th);
    EXPECT_LT(dist(flow_eval(id, 0.5, p), {p.x, p.y, -1}), 1e-14);
  }
  for (const auto& spec : all_specs()) {
    for (int i = 0; i < 50; ++i) {
      const Point3 p = gen::random_box_point(rng);
      if (classify(p) == Region::Origin) continue;
      EXPECT_EQ(flow_eval(spec, 0.0, p), p);
    }
  }
}

TEST(FlowEval, Errors) {
  const auto rot = FlowSpec::rotation(kPi);
  EXPECT_THROW((void)flow_eval(rot, 1.0, {0, 0, 0}), DomainError);
  EXPECT_THROW((void)flow_eval(rot, -0.1, {0, 0, 1}), DomainError);
}

TEST(FlowEval, ExteriorIsFixed) {
  Rng rng(2);
  for (const auto& spec : all_specs()) {
    for (int i = 0; i < 100; ++i) {
      const Point3 p = gen::random_exterior_point(rng);
      EXPECT_EQ(flow_eval(spec, rng.uniform(0.0, 3.0), p), p);
    }
  }
}

TEST(FlowEval, RotationMatchesMatrixForm) {
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const double theta = rng.uniform(0.01, kTwoPi);
    const Point3 p = gen::random_p_point(rng, +1, 0.2, 1.5);
    const double t = singular_time(p) + rng.uniform(1e-3, 2.0);
    const Point3 q = flow_eval(FlowSpec::rotation(theta), t, p);
    EXPECT_LT(dist(q, rotation_matrix_oracle(theta, t, p)), 1e-12);
  }
}

TEST(FlowEval, RotationEqualsShiftMap) {
  Rng rng(4);
  for (int i = 0; i < 500; ++i) {
    const double theta = rng.uniform(0.01, kTwoPi);
    const auto a = FlowSpec::rotation(theta);
    const auto b = build_flow_from_psi(CircleMap::rotation(theta));
    const Point3 p = gen::random_p_point(rng, i % 3 == 0 ? -1 : 1, 0.1, 1.5, 1.0);
    const double t = rng.uniform(0.0, 2.0);
    EXPECT_LT(dist(flow_eval(a, t, p), flow_eval(b, t, p)), 1e-12);
  }
}

TEST(FlowEval, SemigroupOnPMinus) {
  Rng rng(5);
  for (const auto& spec : all_specs()) {
    for (int i = 0; i < 100; ++i) {
      const Point3 p = gen::random_p_point(rng, -1, 0.1, 2.0, 1.0);
      const double s = rng.uniform(0.0, 2.0);
      const double t = rng.uniform(0.0, 2.0);
      const Point3 lhs = flow_eval(spec, s, flow_eval(spec, t, p));
      EXPECT_LT(dist(lhs, flow_eval(spec, s + t, p)), 1e-10);
    }
  }
}

TEST(FlowEval, TrajectoriesStayInTheirRegion) {
  Rng rng(6);
  for (const auto& spec : all_specs()) {
    for (int i = 0; i < 200; ++i) {
      const Point3 m = gen::random_p_point(rng, -1, 0.1, 2.0, 1.0);
      const Point3 qm = flow_eval(spec, rng.uniform(0.0, 3.0), m);
      EXPECT_LE(qm.x * qm.x + qm.y * qm.y, -qm.z * (1 + 1e-12));
      const Point3 p = gen::random_p_point(rng, +1, 0.1, 2.0, 1.0);
      const Point3 qp = flow_eval(spec, singular_time(p) * rng.uniform(0.0, 0.999), p);
      EXPECT_LE(qp.x * qp.x + qp.y * qp.y, qp.z * (1 + 1e-12));
      EXPECT_GT(qp.z, 0.0);
    }
  }
}

TEST(FlowEval, ContinuousAtSingularTime) {
  // Both one-sided limits are the origin. The radius behaves like
  // |t - t*|^(1/4), so the distance at t* +- d is bounded by the closed form
  // bound(d) and halves when d shrinks 16-fold.
  Rng rng(7);
  for (const auto& spec : all_specs()) {
    for (int i = 0; i < 50; ++i) {
      const Point3 p = gen::random_p_point(rng, +1, 0.3, 1.5, 1.0);
      const double ts = singular_time(p);
      EXPECT_EQ(norm(flow_eval(spec, ts, p)), 0.0);
      const double scale = std::hypot(p.x, p.y) / std::sqrt(p.z);
      for (const double d : {1e-8, 1e-12}) {
        const double bound = scale * std::pow(4 * d, 0.25) + std::sqrt(4 * d);
        EXPECT_LE(norm(flow_eval(spec, ts + d, p)), bound * (1 + 1e-6));
        // Before t* the time offset is rounded relative to ts.
        EXPECT_LE(norm(flow_eval(spec, ts - d, p)), bound * 1.01);
      }
    }
  }
  const Point3 p{0.5, 0.0, 1.0};
  const auto spec = FlowSpec::rotation(kPi);
  const double a = norm(flow_eval(spec, 0.25 + 16e-10, p));
  const double b = norm(flow_eval(spec, 0.25 + 1e-10, p));
  EXPECT_NEAR(a / b, 2.0, 1e-3);
}

TEST(FlowEval, DistinctRotationsDiffer) {
  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    const Point3 p = gen::random_p_point(rng, +1, 0.3, 1.5, 0.9);
    if (std::hypot(p.x, p.y) < 1e-3) continue;
    const double t = singular_time(p) + rng.uniform(1e-3, 1.0);
    EXPECT_GT(dist(flow_eval(FlowSpec::rotation(kPi), t, p),
                   flow_eval(FlowSpec::rotation(kPi / 2), t, p)),
              0.0);
  }
}

TEST(FlowResidual, NamedExamples) {
  EXPECT_LT(flow_residual(FlowSpec::rotation(kPi), 2.0, {0, 0, -1}, 1e-5), 1e-8);
  EXPECT_EQ(flow_residual(FlowSpec::rotation(kPi), 1.0, {5, 5, 5}, 1e-5), 0.0);
  EXPECT_LT(flow_residual(build_flow_from_psi(CircleMap::psi2()), 0.6, {1, 0, 1}, 1e-5), 1e-8);
}

TEST(FlowResidual, GuardBands) {
  const auto spec = FlowSpec::rotation(kPi);
  EXPECT_THROW((void)flow_residual(spec, 0.25 + 5e-5, {0.5, 0, 1}, 1e-5), DomainError);
  EXPECT_THROW((void)flow_residual(spec, 5e-6, {0.5, 0, 1}, 1e-5), DomainError);
  EXPECT_NO_THROW((void)flow_residual(spec, 0.25 + 2e-4, {0.5, 0, 1}, 1e-5));
}

TEST(FlowResidual, SecondOrderInStep) {
  const Point3 p{0.3, 0.2, 1.0};
  for (const auto& spec : all_specs()) {
    // Away from t* the residual is pure truncation error.
    const double r1 = flow_residual(spec, 0.8, p, 1e-2);
    const double r2 = flow_residual(spec, 0.8, p, 5e-3);
    EXPECT_NEAR(r1 / r2, 4.0, 0.2) << spec.label();
    const double m1 = flow_residual(spec, 0.8, {0.1, 0.2, -0.6}, 1e-2);
    const double m2 = flow_residual(spec, 0.8, {0.1, 0.2, -0.6}, 5e-3);
    EXPECT_NEAR(m1 / m2, 4.0, 0.2) << spec.label();
  }
}

TEST(FlowResidual, SmallOnRandomSamples) {
  Rng rng(9);
  for (const auto& spec : all_specs()) {
    for (int i = 0; i < 200; ++i) {
      const Point3 p = gen::random_p_point(rng, i % 2 ? 1 : -1, 0.3, 1.5, 0.95);
      double t = rng.uniform(0.01, 1.0);
      if (p.z > 0 && std::abs(t - singular_time(p)) < 0.05) t += 0.1;
      EXPECT_LT(flow_residual(spec, t, p, 1e-5), 1e-7);
    }
  }
}

TEST(FlowInverse, NamedExamples) {
  EXPECT_LT(dist(flow_inverse(FlowSpec::rotation(kPi), 0.5, {-1, 0, -1}), {1, 0, 1}), 1e-14);
  EXPECT_EQ(flow_inverse(FlowSpec::rotation(1.0), 0.0, {0.3, 0.1, 0.7}), (Point3{0.3, 0.1, 0.7}));
  EXPECT_LT(dist(flow_inverse(FlowSpec::rotation(kPi / 2), 2.0, {0, 0, -3}), {0, 0, -1}), 1e-14);
  EXPECT_THROW((void)flow_inverse(build_flow_from_psi(CircleMap::psi2()), 1.0, {0.1, 0, -1}),
               NotInvertibleError);
  EXPECT_THROW((void)flow_inverse(FlowSpec::rotation(kPi), 1.0, {0, 0, 0}), DomainError);
}

TEST(FlowInverse, RoundTrip) {
  Rng rng(10);
  const std::vector<FlowSpec> specs{FlowSpec::rotation(kPi), FlowSpec::rotation(0.7),
                                    build_flow_from_psi(CircleMap::psi1())};
  for (const auto& spec : specs) {
    for (int i = 0; i < 300; ++i) {
      const Point3 p = gen::random_p_point(rng, i % 2 ? 1 : -1, 0.2, 1.5, 1.0);
      double t = rng.uniform(0.0, 1.5);
      if (p.z > 0 && std::abs(t - singular_time(p)) < 1e-6) continue;
      const Point3 q = flow_eval(spec, t, p);
      EXPECT_LT(dist(flow_eval(spec, t, flow_inverse(spec, t, q)), q), 1e-10);
    }
  }
}

TEST(Transport, NamedExamples) {
  const auto spec = FlowSpec::rotation(kPi);
  const ScalarField one = [](const Point3&) { return 1.0; };
  const ScalarField zc = [](const Point3& p) { return p.z; };
  const ScalarField xc = [](const Point3& p) { return p.x; };
  EXPECT_EQ(transport_eval(one, spec, 0.7, {0.1, 0.2, -0.5}), 1.0);
  EXPECT_NEAR(transport_eval(zc, spec, 0.5, {-1, 0, -1}), 1.0, 1e-14);
  EXPECT_EQ(transport_eval(xc, FlowSpec::rotation(2.0), 0.0, {0.3, -0.2, 0.6}), 0.3);
}

TEST(Jacobian, NamedExamples) {
  Rng rng(11);
  for (const auto& spec : all_specs()) {
    for (int i = 0; i < 20; ++i) {
      const Point3 p = gen::random_p_point(rng, i % 2 ? 1 : -1, 0.3, 1.5, 0.9);
      EXPECT_NEAR(jacobian_fd(spec, 0.0, p, 1e-5), 1.0, 1e-6);
    }
  }
  EXPECT_NEAR(jacobian_fd(FlowSpec::rotation(kPi), 2.0, {0.1, 0, -1}, 1e-5), 1.0, 1e-4);
  const auto psi1 = build_flow_from_psi(CircleMap::psi1());
  const double r = 0.5;
  const double up = jacobian_fd(psi1, 0.6, {0.0, r, 1.0}, 1e-5);
  const double down = jacobian_fd(psi1, 0.6, {0.0, -r, 1.0}, 1e-5);
  EXPECT_GT(up, 0.0);
  EXPECT_LT(down, 0.0);
  EXPECT_NEAR(up, 1.0, 1e-4);
  EXPECT_NEAR(down, -1.0, 1e-4);
}

TEST(Jacobian, RejectsStencilsAcrossBranches) {
  const auto rot = FlowSpec::rotation(kPi);
  EXPECT_THROW((void)jacobian_fd(rot, 0.5, {1.0, 0, 1.0}, 1e-5), StencilError);
  EXPECT_THROW((void)jacobian_fd(rot, 0.25, {0.5, 0, 1.0}, 1e-5), StencilError);
  const auto psi1 = build_flow_from_psi(CircleMap::psi1());
  // theta = pi is a breakpoint of psi1.
  EXPECT_THROW((void)jacobian_fd(psi1, 0.6, {-0.5, 1e-7, 1.0}, 1e-5), StencilError);
  EXPECT_THROW((void)jacobian_fd(psi1, 0.6, {0.5, 1e-7, 1.0}, 1e-5), StencilError);
}

TEST(Jacobian, RotationFlowsPreserveVolume) {
  Rng rng(12);
  for (int i = 0; i < 200; ++i) {
    const auto spec = FlowSpec::rotation(rng.uniform(0.1, kTwoPi));
    const Point3 p = gen::random_p_point(rng, i % 2 ? 1 : -1, 0.3, 1.5, 0.9);
    double t = rng.uniform(0.0, 1.0);
    if (p.z > 0 && std::abs(t - singular_time(p)) < 0.02) continue;
    if (std::hypot(p.x, p.y) < 1e-3) continue;
    EXPECT_NEAR(jacobian_fd(spec, t, p, 1e-5), 1.0, 1e-4);
  }
}

TEST(SampleTrajectory, PrependsInitialTime) {
  const std::vector<double> times{0.1, 0.5, 1.0};
  const auto tr = sample_trajectory(FlowSpec::rotation(kPi), {0.5, 0, 1}, times);
  ASSERT_EQ(tr.times.size(), 4u);
  EXPECT_EQ(tr.times.front(), 0.0);
  EXPECT_EQ(tr.points.front(), (Point3{0.5, 0, 1}));
  ASSERT_TRUE(tr.origin_hit_time.has_value());
  EXPECT_EQ(*tr.origin_hit_time, 0.25);
  const auto m = sample_trajectory(FlowSpec::rotation(kPi), {0, 0, -1}, times);
  EXPECT_FALSE(m.origin_hit_time.has_value());
}
