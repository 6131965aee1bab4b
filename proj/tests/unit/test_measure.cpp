#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "roughflow/analytic_flows.hpp"
#include "roughflow/circle_maps.hpp"
#include "roughflow/errors.hpp"
#include "roughflow/measure.hpp"

using namespace roughflow;

TEST(Region, ValidationAndVolume) {
  EXPECT_NO_THROW(RegionSpec::reference().validate());
  EXPECT_THROW((RegionSpec{+1, -0.5, 1.0}.validate()), DomainError);
  EXPECT_THROW((RegionSpec{-1, -1.0, 0.5}.validate()), DomainError);
  EXPECT_THROW((RegionSpec{+1, 1.0, 1.0}.validate()), DomainError);
  EXPECT_THROW((RegionSpec{0, 0.5, 1.0}.validate()), DomainError);
  // Slice area is pi |z|.
  EXPECT_NEAR(RegionSpec::reference().volume(), kPi / 2 * 0.75, 1e-15);
  EXPECT_NEAR((RegionSpec{-1, -2.0, -1.0}.volume()), kPi / 2 * 3, 1e-15);
}

TEST(Sampler, MeanHeightMatchesMoment) {
  const std::size_t n = 100000;
  const auto pts = sample_paraboloid(RegionSpec::reference(), n, 1);
  double sum = 0.0;
  for (const auto& p : pts) sum += p.z;
  const double mean = 7.0 / 9.0;
  // Height density is proportional to z on [1/2, 1].
  const double second = (1.0 - 1.0 / 16.0) / 4.0 / 0.375;
  const double sigma = std::sqrt((second - mean * mean) / n);
  EXPECT_LE(std::abs(sum / n - mean), 3 * sigma);
}

TEST(Sampler, PointsLieInTheSliceExactly) {
  const RegionSpec regions[] = {RegionSpec::reference(), {-1, -1.0, -0.1}, {+1, 0.01, 0.02}};
  for (const auto& r : regions) {
    const auto pts = sample_paraboloid(r, 20000, 2);
    for (const auto& p : pts) {
      ASSERT_LE(p.x * p.x + p.y * p.y, std::abs(p.z));
      ASSERT_GE(p.z, r.z_lo);
      ASSERT_LE(p.z, r.z_hi);
    }
  }
  const auto one = sample_paraboloid(RegionSpec::reference(), 1, 0);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(classify(one[0]), Region::PPlusInterior);
  EXPECT_THROW((void)sample_paraboloid(RegionSpec::reference(), 0, 0), DomainError);
}

TEST(Sampler, Deterministic) {
  EXPECT_EQ(sample_paraboloid(RegionSpec::reference(), 5000, 3),
            sample_paraboloid(RegionSpec::reference(), 5000, 3));
  EXPECT_NE(sample_paraboloid(RegionSpec::reference(), 10, 3),
            sample_paraboloid(RegionSpec::reference(), 10, 4));
}

TEST(Compression, IdentityIsNearOne) {
  const auto r = compression_constant(identity_flow(), RegionSpec::reference(), 0.4, 0.2,
                                      1000000, 0);
  EXPECT_GE(r.compression_L, 0.9);
  EXPECT_LE(r.compression_L, 1.1);
  EXPECT_EQ(r.compression_L, r.max_cell_ratio);
  EXPECT_NEAR(r.tolerance, 5 * r.relative_sigma, 1e-15);
}

TEST(Compression, RotationWithinPoissonBandOnFineCells) {
  // Cells of side 0.05 hold about 106 points, so the 5 sigma band is about 0.49.
  const auto r = compression_constant(as_flow_map(FlowSpec::rotation(kPi)),
                                      RegionSpec::reference(), 0.4, 0.05, 1000000, 0);
  EXPECT_GT(r.expected_per_cell, 100.0);
  EXPECT_GE(r.compression_L, 1.0 - r.tolerance);
  EXPECT_LE(r.compression_L, 1.0 + r.tolerance);
}

TEST(Compression, MeasurePreservingMapsStayInBand) {
  const CircleMap maps[] = {CircleMap::rotation(kPi), CircleMap::psi1(), CircleMap::psi2()};
  for (const auto& m : maps) {
    // Later images form a slab thinner than two cells, with no fully covered cell.
    for (const double t : {0.1, 0.4, 0.6}) {
      const auto r = compression_constant(as_flow_map(build_flow_from_psi(m)),
                                          RegionSpec::reference(), t, 0.2, 400000, 1);
      EXPECT_GE(r.compression_L, 1.0 - r.tolerance) << m.name() << " t=" << t;
      EXPECT_LE(r.compression_L, 1.0 + r.tolerance) << m.name() << " t=" << t;
    }
  }
}

TEST(Compression, ConstantMapConcentrates) {
  const auto flow = as_flow_map(build_flow_from_psi(CircleMap::constant(kPi)));
  const auto coarse = compression_constant(flow, RegionSpec::reference(), 0.6, 0.1, 1000000, 0);
  const auto fine = compression_constant(flow, RegionSpec::reference(), 0.6, 0.05, 1000000, 0);
  EXPECT_GT(fine.compression_L, 10.0);
  EXPECT_GT(fine.compression_L, coarse.compression_L);
}

TEST(Compression, TooCoarseGridIsRejected) {
  EXPECT_THROW((void)compression_constant(identity_flow(), RegionSpec::reference(), 0.4, 5.0,
                                          1000, 0),
               InsufficientResolutionError);
}

TEST(L1Distance, NamedExamples) {
  std::vector<double> times;
  for (int k = 0; k <= 20; ++k) times.push_back(k / 20.0);
  const auto a = as_flow_map(FlowSpec::rotation(kPi));
  const auto b = as_flow_map(FlowSpec::rotation(kPi / 2));
  const auto c = as_flow_map(build_flow_from_psi(CircleMap::rotation(kPi)));
  const auto ref = RegionSpec::reference();
  EXPECT_EQ(l1_flow_distance(a, a, ref, times, 20000, 0), 0.0);
  EXPECT_GE(l1_flow_distance(a, b, ref, times, 20000, 0), 0.1);
  EXPECT_LE(l1_flow_distance(a, c, ref, times, 20000, 0), 1e-12);
}

TEST(L1Distance, Pseudometric) {
  std::vector<double> times{0.0, 0.3, 0.6, 1.0};
  const auto ref = RegionSpec::reference();
  const FlowMap flows[] = {as_flow_map(FlowSpec::rotation(kPi)),
                           as_flow_map(FlowSpec::rotation(1.0)),
                           as_flow_map(build_flow_from_psi(CircleMap::psi1())),
                           as_flow_map(build_flow_from_psi(CircleMap::psi2())), identity_flow()};
  const std::size_t n = std::size(flows);
  std::vector<std::vector<double>> d(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      d[i][j] = l1_flow_distance(flows[i], flows[j], ref, times, 5000, 7);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_EQ(d[i][i], 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      EXPECT_NEAR(d[i][j], d[j][i], 1e-12);
      for (std::size_t k = 0; k < n; ++k) EXPECT_LE(d[i][k], d[i][j] + d[j][k] + 1e-12);
    }
  }
}

TEST(ExperimentLog, AppendsWithHeaderOnce) {
  const auto path = std::filesystem::temp_directory_path() / "roughflow_log_test.csv";
  std::filesystem::remove(path);
  append_experiment_log(path, "demo", 0.1, kPi, 1.0, 0.25);
  append_experiment_log(path, "demo", 0.05, kPi, 1.0, 0.125);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "experiment,eps,theta,t_max,distance");
  std::getline(in, line);
  EXPECT_EQ(line, "demo,0.1,3.141592653589793,1,0.25");
  std::getline(in, line);
  EXPECT_EQ(line, "demo,0.05,3.141592653589793,1,0.125");
  std::filesystem::remove(path);
}
