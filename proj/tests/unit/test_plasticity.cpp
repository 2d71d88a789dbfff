#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sandinv/common/rng.hpp"
#include "sandinv/mpm/plasticity.hpp"

using namespace sandinv;
using namespace sandinv::mpm;

namespace {

Mat3 random_rotation(Rng& rng) {
  Eigen::Quaterniond q(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                       rng.uniform(-1, 1));
  return q.normalized().toRotationMatrix();
}

// U diag(exp(strain)) V^T with random rotations.
Mat3 random_f(Rng& rng, double spread) {
  const Vec3 e(rng.uniform(-spread, spread), rng.uniform(-spread, spread),
               rng.uniform(-spread, spread));
  return random_rotation(rng) * e.array().exp().matrix().asDiagonal() * random_rotation(rng);
}

MaterialParams params_with(double phi, double cohesion = 0.0) {
  MaterialParams p;
  p.friction_angle_deg = phi;
  p.cohesion = cohesion;
  return p;
}

}  // namespace

TEST(DruckerPrager, IdentityIsElastic) {
  const auto r = drucker_prager_return(Mat3::Identity(), params_with(35));
  EXPECT_FALSE(r.plastic);
  EXPECT_EQ(r.deformation_gradient, Mat3::Identity());
}

TEST(DruckerPrager, HydrostaticCompressionIsUnchanged) {
  for (double phi : {25.0, 35.0, 45.0}) {
    const Mat3 f = 0.99 * Mat3::Identity();
    const auto r = drucker_prager_return(f, params_with(phi));
    EXPECT_FALSE(r.plastic);
    EXPECT_EQ(r.deformation_gradient, f);
  }
}

TEST(DruckerPrager, ElasticStatesComeBackBitUnchanged) {
  Rng rng(3);
  int elastic = 0;
  for (int t = 0; t < 2000; ++t) {
    // Compressive trace with small shear: mostly inside the cone.
    Mat3 f = random_f(rng, 0.002);
    f *= 0.98;
    const auto r = drucker_prager_return(f, params_with(40));
    if (!r.plastic) {
      ++elastic;
      EXPECT_EQ(r.deformation_gradient, f);
    }
  }
  EXPECT_GT(elastic, 100);
}

TEST(DruckerPrager, TensileStateGoesToApex) {
  const Mat3 f = 1.01 * Mat3::Identity();
  const auto r = drucker_prager_return(f, params_with(35));
  EXPECT_TRUE(r.plastic);
  EXPECT_LT((r.deformation_gradient - Mat3::Identity()).norm(), 1e-12);
  EXPECT_LT(r.kirchhoff_stress.norm(), 1e-6);
}

TEST(DruckerPrager, ReturnIsAdmissibleAndMatchesBruteForce) {
  Rng rng(4);
  for (int t = 0; t < 300; ++t) {
    const double phi = rng.uniform(20, 50);
    const double c = t % 3 == 0 ? rng.uniform(0, 2e3) : 0.0;
    const MaterialParams p = params_with(phi, c);
    const Mat3 f = random_f(rng, 0.05);
    const auto r = drucker_prager_return(f, p);
    EXPECT_LE(drucker_prager_yield(r.kirchhoff_stress, p), 1e-8 * p.shear_modulus());
    EXPECT_GT(r.deformation_gradient.determinant(), 0.0);

    const Vec3 expected = oracle::dp_project_bruteforce(oracle::principal_strains(f), p);
    const Vec3 got = oracle::principal_strains(r.deformation_gradient);
    const double scale = std::max(1e-3, oracle::principal_strains(f).norm());
    EXPECT_LT((got - expected).norm() / scale, 1e-6) << "phi=" << phi << " c=" << c;
  }
}

TEST(DruckerPrager, ReturnedStressMatchesHenckyOfReturnedF) {
  Rng rng(5);
  const MaterialParams p = params_with(30);
  for (int t = 0; t < 100; ++t) {
    const auto r = drucker_prager_return(random_f(rng, 0.05), p);
    const Mat3 tau = hencky_kirchhoff(r.deformation_gradient, p);
    EXPECT_LT((tau - r.kirchhoff_stress).norm(), 1e-6 * p.shear_modulus());
  }
}

TEST(DruckerPrager, ConeSlopeFromFrictionAngle) {
  const MaterialParams p = params_with(30);
  const double s = 0.5;
  EXPECT_NEAR(p.dp_alpha(), 2 * s / (std::sqrt(3.0) * (3 - s)), 1e-15);
  EXPECT_EQ(p.dp_cohesion(), 0.0);
  EXPECT_LT(params_with(25).dp_alpha(), params_with(45).dp_alpha());
}
