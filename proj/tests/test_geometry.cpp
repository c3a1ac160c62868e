#include <doctest.h>

#include <Eigen/Dense>

#include "ivo/geometry.hpp"
#include "ivo/rng.hpp"
#include "test_support.hpp"

using namespace ivo;

TEST_CASE("rotation canonical form and axis-angle round trip") {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const Rotation r = test::random_rotation(rng, 3.0);
    CHECK(r.quat().norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.quat().w() >= 0.0);
    const Rotation back = Rotation::from_axis_angle(r.axis_angle());
    CHECK(geodesic_angle(r, back) < 1e-9);
  }
  // Tiny angles use the series branch.
  const Vec3 tiny(1e-14, -2e-14, 3e-15);
  CHECK((Rotation::from_axis_angle(tiny).axis_angle() - tiny).norm() < 1e-15);
}

TEST_CASE("compose identity and inverse") {
  Rng rng(11);
  const Motion m = test::random_motion(rng);
  const Motion id = Motion::identity();

  const Motion a = compose(id, m);
  CHECK((a.translation - m.translation).norm() < 1e-15);
  CHECK(geodesic_angle(a.rotation, m.rotation) < 1e-15);

  const Motion round = compose(m, invert(m));
  CHECK(round.translation.norm() < 1e-12);
  CHECK(geodesic_angle(round.rotation, Rotation::identity()) < 1e-12);
}

TEST_CASE("compose matches homogeneous matrix product") {
  Rng rng(13);
  for (int i = 0; i < 100; ++i) {
    const Motion a = test::random_motion(rng);
    const Motion b = test::random_motion(rng);
    const Motion c = compose(a, b);
    const Mat4 expected = to_homogeneous(a) * to_homogeneous(b);
    CHECK((to_homogeneous(c) - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("compose rejects up-to-scale motions") {
  Motion m;
  m.translation = Vec3::UnitX();
  m.up_to_scale = true;
  CHECK_THROWS_AS(compose(m, Motion::identity()), UpToScaleComposition);
  CHECK_THROWS_AS(compose(Motion::identity(), m), UpToScaleComposition);
}

TEST_CASE("rotation composition associativity and two-sided inverse") {
  Rng rng(17);
  for (int i = 0; i < 100; ++i) {
    const Rotation a = test::random_rotation(rng);
    const Rotation b = test::random_rotation(rng);
    const Rotation c = test::random_rotation(rng);
    CHECK(geodesic_angle((a * b) * c, a * (b * c)) < 1e-12);
    CHECK(geodesic_angle(a * a.inverse(), Rotation::identity()) < 1e-12);
    CHECK(geodesic_angle(a.inverse() * a, Rotation::identity()) < 1e-12);
  }
}

TEST_CASE("geodesic angle basics") {
  Rng rng(19);
  const Rotation r = test::random_rotation(rng);
  CHECK(geodesic_angle(r, r) == doctest::Approx(0.0).epsilon(1e-12));

  const Rotation yaw90 = Rotation::from_axis_angle(Vec3(0, 0, M_PI / 2));
  CHECK(geodesic_angle(Rotation::identity(), yaw90) ==
        doctest::Approx(M_PI / 2).epsilon(1e-12));
}

TEST_CASE("geodesic angle matches matrix-log oracle") {
  Rng rng(23);
  for (int i = 0; i < 200; ++i) {
    const Rotation a = test::random_rotation(rng);
    const Rotation b = test::random_rotation(rng);
    const Mat3 rel = a.matrix().transpose() * b.matrix();
    const double oracle = Eigen::AngleAxisd(rel).angle();
    CHECK(std::abs(geodesic_angle(a, b) - oracle) < 1e-9);
  }
}

TEST_CASE("geodesic angle is symmetric and satisfies triangle inequality") {
  Rng rng(29);
  for (int i = 0; i < 200; ++i) {
    const Rotation a = test::random_rotation(rng);
    const Rotation b = test::random_rotation(rng);
    const Rotation c = test::random_rotation(rng);
    CHECK(std::abs(geodesic_angle(a, b) - geodesic_angle(b, a)) < 1e-9);
    CHECK(geodesic_angle(a, c) <=
          geodesic_angle(a, b) + geodesic_angle(b, c) + 1e-9);
  }
}

TEST_CASE("project basics") {
  const CameraIntrinsics k{100.0, 100.0, 50.0, 50.0, 100, 100};

  const Vec2 on_axis = project(Vec3(0, 0, 3.7), k);
  CHECK(on_axis.x() == doctest::Approx(k.cx).epsilon(1e-12));
  CHECK(on_axis.y() == doctest::Approx(k.cy).epsilon(1e-12));

  // Hand evaluation of the pinhole formula.
  const Vec2 p = project(Vec3(1, 2, 4), k);
  CHECK(p.x() == doctest::Approx(75.0).epsilon(1e-12));
  CHECK(p.y() == doctest::Approx(100.0).epsilon(1e-12));

  CHECK_THROWS_AS(project(Vec3(0, 0, 0), k), BehindCamera);
  CHECK_THROWS_AS(project(Vec3(0, 0, -1), k), BehindCamera);
}

TEST_CASE("project and unproject are mutually inverse") {
  const CameraIntrinsics k{320.0, 330.0, 161.5, 119.25, 320, 240};
  Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    const Vec3 p(rng.uniform(-3, 3), rng.uniform(-2, 2), rng.uniform(0.5, 9));
    const Vec3 back = unproject(project(p, k), p.z(), k);
    CHECK((back - p).norm() < 1e-12);
  }
}

TEST_CASE("intrinsics layer at native resolution") {
  const CameraIntrinsics k{100.0, 120.0, 40.0, 30.0, 80, 60};
  const IntrinsicsLayer layer = make_intrinsics_layer(k, 60, 80);

  // Pixel coinciding with the principal point.
  CHECK(layer.x(30, 40) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(layer.y(30, 40) == doctest::Approx(0.0).epsilon(1e-15));

  // Top-left native pixel.
  CHECK(layer.x(0, 0) == doctest::Approx((0.0 - k.cx) / k.fx).epsilon(1e-15));
  CHECK(layer.y(0, 0) == doctest::Approx((0.0 - k.cy) / k.fy).epsilon(1e-15));
}

TEST_CASE("intrinsics layer quarter grid matches per-pixel formula oracle") {
  const CameraIntrinsics k{140.0, 150.0, 81.0, 59.5, 160, 120};
  const int h = 30, w = 40;
  const IntrinsicsLayer layer = make_intrinsics_layer(k, h, w);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      const double u = (j + 0.5) * (160.0 / w) - 0.5;
      const double v = (i + 0.5) * (120.0 / h) - 0.5;
      CHECK(std::abs(layer.x(i, j) - (u - k.cx) / k.fx) < 1e-12);
      CHECK(std::abs(layer.y(i, j) - (v - k.cy) / k.fy) < 1e-12);
    }
  }
}

TEST_CASE("rcr_adjust cases") {
  const CameraIntrinsics k{300.0, 310.0, 160.0, 120.0, 320, 240};

  SUBCASE("full-image crop, same size: unchanged") {
    const CameraIntrinsics out = rcr_adjust(k, {0, 0, 320, 240}, 320, 240);
    CHECK(out.fx == doctest::Approx(k.fx));
    CHECK(out.fy == doctest::Approx(k.fy));
    CHECK(out.cx == doctest::Approx(k.cx));
    CHECK(out.cy == doctest::Approx(k.cy));
  }

  SUBCASE("crop origin shift, no resize") {
    const CameraIntrinsics out = rcr_adjust(k, {10, 20, 300, 200}, 300, 200);
    CHECK(out.cx == doctest::Approx(k.cx - 10));
    CHECK(out.cy == doctest::Approx(k.cy - 20));
    CHECK(out.fx == doctest::Approx(k.fx));
  }

  SUBCASE("pure downscale halves everything") {
    const CameraIntrinsics out = rcr_adjust(k, {0, 0, 320, 240}, 160, 120);
    CHECK(out.fx == doctest::Approx(k.fx / 2));
    CHECK(out.fy == doctest::Approx(k.fy / 2));
    CHECK(out.cx == doctest::Approx(k.cx / 2));
    CHECK(out.cy == doctest::Approx(k.cy / 2));
  }

  SUBCASE("out-of-bounds crop") {
    CHECK_THROWS_AS(rcr_adjust(k, {300, 0, 40, 240}, 40, 240),
                    CropOutOfBounds);
    CHECK_THROWS_AS(rcr_adjust(k, {-1, 0, 320, 240}, 320, 240),
                    CropOutOfBounds);
  }
}

TEST_CASE("rcr_adjust composition law") {
  const CameraIntrinsics k{500.0, 505.0, 321.0, 239.0, 640, 480};
  // Crop then resize twice equals the combined adjustment.
  const CameraIntrinsics once = rcr_adjust(k, {40, 30, 480, 360}, 240, 180);
  const CameraIntrinsics two_a = rcr_adjust(k, {40, 30, 480, 360}, 480, 360);
  const CameraIntrinsics two_b = rcr_adjust(two_a, {0, 0, 480, 360}, 240, 180);
  CHECK(two_b.fx == doctest::Approx(once.fx).epsilon(1e-12));
  CHECK(two_b.fy == doctest::Approx(once.fy).epsilon(1e-12));
  CHECK(two_b.cx == doctest::Approx(once.cx).epsilon(1e-12));
  CHECK(two_b.cy == doctest::Approx(once.cy).epsilon(1e-12));
}

TEST_CASE("validate_intrinsics rejects bad cameras") {
  CHECK_THROWS_AS(validate_intrinsics({0.0, 1.0, 1.0, 1.0, 2, 2}),
                  InvalidConfig);
  CHECK_THROWS_AS(validate_intrinsics({1.0, 1.0, 5.0, 1.0, 2, 2}),
                  InvalidConfig);
}
