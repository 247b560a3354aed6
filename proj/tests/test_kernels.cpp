#include <doctest.h>

#include <Eigen/Geometry>
#include <cmath>
#include <vector>

#include "mobiman/common/rng.hpp"
#include "mobiman/kernels/kernels.hpp"

using namespace mobiman;
using namespace mobiman::kernels;

namespace {

struct SoaStorage {
  std::vector<double> ax, ay, az, e1x, e1y, e1z, e2x, e2y, e2z;

  void push(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
    ax.push_back(a.x());
    ay.push_back(a.y());
    az.push_back(a.z());
    const Eigen::Vector3d e1 = b - a;
    const Eigen::Vector3d e2 = c - a;
    e1x.push_back(e1.x());
    e1y.push_back(e1.y());
    e1z.push_back(e1.z());
    e2x.push_back(e2.x());
    e2y.push_back(e2.y());
    e2z.push_back(e2.z());
  }

  TriBlockSoA block() const {
    return TriBlockSoA{ax.data(),  ay.data(),  az.data(),  e1x.data(), e1y.data(),
                       e1z.data(), e2x.data(), e2y.data(), e2z.data(),
                       static_cast<int>(ax.size())};
  }
};

SoaStorage random_triangles(Rng& rng, int count, double spread = 4.0) {
  SoaStorage s;
  for (int i = 0; i < count; ++i) {
    Eigen::Vector3d a(rng.uniform(-spread, spread), rng.uniform(-spread, spread),
                      rng.uniform(-spread, spread));
    Eigen::Vector3d b = a + Eigen::Vector3d(rng.uniform(-1, 1), rng.uniform(-1, 1),
                                            rng.uniform(-1, 1));
    Eigen::Vector3d c = a + Eigen::Vector3d(rng.uniform(-1, 1), rng.uniform(-1, 1),
                                            rng.uniform(-1, 1));
    s.push(a, b, c);
  }
  return s;
}

}  // namespace

TEST_CASE("scalar backend is always supported") {
  CHECK(backend_supported(Backend::kScalar));
  force_backend(Backend::kScalar);
  CHECK(active_backend() == Backend::kScalar);
  reset_backend();
}

TEST_CASE("ray_block_nearest finds the closest of stacked parallel triangles") {
  SoaStorage s;
  // Three translated copies of the same triangle along +z; nearest is z=1.
  for (double z : {3.0, 1.0, 2.0}) {
    s.push(Eigen::Vector3d(-1, -1, z), Eigen::Vector3d(3, -1, z), Eigen::Vector3d(-1, 3, z));
  }
  const double origin[3] = {0, 0, 0};
  const double dir[3] = {0, 0, 1};
  force_backend(Backend::kScalar);
  RayBlockHit hit = ray_block_nearest(s.block(), origin, dir, 1e-9, 1e30);
  reset_backend();
  CHECK(hit.slot == 1);
  CHECK(hit.t == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ray_block_nearest tie-break keeps the lowest slot") {
  SoaStorage s;
  // Identical triangles: every slot hits at the same t.
  for (int i = 0; i < 7; ++i) {
    s.push(Eigen::Vector3d(-1, -1, 2), Eigen::Vector3d(3, -1, 2), Eigen::Vector3d(-1, 3, 2));
  }
  const double origin[3] = {0.2, 0.3, 0};
  const double dir[3] = {0, 0, 1};
  for (Backend be : {Backend::kScalar, Backend::kAvx2}) {
    if (!backend_supported(be)) continue;
    force_backend(be);
    RayBlockHit hit = ray_block_nearest(s.block(), origin, dir, 1e-9, 1e30);
    CHECK(hit.slot == 0);
    CHECK(hit.t == doctest::Approx(2.0).epsilon(1e-12));
  }
  reset_backend();
}

TEST_CASE("ray_block_nearest respects t_min and t_max") {
  SoaStorage s;
  s.push(Eigen::Vector3d(-1, -1, 1), Eigen::Vector3d(3, -1, 1), Eigen::Vector3d(-1, 3, 1));
  const double origin[3] = {0, 0, 0};
  const double dir[3] = {0, 0, 1};
  force_backend(Backend::kScalar);
  RayBlockHit in_range = ray_block_nearest(s.block(), origin, dir, 1e-9, 10.0);
  CHECK(in_range.slot == 0);
  RayBlockHit behind = ray_block_nearest(s.block(), origin, dir, 1.5, 10.0);
  CHECK(behind.slot == -1);
  RayBlockHit too_far = ray_block_nearest(s.block(), origin, dir, 1e-9, 0.5);
  CHECK(too_far.slot == -1);
  reset_backend();
}

TEST_CASE("degenerate padding triangles never produce hits") {
  SoaStorage s;
  s.push(Eigen::Vector3d(-1, -1, 1), Eigen::Vector3d(3, -1, 1), Eigen::Vector3d(-1, 3, 1));
  // Zero-area padding as emitted by the BVH builder: all vertices at origin.
  for (int i = 0; i < 3; ++i) {
    s.push(Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero());
  }
  const double origin[3] = {0, 0, 0};
  const double dir[3] = {0, 0, 1};
  for (Backend be : {Backend::kScalar, Backend::kAvx2}) {
    if (!backend_supported(be)) continue;
    force_backend(be);
    RayBlockHit hit = ray_block_nearest(s.block(), origin, dir, 1e-9, 1e30);
    CHECK(hit.slot == 0);
  }
  reset_backend();
}

TEST_CASE("scalar and simd ray kernels agree bit-for-bit on random blocks") {
  if (!backend_supported(Backend::kAvx2)) return;
  Rng rng(0x11d7a3);
  for (int trial = 0; trial < 200; ++trial) {
    const int count = 1 + static_cast<int>(rng.uniform_index(13));
    SoaStorage s = random_triangles(rng, count);
    Eigen::Vector3d o(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
    Eigen::Vector3d d(rng.normal(), rng.normal(), rng.normal());
    if (d.norm() < 1e-9) d = Eigen::Vector3d::UnitX();
    d.normalize();
    const double origin[3] = {o.x(), o.y(), o.z()};
    const double dir[3] = {d.x(), d.y(), d.z()};

    force_backend(Backend::kScalar);
    RayBlockHit ref = ray_block_nearest(s.block(), origin, dir, 1e-9, 1e30);
    force_backend(Backend::kAvx2);
    RayBlockHit simd = ray_block_nearest(s.block(), origin, dir, 1e-9, 1e30);

    CHECK(ref.slot == simd.slot);
    if (ref.slot >= 0) {
      CHECK(ref.t == simd.t);
      CHECK(ref.u == simd.u);
      CHECK(ref.v == simd.v);
    }
  }
  reset_backend();
}

TEST_CASE("transform_points matches Eigen and across backends") {
  Rng rng(0x5ca1e);
  const int count = 37;
  std::vector<double> px(count), py(count), pz(count);
  for (int i = 0; i < count; ++i) {
    px[i] = rng.uniform(-10, 10);
    py[i] = rng.uniform(-10, 10);
    pz[i] = rng.uniform(-10, 10);
  }
  Eigen::Quaterniond q(Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, -1).normalized()));
  Eigen::Matrix3d R = q.toRotationMatrix();
  Eigen::Vector3d t(0.3, -1.2, 2.5);
  double Rrow[9];
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) Rrow[3 * r + c] = R(r, c);
  const double tv[3] = {t.x(), t.y(), t.z()};

  std::vector<double> sx(count), sy(count), sz(count);
  force_backend(Backend::kScalar);
  transform_points(Rrow, tv, px.data(), py.data(), pz.data(), sx.data(), sy.data(), sz.data(),
                   count);
  for (int i = 0; i < count; ++i) {
    Eigen::Vector3d expect = R * Eigen::Vector3d(px[i], py[i], pz[i]) + t;
    CHECK(std::abs(sx[i] - expect.x()) < 1e-12);
    CHECK(std::abs(sy[i] - expect.y()) < 1e-12);
    CHECK(std::abs(sz[i] - expect.z()) < 1e-12);
  }

  if (backend_supported(Backend::kAvx2)) {
    std::vector<double> vx(count), vy(count), vz(count);
    force_backend(Backend::kAvx2);
    transform_points(Rrow, tv, px.data(), py.data(), pz.data(), vx.data(), vy.data(), vz.data(),
                     count);
    for (int i = 0; i < count; ++i) {
      CHECK(sx[i] == vx[i]);
      CHECK(sy[i] == vy[i]);
      CHECK(sz[i] == vz[i]);
    }
  }
  reset_backend();
}

TEST_CASE("point_to_plane_residuals matches a direct evaluation across backends") {
  Rng rng(0xbead);
  const int count = 29;
  std::vector<double> px(count), py(count), pz(count);
  std::vector<double> qx(count), qy(count), qz(count);
  std::vector<double> nx(count), ny(count), nz(count);
  for (int i = 0; i < count; ++i) {
    px[i] = rng.uniform(-3, 3);
    py[i] = rng.uniform(-3, 3);
    pz[i] = rng.uniform(-3, 3);
    qx[i] = rng.uniform(-3, 3);
    qy[i] = rng.uniform(-3, 3);
    qz[i] = rng.uniform(-3, 3);
    Eigen::Vector3d n(rng.normal(), rng.normal(), rng.normal());
    n.normalize();
    nx[i] = n.x();
    ny[i] = n.y();
    nz[i] = n.z();
  }
  std::vector<double> r_scalar(count), r_simd(count);

  force_backend(Backend::kScalar);
  const double ss_scalar = point_to_plane_residuals(
      px.data(), py.data(), pz.data(), qx.data(), qy.data(), qz.data(), nx.data(), ny.data(),
      nz.data(), r_scalar.data(), count);

  double ss_ref = 0.0;
  for (int i = 0; i < count; ++i) {
    const double r = (px[i] - qx[i]) * nx[i] + (py[i] - qy[i]) * ny[i] + (pz[i] - qz[i]) * nz[i];
    CHECK(std::abs(r_scalar[i] - r) < 1e-12);
    ss_ref += r * r;
  }
  CHECK(ss_scalar == doctest::Approx(ss_ref).epsilon(1e-12));

  if (backend_supported(Backend::kAvx2)) {
    force_backend(Backend::kAvx2);
    const double ss_simd = point_to_plane_residuals(
        px.data(), py.data(), pz.data(), qx.data(), qy.data(), qz.data(), nx.data(), ny.data(),
        nz.data(), r_simd.data(), count);
    for (int i = 0; i < count; ++i) CHECK(r_scalar[i] == r_simd[i]);
    // Summation order differs between lanes; allow tiny drift.
    CHECK(ss_simd == doctest::Approx(ss_scalar).epsilon(1e-13));
  }
  reset_backend();
}

TEST_CASE("force_backend rejects unsupported backends") {
  if (backend_supported(Backend::kAvx2)) return;
  CHECK_THROWS_AS(force_backend(Backend::kAvx2), std::runtime_error);
  reset_backend();
}
