#include "mobiman/kernels/kernels.hpp"

#include <stdexcept>

namespace mobiman::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(MOBIMAN_HAVE_AVX2)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Backend probe() { return cpu_has_avx2() ? Backend::kAvx2 : Backend::kScalar; }

Backend& current() {
  static Backend b = probe();
  return b;
}

}  // namespace

bool backend_supported(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return true;
    case Backend::kAvx2:
      return cpu_has_avx2();
  }
  return false;
}

Backend active_backend() { return current(); }

void force_backend(Backend b) {
  if (!backend_supported(b))
    throw std::runtime_error("kernels: backend " + backend_name(b) + " not supported");
  current() = b;
}

void reset_backend() { current() = probe(); }

std::string backend_name(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return "scalar";
    case Backend::kAvx2:
      return "avx2";
  }
  return "unknown";
}

namespace detail {

const KernelTable& table_for(Backend b) {
#if defined(MOBIMAN_HAVE_AVX2)
  if (b == Backend::kAvx2) return avx2_table;
#endif
  (void)b;
  return scalar_table;
}

}  // namespace detail

RayBlockHit ray_block_nearest(const TriBlockSoA& block, const double origin[3],
                              const double dir[3], double t_min, double t_max) {
  return detail::table_for(current()).ray_block_nearest(block, origin, dir, t_min, t_max);
}

void transform_points(const double R[9], const double t[3], const double* px,
                      const double* py, const double* pz, double* ox, double* oy,
                      double* oz, int count) {
  detail::table_for(current()).transform_points(R, t, px, py, pz, ox, oy, oz, count);
}

double point_to_plane_residuals(const double* px, const double* py, const double* pz,
                                const double* qx, const double* qy, const double* qz,
                                const double* nx, const double* ny, const double* nz,
                                double* r, int count) {
  return detail::table_for(current()).point_to_plane_residuals(px, py, pz, qx, qy, qz,
                                                               nx, ny, nz, r, count);
}

}  // namespace mobiman::kernels
