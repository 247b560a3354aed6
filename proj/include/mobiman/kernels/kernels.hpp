#pragma once

#include <string>

namespace mobiman::kernels {

// Arithmetic inner loops shared by the ray tracer, ICP and the sensor
// simulator. Each kernel has a scalar reference implementation and an AVX2
// variant; the active one is picked at startup from CPUID and can be forced
// for the equivalence tests.

enum class Backend { kScalar, kAvx2 };

bool backend_supported(Backend b);
Backend active_backend();
// Throws std::runtime_error if the backend is not supported on this CPU/build.
void force_backend(Backend b);
// Back to the CPUID-probed default.
void reset_backend();
std::string backend_name(Backend b);

// View of a padded block of triangles in SoA form: base vertex a and the two
// edge vectors. Padding entries are all-zero (degenerate) triangles, which
// never intersect. count includes padding and the AVX2 path assumes it is a
// multiple of 4.
struct TriBlockSoA {
  const double* ax;
  const double* ay;
  const double* az;
  const double* e1x;
  const double* e1y;
  const double* e1z;
  const double* e2x;
  const double* e2y;
  const double* e2z;
  int count;
};

struct RayBlockHit {
  double t;       // ray parameter of the nearest accepted hit
  int slot;       // index into the block, -1 on miss
  double u, v;    // barycentric coordinates at the hit
};

// Nearest Moller-Trumbore intersection with t in (t_min, t_max). Ties on t
// resolve to the lowest slot.
RayBlockHit ray_block_nearest(const TriBlockSoA& block, const double origin[3],
                              const double dir[3], double t_min, double t_max);

// out = R * p + t for count points, SoA layout. R is row-major 3x3.
void transform_points(const double R[9], const double t[3], const double* px,
                      const double* py, const double* pz, double* ox, double* oy,
                      double* oz, int count);

// r[i] = (p[i] - q[i]) . n[i]. Returns the sum of squared residuals.
double point_to_plane_residuals(const double* px, const double* py, const double* pz,
                                const double* qx, const double* qy, const double* qz,
                                const double* nx, const double* ny, const double* nz,
                                double* r, int count);

namespace detail {

struct KernelTable {
  RayBlockHit (*ray_block_nearest)(const TriBlockSoA&, const double*, const double*,
                                   double, double);
  void (*transform_points)(const double*, const double*, const double*, const double*,
                           const double*, double*, double*, double*, int);
  double (*point_to_plane_residuals)(const double*, const double*, const double*,
                                     const double*, const double*, const double*,
                                     const double*, const double*, const double*,
                                     double*, int);
};

const KernelTable& table_for(Backend b);

extern const KernelTable scalar_table;
#if defined(MOBIMAN_HAVE_AVX2)
extern const KernelTable avx2_table;
#endif

}  // namespace detail

}  // namespace mobiman::kernels
