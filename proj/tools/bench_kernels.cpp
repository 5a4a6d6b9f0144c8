// Benchmark for the two OpenMP kernels against their serial twins.  Both
// pairs are required to agree (bit for bit for the integer character sum,
// to attached error for the lattice sum), so the interesting number here is
// the wall-clock ratio on the host's core count.

#include <chrono>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ellreg/curve.hpp"
#include "ellreg/dilog.hpp"
#include "ellreg/precision.hpp"

namespace {

using namespace ellreg;

template <typename F>
double timed(F&& fn) {
  auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

int main(int argc, char** argv) {
  long p = argc > 1 ? std::atol(argv[1]) : 2000003;
  long radius = argc > 2 ? std::atol(argv[2]) : 600;
#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP disabled at build time\n");
#endif

  // point-count character sum at a large prime: the b-model cubic of 11a1,
  // the same shape the a_p evaluator feeds these kernels
  long s_serial = 0, s_omp = 0;
  double t_ser = timed(
      [&] { s_serial = curve::kernel::chi_sum_serial(p, 4, -4, -40, -79); });
  double t_omp =
      timed([&] { s_omp = curve::kernel::chi_sum_omp(p, 4, -4, -40, -79); });
  std::printf("chi_sum p=%ld: serial %.3fs, omp %.3fs, speedup %.2fx, %s\n", p,
              t_ser, t_omp, t_ser / t_omp,
              s_serial == s_omp ? "values agree" : "VALUES DIFFER");

  // Eisenstein-Kronecker lattice sum on the 11a1 period lattice
  num::ScopedPrecision sp(128);
  curve::EllipticCurveData E = curve::EllipticCurveData::make(
      "11a1",
      {mpq_class(0), mpq_class(-1), mpq_class(1), mpq_class(-10),
       mpq_class(-20)},
      11);
  curve::PeriodLattice L = curve::periods(E);
  curve::TorusPoint z =
      curve::TorusPoint::from_exact(mpq_class(1, 5), mpq_class(2, 5));
  num::BigComplex k_serial, k_omp;
  double t_kser =
      timed([&] { k_serial = dilog::kronecker_sum(L, z, radius, false); });
  double t_komp =
      timed([&] { k_omp = dilog::kronecker_sum(L, z, radius, true); });
  num::BigReal gap = abs(k_serial - k_omp);
  std::printf(
      "kronecker_sum R=%ld: serial %.3fs, omp %.3fs, speedup %.2fx, "
      "|serial-omp| %s\n",
      radius, t_kser, t_komp, t_kser / t_komp,
      gap.is_zero() ? "0 (bit-identical)"
                    : ("2^" + std::to_string((long)gap.mag_log2())).c_str());
  return s_serial == s_omp ? 0 : 1;
}
