#pragma once

#include <gmpxx.h>

#include <string>
#include <utility>
#include <vector>

#include "ellreg/characters.hpp"
#include "ellreg/curve.hpp"
#include "ellreg/dilog.hpp"

namespace ellreg::job {

// Knobs shared by every task.  File values come from the "parameters"
// object of the job file; command-line flags override them field by field.
struct JobParams {
  long prec_bits = 384;      // working precision
  long digits = 40;          // printed digits in the report
  long cutoff = 2000;        // lattice-sum truncation radius (dilog task)
  long prime_limit = 200;    // upper end of the prime range (euler task)
  mpz_class max_height = mpz_class(100000000);
  mpz_class coeff_bound = mpz_class(1000);
  std::string cache_dir;     // a_p cache directory; empty disables caching
  std::string out_path;      // report destination; empty prints to stdout
  bool strip_timings = false;
};

// One point of a divisor as written in the job file: either exact lattice
// coordinates (rational strings) or a numeric curve point (decimal
// strings), converted through the elliptic logarithm when the job runs.
struct PointSpec {
  bool torus = true;
  mpq_class r, s;
  std::string xre, xim, yre, yim;
};

struct TermSpec {
  long coeff = 0;
  PointSpec point;
};

// Named divisor data, one term list per coset representative.
struct DivisorSpec {
  std::vector<std::pair<long, std::vector<TermSpec>>> orbit;
};

struct JobSpec {
  curve::EllipticCurveData curve;
  long field_m = 1;
  std::vector<long> field_gens;
  std::vector<std::pair<std::string, DivisorSpec>> divisors;
  std::string task;
  std::string divisor;            // name used by the single-divisor tasks
  std::vector<std::string> pool;  // names used by the search task
  JobParams params;
};

// Parses a job file.  Rational strings are parsed exactly and divisor
// references must resolve; violations raise ParseError with a
// file:line:column diagnostic where the offending token can be located.
JobSpec parse_job_file(const std::string& path);
JobSpec parse_job_text(const std::string& text, const std::string& origin);

// Materializes one named divisor under the active precision context.
dilog::GaloisDivisor build_divisor(const JobSpec& job, const std::string& name,
                                   const curve::EllipticCurveData& E,
                                   const curve::PeriodLattice& L);

// Executes the named pipeline and assembles the JSON report.  The report
// is written atomically (temporary file, then rename) when an output path
// is set, and always handed back through report_out when non-null.
// Returns the process exit code: 0 for PASS or plain success, 2 for FAIL,
// 3 for INDETERMINATE.  Input, calibration, and precision problems raise
// Error; main() maps every Error to exit code 4.
int run_job(const JobSpec& job, std::string* report_out = nullptr);

// Exit code for a thrown Error: always 4 (calibration and input errors
// share the code; the report never exists in that case).
int exit_code_for_error();

}  // namespace ellreg::job
