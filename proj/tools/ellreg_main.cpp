#include <cstdio>
#include <exception>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"

#include "ellreg/errors.hpp"
#include "ellreg/report.hpp"

namespace {

mpz_class positive_mpz_flag(const std::string& s, const char* name) {
  try {
    mpz_class z(s);
    if (z < 1) throw std::invalid_argument("not positive");
    return z;
  } catch (const std::invalid_argument&) {
    ellreg::raise(ellreg::ErrorKind::ParseError,
                  std::string(name) + " must be a positive integer, got '" +
                      s + "'");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "ellreg: elliptic dilogarithms, twisted L-values, and rationality "
      "checks at high precision"};
  std::string job_path;
  app.add_option("job", job_path, "JobSpec JSON file")->required();

  long prec = 384, digits = 40, cutoff = 2000, prime_limit = 200;
  std::string max_height, coeff_bound, cache_dir, out_path;
  bool strip_timings = false;
  auto* o_prec =
      app.add_option("--prec", prec, "working precision in bits (default 384)");
  auto* o_digits =
      app.add_option("--digits", digits, "printed digits (default 40)");
  auto* o_cutoff = app.add_option(
      "--cutoff", cutoff, "lattice-sum truncation radius (default 2000)");
  auto* o_plimit = app.add_option("--prime-limit", prime_limit,
                                  "largest prime checked (default 200)");
  auto* o_height = app.add_option(
      "--max-height", max_height,
      "largest numerator/denominator accepted (default 100000000)");
  auto* o_bound = app.add_option("--coeff-bound", coeff_bound,
                                 "search coefficient bound (default 1000)");
  auto* o_cache =
      app.add_option("--cache-dir", cache_dir, "a_p cache directory");
  auto* o_out = app.add_option("--out", out_path, "report destination path");
  auto* o_strip = app.add_flag("--strip-timings", strip_timings,
                               "omit wall-clock timings from the report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_name() == "CallForHelp" ? 0 : 4;
  }

  try {
    ellreg::job::JobSpec job = ellreg::job::parse_job_file(job_path);
    if (o_prec->count()) job.params.prec_bits = prec;
    if (o_digits->count()) job.params.digits = digits;
    if (o_cutoff->count()) job.params.cutoff = cutoff;
    if (o_plimit->count()) job.params.prime_limit = prime_limit;
    if (o_height->count())
      job.params.max_height = positive_mpz_flag(max_height, "--max-height");
    if (o_bound->count())
      job.params.coeff_bound = positive_mpz_flag(coeff_bound, "--coeff-bound");
    if (o_cache->count()) job.params.cache_dir = cache_dir;
    if (o_out->count()) job.params.out_path = out_path;
    if (o_strip->count()) job.params.strip_timings = strip_timings;
    if (job.params.prec_bits < 64)
      ellreg::raise(ellreg::ErrorKind::ParseError,
                    "--prec wants at least 64 bits");
    return ellreg::job::run_job(job);
  } catch (const ellreg::Error& e) {
    std::fprintf(stderr, "ellreg: %s\n", e.what());
    return ellreg::job::exit_code_for_error();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ellreg: %s\n", e.what());
    return ellreg::job::exit_code_for_error();
  }
}
