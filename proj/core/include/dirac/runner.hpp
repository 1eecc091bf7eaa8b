#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dirac/potential.hpp"

namespace dirac {

inline constexpr const char* kVersion = "1.0.0";

// One potential in the config: a named family or an explicit segment list.
struct PotentialSpec {
  std::string family = "zero";  // zero|constant|step|trig|power|segments
  Complex value{};                                   // constant
  double from = 0.0, to = 1.0;                       // step window
  Complex height{};                                  // step
  std::vector<std::pair<int, Complex>> terms;        // trig
  int segments = 256;                                // trig mesh
  double alpha = 0.4;                                // power
  int knots = 256;                                   // power mesh
  Complex scale{1.0, 0.0};                           // power
  std::vector<double> breaks;                        // explicit
  std::vector<Poly> polys;                           // explicit (degree <= 3)

  Potential build(double p) const;
};

struct SweepSpec {
  int count = 64;
  double re_min = 2.0;
  double re_max = 160.0;
  double im_min = -1.8;
  double im_max = 1.8;

  std::vector<Complex> points() const;
};

struct RunConfig {
  double p = 1.5;
  double d = 2.0;
  PotentialSpec sigma1;
  PotentialSpec sigma2;
  bool bq_form = false;  // interpret the two specs as the B-form potentials
  int m_kernel = 512;
  int m_ode = 512;
  int n_lo = 1;
  int n_hi = 32;
  double tail_tol = 1e-10;
  double root_tol = 1e-10;
  double ode_tol = 1e-11;
  SweepSpec sweep;
  std::vector<Complex> solve_mu{Complex{10.3, 0.0}};
  int eigfun_n = 4;
  std::string dump_field = "Q";  // Q|N|Jtilde
  std::string out_dir = "out";
  unsigned threads = 1;
};

RunConfig parse_config_text(const std::string& json_text);
RunConfig load_config_file(const std::string& path);
// every field spelled out, canonical ordering
std::string normalized_config_text(const RunConfig& cfg);

void validate(const RunConfig& cfg);
PotentialPair build_pair(const RunConfig& cfg);

std::uint64_t fnv1a64(const void* data, std::size_t len);
std::string fnv1a64_hex(const std::string& s);

// Executes one subcommand (eig|eigfun|solve|kernel|remainders|verify),
// writes <command>.csv / verify.json plus manifest.json under cfg.out_dir.
// Returns the process exit code (0 ok, 1 verification failure).
int run(const std::string& command, const RunConfig& cfg);

}  // namespace dirac
