#include "ptk/rational.hpp"

#include <cmath>
#include <stdexcept>

namespace ptk {

Rat rat_from_double(double x, long max_den, bool* exact) {
  if (!std::isfinite(x)) throw std::invalid_argument("rat_from_double: non-finite value");
  Rat full(x);  // exact binary expansion
  if (exact) *exact = true;
  if (full.get_den() <= max_den) return full;

  // Continued-fraction convergents of the exact value until the denominator
  // bound is hit; the last admissible convergent is the best approximation.
  mpz_class p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  Rat rem = full;
  Rat best = 0;
  while (true) {
    mpz_class a;
    mpz_fdiv_q(a.get_mpz_t(), rem.get_num().get_mpz_t(), rem.get_den().get_mpz_t());
    mpz_class p2 = a * p1 + p0;
    mpz_class q2 = a * q1 + q0;
    if (q2 > max_den) {
      // Semiconvergent with the largest admissible coefficient.
      if (q1 > 0) {
        mpz_class k = (mpz_class(max_den) - q0) / q1;
        mpz_class ps = k * p1 + p0, qs = k * q1 + q0;
        Rat conv(p1, q1 == 0 ? 1 : q1);
        conv.canonicalize();
        Rat semi(ps, qs);
        semi.canonicalize();
        best = (abs(full - semi) < abs(full - conv)) ? semi : conv;
      }
      break;
    }
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    best = Rat(p1, q1);
    best.canonicalize();
    Rat frac = rem - a;
    if (frac == 0) break;  // terminated exactly
    rem = 1 / frac;
  }
  if (exact) *exact = (best == full);
  return best;
}

Rat rat_parse(const std::string& text) {
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  }
  if (s.empty()) throw std::invalid_argument("rat_parse: empty string");
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    Rat r(s);
    r.canonicalize();
    return r;
  }
  auto dot = s.find('.');
  if (dot == std::string::npos) {
    Rat r(s);
    r.canonicalize();
    return r;
  }
  std::string digits = s.substr(0, dot) + s.substr(dot + 1);
  const size_t frac_len = s.size() - dot - 1;
  if (digits.empty() || digits == "-" || digits == "+") {
    throw std::invalid_argument("rat_parse: bad decimal '" + text + "'");
  }
  mpz_class num(digits);
  mpz_class den;
  mpz_ui_pow_ui(den.get_mpz_t(), 10, frac_len);
  Rat r(num, den);
  r.canonicalize();
  return r;
}

}  // namespace ptk
