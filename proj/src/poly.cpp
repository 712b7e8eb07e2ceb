#include "ptk/poly.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <stdexcept>

namespace ptk {

void Poly::trim() {
  while (!c_.empty() && c_.back() == 0) c_.pop_back();
}

Poly Poly::xpow(int k, Rat scale) {
  std::vector<Rat> c(k + 1, Rat(0));
  c[k] = std::move(scale);
  return Poly(std::move(c));
}

const Rat& Poly::coeff(int k) const {
  static const Rat kZero(0);
  if (k < 0 || k >= static_cast<int>(c_.size())) return kZero;
  return c_[k];
}

Poly Poly::operator+(const Poly& o) const {
  std::vector<Rat> c(std::max(c_.size(), o.c_.size()), Rat(0));
  for (size_t i = 0; i < c_.size(); ++i) c[i] += c_[i];
  for (size_t i = 0; i < o.c_.size(); ++i) c[i] += o.c_[i];
  return Poly(std::move(c));
}

Poly Poly::operator-(const Poly& o) const {
  std::vector<Rat> c(std::max(c_.size(), o.c_.size()), Rat(0));
  for (size_t i = 0; i < c_.size(); ++i) c[i] += c_[i];
  for (size_t i = 0; i < o.c_.size(); ++i) c[i] -= o.c_[i];
  return Poly(std::move(c));
}

Poly Poly::operator*(const Poly& o) const {
  if (is_zero() || o.is_zero()) return Poly();
  std::vector<Rat> c(c_.size() + o.c_.size() - 1, Rat(0));
  for (size_t i = 0; i < c_.size(); ++i) {
    if (c_[i] == 0) continue;
    for (size_t j = 0; j < o.c_.size(); ++j) c[i + j] += c_[i] * o.c_[j];
  }
  return Poly(std::move(c));
}

Poly Poly::operator*(const Rat& s) const {
  if (s == 0) return Poly();
  std::vector<Rat> c = c_;
  for (auto& v : c) v *= s;
  return Poly(std::move(c));
}

Poly Poly::operator-() const { return (*this) * Rat(-1); }

Poly Poly::star() const {
  std::vector<Rat> c = c_;
  for (size_t i = 1; i < c.size(); i += 2) c[i] = -c[i];
  return Poly(std::move(c));
}

Poly Poly::derivative() const {
  if (c_.size() <= 1) return Poly();
  std::vector<Rat> c(c_.size() - 1);
  for (size_t i = 1; i < c_.size(); ++i) c[i - 1] = c_[i] * Rat(static_cast<long>(i));
  return Poly(std::move(c));
}

Rat Poly::eval(const Rat& x) const {
  Rat v(0);
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) v = v * x + *it;
  return v;
}

Complex Poly::eval(Complex x) const {
  Complex v(0.0, 0.0);
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) v = v * x + rat_to_double(*it);
  return v;
}

std::pair<Poly, Poly> Poly::divmod(const Poly& a, const Poly& b) {
  if (b.is_zero()) throw std::invalid_argument("Poly::divmod: division by zero");
  std::vector<Rat> r = a.c_;
  const int db = b.degree();
  const Rat lb = b.lead();
  if (static_cast<int>(r.size()) - 1 < db) return {Poly(), a};
  std::vector<Rat> q(r.size() - db, Rat(0));
  for (int k = static_cast<int>(r.size()) - 1; k >= db; --k) {
    if (r[k] == 0) continue;
    const Rat f = r[k] / lb;
    q[k - db] = f;
    for (int j = 0; j <= db; ++j) r[k - db + j] -= f * b.c_[j];
    r[k] = 0;
  }
  return {Poly(std::move(q)), Poly(std::move(r))};
}

bool Poly::divides(const Poly& a, const Poly& b, Poly* q) {
  auto [quot, rem] = divmod(a, b);
  if (!rem.is_zero()) return false;
  if (q) *q = quot;
  return true;
}

Poly Poly::gcd(const Poly& a, const Poly& b) {
  Poly x = a, y = b;
  while (!y.is_zero()) {
    Poly r = divmod(x, y).second;
    x = y;
    y = r;
  }
  return x.monic();
}

Poly Poly::monic() const {
  if (is_zero()) return Poly();
  return (*this) * (Rat(1) / lead());
}

Poly Poly::squarefree() const {
  if (degree() <= 1) return monic();
  Poly g = gcd(*this, derivative());
  if (g.degree() == 0) return monic();
  return divmod(*this, g).first.monic();
}

namespace {

int sign_of(const Rat& v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

std::vector<Poly> sturm_chain(const Poly& p) {
  std::vector<Poly> chain;
  chain.push_back(p);
  chain.push_back(p.derivative());
  while (!chain.back().is_zero() && chain.back().degree() > 0) {
    Poly r = Poly::divmod(chain[chain.size() - 2], chain.back()).second;
    if (r.is_zero()) break;
    chain.push_back(-r);
  }
  return chain;
}

int sign_changes(const std::vector<Poly>& chain, const Rat& x) {
  int changes = 0, last = 0;
  for (const auto& p : chain) {
    const int s = sign_of(p.eval(x));
    if (s == 0) continue;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  return changes;
}

}  // namespace

int Poly::sturm_count(const Rat& a, const Rat& b) const {
  Poly sf = squarefree();
  if (sf.degree() <= 0) return 0;
  auto chain = sturm_chain(sf);
  return sign_changes(chain, a) - sign_changes(chain, b);
}

std::vector<double> Poly::real_roots() const {
  std::vector<double> out;
  Poly sf = squarefree();
  if (sf.degree() <= 0) return out;
  if (sf.degree() == 1) {
    out.push_back(rat_to_double(-sf.coeff(0) / sf.coeff(1)));
    return out;
  }
  auto chain = sturm_chain(sf);
  // Cauchy bound.
  Rat bound(1);
  for (int i = 0; i < sf.degree(); ++i) {
    Rat v = abs(sf.coeff(i) / sf.lead());
    if (v > bound) bound = v;
  }
  bound += 1;
  struct Interval {
    Rat a, b;
    int count;
  };
  std::vector<Interval> stack;
  const int total = sign_changes(chain, -bound) - sign_changes(chain, bound);
  if (total > 0) stack.push_back({-bound, bound, total});
  std::vector<std::pair<Rat, Rat>> isolated;
  while (!stack.empty()) {
    Interval iv = stack.back();
    stack.pop_back();
    if (iv.count == 1) {
      isolated.emplace_back(iv.a, iv.b);
      continue;
    }
    const Rat mid = (iv.a + iv.b) / 2;
    if (sf.eval(mid) == 0) {
      isolated.emplace_back(mid, mid);
      // Exclude the exact root with a tiny gap on both sides.
      Rat width = (iv.b - iv.a);
      Rat eps = width / 1000000;
      const int left = sign_changes(chain, iv.a) - sign_changes(chain, mid - eps);
      const int right = sign_changes(chain, mid + eps) - sign_changes(chain, iv.b);
      if (left > 0) stack.push_back({iv.a, mid - eps, left});
      if (right > 0) stack.push_back({mid + eps, iv.b, right});
      continue;
    }
    const int left = sign_changes(chain, iv.a) - sign_changes(chain, mid);
    const int right = iv.count - left;
    if (left > 0) stack.push_back({iv.a, mid, left});
    if (right > 0) stack.push_back({mid, iv.b, right});
  }
  for (auto& [a, b] : isolated) {
    if (a == b) {
      out.push_back(rat_to_double(a));
      continue;
    }
    // Bisection refinement on the sign of sf.
    Rat lo = a, hi = b;
    int slo = sign_of(sf.eval(lo));
    for (int it = 0; it < 80 && rat_to_double(hi - lo) > 1e-13 * (1.0 + std::abs(rat_to_double(lo)));
         ++it) {
      Rat mid = (lo + hi) / 2;
      const int sm = sign_of(sf.eval(mid));
      if (sm == 0) {
        lo = hi = mid;
        break;
      }
      if (sm == slo) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    out.push_back(rat_to_double((lo + hi) / 2));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Complex> Poly::roots() const {
  std::vector<Complex> out;
  Poly sf = squarefree();
  const int n = sf.degree();
  if (n <= 0) return out;
  Matrix C = Matrix::Zero(n, n);
  for (int i = 1; i < n; ++i) C(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) C(i, n - 1) = -rat_to_double(sf.coeff(i) / sf.lead());
  Eigen::EigenSolver<Matrix> es(C, false);
  for (int i = 0; i < n; ++i) out.push_back(es.eigenvalues()(i));
  return out;
}

std::string Poly::str() const {
  if (is_zero()) return "0";
  std::string s;
  for (int k = degree(); k >= 0; --k) {
    if (coeff(k) == 0) continue;
    if (!s.empty()) s += " + ";
    s += rat_str(coeff(k));
    if (k > 0) s += "*xi^" + std::to_string(k);
  }
  return s;
}

}  // namespace ptk
