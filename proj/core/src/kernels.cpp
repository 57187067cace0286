#include "mfid/kernels.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "mfid/errors.hpp"

namespace mfid {

namespace {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

void check_order(int order) {
  if (order < 0 || order > kMaxDerivativeOrder) {
    std::ostringstream os;
    os << "kernel derivative of order " << order << " is not supported (max "
       << kMaxDerivativeOrder << ")";
    throw CapabilityError(os.str());
  }
}

// r-th derivative of sum_k a_k cos(k pi x) + b_k sin(k pi x).
double fourier_derivative(const std::vector<double>& a, const std::vector<double>& b, int r,
                          double x) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] == 0.0 && b[k] == 0.0) continue;
    const double w = static_cast<double>(k) * std::numbers::pi;
    if (k == 0) {
      if (r == 0) acc += a[0];
      continue;
    }
    const double c = std::cos(w * x);
    const double s = std::sin(w * x);
    const double scale = std::pow(w, r);
    double dc = 0.0;
    double ds = 0.0;
    switch (r % 4) {
      case 0: dc = c; ds = s; break;
      case 1: dc = -s; ds = c; break;
      case 2: dc = -c; ds = -s; break;
      default: dc = s; ds = -c; break;
    }
    acc += scale * (a[k] * dc + b[k] * ds);
  }
  return acc;
}

double fourier_scale(const std::vector<double>& a, const std::vector<double>& b, int r) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    acc += (std::abs(a[k]) + std::abs(b[k])) * std::pow(static_cast<double>(k) * std::numbers::pi, r);
  }
  return acc;
}

std::vector<double> poly_derivative(std::vector<double> p, int r) {
  for (int step = 0; step < r; ++step) {
    if (p.size() <= 1) return {0.0};
    std::vector<double> q(p.size() - 1);
    for (std::size_t i = 1; i < p.size(); ++i) q[i - 1] = p[i] * static_cast<double>(i);
    p = std::move(q);
  }
  return p;
}

double horner(const std::vector<double>& p, double x) {
  double acc = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * x + *it;
  return acc;
}

// s^i / i! * exp(-lambda s), zero for i < 0.
double exp_poly_basis(int i, double s, double lambda) {
  if (i < 0) return 0.0;
  return std::pow(s, i) / factorial(i) * std::exp(-lambda * s);
}

}  // namespace

ModulatingKernel::ModulatingKernel(KernelFamily family, int param, double lambda, Anchor anchor)
    : family_(family), param_(param), lambda_(lambda), anchor_(anchor) {}

ModulatingKernel ModulatingKernel::sin_pow(int m) {
  if (m < 1) throw ValidationError("sin_pow: exponent must be >= 1");
  ModulatingKernel k(KernelFamily::sin_pow, m, 0.0, Anchor::right);
  // sin^m x = (2i)^-m sum_q C(m,q) (-1)^q exp(i (m - 2q) x)
  std::vector<std::complex<double>> c(static_cast<std::size_t>(2 * m + 1));
  const std::complex<double> norm = std::pow(std::complex<double>(0.0, 2.0), -m);
  for (int q = 0; q <= m; ++q) {
    const int p = m - 2 * q;
    c[static_cast<std::size_t>(p + m)] += norm * binomial(m, q) * ((q % 2) ? -1.0 : 1.0);
  }
  k.cos_.assign(static_cast<std::size_t>(m + 1), 0.0);
  k.sin_.assign(static_cast<std::size_t>(m + 1), 0.0);
  k.cos_[0] = c[static_cast<std::size_t>(m)].real();
  for (int p = 1; p <= m; ++p) {
    const auto cp = c[static_cast<std::size_t>(m + p)];
    const auto cm = c[static_cast<std::size_t>(m - p)];
    k.cos_[static_cast<std::size_t>(p)] = (cp + cm).real();
    k.sin_[static_cast<std::size_t>(p)] = (std::complex<double>(0.0, 1.0) * (cp - cm)).real();
  }
  return k;
}

ModulatingKernel ModulatingKernel::one_minus_cos() {
  ModulatingKernel k(KernelFamily::one_minus_cos, 0, 0.0, Anchor::right);
  k.cos_ = {1.0, 0.0, -1.0};
  k.sin_ = {0.0, 0.0, 0.0};
  return k;
}

ModulatingKernel ModulatingKernel::cosine(int harmonic) {
  if (harmonic < 1) throw ValidationError("cosine: harmonic must be >= 1");
  ModulatingKernel k(KernelFamily::cosine, harmonic, 0.0, Anchor::right);
  k.cos_.assign(static_cast<std::size_t>(2 * harmonic + 1), 0.0);
  k.sin_.assign(k.cos_.size(), 0.0);
  k.cos_.back() = 1.0;
  return k;
}

ModulatingKernel ModulatingKernel::sine(int harmonic) {
  if (harmonic < 1) throw ValidationError("sine: harmonic must be >= 1");
  ModulatingKernel k(KernelFamily::sine, harmonic, 0.0, Anchor::right);
  k.cos_.assign(static_cast<std::size_t>(2 * harmonic + 1), 0.0);
  k.sin_.assign(k.cos_.size(), 0.0);
  k.sin_.back() = 1.0;
  return k;
}

ModulatingKernel ModulatingKernel::poly_pow(int m) {
  if (m < 1) throw ValidationError("poly_pow: exponent must be >= 1");
  ModulatingKernel k(KernelFamily::poly_pow, m, 0.0, Anchor::right);
  k.poly_.assign(static_cast<std::size_t>(2 * m + 1), 0.0);
  for (int q = 0; q <= m; ++q) {
    k.poly_[static_cast<std::size_t>(m + q)] = binomial(m, q) * ((q % 2) ? -1.0 : 1.0);
  }
  return k;
}

ModulatingKernel ModulatingKernel::exp_poly(int j, double lambda, Anchor anchor) {
  if (j < 0) throw ValidationError("exp_poly: power must be >= 0");
  if (!(lambda >= 0.0)) throw ValidationError("exp_poly: lambda must be >= 0");
  return ModulatingKernel(KernelFamily::exp_poly, j, lambda, anchor);
}

int ModulatingKernel::annihilation_order() const noexcept {
  switch (family_) {
    case KernelFamily::sin_pow:
    case KernelFamily::poly_pow:
    case KernelFamily::exp_poly:
      return param_;
    case KernelFamily::one_minus_cos:
      return 2;
    default:
      return 0;
  }
}

double ModulatingKernel::derivative(int order, double theta, double window_length) const {
  check_order(order);
  switch (family_) {
    case KernelFamily::poly_pow:
      return horner(poly_derivative(poly_, order), theta);
    case KernelFamily::exp_poly: {
      // d/ds g_i = g_{i-1} - lambda g_i, with s measured away from the anchor.
      const double L = window_length;
      const bool right = anchor_ == Anchor::right;
      const double s = right ? L * (1.0 - theta) : L * theta;
      double acc = 0.0;
      for (int q = 0; q <= order; ++q) {
        acc += binomial(order, q) * std::pow(-lambda_, order - q) *
               exp_poly_basis(param_ - q, s, lambda_);
      }
      return acc * std::pow(right ? -L : L, order);
    }
    default:
      return fourier_derivative(cos_, sin_, order, theta);
  }
}

double ModulatingKernel::magnitude_bound(int order) const {
  check_order(order);
  switch (family_) {
    case KernelFamily::poly_pow: {
      double acc = 0.0;
      for (double c : poly_derivative(poly_, order)) acc += std::abs(c);
      return acc;
    }
    case KernelFamily::exp_poly:
      return std::pow(1.0 + lambda_, order);
    default:
      return fourier_scale(cos_, sin_, order);
  }
}

std::string ModulatingKernel::name() const {
  std::ostringstream os;
  switch (family_) {
    case KernelFamily::sin_pow: os << "sinpow:" << param_; break;
    case KernelFamily::poly_pow: os << "polypow:" << param_; break;
    case KernelFamily::one_minus_cos: os << "oneminuscos"; break;
    case KernelFamily::cosine: os << "cos:" << param_; break;
    case KernelFamily::sine: os << "sin:" << param_; break;
    case KernelFamily::exp_poly:
      os << "exppoly:" << param_ << ':' << lambda_ << (anchor_ == Anchor::left ? ":left" : "");
      break;
  }
  return os.str();
}

ModulatingKernel ModulatingKernel::parse(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  auto int_arg = [&](std::size_t i) {
    if (parts.size() <= i) throw ValidationError("kernel '" + text + "': missing parameter");
    return std::stoi(parts[i]);
  };
  if (parts.empty()) throw ValidationError("empty kernel name");
  const std::string& fam = parts[0];
  try {
    if (fam == "sinpow") return sin_pow(int_arg(1));
    if (fam == "polypow") return poly_pow(int_arg(1));
    if (fam == "oneminuscos") return one_minus_cos();
    if (fam == "cos") return cosine(parts.size() > 1 ? int_arg(1) : 1);
    if (fam == "sin") return sine(parts.size() > 1 ? int_arg(1) : 1);
    if (fam == "exppoly") {
      if (parts.size() < 3) throw ValidationError("kernel '" + text + "': expected exppoly:j:lambda");
      const Anchor anchor = (parts.size() > 3 && parts[3] == "left") ? Anchor::left : Anchor::right;
      return exp_poly(int_arg(1), std::stod(parts[2]), anchor);
    }
  } catch (const std::invalid_argument&) {
    throw ValidationError("kernel '" + text + "': malformed parameter");
  }
  throw ValidationError("unknown kernel family '" + fam + "'");
}

double kernel_eval(const ModulatingKernel& kernel, int derivative_order, double theta) {
  return kernel.derivative(derivative_order, theta, 1.0);
}

bool check_annihilation(const ModulatingKernel& kernel, int order) {
  const bool exp_family = kernel.family() == KernelFamily::exp_poly;
  const bool check_left = !(exp_family && kernel.anchor() == Anchor::right);
  const bool check_right = !(exp_family && kernel.anchor() == Anchor::left);
  for (int r = 0; r < order; ++r) {
    if (r > kMaxDerivativeOrder) return false;
    const double tol = 1e-12 * std::max(kernel.magnitude_bound(r), 1.0);
    if (check_left && std::abs(kernel_eval(kernel, r, 0.0)) > tol) return false;
    if (check_right && std::abs(kernel_eval(kernel, r, 1.0)) > tol) return false;
  }
  return true;
}

}  // namespace mfid
