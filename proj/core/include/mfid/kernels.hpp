#pragma once

#include <string>
#include <vector>

namespace mfid {

enum class KernelFamily {
  exp_poly,       // (T2 - t)^j / j! * exp(-lambda (T2 - t)), absolute time
  sin_pow,        // sin^m(pi theta)
  one_minus_cos,  // 1 - cos(2 pi theta)
  poly_pow,       // theta^m (1 - theta)^m
  cosine,         // cos(2 pi k theta), auxiliary shift column
  sine,           // sin(2 pi k theta), auxiliary shift column
};

/// End of the window where an exp_poly kernel is anchored. A right-anchored
/// kernel weights recent data (observer at T2); a left-anchored one mirrors it.
enum class Anchor { right, left };

inline constexpr int kMaxDerivativeOrder = 12;

/// Smooth weight on a window [T1, T2], parameterized by normalized time
/// theta = (t - T1) / (T2 - T1).
///
/// Derivatives are exact: trigonometric families are stored as finite
/// Fourier sums, polynomial and exponential-polynomial families as p(theta)
/// times an exponential, and differentiated symbolically.
///
/// exp_poly kernels live in absolute time, so their shape on [0, 1] depends
/// on the window length; everything else ignores it.
class ModulatingKernel {
 public:
  static ModulatingKernel sin_pow(int m);
  static ModulatingKernel one_minus_cos();
  static ModulatingKernel poly_pow(int m);
  static ModulatingKernel exp_poly(int j, double lambda, Anchor anchor = Anchor::right);
  static ModulatingKernel cosine(int harmonic = 1);
  static ModulatingKernel sine(int harmonic = 1);

  KernelFamily family() const noexcept { return family_; }
  int parameter() const noexcept { return param_; }
  double lambda() const noexcept { return lambda_; }
  Anchor anchor() const noexcept { return anchor_; }

  /// Number of derivatives (orders 0 .. k-1) that vanish at both ends. For
  /// exp_poly this counts the anchor end only; the other end decays
  /// exponentially instead of vanishing.
  int annihilation_order() const noexcept;

  /// d^order/dtheta^order of the kernel at theta for a window of the given
  /// length. Throws CapabilityError above kMaxDerivativeOrder.
  double derivative(int order, double theta, double window_length = 1.0) const;

  /// Upper bound of |derivative(order, .)| on [0, 1] for window length 1.
  double magnitude_bound(int order) const;

  std::string name() const;

  /// Parses "sinpow:2", "polypow:3", "oneminuscos", "exppoly:2:1.0", "cos:1", "sin:1".
  static ModulatingKernel parse(const std::string& text);

 private:
  ModulatingKernel(KernelFamily family, int param, double lambda, Anchor anchor);

  KernelFamily family_;
  int param_ = 0;
  double lambda_ = 0.0;
  Anchor anchor_ = Anchor::right;

  // Fourier form: sum_k cos_[k] cos(k pi theta) + sin_[k] sin(k pi theta).
  std::vector<double> cos_;
  std::vector<double> sin_;
  // Polynomial form (ascending powers of theta), used by poly_pow.
  std::vector<double> poly_;
};

/// kernel.derivative(order, theta) with window length 1; for exp_poly this is
/// the derivative with respect to absolute time.
double kernel_eval(const ModulatingKernel& kernel, int derivative_order, double theta);

/// True iff every derivative of order < `order` vanishes at both window ends
/// (tolerance 1e-12 relative to the derivative's scale). exp_poly kernels
/// are checked at their anchor only.
bool check_annihilation(const ModulatingKernel& kernel, int order);

}  // namespace mfid
