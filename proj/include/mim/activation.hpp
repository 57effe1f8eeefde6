#pragma once

#include <array>
#include <stdexcept>

namespace mim {

/// Requested derivative order exceeds what the activation (or network) supports.
class UnsupportedDerivative : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Shape of an input, cotangent or parameter vector does not match the model.
class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Power k of ReLU^k. Only ReLU, ReQU and ReCU are supported.
class ActivationPower {
 public:
  explicit ActivationPower(int k);
  constexpr int value() const noexcept { return k_; }
  friend bool operator==(ActivationPower, ActivationPower) = default;

 private:
  int k_;
};

/// d^order/dz^order ReLU^k(z). Every derivative is zero for z <= 0, so the
/// kink at z = 0 takes the left branch.
double activation_eval(ActivationPower k, double z, int order);

/// sigma^(r)(z) for r = 0..3 in one pass. Orders above k are returned as the
/// a.e. derivative (zero); callers that must reject them check k themselves.
inline std::array<double, 4> activation_derivatives(int k, double z) noexcept {
  std::array<double, 4> s{0.0, 0.0, 0.0, 0.0};
  if (z <= 0.0) return s;
  switch (k) {
    case 1:
      s[0] = z;
      s[1] = 1.0;
      break;
    case 2:
      s[0] = z * z;
      s[1] = 2.0 * z;
      s[2] = 2.0;
      break;
    case 3:
      s[0] = z * z * z;
      s[1] = 3.0 * z * z;
      s[2] = 6.0 * z;
      s[3] = 6.0;
      break;
    default:
      break;
  }
  return s;
}

}  // namespace mim
