#include "mim/activation.hpp"

#include <string>

namespace mim {

ActivationPower::ActivationPower(int k) : k_(k) {
  if (k < 1 || k > 3) {
    throw std::invalid_argument("activation power must be 1, 2 or 3, got " + std::to_string(k));
  }
}

double activation_eval(ActivationPower k, double z, int order) {
  if (order < 0 || order > k.value()) {
    throw UnsupportedDerivative("derivative order " + std::to_string(order) +
                                " is not available for ReLU^" + std::to_string(k.value()));
  }
  return activation_derivatives(k.value(), z)[static_cast<std::size_t>(order)];
}

}  // namespace mim
