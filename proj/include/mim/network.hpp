#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mim/activation.hpp"

namespace mim {

/// Dense row-major matrix, used for input Jacobians and their cotangents.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
};

/// Two-layer network y = c + sum_i a_i * ReLU^k(W_i . x + b_i).
///
/// Parameters live in one flat vector ordered (c, a_1..a_m, W_1..W_m, b_1..b_m)
/// so optimizers and finite-difference checks see a single contiguous array.
/// `barron_bound` is the B used by the class constraints
///   |W_i|_2 <= 1, |b_i| <= 1, sum_i |a_i|_1 <= 4B, |c|_inf <= 2B.
class ShallowNetwork {
 public:
  ShallowNetwork(ActivationPower k, int d, int p, int m, double barron_bound = 0.0);

  ActivationPower activation() const { return k_; }
  int input_dim() const { return d_; }
  int output_dim() const { return p_; }
  int width() const { return m_; }
  double barron_bound() const { return bound_; }
  void set_barron_bound(double B);

  std::span<double> params() { return theta_; }
  std::span<const double> params() const { return theta_; }
  std::size_t param_count() const { return theta_.size(); }

  std::span<double> c() { return {theta_.data(), static_cast<std::size_t>(p_)}; }
  std::span<const double> c() const { return {theta_.data(), static_cast<std::size_t>(p_)}; }
  std::span<double> a(int i) { return {theta_.data() + a_offset(i), static_cast<std::size_t>(p_)}; }
  std::span<const double> a(int i) const {
    return {theta_.data() + a_offset(i), static_cast<std::size_t>(p_)};
  }
  std::span<double> W(int i) { return {theta_.data() + w_offset(i), static_cast<std::size_t>(d_)}; }
  std::span<const double> W(int i) const {
    return {theta_.data() + w_offset(i), static_cast<std::size_t>(d_)};
  }
  double& b(int i) { return theta_[b_offset(i)]; }
  double b(int i) const { return theta_[b_offset(i)]; }

  std::size_t a_offset(int i) const { return static_cast<std::size_t>(p_) * (1 + i); }
  std::size_t w_offset(int i) const {
    return static_cast<std::size_t>(p_) * (1 + m_) + static_cast<std::size_t>(d_) * i;
  }
  std::size_t b_offset(int i) const {
    return static_cast<std::size_t>(p_) * (1 + m_) + static_cast<std::size_t>(d_) * m_ + i;
  }

  /// True when every class constraint holds to within `tol`.
  bool is_class_feasible(double tol = 1e-12) const;

 private:
  ActivationPower k_;
  int d_;
  int p_;
  int m_;
  double bound_;
  std::vector<double> theta_;
};

/// Which input derivatives `evaluate` fills.
enum class Derivs { value = 0, gradient = 1, laplacian = 2 };

/// Output of a fused network evaluation at one point.
struct NetworkEval {
  std::vector<double> y;    // p
  std::vector<double> jac;  // p x d, row-major
  std::vector<double> lap;  // p
};

/// Fused forward pass. Reuses the buffers in `out`.
void evaluate(const ShallowNetwork& net, std::span<const double> x, Derivs derivs,
              NetworkEval& out);

std::vector<double> forward(const ShallowNetwork& net, std::span<const double> x);
Matrix input_jacobian(const ShallowNetwork& net, std::span<const double> x);
/// Throws UnsupportedDerivative for ReLU (k < 2).
std::vector<double> input_laplacian(const ShallowNetwork& net, std::span<const double> x);

/// Adds d/dtheta of <cot_y, y> + <cot_jac, dy/dx> + <cot_lap, Laplacian y>
/// into `grad`. Empty spans mean a zero cotangent. `cot_jac` is p x d row-major.
void accumulate_backprop(const ShallowNetwork& net, std::span<const double> x,
                         std::span<const double> cot_y, std::span<const double> cot_jac,
                         std::span<const double> cot_lap, std::span<double> grad);

/// Flat parameter gradient of the same functional.
std::vector<double> parameter_backprop(const ShallowNetwork& net, std::span<const double> x,
                                       std::span<const double> cot_y, const Matrix& cot_jac,
                                       std::span<const double> cot_lap);

/// Projects onto the constrained class: rows of W onto the unit l2 ball, b
/// clipped to [-1, 1], the whole a-bank scaled by min(1, 4B / sum |a_i|_1),
/// c clipped to [-2B, 2B]. Idempotent.
ShallowNetwork project_to_class(ShallowNetwork net);
void project_in_place(ShallowNetwork& net);

/// Sum of l1 norms of the outer weights.
double outer_l1(const ShallowNetwork& net);

std::string to_json(const ShallowNetwork& net);
ShallowNetwork network_from_json(const std::string& text);

}  // namespace mim
