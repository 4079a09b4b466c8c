#include "violin/model.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <type_traits>

#include <quadmath.h>

namespace violin {
namespace {

constexpr double kNormSlack = 1e-9;
constexpr double kKinkTol = 1e-12;

template <class... Ts>
struct Overload : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overload(Ts...) -> Overload<Ts...>;

template <typename Real>
Real exp_of(Real x) {
  if constexpr (std::is_same_v<Real, __float128>)
    return expq(x);
  else
    return std::exp(x);
}

template <typename Real>
Real sigmoid(Real x) {
  return Real(1) / (Real(1) + exp_of(-x));
}
double dsigmoid(double x) {
  const double s = sigmoid(x);
  return s * (1.0 - s);
}
double d2sigmoid(double x) {
  const double s = sigmoid(x);
  return s * (1.0 - s) * (1.0 - 2.0 * s);
}

template <typename Real>
Real dot_as(std::span<const double> x, std::span<const Real> y) {
  Real s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += static_cast<Real>(x[i]) * y[i];
  return s;
}

template <typename Real>
Real sqnorm_as(std::span<const Real> a) {
  Real s = 0;
  for (Real v : a) s += v * v;
  return s;
}

void require_dim(std::size_t expected, std::size_t got) {
  if (expected != got)
    throw std::invalid_argument("dimension mismatch: expected " + std::to_string(expected) + ", got " +
                                std::to_string(got));
}

void require_finite(std::span<const double> x, const char* what) {
  for (double v : x)
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + ": non-finite entry");
}

void check_kink(double z) {
  if (std::abs(z) < kKinkTol) throw KinkError("evaluation on a ReLU kink");
}

}  // namespace

std::string_view family_name(Family f) {
  switch (f) {
    case Family::Linear: return "linear";
    case Family::Logistic: return "logistic";
    case Family::TwoLayer: return "two_layer";
    case Family::ReluNeedle: return "relu_needle";
    case Family::UcbTrap: return "ucb_trap";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  for (Family f : {Family::Linear, Family::Logistic, Family::TwoLayer, Family::ReluNeedle, Family::UcbTrap})
    if (family_name(f) == name) return f;
  throw std::invalid_argument("unknown model family '" + std::string(name) + "'");
}

double logistic_c() { return std::numbers::e / ((std::numbers::e + 1.0) * (std::numbers::e + 1.0)); }

ModelParams ModelParams::linear(Vec theta) {
  require_finite(theta, "linear theta");
  if (theta.empty()) throw std::invalid_argument("linear theta: empty");
  if (norm2(theta) > 1.0 + kNormSlack) throw std::invalid_argument("linear theta: norm exceeds 1");
  return ModelParams(LinearParams{std::move(theta)});
}

ModelParams ModelParams::logistic(Vec theta) {
  require_finite(theta, "logistic theta");
  if (theta.empty()) throw std::invalid_argument("logistic theta: empty");
  if (std::abs(norm2(theta) - 1.0) > kNormSlack) throw std::invalid_argument("logistic theta: not a unit vector");
  return ModelParams(LogisticParams{std::move(theta)});
}

ModelParams ModelParams::two_layer(Matrix w1, Vec w2) {
  require_finite(w1.data(), "two_layer W1");
  require_finite(w2, "two_layer W2");
  if (w1.rows() == 0 || w1.cols() == 0) throw std::invalid_argument("two_layer W1: empty");
  require_dim(w1.rows(), w2.size());
  for (std::size_t r = 0; r < w1.rows(); ++r) {
    double s = 0.0;
    for (double v : w1.row(r)) s += std::abs(v);
    if (s > 1.0 + kNormSlack) throw std::invalid_argument("two_layer W1: row l1 norm exceeds 1");
  }
  double s = 0.0;
  for (double v : w2) s += std::abs(v);
  if (s > 1.0 + kNormSlack) throw std::invalid_argument("two_layer W2: l1 norm exceeds 1");
  return ModelParams(TwoLayerParams{std::move(w1), std::move(w2)});
}

ModelParams ModelParams::relu_needle(Vec theta, double eps) {
  require_finite(theta, "relu_needle theta");
  if (theta.empty()) throw std::invalid_argument("relu_needle theta: empty");
  if (std::abs(norm2(theta) - 1.0) > kNormSlack) throw std::invalid_argument("relu_needle theta: not a unit vector");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("relu_needle eps must lie in (0, 1)");
  return ModelParams(ReluNeedleParams{std::move(theta), eps});
}

ModelParams ModelParams::ucb_trap(Vec theta1, Vec theta2, double alpha) {
  require_finite(theta1, "ucb_trap theta1");
  require_finite(theta2, "ucb_trap theta2");
  if (theta1.empty()) throw std::invalid_argument("ucb_trap theta1: empty");
  require_dim(theta1.size(), theta2.size());
  if (norm2(theta1) > 1.0 + kNormSlack) throw std::invalid_argument("ucb_trap theta1: norm exceeds 1");
  if (std::abs(norm2(theta2) - 1.0) > kNormSlack) throw std::invalid_argument("ucb_trap theta2: not a unit vector");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("ucb_trap alpha must lie in [0, 1]");
  return ModelParams(UcbTrapParams{std::move(theta1), std::move(theta2), alpha});
}

std::size_t ModelParams::action_dim() const {
  return std::visit(Overload{[](const TwoLayerParams& p) { return p.w1.cols(); },
                             [](const UcbTrapParams& p) { return p.theta1.size(); },
                             [](const auto& p) { return p.theta.size(); }},
                    payload_);
}

Vec ModelParams::flat() const {
  return std::visit(Overload{[](const LinearParams& p) { return p.theta; },
                             [](const LogisticParams& p) { return p.theta; },
                             [](const TwoLayerParams& p) {
                               Vec v = p.w1.data();
                               v.insert(v.end(), p.w2.begin(), p.w2.end());
                               return v;
                             },
                             [](const ReluNeedleParams& p) {
                               Vec v = p.theta;
                               v.push_back(p.eps);
                               return v;
                             },
                             [](const UcbTrapParams& p) {
                               Vec v = p.theta1;
                               v.insert(v.end(), p.theta2.begin(), p.theta2.end());
                               v.push_back(p.alpha);
                               return v;
                             }},
                    payload_);
}

void check_action(std::span<const double> a, std::size_t dim) {
  require_dim(dim, a.size());
  require_finite(a, "action");
}

template <typename Real>
Real eta_as(const ModelParams& theta, std::span<const Real> a) {
  require_dim(theta.action_dim(), a.size());
  return std::visit(
      Overload{[&](const LinearParams& p) { return dot_as<Real>(p.theta, a) - Real(0.5) * sqnorm_as<Real>(a); },
               [&](const LogisticParams& p) {
                 return sigmoid<Real>(dot_as<Real>(p.theta, a)) -
                        static_cast<Real>(logistic_c()) / Real(2) * sqnorm_as<Real>(a);
               },
               [&](const TwoLayerParams& p) {
                 Real s = 0;
                 for (std::size_t r = 0; r < p.w1.rows(); ++r)
                   s += static_cast<Real>(p.w2[r]) * sigmoid<Real>(dot_as<Real>(p.w1.row(r), a));
                 return s - Real(0.5) * sqnorm_as<Real>(a);
               },
               [&](const ReluNeedleParams& p) {
                 const Real z = dot_as<Real>(p.theta, a) - Real(1) + static_cast<Real>(p.eps);
                 return z > 0 ? z : Real(0);
               },
               [&](const UcbTrapParams& p) {
                 const Real lin = dot_as<Real>(p.theta1, a) / Real(64);
                 const Real z = dot_as<Real>(p.theta2, a) - Real(31) / Real(32);
                 return lin + static_cast<Real>(p.alpha) * (z > 0 ? z : Real(0));
               }},
      theta.payload());
}

template double eta_as<double>(const ModelParams&, std::span<const double>);
template long double eta_as<long double>(const ModelParams&, std::span<const long double>);
template __float128 eta_as<__float128>(const ModelParams&, std::span<const __float128>);

double eta(const ModelParams& theta, std::span<const double> a) { return eta_as<double>(theta, a); }

Vec grad_a(const ModelParams& theta, std::span<const double> a) {
  require_dim(theta.action_dim(), a.size());
  return std::visit(Overload{[&](const LinearParams& p) { return sub(p.theta, a); },
                             [&](const LogisticParams& p) {
                               Vec g = scaled(p.theta, dsigmoid(dot(p.theta, a)));
                               axpy(-logistic_c(), a, g);
                               return g;
                             },
                             [&](const TwoLayerParams& p) {
                               Vec coef(p.w1.rows());
                               for (std::size_t r = 0; r < p.w1.rows(); ++r)
                                 coef[r] = p.w2[r] * dsigmoid(dot(p.w1.row(r), a));
                               Vec g = p.w1.left_multiply(coef);
                               axpy(-1.0, a, g);
                               return g;
                             },
                             [&](const ReluNeedleParams& p) {
                               const double z = dot(p.theta, a) - 1.0 + p.eps;
                               return z > 0 ? p.theta : Vec(a.size(), 0.0);
                             },
                             [&](const UcbTrapParams& p) {
                               Vec g = scaled(p.theta1, 1.0 / 64.0);
                               if (p.alpha > 0 && dot(p.theta2, a) - 31.0 / 32.0 > 0) axpy(p.alpha, p.theta2, g);
                               return g;
                             }},
                    theta.payload());
}

Matrix hess_a(const ModelParams& theta, std::span<const double> a) {
  require_dim(theta.action_dim(), a.size());
  const std::size_t d = a.size();
  return std::visit(Overload{[&](const LinearParams&) { return Matrix::identity(d) * -1.0; },
                             [&](const LogisticParams& p) {
                               Matrix h = Matrix::outer(p.theta, p.theta) * d2sigmoid(dot(p.theta, a));
                               for (std::size_t i = 0; i < d; ++i) h(i, i) -= logistic_c();
                               return h;
                             },
                             [&](const TwoLayerParams& p) {
                               Matrix h(d, d);
                               for (std::size_t r = 0; r < p.w1.rows(); ++r) {
                                 const double c = p.w2[r] * d2sigmoid(dot(p.w1.row(r), a));
                                 h += Matrix::outer(p.w1.row(r), p.w1.row(r)) * c;
                               }
                               for (std::size_t i = 0; i < d; ++i) h(i, i) -= 1.0;
                               return h;
                             },
                             [&](const ReluNeedleParams& p) {
                               check_kink(dot(p.theta, a) - 1.0 + p.eps);
                               return Matrix(d, d);
                             },
                             [&](const UcbTrapParams& p) {
                               if (p.alpha > 0) check_kink(dot(p.theta2, a) - 31.0 / 32.0);
                               return Matrix(d, d);
                             }},
                    theta.payload());
}

double grad_dot(const ModelParams& theta, std::span<const double> a, std::span<const double> u) {
  require_dim(theta.action_dim(), u.size());
  return dot(grad_a(theta, a), u);
}

double hess_form(const ModelParams& theta, std::span<const double> a, std::span<const double> u,
                 std::span<const double> v) {
  require_dim(theta.action_dim(), a.size());
  require_dim(a.size(), u.size());
  require_dim(a.size(), v.size());
  return std::visit(Overload{[&](const LinearParams&) { return -dot(u, v); },
                             [&](const LogisticParams& p) {
                               return d2sigmoid(dot(p.theta, a)) * dot(p.theta, u) * dot(p.theta, v) -
                                      logistic_c() * dot(u, v);
                             },
                             [&](const TwoLayerParams& p) {
                               double s = 0.0;
                               for (std::size_t r = 0; r < p.w1.rows(); ++r)
                                 s += p.w2[r] * d2sigmoid(dot(p.w1.row(r), a)) * dot(p.w1.row(r), u) *
                                      dot(p.w1.row(r), v);
                               return s - dot(u, v);
                             },
                             [&](const ReluNeedleParams& p) {
                               check_kink(dot(p.theta, a) - 1.0 + p.eps);
                               return 0.0;
                             },
                             [&](const UcbTrapParams& p) {
                               if (p.alpha > 0) check_kink(dot(p.theta2, a) - 31.0 / 32.0);
                               return 0.0;
                             }},
                    theta.payload());
}

SmoothnessConstants smoothness(Family f) {
  const double c = logistic_c();
  switch (f) {
    case Family::Linear: return {3.0, 1.0, 0.0};
    case Family::Logistic: return {0.25 + 2.0 * c, c + 1.0 / (6.0 * std::sqrt(3.0)), 0.125};
    case Family::TwoLayer: return {3.0, 2.0, 1.0};
    case Family::ReluNeedle: return {1.0, 1.0, 0.0};
    case Family::UcbTrap: return {65.0 / 64.0, 1.0, 0.0};
  }
  return {};
}

double action_radius(Family f) {
  return (f == Family::ReluNeedle || f == Family::UcbTrap) ? 1.0 : 2.0;
}

bool hessian_is_parameter_free(Family f) { return f == Family::Linear; }

double eta_range(Family f) {
  switch (f) {
    case Family::Linear: return 4.5;
    case Family::Logistic: return 1.0 + 2.0 * logistic_c();
    case Family::TwoLayer: return 4.0;
    case Family::ReluNeedle: return 1.0;
    case Family::UcbTrap: return 1.0 / 16.0;
  }
  return 0.0;
}

}  // namespace violin
