#pragma once

#include <stdexcept>
#include <string_view>
#include <variant>

#include "violin/linalg.hpp"

namespace violin {

enum class Family { Linear, Logistic, TwoLayer, ReluNeedle, UcbTrap };

std::string_view family_name(Family f);
Family parse_family(std::string_view name);

class KinkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SmoothnessConstants {
  double zeta_g = 0.0;
  double zeta_h = 0.0;
  double zeta_3rd = 0.0;
};

// Logistic regularizer weight c = e / (e + 1)^2.
double logistic_c();

struct LinearParams {
  Vec theta;
};
struct LogisticParams {
  Vec theta;
};
// eta = w2 . sigmoid(w1 a) - |a|^2 / 2
struct TwoLayerParams {
  Matrix w1;
  Vec w2;
};
struct ReluNeedleParams {
  Vec theta;
  double eps;
};
struct UcbTrapParams {
  Vec theta1;
  Vec theta2;
  double alpha;
};

// A parameter point of one model family. Norm constraints are checked by the
// named constructors.
class ModelParams {
 public:
  using Payload = std::variant<LinearParams, LogisticParams, TwoLayerParams, ReluNeedleParams, UcbTrapParams>;

  static ModelParams linear(Vec theta);
  static ModelParams logistic(Vec theta);
  static ModelParams two_layer(Matrix w1, Vec w2);
  static ModelParams relu_needle(Vec theta, double eps);
  static ModelParams ucb_trap(Vec theta1, Vec theta2, double alpha);

  Family family() const { return static_cast<Family>(payload_.index()); }
  std::size_t action_dim() const;
  const Payload& payload() const { return payload_; }
  // Flattened parameters, used for distances between hypotheses.
  Vec flat() const;

 private:
  explicit ModelParams(Payload p) : payload_(std::move(p)) {}
  Payload payload_;
};

// Quad precision, used for the finite-difference reward queries.
using Quad = __float128;

template <typename Real>
Real eta_as(const ModelParams& theta, std::span<const Real> a);

double eta(const ModelParams& theta, std::span<const double> a);
Vec grad_a(const ModelParams& theta, std::span<const double> a);
Matrix hess_a(const ModelParams& theta, std::span<const double> a);
// <grad_a, u> and u^T hess_a v without forming the Hessian.
double grad_dot(const ModelParams& theta, std::span<const double> a, std::span<const double> u);
double hess_form(const ModelParams& theta, std::span<const double> a, std::span<const double> u,
                 std::span<const double> v);

SmoothnessConstants smoothness(Family f);
// Radius of the action ball the family is played on.
double action_radius(Family f);
// True when every member of the family shares one Hessian (so the Hessian term
// of the bandit loss vanishes under exact supervision).
bool hessian_is_parameter_free(Family f);
// Bounds on the range of eta over the action ball.
double eta_range(Family f);

void check_action(std::span<const double> a, std::size_t dim);

}  // namespace violin
