#include "violin/hard_instances.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "violin/kernels.hpp"

namespace violin {

SpherePacking build_packing(std::size_t d, double separation, std::uint64_t seed, std::size_t max_attempts,
                            std::optional<std::size_t> max_points) {
  if (!(separation > 0.0 && separation <= 2.0)) throw std::invalid_argument("build_packing: separation must lie in (0, 2]");
  if (d < 1) throw std::invalid_argument("build_packing: dimension must be >= 1");
  Rng rng(seed);
  SpherePacking out;
  out.separation = separation;
  const double sep2 = separation * separation;
  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    if (max_points && out.points.size() >= *max_points) break;
    Vec x = rng.unit_sphere(d);
    bool ok = true;
    for (const auto& p : out.points)
      if (kernels::squared_distance(p, x) < sep2) {
        ok = false;
        break;
      }
    if (ok) out.points.push_back(std::move(x));
  }
  if (!packing_is_valid(out)) throw std::logic_error("build_packing: audit failed");
  return out;
}

double audit_packing(const SpherePacking& packing) {
  double best = std::numeric_limits<double>::infinity();
  const auto& pts = packing.points;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < pts[i].size(); ++k) s += (pts[i][k] - pts[j][k]) * (pts[i][k] - pts[j][k]);
      best = std::min(best, std::sqrt(s));
    }
  return best;
}

bool packing_is_valid(const SpherePacking& packing) {
  for (const auto& p : packing.points)
    if (std::abs(norm2(p) - 1.0) > 1e-9) return false;
  return audit_packing(packing) >= packing.separation * (1.0 - 1e-12);
}

void write_packing(std::ostream& os, const SpherePacking& packing) {
  os << "# packing d=" << packing.dim() << " n=" << packing.points.size() << " separation=";
  os.precision(17);
  os << packing.separation << "\n";
  for (const auto& p : packing.points) {
    for (std::size_t k = 0; k < p.size(); ++k) os << (k ? " " : "") << p[k];
    os << "\n";
  }
}

SpherePacking read_packing(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# packing", 0) != 0)
    throw std::runtime_error("read_packing: missing header line");
  SpherePacking out;
  const auto pos = line.find("separation=");
  if (pos == std::string::npos) throw std::runtime_error("read_packing: header lacks separation");
  out.separation = std::stod(line.substr(pos + 11));
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    Vec p;
    double v;
    while (ss >> v) p.push_back(v);
    if (!out.points.empty() && p.size() != out.points.front().size())
      throw std::runtime_error("read_packing: inconsistent dimension");
    out.points.push_back(std::move(p));
  }
  return out;
}

double needle_eps_limit(double separation) { return 1.0 - std::sqrt(std::max(0.0, 1.0 - separation * separation / 4.0)); }

std::vector<ModelParams> relu_needle_family(const SpherePacking& packing, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("relu_needle_family: eps must lie in (0, 1)");
  if (packing.points.size() > 1 && eps > needle_eps_limit(packing.separation))
    throw std::invalid_argument("relu_needle_family: eps too large for the packing separation");
  std::vector<ModelParams> out;
  for (const auto& p : packing.points) out.push_back(ModelParams::relu_needle(p, eps));
  return out;
}

StochasticBasisEnv::StochasticBasisEnv(std::size_t d, std::size_t truth, bool noiseless)
    : d_(d), truth_(truth), noiseless_(noiseless) {
  if (d < 2) throw std::invalid_argument("stochastic basis instance: d must be >= 2");
  if (truth >= d) throw std::invalid_argument("stochastic basis instance: truth index out of range");
}

double StochasticBasisEnv::reward(std::span<const double> a, Rng& rng) const {
  check_action(a, d_);
  return a[truth_] + (noiseless_ ? 0.0 : rng.normal());
}

StochasticBasisEnv stochastic_basis_instance(std::size_t d, std::size_t truth, bool noiseless) {
  return StochasticBasisEnv(d, truth, noiseless);
}

bool best_arm_identification_trial(std::size_t d, std::size_t budget, Rng& rng) {
  const StochasticBasisEnv env(d, rng.index(d));
  std::vector<std::size_t> arms(d);
  for (std::size_t i = 0; i < d; ++i) arms[i] = i;
  std::shuffle(arms.begin(), arms.end(), rng.engine());
  std::size_t best = d;
  double best_reward = -std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < std::min(budget, d); ++q) {
    Vec a(d, 0.0);
    a[arms[q]] = 1.0;
    const double r = env.reward(a, rng);
    if (r > best_reward) {
      best_reward = r;
      best = arms[q];
    }
  }
  return best == env.truth();
}

double WitnessFunction::operator()(std::span<const double> a) const {
  const double z = dot(weights, a) + bias;
  return kind == Kind::Relu ? std::max(z, 0.0) : z;
}

EluderSequence eluder_sequence_sparse(std::size_t d) {
  if (d < 1) throw std::invalid_argument("eluder_sequence_sparse: d must be >= 1");
  EluderSequence seq;
  const WitnessFunction zero{WitnessFunction::Kind::Linear, Vec(d, 0.0), 0.0};
  for (std::size_t i = 0; i < d; ++i) {
    Vec e(d, 0.0);
    e[i] = 1.0;
    seq.witnesses.push_back({WitnessFunction{WitnessFunction::Kind::Linear, e, 0.0}, zero});
    seq.actions.push_back(std::move(e));
  }
  return seq;
}

EluderSequence eluder_sequence_relu(const SpherePacking& packing, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eluder_sequence_relu: eps must lie in (0, 1)");
  const auto& pts = packing.points;
  EluderSequence seq;
  if (pts.empty()) return seq;
  const std::size_t d = pts.front().size();
  auto needle = [&](const Vec& t) { return WitnessFunction{WitnessFunction::Kind::Relu, t, eps - 1.0}; };
  // identically zero on the unit ball
  const WitnessFunction zero{WitnessFunction::Kind::Relu, Vec(d, 0.0), -1.0};
  for (std::size_t i = 0; i < pts.size(); ++i) {
    seq.actions.push_back(pts[i]);
    seq.witnesses.push_back({needle(pts[i]), i + 1 < pts.size() ? needle(pts[i + 1]) : zero});
  }
  const auto ok = verify_eluder(seq, eps);
  for (bool b : ok)
    if (!b) throw std::invalid_argument("eluder_sequence_relu: separation too small for eps");
  return seq;
}

std::vector<bool> verify_eluder(const EluderSequence& seq, double eps) {
  if (seq.actions.size() != seq.witnesses.size()) throw std::invalid_argument("verify_eluder: length mismatch");
  std::vector<bool> out(seq.actions.size(), true);
  for (std::size_t i = 0; i < seq.actions.size(); ++i) {
    const auto& [f, g] = seq.witnesses[i];
    for (std::size_t j = 0; j < i && out[i]; ++j)
      if (std::abs(f(seq.actions[j]) - g(seq.actions[j])) > 1e-12) out[i] = false;
    if (std::abs(f(seq.actions[i]) - g(seq.actions[i])) < eps - 1e-12) out[i] = false;
  }
  return out;
}

}  // namespace violin
