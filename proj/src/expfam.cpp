#include "cgldpc/expfam.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cgldpc {

GammaMoments point_gamma_moments(double precision) {
  if (!(precision > 0.0)) throw std::invalid_argument("precision must be positive");
  return {precision, std::log(precision)};
}

GammaBelief::GammaBelief(double eta1, double eta2) : eta1_(eta1), eta2_(eta2) {
  if (!(eta1 < 0.0) || !std::isfinite(eta1))
    throw std::invalid_argument("gamma belief requires eta1 < 0, got " + std::to_string(eta1));
  if (!(eta2 > -1.0) || !std::isfinite(eta2))
    throw std::invalid_argument("gamma belief requires eta2 > -1, got " + std::to_string(eta2));
}

GammaBelief GammaBelief::from_omega_nu(double omega, double nu) {
  if (!(omega > 0.0)) throw std::invalid_argument("omega must be positive");
  if (!(nu > 0.0)) throw std::invalid_argument("nu must be positive");
  return GammaBelief(-1.0 / (2.0 * omega), nu / 2.0 - 1.0);
}

GammaBelief GammaBelief::from_mean_nu(double mean, double nu) {
  if (!(mean > 0.0)) throw std::invalid_argument("mean must be positive");
  return from_omega_nu(mean / nu, nu);
}

double GammaBelief::sd() const {
  // shape nu/2, rate 1/(2*omega): variance = 2*nu*omega^2
  const double w = omega();
  return w * std::sqrt(2.0 * nu());
}

double digamma(double x) {
  if (!(x > 0.0)) throw std::invalid_argument("digamma requires x > 0");
  double acc = 0.0;
  // psi(x) = psi(x+1) - 1/x: shift into the asymptotic regime
  while (x < 10.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  // psi(x) ~ ln x - 1/(2x) - sum_n B_2n / (2n x^{2n}), truncated after x^{-12}
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = 691.0 / 32760.0;
  series = series * inv2 - 1.0 / 132.0;
  series = series * inv2 + 1.0 / 240.0;
  series = series * inv2 - 1.0 / 252.0;
  series = series * inv2 + 1.0 / 120.0;
  series = series * inv2 - 1.0 / 12.0;
  return acc + std::log(x) - 0.5 * inv + series * inv2;
}

GammaMoments gamma_moments(const GammaBelief& b) {
  // <gamma> = nu*omega, <log gamma> = psi(nu/2) - log(1/(2*omega))
  return {b.mean(), digamma(b.eta2() + 1.0) - std::log(-b.eta1())};
}

CondGaussianBelief vmp_parent_to_child_gamma(const GammaMoments& gm, CondGaussianBelief node) {
  node.gm = gm;
  return node;
}

GammaIncrement vmp_child_to_parent_gamma(const CondGaussianBelief& node) {
  const double r0 = node.x - kBpskMu0;
  const double r1 = node.x - kBpskMu1;
  return {-0.5 * (node.p_b0 * r0 * r0 + node.p_b1 * r1 * r1), 0.5};
}

GammaBelief gamma_posterior(const GammaBelief& prior, std::span<const GammaIncrement> increments) {
  double e1 = prior.eta1(), e2 = prior.eta2();
  for (const auto& inc : increments) {
    e1 += inc.d_eta1;
    e2 += inc.d_eta2;
  }
  return GammaBelief(e1, e2);
}

CategoricalMessage hybrid_child_to_parent_bit(const CondGaussianBelief& node, int var) {
  const double g = node.gm.e_gamma;
  const double t = g * node.x;
  const double c = -0.5 * t * node.x +
                   0.5 * (node.gm.e_log_gamma - g - std::log(2.0 * std::numbers::pi));
  return {var, kBpskMu0 * t + c, kBpskMu1 * t + c};
}

CondGaussianBelief hybrid_parent_to_child_bit(CondGaussianBelief node,
                                              const SparseFactorTable& sepset_belief) {
  if (sepset_belief.scope().size() != 1)
    throw std::invalid_argument("bit install expects a single-variable marginal");
  if (sepset_belief.empty())
    throw std::runtime_error("bit install: sepset marginal has no support");
  const auto probs = sepset_belief.probabilities();
  double p0 = 0.0, p1 = 0.0;
  for (std::size_t i = 0; i < sepset_belief.size(); ++i)
    (sepset_belief.keys()[i] ? p1 : p0) += probs[i];
  node.p_b0 = p0;
  node.p_b1 = p1;
  return node;
}

}  // namespace cgldpc
