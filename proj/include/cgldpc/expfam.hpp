#pragma once
#include <span>

#include "cgldpc/factor_table.hpp"

namespace cgldpc {

// Moments of a gamma-distributed precision: <gamma> and <log gamma>.
struct GammaMoments {
  double e_gamma = 1.0;
  double e_log_gamma = 0.0;
};

// Known precision collapses the moments to a point mass.
GammaMoments point_gamma_moments(double precision);

// Gamma belief over a noise precision in natural parameters paired with
// sufficient statistics [gamma, log gamma]:
//   eta1 = -1/(2*omega) < 0,   eta2 = nu/2 - 1 > -1.
class GammaBelief {
 public:
  GammaBelief(double eta1, double eta2);
  static GammaBelief from_omega_nu(double omega, double nu);
  // nu fixed, omega chosen so the mean nu*omega equals `mean`
  static GammaBelief from_mean_nu(double mean, double nu);

  double eta1() const { return eta1_; }
  double eta2() const { return eta2_; }
  double omega() const { return -1.0 / (2.0 * eta1_); }
  double nu() const { return 2.0 * (eta2_ + 1.0); }
  double mean() const { return -(eta2_ + 1.0) / eta1_; }  // nu*omega
  double sd() const;

 private:
  double eta1_, eta2_;
};

GammaMoments gamma_moments(const GammaBelief& b);

// Observed BPSK sample with a conditional Gaussian likelihood
// N(x | mu_b, 1/gamma), mu_0 = -1, mu_1 = +1.  Holds the currently installed
// precision moments and bit posterior.
struct CondGaussianBelief {
  double x = 0.0;
  GammaMoments gm;
  double p_b0 = 0.5;
  double p_b1 = 0.5;
};

inline constexpr double kBpskMu0 = -1.0;
inline constexpr double kBpskMu1 = 1.0;

// Install fresh precision moments in an observation node (VMP parent->child).
CondGaussianBelief vmp_parent_to_child_gamma(const GammaMoments& gm, CondGaussianBelief node);

// Natural-parameter increment an observation sends to the gamma cluster.
// The second component is identically 1/2 because bit indicators sum to one.
struct GammaIncrement {
  double d_eta1 = 0.0;
  double d_eta2 = 0.5;
};

GammaIncrement vmp_child_to_parent_gamma(const CondGaussianBelief& node);

// Natural-parameter sum of a prior and observation increments.
GammaBelief gamma_posterior(const GammaBelief& prior, std::span<const GammaIncrement> increments);

// Bit evidence an observation node sends to its parity cluster:
//   lp_i = <gamma>*mu_i*x - <gamma>*x^2/2 + (<log gamma> - <gamma>*mu_i^2 - log 2*pi)/2.
// The node's installed p_b cancels and does not enter.
CategoricalMessage hybrid_child_to_parent_bit(const CondGaussianBelief& node, int var);

// Install the (normalised) single-bit sepset marginal as the node's bit
// posterior.  The table must be a single-variable marginal.
CondGaussianBelief hybrid_parent_to_child_bit(CondGaussianBelief node,
                                              const SparseFactorTable& sepset_belief);

// Digamma via recurrence shift into the asymptotic regime plus the Bernoulli
// series; absolute accuracy around 1e-13 on x > 0.
double digamma(double x);

}  // namespace cgldpc
