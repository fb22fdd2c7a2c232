#include "cgldpc/kernels.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace cgldpc::kernels {
namespace {

double s_max_val(const double* w, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    if (w[i] > m) m = w[i];
  return m;
}

double s_sum_exp(const double* w, std::size_t n, double shift) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(w[i] - shift);
  return s;
}

void s_exp_shift(const double* w, std::size_t n, double shift, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(w[i] - shift);
}

void s_add_scalar(double* w, std::size_t n, double c) {
  for (std::size_t i = 0; i < n; ++i) w[i] += c;
}

void s_bit_loglik(const double* x, std::size_t n, double e_gamma,
                  double e_log_gamma, double* lp0, double* lp1) {
  const double base = 0.5 * (e_log_gamma - e_gamma - std::log(2.0 * std::numbers::pi));
  for (std::size_t i = 0; i < n; ++i) {
    const double t = e_gamma * x[i];
    const double c = base - 0.5 * t * x[i];
    lp0[i] = c - t;
    lp1[i] = c + t;
  }
}

double s_residual_quad(const double* x, const double* p1, std::size_t n) {
  // (1-p1)(x+1)^2 + p1(x-1)^2 == (x+1)^2 - 4*x*p1
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = x[i] + 1.0;
    s += a * a - 4.0 * x[i] * p1[i];
  }
  return s;
}

double s_kl_terms(const double* lp, const double* lq, std::size_t n, double zp,
                  double zq) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = lp[i] - zp;
    s += std::exp(a) * (a - (lq[i] - zq));
  }
  return s;
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops{s_max_val,     s_sum_exp,       s_exp_shift,
                       s_add_scalar,  s_bit_loglik,    s_residual_quad,
                       s_kl_terms,    "scalar"};
  return ops;
}

}  // namespace cgldpc::kernels
