#pragma once
#include <cstddef>
#include <string_view>

namespace cgldpc::kernels {

// Inner-loop primitives shared by the factor-table, message and channel hot
// paths.  A scalar reference implementation always exists; on x86-64 an
// AVX2+FMA variant is selected at runtime when the CPU supports it.  All
// inputs are expected to be finite unless noted otherwise; callers deal with
// -inf (absent table entries) before reaching these loops.
struct Ops {
  // max over n values, -inf when n == 0
  double (*max_val)(const double* w, std::size_t n);
  // sum_i exp(w[i] - shift); w[i] may be -inf (contributes 0)
  double (*sum_exp)(const double* w, std::size_t n, double shift);
  // out[i] = exp(w[i] - shift); w[i] may be -inf
  void (*exp_shift)(const double* w, std::size_t n, double shift, double* out);
  // w[i] += c
  void (*add_scalar)(double* w, std::size_t n, double c);
  // BPSK log-likelihood pairs under a Gaussian with precision moments
  // (e_gamma, e_log_gamma) and means -1/+1:
  //   lp0[i] = -e_gamma*x[i] + c_i,  lp1[i] = +e_gamma*x[i] + c_i,
  //   c_i    = -e_gamma*x[i]^2/2 + (e_log_gamma - e_gamma - log(2*pi))/2
  void (*bit_loglik)(const double* x, std::size_t n, double e_gamma,
                     double e_log_gamma, double* lp0, double* lp1);
  // sum_i (1-p1[i])*(x[i]+1)^2 + p1[i]*(x[i]-1)^2
  double (*residual_quad)(const double* x, const double* p1, std::size_t n);
  // sum_i exp(lp[i]-zp) * ((lp[i]-zp) - (lq[i]-zq)); all values finite
  double (*kl_terms)(const double* lp, const double* lq, std::size_t n,
                     double zp, double zq);
  const char* name;
};

enum class Backend { Auto, Scalar, Avx2 };

// Currently selected implementation (defaults to the best available).
const Ops& active();
// Force a backend; returns false (and leaves the selection unchanged) when
// the requested backend is not available on this machine.
bool select(Backend b);
bool available(Backend b);
std::string_view active_name();

const Ops& scalar_ops();
const Ops* avx2_ops();  // nullptr when unsupported

}  // namespace cgldpc::kernels
