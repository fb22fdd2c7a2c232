#include "cgldpc/factor_table.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "cgldpc/kernels.hpp"

namespace cgldpc {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kMaxScope = 24;

void check_scope(const std::vector<int>& scope) {
  if (scope.empty()) throw std::invalid_argument("factor table scope is empty");
  if (int(scope.size()) > kMaxScope)
    throw std::invalid_argument("factor table scope exceeds " + std::to_string(kMaxScope) +
                                " variables");
  for (std::size_t i = 0; i < scope.size(); ++i) {
    if (scope[i] < 0) throw std::invalid_argument("negative variable id in scope");
    if (i > 0 && scope[i] <= scope[i - 1])
      throw std::invalid_argument("scope must be sorted and duplicate-free");
  }
}
}  // namespace

SparseFactorTable::SparseFactorTable(std::vector<int> scope, std::vector<std::uint32_t> keys,
                                     std::vector<double> log_weights)
    : scope_(std::move(scope)), keys_(std::move(keys)), logw_(std::move(log_weights)) {
  check_scope(scope_);
  if (keys_.size() != logw_.size())
    throw std::invalid_argument("keys and log-weights differ in length");
  const std::uint32_t limit = std::uint32_t(1) << scope_.size();
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    if (keys_[i] >= limit) throw std::invalid_argument("assignment key out of range");
    if (i > 0 && keys_[i] <= keys_[i - 1])
      throw std::invalid_argument("assignment keys must be strictly increasing");
    if (!std::isfinite(logw_[i]))
      throw std::invalid_argument("log-weights must be finite (zero states are omitted)");
  }
}

SparseFactorTable SparseFactorTable::parity(std::span<const int> vars) {
  std::vector<int> scope(vars.begin(), vars.end());
  check_scope(scope);
  const std::uint32_t total = std::uint32_t(1) << scope.size();
  std::vector<std::uint32_t> keys;
  keys.reserve(total / 2);
  for (std::uint32_t k = 0; k < total; ++k)
    if ((std::popcount(k) & 1) == 0) keys.push_back(k);
  std::vector<double> w(keys.size(), 0.0);
  return SparseFactorTable(std::move(scope), std::move(keys), std::move(w));
}

SparseFactorTable SparseFactorTable::uniform(std::span<const int> vars) {
  std::vector<int> scope(vars.begin(), vars.end());
  check_scope(scope);
  const std::uint32_t total = std::uint32_t(1) << scope.size();
  std::vector<std::uint32_t> keys(total);
  for (std::uint32_t k = 0; k < total; ++k) keys[k] = k;
  std::vector<double> w(total, 0.0);
  return SparseFactorTable(std::move(scope), std::move(keys), std::move(w));
}

double SparseFactorTable::log_weight(std::uint32_t key) const {
  auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
  if (it == keys_.end() || *it != key) return kNegInf;
  return logw_[std::size_t(it - keys_.begin())];
}

double SparseFactorTable::log_partition() const {
  if (empty()) return kNegInf;
  const auto& k = kernels::active();
  const double m = k.max_val(logw_.data(), logw_.size());
  return m + std::log(k.sum_exp(logw_.data(), logw_.size(), m));
}

std::vector<double> SparseFactorTable::probabilities() const {
  if (empty()) throw std::runtime_error("cannot normalise an empty factor table");
  std::vector<double> p(logw_.size());
  kernels::active().exp_shift(logw_.data(), logw_.size(), log_partition(), p.data());
  return p;
}

void SparseFactorTable::shift_to_max() {
  if (empty()) return;
  const auto& k = kernels::active();
  const double m = k.max_val(logw_.data(), logw_.size());
  if (m != 0.0) k.add_scalar(logw_.data(), logw_.size(), -m);
}

int SparseFactorTable::scope_index(int var) const {
  auto it = std::lower_bound(scope_.begin(), scope_.end(), var);
  if (it == scope_.end() || *it != var) return -1;
  return int(it - scope_.begin());
}

namespace {

// bit positions of `sub` within `scope` (both sorted); throws when not a subset
std::vector<int> subset_positions(const std::vector<int>& scope, std::span<const int> sub) {
  std::vector<int> pos;
  pos.reserve(sub.size());
  for (int v : sub) {
    auto it = std::lower_bound(scope.begin(), scope.end(), v);
    if (it == scope.end() || *it != v)
      throw std::invalid_argument("variable " + std::to_string(v) + " is not in the table scope");
    pos.push_back(int(it - scope.begin()));
  }
  return pos;
}

inline std::uint32_t project_key(std::uint32_t key, const std::vector<int>& pos) {
  std::uint32_t out = 0;
  for (std::size_t j = 0; j < pos.size(); ++j) out |= ((key >> pos[j]) & 1u) << j;
  return out;
}

}  // namespace

SparseFactorTable marginalize(const SparseFactorTable& t, std::span<const int> keep) {
  std::vector<int> kv(keep.begin(), keep.end());
  std::sort(kv.begin(), kv.end());
  kv.erase(std::unique(kv.begin(), kv.end()), kv.end());
  if (kv.empty()) throw std::invalid_argument("marginalize: keep set is empty");
  const std::vector<int> pos = subset_positions(t.scope(), kv);

  const std::size_t groups = std::size_t(1) << kv.size();
  static thread_local std::vector<double> gmax, gsum, shifted, expd;
  static thread_local std::vector<std::uint32_t> gid;
  gmax.assign(groups, kNegInf);
  gsum.assign(groups, 0.0);

  const auto& keys = t.keys();
  const auto& logw = t.log_weights();
  const std::size_t n = keys.size();
  gid.resize(n);
  shifted.resize(n);
  expd.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t g = project_key(keys[i], pos);
    gid[i] = g;
    if (logw[i] > gmax[g]) gmax[g] = logw[i];
  }
  for (std::size_t i = 0; i < n; ++i) shifted[i] = logw[i] - gmax[gid[i]];
  kernels::active().exp_shift(shifted.data(), n, 0.0, expd.data());
  for (std::size_t i = 0; i < n; ++i) gsum[gid[i]] += expd[i];

  std::vector<std::uint32_t> out_keys;
  std::vector<double> out_w;
  for (std::size_t g = 0; g < groups; ++g)
    if (gmax[g] != kNegInf) {
      out_keys.push_back(std::uint32_t(g));
      out_w.push_back(gmax[g] + std::log(gsum[g]));
    }
  return SparseFactorTable(std::move(kv), std::move(out_keys), std::move(out_w));
}

SparseFactorTable absorb_ratio(SparseFactorTable target, const SparseFactorTable& new_sep,
                               const SparseFactorTable& old_sep) {
  if (new_sep.scope() != old_sep.scope())
    throw std::invalid_argument("absorb_ratio: sepset tables have different scopes");
  const std::vector<int> pos = subset_positions(target.scope(), new_sep.scope());

  const std::size_t states = std::size_t(1) << new_sep.scope().size();
  static thread_local std::vector<double> lnew, lold;
  lnew.assign(states, kNegInf);
  lold.assign(states, kNegInf);
  for (std::size_t i = 0; i < new_sep.size(); ++i) lnew[new_sep.keys()[i]] = new_sep.log_weights()[i];
  for (std::size_t i = 0; i < old_sep.size(); ++i) lold[old_sep.keys()[i]] = old_sep.log_weights()[i];

  std::vector<std::uint32_t> keys = target.keys();
  std::vector<double> logw = target.log_weights();
  std::size_t out = 0;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const std::uint32_t s = project_key(keys[i], pos);
    const double ln = lnew[s];
    if (ln == kNegInf) continue;  // zero numerator prunes the state
    const double lo = lold[s];
    if (lo == kNegInf)
      throw std::runtime_error(
          "absorb_ratio: zero old sepset state under a nonzero update "
          "(messages applied out of order)");
    keys[out] = keys[i];
    logw[out] = logw[i] + (ln - lo);
    ++out;
  }
  keys.resize(out);
  logw.resize(out);
  std::vector<int> scope = target.scope();
  return SparseFactorTable(std::move(scope), std::move(keys), std::move(logw));
}

namespace {
void check_message(const CategoricalMessage& m) {
  if (std::isnan(m.lp0) || std::isnan(m.lp1))
    throw std::invalid_argument("categorical message contains NaN");
  if (m.lp0 == kNegInf && m.lp1 == kNegInf)
    throw std::invalid_argument("categorical message has no support");
}
}  // namespace

SparseFactorTable absorb_categorical(SparseFactorTable target, const CategoricalMessage& new_msg,
                                     const CategoricalMessage& old_msg) {
  check_message(new_msg);
  check_message(old_msg);
  if (new_msg.var != old_msg.var)
    throw std::invalid_argument("absorb_categorical: message variable mismatch");
  const int idx = target.scope_index(new_msg.var);
  if (idx < 0)
    throw std::invalid_argument("absorb_categorical: variable " + std::to_string(new_msg.var) +
                                " is not in the target scope");

  const double lnew[2] = {new_msg.lp0, new_msg.lp1};
  const double lold[2] = {old_msg.lp0, old_msg.lp1};
  std::vector<std::uint32_t> keys = target.keys();
  std::vector<double> logw = target.log_weights();
  std::size_t out = 0;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const unsigned bit = (keys[i] >> idx) & 1u;
    if (lnew[bit] == kNegInf) continue;
    if (lold[bit] == kNegInf)
      throw std::runtime_error(
          "absorb_categorical: zero old message component under a nonzero update "
          "(messages applied out of order)");
    keys[out] = keys[i];
    logw[out] = logw[i] + (lnew[bit] - lold[bit]);
    ++out;
  }
  keys.resize(out);
  logw.resize(out);
  std::vector<int> scope = target.scope();
  return SparseFactorTable(std::move(scope), std::move(keys), std::move(logw));
}

double symmetric_kl(const SparseFactorTable& p, const SparseFactorTable& q) {
  if (p.scope() != q.scope())
    throw std::invalid_argument("symmetric_kl: tables have different scopes");
  if (p.empty() || q.empty())
    throw std::runtime_error("symmetric_kl: empty (unnormalisable) table");
  // Any support mismatch puts mass where the other table has exact zero.
  if (p.keys() != q.keys()) return std::numeric_limits<double>::infinity();

  const auto& k = kernels::active();
  const std::size_t n = p.size();
  const double* lp = p.log_weights().data();
  const double* lq = q.log_weights().data();
  const double mp = k.max_val(lp, n);
  const double mq = k.max_val(lq, n);
  const double zp = mp + std::log(k.sum_exp(lp, n, mp));
  const double zq = mq + std::log(k.sum_exp(lq, n, mq));
  const double kl_pq = k.kl_terms(lp, lq, n, zp, zq);
  const double kl_qp = k.kl_terms(lq, lp, n, zq, zp);
  return 0.5 * (kl_pq + kl_qp);
}

}  // namespace cgldpc
