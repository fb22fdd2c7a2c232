#pragma once
#include <cstdint>
#include <span>
#include <vector>

namespace cgldpc {

// Log-domain categorical message over one binary variable.  Components are
// unnormalised log probabilities; at most one of them may be -inf.
struct CategoricalMessage {
  int var = -1;
  double lp0 = 0.0;
  double lp1 = 0.0;
};

// Sparse table over binary variables in log domain.  The scope is a sorted
// list of variable ids; an assignment is packed into a key whose bit i is the
// value of scope[i].  Absent keys have probability exactly zero and are never
// stored, so -inf never appears among the stored weights.
class SparseFactorTable {
 public:
  SparseFactorTable() = default;
  SparseFactorTable(std::vector<int> scope, std::vector<std::uint32_t> keys,
                    std::vector<double> log_weights);

  // all even-parity assignments with log-weight 0
  static SparseFactorTable parity(std::span<const int> vars);
  // all assignments with log-weight 0
  static SparseFactorTable uniform(std::span<const int> vars);

  const std::vector<int>& scope() const { return scope_; }
  const std::vector<std::uint32_t>& keys() const { return keys_; }
  const std::vector<double>& log_weights() const { return logw_; }
  std::size_t size() const { return keys_.size(); }
  bool empty() const { return keys_.empty(); }

  // -inf for absent assignments
  double log_weight(std::uint32_t key) const;
  // log of the partition sum
  double log_partition() const;
  // normalised probabilities aligned with keys()
  std::vector<double> probabilities() const;
  // shift all log-weights so the maximum is 0 (representation-only change)
  void shift_to_max();

  // index of a variable in the scope, -1 when absent
  int scope_index(int var) const;

 private:
  std::vector<int> scope_;
  std::vector<std::uint32_t> keys_;  // strictly increasing
  std::vector<double> logw_;
};

// Sum out every variable not in `keep` (log-sum-exp).  `keep` must be a
// subset of the scope; the result scope is `keep` in sorted order.
SparseFactorTable marginalize(const SparseFactorTable& t, std::span<const int> keep);

// Belief-update absorption: target * new_sep / old_sep, all in log domain.
// The sepset tables share a scope that must be a subset of the target scope.
// Per assignment: a zero new_sep prunes the target entry; a zero old_sep
// under a nonzero new_sep is an error (it means messages were applied out of
// order); otherwise the log-ratio is added.
SparseFactorTable absorb_ratio(SparseFactorTable target, const SparseFactorTable& new_sep,
                               const SparseFactorTable& old_sep);

// Same update rule for a single-bit categorical message pair.
SparseFactorTable absorb_categorical(SparseFactorTable target, const CategoricalMessage& new_msg,
                                     const CategoricalMessage& old_msg);

// Symmetrised KL divergence (D(P||Q) + D(Q||P)) / 2 in nats between two
// tables over the same scope, each normalised first.  Support mismatches
// yield +inf; a pair of empty tables is an error.
double symmetric_kl(const SparseFactorTable& p, const SparseFactorTable& q);

}  // namespace cgldpc
