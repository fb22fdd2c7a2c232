#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "cgldpc/factor_table.hpp"
#include "cgldpc/rng.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace cgldpc;
using testutil::DenseTable;

namespace {

const double kNegInf = -std::numeric_limits<double>::infinity();

SparseFactorTable random_table(SplitMix64& rng, std::vector<int> scope, double keep_prob) {
  const std::size_t full = std::size_t(1) << scope.size();
  std::vector<std::uint32_t> keys;
  std::vector<double> logw;
  for (std::uint32_t k = 0; k < full; ++k) {
    if (rng.uniform() < keep_prob) {
      keys.push_back(k);
      logw.push_back((rng.uniform() - 0.5) * 10.0);
    }
  }
  if (keys.empty()) {
    keys.push_back(std::uint32_t(rng.below(full)));
    logw.push_back(0.0);
  }
  return SparseFactorTable(std::move(scope), std::move(keys), std::move(logw));
}

// Compare a sparse result against a dense oracle in the linear domain.
void check_matches_dense(const SparseFactorTable& got, const DenseTable& want, double tol) {
  REQUIRE(got.scope() == want.scope);
  double scale = 1.0;
  for (double w : want.w) scale = std::max(scale, std::abs(w));
  for (std::uint32_t k = 0; k < want.w.size(); ++k) {
    const double g = std::exp(got.log_weight(k));
    CHECK(std::abs(g - want.w[k]) <= tol * scale);
  }
}

}  // namespace

TEST_CASE("constructor validates scope and keys") {
  CHECK_THROWS(SparseFactorTable({3, 1}, {0}, {0.0}));           // unsorted scope
  CHECK_THROWS(SparseFactorTable({1, 1}, {0}, {0.0}));           // duplicate var
  CHECK_THROWS(SparseFactorTable({0, 1}, {1, 1}, {0.0, 0.0}));   // duplicate key
  CHECK_THROWS(SparseFactorTable({0, 1}, {2, 1}, {0.0, 0.0}));   // unsorted keys
  CHECK_THROWS(SparseFactorTable({0}, {2}, {0.0}));              // key out of range
  CHECK_THROWS(SparseFactorTable({0}, {0}, {kNegInf}));          // -inf stored weight
  CHECK_THROWS(SparseFactorTable({0}, {0, 1}, {0.0}));           // length mismatch
}

TEST_CASE("parity tables enumerate exactly the even-parity assignments") {
  const std::vector<int> v3 = {2, 5, 9};
  const auto p3 = SparseFactorTable::parity(v3);
  CHECK(p3.scope() == v3);
  CHECK(p3.keys() == std::vector<std::uint32_t>{0, 3, 5, 6});
  for (double w : p3.log_weights()) CHECK(w == 0.0);
  CHECK(p3.log_weight(1) == kNegInf);
  CHECK(p3.log_weight(7) == kNegInf);

  const std::vector<int> v1 = {4};
  const auto p1 = SparseFactorTable::parity(v1);
  CHECK(p1.keys() == std::vector<std::uint32_t>{0});

  std::vector<int> v7(7);
  for (int i = 0; i < 7; ++i) v7[std::size_t(i)] = i;
  const auto p7 = SparseFactorTable::parity(v7);
  CHECK(p7.size() == 64);
  for (std::uint32_t k : p7.keys()) CHECK(__builtin_popcount(k) % 2 == 0);

  const auto u2 = SparseFactorTable::uniform(std::vector<int>{1, 3});
  CHECK(u2.keys() == std::vector<std::uint32_t>{0, 1, 2, 3});
}

TEST_CASE("log_partition, probabilities and shift_to_max are consistent") {
  SparseFactorTable t({0, 1}, {0, 2, 3}, {1.0, 2.0, 0.5});
  const double z = std::log(std::exp(1.0) + std::exp(2.0) + std::exp(0.5));
  CHECK(t.log_partition() == doctest::Approx(z).epsilon(1e-14));
  const auto pr = t.probabilities();
  REQUIRE(pr.size() == 3);
  CHECK(pr[0] == doctest::Approx(std::exp(1.0 - z)).epsilon(1e-14));
  CHECK(pr[1] == doctest::Approx(std::exp(2.0 - z)).epsilon(1e-14));
  double sum = 0.0;
  for (double p : pr) sum += p;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));

  auto t2 = t;
  t2.shift_to_max();
  CHECK(*std::max_element(t2.log_weights().begin(), t2.log_weights().end()) == 0.0);
  CHECK(t2.probabilities()[0] == doctest::Approx(pr[0]).epsilon(1e-14));

  CHECK(t.scope_index(0) == 0);
  CHECK(t.scope_index(1) == 1);
  CHECK(t.scope_index(5) == -1);
}

TEST_CASE("marginalize: identity, uniform collapse, and a brute-force check") {
  const std::vector<int> sc = {1, 4, 6, 9};
  SplitMix64 rng(101);
  const auto t = random_table(rng, sc, 0.8);

  // Keeping the full scope is the identity up to representation.
  const auto same = marginalize(t, sc);
  check_matches_dense(same, testutil::to_dense(t), 1e-12);

  // Uniform tables stay uniform under any projection.
  const auto u = SparseFactorTable::uniform(sc);
  const auto um = marginalize(u, std::vector<int>{4, 9});
  for (double w : um.probabilities()) CHECK(w == doctest::Approx(0.25).epsilon(1e-14));

  // Random projections against the dense oracle.
  const std::vector<std::vector<int>> keeps = {{1}, {4, 6}, {1, 6, 9}, {9}};
  for (const auto& keep : keeps) {
    const auto got = marginalize(t, keep);
    check_matches_dense(got, testutil::dense_marginalize(testutil::to_dense(t), keep), 1e-12);
  }

  CHECK_THROWS(marginalize(t, std::vector<int>{2}));  // not a subset of the scope
}

TEST_CASE("marginalize composes: projecting twice equals projecting once") {
  SplitMix64 rng(202);
  const auto t = random_table(rng, {0, 2, 3, 7, 8}, 0.6);
  const auto once = marginalize(t, std::vector<int>{2, 7});
  const auto twice = marginalize(marginalize(t, std::vector<int>{0, 2, 7}), std::vector<int>{2, 7});
  check_matches_dense(twice, testutil::to_dense(once), 1e-12);
}

TEST_CASE("absorb_ratio matches the dense oracle on random inputs") {
  SplitMix64 rng(303);
  for (int rep = 0; rep < 25; ++rep) {
    const auto target = random_table(rng, {1, 4, 7}, 0.7);
    const auto olds = random_table(rng, {4, 7}, 1.1);  // full support: safe denominator
    const auto news = random_table(rng, {4, 7}, 0.8);
    const auto got = absorb_ratio(target, news, olds);
    DenseTable want;
    REQUIRE(testutil::dense_absorb(testutil::to_dense(target), testutil::to_dense(news),
                                   testutil::to_dense(olds), want));
    check_matches_dense(got, want, 1e-12);
  }
}

TEST_CASE("absorbing an unchanged sepset leaves the distribution unchanged") {
  SplitMix64 rng(404);
  const auto target = random_table(rng, {0, 3, 5}, 0.9);
  auto sep = marginalize(target, std::vector<int>{3, 5});
  const auto got = absorb_ratio(target, sep, sep);
  const auto p0 = target.probabilities();
  const auto p1 = got.probabilities();
  REQUIRE(p0.size() == p1.size());
  for (std::size_t i = 0; i < p0.size(); ++i)
    CHECK(p0[i] == doctest::Approx(p1[i]).epsilon(1e-12));
}

TEST_CASE("absorb_ratio applies hard evidence by pruning") {
  const auto target = SparseFactorTable::uniform(std::vector<int>{0, 1});
  const SparseFactorTable evidence({0}, {1}, {0.0});  // var0 must be 1
  const auto olds = SparseFactorTable::uniform(std::vector<int>{0});
  const auto got = absorb_ratio(target, evidence, olds);
  CHECK(got.keys() == std::vector<std::uint32_t>{1, 3});
}

TEST_CASE("absorb_ratio rejects a zero old-sepset under nonzero new") {
  const auto target = SparseFactorTable::uniform(std::vector<int>{0, 1});
  const auto news = SparseFactorTable::uniform(std::vector<int>{0});
  const SparseFactorTable olds({0}, {0}, {0.0});  // missing var0 = 1
  CHECK_THROWS_AS(absorb_ratio(target, news, olds), std::runtime_error);
}

TEST_CASE("absorb_categorical matches absorb_ratio on equivalent tables") {
  SplitMix64 rng(505);
  const auto target = random_table(rng, {2, 4, 6}, 0.85);
  const CategoricalMessage news{4, std::log(0.3), std::log(0.7)};
  const CategoricalMessage olds{4, std::log(0.5), std::log(0.5)};
  const auto got = absorb_categorical(target, news, olds);
  const SparseFactorTable tnew({4}, {0, 1}, {news.lp0, news.lp1});
  const SparseFactorTable told({4}, {0, 1}, {olds.lp0, olds.lp1});
  const auto want = absorb_ratio(target, tnew, told);
  check_matches_dense(got, testutil::to_dense(want), 1e-12);
}

TEST_CASE("absorb_categorical handles a -inf component as hard evidence") {
  const auto target = SparseFactorTable::parity(std::vector<int>{0, 1, 2});
  const CategoricalMessage news{1, kNegInf, 0.0};  // var1 = 1 for sure
  const CategoricalMessage olds{1, std::log(0.5), std::log(0.5)};
  const auto got = absorb_categorical(target, news, olds);
  for (std::uint32_t k : got.keys()) CHECK(((k >> 1) & 1u) == 1u);
  CHECK(got.size() == 2);  // 010 and 011 patterns with even parity: {0,1,2}-keys 3, 6

  // -inf in the OLD message under a live new component is an ordering bug.
  const CategoricalMessage bad_old{1, kNegInf, 0.0};
  const CategoricalMessage live_new{1, std::log(0.5), std::log(0.5)};
  CHECK_THROWS_AS(absorb_categorical(target, live_new, bad_old), std::runtime_error);

  // Unknown variable in the message.
  const CategoricalMessage off{9, 0.0, 0.0};
  CHECK_THROWS(absorb_categorical(target, off, off));
}

TEST_CASE("symmetric_kl: zero, frozen value, and infinities") {
  const SparseFactorTable p({0}, {0, 1}, {std::log(0.5), std::log(0.5)});
  const SparseFactorTable q({0}, {0, 1}, {std::log(0.9), std::log(0.1)});
  CHECK(symmetric_kl(p, p) == doctest::Approx(0.0).epsilon(1e-15));
  // Frozen: ((D(P||Q) + D(Q||P)) / 2 for (.5,.5) vs (.9,.1).
  CHECK(symmetric_kl(p, q) == doctest::Approx(0.4394449154672439).epsilon(1e-12));
  CHECK(symmetric_kl(q, p) == doctest::Approx(0.4394449154672439).epsilon(1e-12));

  // Normalisation first: scaling all log-weights is invisible.
  const SparseFactorTable p_scaled({0}, {0, 1}, {std::log(0.5) + 7.0, std::log(0.5) + 7.0});
  CHECK(symmetric_kl(p, p_scaled) == doctest::Approx(0.0).epsilon(1e-15));

  // Disjoint and partially mismatched supports diverge.
  const SparseFactorTable a({0}, {0}, {0.0});
  const SparseFactorTable b({0}, {1}, {0.0});
  CHECK(symmetric_kl(a, b) == std::numeric_limits<double>::infinity());
  CHECK(symmetric_kl(p, a) == std::numeric_limits<double>::infinity());

  CHECK_THROWS(symmetric_kl(SparseFactorTable{}, SparseFactorTable{}));
}

TEST_CASE("a two-bit parity chain with evidence reproduces the exact posterior") {
  // One check over {0,1} with soft evidence on both bits: the joint is small
  // enough to write down by hand.
  auto joint = SparseFactorTable::parity(std::vector<int>{0, 1});
  const auto u = CategoricalMessage{0, std::log(0.5), std::log(0.5)};
  joint = absorb_categorical(std::move(joint), {0, std::log(0.2), std::log(0.8)}, u);
  joint = absorb_categorical(std::move(joint), {1, std::log(0.6), std::log(0.4)}, CategoricalMessage{1, std::log(0.5), std::log(0.5)});
  // Valid assignments 00 and 11 with weights .2*.6 and .8*.4 (x4 from the
  // uniform denominators, which cancels under normalisation).
  const auto m0 = marginalize(joint, std::vector<int>{0});
  const auto pr = m0.probabilities();
  const double w00 = 0.2 * 0.6, w11 = 0.8 * 0.4;
  CHECK(pr[0] == doctest::Approx(w00 / (w00 + w11)).epsilon(1e-12));
  CHECK(pr[1] == doctest::Approx(w11 / (w00 + w11)).epsilon(1e-12));
}
