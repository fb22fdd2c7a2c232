#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cgldpc/gf2.hpp"
#include "cgldpc/rng.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace cgldpc;

namespace {

std::vector<std::uint8_t> random_message(SplitMix64& rng, int k) {
  std::vector<std::uint8_t> m(static_cast<std::size_t>(k));
  for (auto& b : m) b = rng.bit() ? 1 : 0;
  return m;
}

}  // namespace

TEST_CASE("from_rows validates its input") {
  auto h = ParityCheckMatrix::from_rows(4, {{0, 2}, {1, 3}});
  CHECK(h.rows == 2);
  CHECK(h.cols == 4);
  CHECK(h.row_support[0] == std::vector<int>{0, 2});
  CHECK(h.rate() == doctest::Approx(0.5));
  CHECK_THROWS(ParityCheckMatrix::from_rows(4, {{0, 4}}));   // out of range
  CHECK_THROWS(ParityCheckMatrix::from_rows(4, {{1, 1}}));   // duplicate
  CHECK_THROWS(ParityCheckMatrix::from_rows(4, {{2, 0}}));   // unsorted
  CHECK_THROWS(ParityCheckMatrix::from_rows(4, {{}}));       // empty row
  const auto cols = ParityCheckMatrix::from_rows(3, {{0, 1}, {1, 2}}).col_support();
  CHECK(cols == std::vector<std::vector<int>>{{0}, {0, 1}, {1}});
}

TEST_CASE("alist round-trip is canonical and padded input is accepted") {
  const auto h = builtin_16_8();
  const std::string text = save_alist_string(h);
  std::istringstream in(text);
  const auto h2 = load_alist(in);
  CHECK(h2.rows == h.rows);
  CHECK(h2.cols == h.cols);
  CHECK(h2.row_support == h.row_support);
  CHECK(save_alist_string(h2) == text);  // second trip is textually identical

  // A 0-padded variant of a tiny matrix (short column lists padded to the
  // stated maximum with zeros) must parse to the same matrix.
  const std::string padded =
      "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 2\n2 3\n";
  std::istringstream pin(padded);
  const auto hp = load_alist(pin);
  CHECK(hp.cols == 3);
  CHECK(hp.rows == 2);
  CHECK(hp.row_support == std::vector<std::vector<int>>{{0, 1}, {1, 2}});
}

TEST_CASE("alist errors carry line numbers and describe the problem") {
  // Column list says column 1 is in row 2, row list disagrees.
  const std::string bad =
      "2 2\n1 1\n1 1\n1 1\n1\n2\n1\n1\n";
  std::istringstream in(bad);
  CHECK_THROWS_WITH_AS(load_alist(in),
                       doctest::Contains("disagrees between row and column lists"),
                       std::runtime_error);

  std::istringstream empty("");
  CHECK_THROWS_AS(load_alist(empty), std::runtime_error);

  std::istringstream junk("2 x\n");
  try {
    load_alist(junk);
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("line") != std::string::npos);
  }
}

TEST_CASE("builtin codes have the advertised shapes") {
  const auto h = builtin_16_8();
  CHECK(h.rows == 8);
  CHECK(h.cols == 16);
  CHECK(h.row_support[0] == std::vector<int>{1, 2, 3, 6, 7, 8, 10});
  CHECK(h.row_support[3] == std::vector<int>{0, 4, 5, 6, 7, 11});

  const auto big = builtin_220_110();
  CHECK(big.rows == 110);
  CHECK(big.cols == 220);
  CHECK(big.rate() == doctest::Approx(0.5));
  int max_deg = 0, second = 0;
  for (const auto& r : big.row_support) {
    const int d = int(r.size());
    if (d >= max_deg) {
      second = max_deg;
      max_deg = d;
    } else if (d > second) {
      second = d;
    }
  }
  CHECK(max_deg == 10);
  CHECK(second == 8);
}

TEST_CASE("resolve_code handles both spellings and file paths") {
  CHECK(resolve_code("(16,8)").row_support == builtin_16_8().row_support);
  CHECK(resolve_code("16x8").row_support == builtin_16_8().row_support);
  CHECK(resolve_code("n220").row_support == builtin_220_110().row_support);
  CHECK_THROWS(resolve_code("/nonexistent/path.alist"));
}

TEST_CASE("shipped alist files match the builtins") {
  const std::string dir = CGLDPC_DATA_DIR;
  CHECK(load_alist_file(dir + "/eq2_16x8.alist").row_support == builtin_16_8().row_support);
  CHECK(load_alist_file(dir + "/ldpc_n220_r05.alist").row_support ==
        builtin_220_110().row_support);
}

TEST_CASE("systematic encoder on trivial codes") {
  // H = [1 1]: repetition code, k = 1.
  const auto h = ParityCheckMatrix::from_rows(2, {{0, 1}});
  SystematicEncoder enc(h);
  CHECK(enc.message_len() == 1);
  CHECK(enc.codeword_len() == 2);
  const std::vector<std::uint8_t> zero = {0}, one = {1};
  CHECK(enc.encode(zero).bits == std::vector<std::uint8_t>{0, 0});
  CHECK(enc.encode(one).bits == std::vector<std::uint8_t>{1, 1});

  // Single check over three bits: k = 2, parity bit = sum of the others.
  const auto h3 = ParityCheckMatrix::from_rows(3, {{0, 1, 2}});
  SystematicEncoder e3(h3);
  CHECK(e3.message_len() == 2);
  for (std::uint8_t a : {0, 1})
    for (std::uint8_t b : {0, 1}) {
      const std::vector<std::uint8_t> msg = {a, b};
      const auto cw = e3.encode(msg);
      CHECK(syndrome_ok(h3, cw.bits));
      CHECK(cw.bits[std::size_t(e3.message_positions()[0])] == a);
      CHECK(cw.bits[std::size_t(e3.message_positions()[1])] == b);
    }

  // A square matrix leaves no message bits; the encoder refuses it.
  const auto hid = ParityCheckMatrix::from_rows(2, {{0}, {1}});
  CHECK_THROWS_AS(SystematicEncoder{hid}, std::invalid_argument);
}

TEST_CASE("encoder rejects rank-deficient matrices naming the row") {
  const auto h = ParityCheckMatrix::from_rows(4, {{0, 1}, {1, 2}, {0, 2}});  // row2 = row0+row1
  CHECK_THROWS_WITH_AS(SystematicEncoder{h}, doctest::Contains("row 2"), std::runtime_error);
}

TEST_CASE("message positions round-trip and codewords satisfy all checks") {
  for (const auto& h : {builtin_16_8(), builtin_220_110()}) {
    SystematicEncoder enc(h);
    CHECK(enc.message_len() == h.cols - h.rows);
    CHECK(int(enc.message_positions().size()) == enc.message_len());
    CHECK(int(enc.parity_positions().size()) == h.rows);

    SplitMix64 rng(7);
    std::vector<std::uint8_t> prev_bits;
    std::vector<std::uint8_t> prev_msg;
    for (int t = 0; t < 50; ++t) {
      const auto msg = random_message(rng, enc.message_len());
      const auto cw = enc.encode(msg);
      REQUIRE(int(cw.bits.size()) == h.cols);
      CHECK(syndrome_ok(h, cw.bits));
      // Systematic: message bits readable back at their positions.
      for (std::size_t i = 0; i < msg.size(); ++i)
        CHECK(cw.bits[std::size_t(enc.message_positions()[i])] == msg[i]);
      // Linearity over GF(2): encode(m1 ^ m2) == encode(m1) ^ encode(m2).
      if (t > 0) {
        std::vector<std::uint8_t> mx(msg.size());
        for (std::size_t i = 0; i < msg.size(); ++i) mx[i] = msg[i] ^ prev_msg[i];
        const auto cx = enc.encode(mx);
        for (std::size_t i = 0; i < cx.bits.size(); ++i)
          CHECK(cx.bits[i] == (cw.bits[i] ^ prev_bits[i]));
      }
      prev_bits = cw.bits;
      prev_msg = msg;
    }
  }
}

TEST_CASE("syndrome_ok flags single-bit corruption") {
  const auto h = builtin_16_8();
  SystematicEncoder enc(h);
  SplitMix64 rng(11);
  const auto cw = enc.encode(random_message(rng, enc.message_len()));
  REQUIRE(syndrome_ok(h, cw.bits));
  for (int i = 0; i < h.cols; ++i) {
    auto bad = cw.bits;
    bad[std::size_t(i)] ^= 1;
    CHECK_FALSE(syndrome_ok(h, bad));
  }
  std::vector<std::uint8_t> wrong_len(std::size_t(h.cols - 1), 0);
  CHECK_THROWS(syndrome_ok(h, wrong_len));
}
