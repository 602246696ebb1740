#include <doctest.h>

#include "tdp/bytes.hpp"
#include "tdp/errors.hpp"

using namespace tdp;

TEST_CASE("hex round trip") {
  Bytes data = {0x00, 0x01, 0xab, 0xff, 0x7f};
  std::string hex = hex_encode(data);
  CHECK(hex == "0001abff7f");
  CHECK(hex_decode(hex) == data);
  CHECK(hex_decode("") == Bytes{});
  CHECK(hex_decode("ABCD") == Bytes{0xab, 0xcd});
}

TEST_CASE("hex decode rejects malformed input") {
  CHECK_THROWS_AS(hex_decode("abc"), EncodingError);
  CHECK_THROWS_AS(hex_decode("zz"), EncodingError);
  CHECK_THROWS_AS(hex_decode("0g"), EncodingError);
}

TEST_CASE("big endian integer encoding") {
  CHECK(u64be(0) == Bytes(8, 0));
  CHECK(u64be(0x0102030405060708ULL) ==
        Bytes{1, 2, 3, 4, 5, 6, 7, 8});
  CHECK(read_u64be(u64be(0xdeadbeefcafebabeULL)) == 0xdeadbeefcafebabeULL);
  CHECK_THROWS_AS(read_u64be(Bytes{1, 2, 3}), EncodingError);
}

TEST_CASE("transcript framing is injective") {
  // ("ab", "c") and ("a", "bc") must serialize differently even though the
  // concatenated payload bytes are identical.
  Transcript t1, t2;
  t1.add("ab").add("c");
  t2.add("a").add("bc");
  CHECK(t1.data() != t2.data());

  Transcript t3;
  t3.add("ab").add("c");
  CHECK(t3.data() == t1.data());
}

TEST_CASE("transcript length prefixes") {
  Transcript t;
  t.add("xy");
  CHECK(t.data() == Bytes{0, 0, 0, 2, 'x', 'y'});

  Transcript e;
  e.add("");
  CHECK(e.data() == Bytes{0, 0, 0, 0});

  Transcript n;
  n.add_u64(5);
  CHECK(n.data() == Bytes{0, 0, 0, 8, 0, 0, 0, 0, 0, 0, 0, 5});
}
