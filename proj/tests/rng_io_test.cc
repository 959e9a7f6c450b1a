// dcae/tests/rng_io_test.cc

// Copyright 2026  The dcae authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cmath>

#include "dcae/io.h"
#include "dcae/rng.h"

using namespace dcae;

TEST_CASE("rng streams are reproducible and seed-sensitive") {
  Rng a(123), b(123), c(124);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 100; ++i) {
    const uint64_t x = a.next_u64();
    all_equal = all_equal && x == b.next_u64();
    any_diff = any_diff || x != c.next_u64();
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("uniform stays in [0,1) and uniform_int in range") {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const int k = rng.uniform_int(-3, 4);
    CHECK(k >= -3);
    CHECK(k <= 4);
  }
}

TEST_CASE("normal has roughly unit scale") {
  Rng rng(11);
  double sum = 0.0, sum2 = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sum2 += x * x;
  }
  CHECK(std::abs(sum / n) < 0.05);
  CHECK(std::abs(sum2 / n - 1.0) < 0.05);
}

TEST_CASE("geometric matches its mean") {
  Rng rng(13);
  const double p = 0.4;
  double sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) sum += rng.geometric(p);
  CHECK(sum / n == doctest::Approx((1.0 - p) / p).epsilon(0.05));
}

TEST_CASE("mix_seed separates streams") {
  CHECK(mix_seed(1, 2) != mix_seed(1, 3));
  CHECK(mix_seed(1, 2) != mix_seed(2, 2));
  CHECK(mix_seed(1, 2) == mix_seed(1, 2));
}

TEST_CASE("crc32 known vector") {
  // Standard test vector for the IEEE polynomial.
  CHECK(crc32("123456789") == 0xcbf43926u);
  CHECK(crc32("") == 0u);
}

TEST_CASE("byte writer/reader round-trip all scalar types") {
  ByteWriter w;
  w.put_u8(0xAB);
  w.put_u32(0xDEADBEEFu);
  w.put_u64(0x0123456789ABCDEFull);
  w.put_f32(1.5f);
  w.put_f64(-2.25);
  w.put_bytes("hello");

  ByteReader r(w.bytes());
  CHECK(r.get_u8() == 0xAB);
  CHECK(r.get_u32() == 0xDEADBEEFu);
  CHECK(r.get_u64() == 0x0123456789ABCDEFull);
  CHECK(r.get_f32() == 1.5f);
  CHECK(r.get_f64() == -2.25);
  CHECK(r.get_bytes(5) == "hello");
  CHECK(r.remaining() == 0);
}

TEST_CASE("byte reader throws on truncation") {
  ByteWriter w;
  w.put_u32(7);
  ByteReader r(w.bytes());
  r.get_u32();
  CHECK_THROWS_AS(r.get_u32(), DataError);
}

TEST_CASE("u32 encoding is little-endian") {
  ByteWriter w;
  w.put_u32(0x01020304u);
  const std::string &b = w.bytes();
  CHECK(static_cast<uint8_t>(b[0]) == 0x04);
  CHECK(static_cast<uint8_t>(b[3]) == 0x01);
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.0, 1.0 / 3.0, -2.537e-12, 3.14159265358979}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}
