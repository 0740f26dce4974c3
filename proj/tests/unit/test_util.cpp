#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <numeric>
#include <set>
#include <sstream>

#include "hatescan/csv.hpp"
#include "hatescan/date.hpp"
#include "hatescan/hashing.hpp"
#include "hatescan/random.hpp"

using namespace hatescan;

TEST(Date, ParsesStrictIsoDates) {
  auto d = Date::parse("2023-10-02");
  ASSERT_TRUE(d);
  EXPECT_EQ(d->iso(), "2023-10-02");
  EXPECT_TRUE(Date::parse("2024-02-29"));
  EXPECT_FALSE(Date::parse("2023-02-29"));
  EXPECT_FALSE(Date::parse("2023-1-01"));
  EXPECT_FALSE(Date::parse("2023-10-02T00:00"));
  EXPECT_FALSE(Date::parse("02.10.2023"));
  EXPECT_FALSE(Date::parse(""));
}

TEST(Date, FieldRangeArithmetic) {
  const Date start(2023, 10, 2);
  EXPECT_EQ(std::chrono::weekday(start.days()), std::chrono::Monday);
  EXPECT_EQ(start.plus_days(49), Date(2023, 11, 20));
  EXPECT_EQ(Date(2023, 11, 20).days_since(start), 49);
  EXPECT_LT(start, start.plus_days(1));
}

TEST(Rng, SameSeedSameStream) {
  Rng a(7), b(7), c(8);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    differs = differs || x != c.next();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, BelowAndUniformStayInRange) {
  Rng rng(1);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = rng.below(7);
    ASSERT_LT(v, 7u);
    seen.insert(v);
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
  EXPECT_EQ(seen.size(), 7u);
}

TEST(Rng, ShuffleIsAPermutation) {
  Rng rng(3);
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  auto shuffled = v;
  rng.shuffle(std::span(shuffled));
  EXPECT_NE(shuffled, v);
  std::sort(shuffled.begin(), shuffled.end());
  EXPECT_EQ(shuffled, v);
}

TEST(Rng, NamedSubstreamsAreIndependent) {
  EXPECT_EQ(derive_seed(42, "split"), derive_seed(42, "split"));
  EXPECT_NE(derive_seed(42, "split"), derive_seed(42, "folds"));
  EXPECT_NE(derive_seed(42, "split"), derive_seed(43, "split"));
  EXPECT_NE(derive_seed(42, "folds"), derive_seed(42, "svm-order"));
}

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Csv, ReadsQuotedFieldsAndEmbeddedNewlines) {
  std::istringstream in("id,text\r\n1,\"a, b\"\r\n2,\"line1\nline2\"\n3,\"say \"\"hi\"\"\"\n");
  CsvReader reader(in);
  std::vector<std::string> row;
  ASSERT_TRUE(reader.next(row));
  EXPECT_EQ(row, (std::vector<std::string>{"id", "text"}));
  ASSERT_TRUE(reader.next(row));
  EXPECT_EQ(row[1], "a, b");
  ASSERT_TRUE(reader.next(row));
  EXPECT_EQ(row[1], "line1\nline2");
  EXPECT_EQ(reader.record_line(), 3u);
  ASSERT_TRUE(reader.next(row));
  EXPECT_EQ(row[1], "say \"hi\"");
  EXPECT_EQ(reader.record_line(), 5u);
  EXPECT_FALSE(reader.next(row));
}

TEST(Csv, WriteThenReadRoundTrips) {
  const std::vector<std::string> fields = {"plain", "with,comma", "with \"quote\"", "multi\nline", ""};
  std::ostringstream out;
  write_csv_row(out, fields);
  std::istringstream in(out.str());
  CsvReader reader(in);
  std::vector<std::string> row;
  ASSERT_TRUE(reader.next(row));
  EXPECT_EQ(row, fields);
}

TEST(Csv, EscapeOnlyWhenNeeded) {
  EXPECT_EQ(csv_escape("abc"), "abc");
  EXPECT_EQ(csv_escape("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_escape("a\"b"), "\"a\"\"b\"");
}
