#include <gtest/gtest.h>

#include <algorithm>

#include "batch_util.hpp"
#include "bullion/error.hpp"
#include "bullion/layout.hpp"

namespace bullion::layout {
namespace {

using testing::Rng;

RecordBatch score_batch(std::vector<double> scores) {
  RecordBatch b;
  b.schema.columns = {{"score", LogicalType::Float64}, {"id", LogicalType::Int64}};
  std::vector<std::int64_t> ids(scores.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<std::int64_t>(i) * 10;
  b.columns = {ColumnVector::scalar(LogicalType::Float64, Values(std::move(scores))),
               ColumnVector::scalar(LogicalType::Int64, Values(std::move(ids)))};
  return b;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;  // sentinel: nothing thrown
}

TEST(ReorderRows, StableDescending) {
  auto r = reorder_rows(score_batch({0.2, 0.9, 0.9, 0.1}), {RowOrderSpec::Mode::QualityDesc, "score"});
  EXPECT_EQ(r.permutation, (std::vector<std::size_t>{1, 2, 0, 3}));
  EXPECT_EQ(r.batch.column("id").values.as<std::int64_t>(), (std::vector<std::int64_t>{10, 20, 0, 30}));

  auto sorted = reorder_rows(score_batch({5, 4, 4, 1}), {RowOrderSpec::Mode::QualityDesc, "score"});
  EXPECT_EQ(sorted.permutation, (std::vector<std::size_t>{0, 1, 2, 3}));

  auto none = reorder_rows(score_batch({1, 2}), {});
  EXPECT_EQ(none.permutation, (std::vector<std::size_t>{0, 1}));
}

TEST(ReorderRows, NullScoresSortLast) {
  auto b = score_batch({0.5, 0.0, 0.7});
  b.columns[0].values.validity = {1, 0, 1};
  auto r = reorder_rows(b, {RowOrderSpec::Mode::QualityDesc, "score"});
  EXPECT_EQ(r.permutation, (std::vector<std::size_t>{2, 0, 1}));
}

TEST(ReorderRows, Errors) {
  EXPECT_EQ(code_of([] { reorder_rows(score_batch({1}), {RowOrderSpec::Mode::QualityDesc, "nope"}); }),
            ErrorCode::MissingScoreColumn);
  RecordBatch b;
  b.schema.columns = {{"s", LogicalType::String}};
  b.columns = {ColumnVector::scalar(LogicalType::String, Values(std::vector<std::string>{"a"}))};
  EXPECT_EQ(code_of([&] { reorder_rows(b, {RowOrderSpec::Mode::QualityDesc, "s"}); }), ErrorCode::NonNumericScore);
}

TEST(ReorderRows, RowsStayAligned) {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    Schema s = testing::mixed_schema(rng);
    s.columns.push_back({"q", LogicalType::Int64, false});
    const auto rows = static_cast<std::size_t>(testing::uniform_int(rng, 1, 200));
    auto batch = testing::random_batch(rng, s, rows);
    auto r = reorder_rows(batch, {RowOrderSpec::Mode::QualityDesc, "q"});
    auto sorted_perm = r.permutation;
    std::sort(sorted_perm.begin(), sorted_perm.end());
    for (std::size_t i = 0; i < rows; ++i) ASSERT_EQ(sorted_perm[i], i);
    for (std::size_t c = 0; c < s.columns.size(); ++c)
      EXPECT_EQ(r.batch.columns[c], batch.columns[c].gather(r.permutation));
    const auto& q = r.batch.column("q").values.as<std::int64_t>();
    EXPECT_TRUE(std::is_sorted(q.rbegin(), q.rend()));
  }
}

TEST(ReorderColumns, RankingThenSchemaOrder) {
  Schema s;
  s.columns = {{"a"}, {"b"}, {"c"}};
  EXPECT_EQ(reorder_columns(s, {ColumnOrderSpec::Mode::Frequency, {"c"}}), (std::vector<std::size_t>{2, 0, 1}));
  EXPECT_EQ(reorder_columns(s, {ColumnOrderSpec::Mode::Frequency, {}}), (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(reorder_columns(s, {}), (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(code_of([&] { reorder_columns(s, {ColumnOrderSpec::Mode::Frequency, {"zz"}}); }), ErrorCode::UnknownColumn);
}

}  // namespace
}  // namespace bullion::layout
