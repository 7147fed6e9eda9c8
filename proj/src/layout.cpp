#include "bullion/layout.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <variant>

#include "bullion/error.hpp"

namespace bullion::layout {

namespace {

std::vector<double> scores_of(const ColumnVector& column) {
  std::vector<double> out(column.size());
  std::visit(
      [&](const auto& v) {
        using T = typename std::decay_t<decltype(v)>::value_type;
        if constexpr (std::is_arithmetic_v<T>) {
          for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<double>(v[i]);
        }
      },
      column.values.data);
  return out;
}

}  // namespace

RowReorder reorder_rows(const RecordBatch& batch, const RowOrderSpec& spec) {
  RowReorder out;
  out.permutation.resize(batch.num_rows());
  std::iota(out.permutation.begin(), out.permutation.end(), std::size_t{0});
  if (spec.mode == RowOrderSpec::Mode::None) {
    out.batch = batch;
    return out;
  }

  const auto idx = batch.schema.index_of(spec.score_column);
  if (!idx) fail(ErrorCode::MissingScoreColumn, "score column '" + spec.score_column + "' is not in the schema");
  const auto& column = batch.columns[*idx];
  if (!is_numeric(column.type))
    fail(ErrorCode::NonNumericScore, "score column '" + spec.score_column + "' has type " +
                                         std::string(logical_type_name(column.type)));

  const auto scores = scores_of(column);
  // Nulls and NaNs rank below every number; among themselves they keep input order.
  auto rank_key = [&](std::size_t r) -> std::pair<int, double> {
    if (column.values.is_null(r) || std::isnan(scores[r])) return {0, 0.0};
    return {1, scores[r]};
  };
  std::stable_sort(out.permutation.begin(), out.permutation.end(),
                   [&](std::size_t a, std::size_t b) { return rank_key(a) > rank_key(b); });

  out.batch.schema = batch.schema;
  out.batch.columns.reserve(batch.columns.size());
  for (const auto& c : batch.columns) out.batch.columns.push_back(c.gather(out.permutation));
  return out;
}

std::vector<std::size_t> reorder_columns(const Schema& schema, const ColumnOrderSpec& spec) {
  std::vector<std::size_t> order;
  std::vector<bool> placed(schema.columns.size(), false);
  if (spec.mode == ColumnOrderSpec::Mode::Frequency) {
    for (const auto& name : spec.frequency_ranking) {
      const auto idx = schema.index_of(name);
      if (!idx) fail(ErrorCode::UnknownColumn, "ranking names unknown column '" + name + "'");
      if (placed[*idx]) continue;
      placed[*idx] = true;
      order.push_back(*idx);
    }
  }
  for (std::size_t i = 0; i < schema.columns.size(); ++i)
    if (!placed[i]) order.push_back(i);
  return order;
}

}  // namespace bullion::layout
