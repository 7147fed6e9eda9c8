#pragma once

#include <string>
#include <vector>

#include "bullion/schema.hpp"

namespace bullion::layout {

struct RowOrderSpec {
  enum class Mode { None, QualityDesc };
  Mode mode = Mode::None;
  std::string score_column;
};

struct ColumnOrderSpec {
  enum class Mode { SchemaOrder, Frequency };
  Mode mode = Mode::SchemaOrder;
  std::vector<std::string> frequency_ranking;
};

struct RowReorder {
  std::vector<std::size_t> permutation;  // output row i is input row permutation[i]
  RecordBatch batch;
};

/// Stable descending sort on the score column, applied to every column.
/// Null scores sort last. MissingScoreColumn / NonNumericScore on a bad spec.
RowReorder reorder_rows(const RecordBatch& batch, const RowOrderSpec& spec);

/// Physical placement of logical columns: ranked columns first in ranking
/// order, then the rest in schema order. UnknownColumn on a bad ranking entry.
std::vector<std::size_t> reorder_columns(const Schema& schema, const ColumnOrderSpec& spec);

}  // namespace bullion::layout
