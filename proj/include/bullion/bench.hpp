#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bullion/compliance.hpp"

/// Generators and measurements behind the `bench-footer` and `bench-delete`
/// commands. Structural metrics (bytes, pages) are exact for a given seed;
/// timings are wall-clock and vary by machine.
namespace bullion::bench {

struct BenchRow {
  std::string parameter;        // e.g. "columns"
  std::string parameter_value;  // e.g. "20000"
  std::string metric;           // e.g. "open_lookup_median"
  double value = 0;
  std::string unit;  // "us", "bytes", "ratio", ...
};

struct BenchReport {
  std::vector<BenchRow> rows;

  /// Header `parameter,parameter_value,metric,value,unit`, then one line per row.
  std::string to_csv() const;
  /// Value of the first row matching both keys; InvalidArgument when absent.
  double get(std::string_view parameter_value, std::string_view metric) const;
};

struct FooterBenchOptions {
  std::vector<std::uint32_t> column_counts{100, 1000, 5000, 10000, 20000};
  std::uint32_t trials = 101;
  std::uint32_t rows = 8;
  std::uint64_t seed = 42;
  /// Directory for the generated files; empty means the system temp directory.
  std::string work_dir;
  bool keep_files = false;
};

/// For each column count, writes a wide int64 table to disk, then times
/// (memory map + footer open + lookup of one random column name) per trial.
/// Metrics per count: open_lookup_median, open_lookup_p90 (us), lookup_only_median
/// (us, footer already open), footer_bytes, file_bytes.
BenchReport bench_footer(const FooterBenchOptions& options);

enum class DeletePattern { Clustered, Scattered };

struct DeleteBenchOptions {
  std::uint32_t pages_per_column = 100;
  std::uint32_t rows_per_page = 1024;
  std::uint32_t pages_per_group = 10;
  double fraction = 0.02;
  compliance::Level level = compliance::Level::Erase;
  std::vector<DeletePattern> patterns{DeletePattern::Clustered, DeletePattern::Scattered};
  std::uint64_t seed = 42;
};

/// Builds an in-memory file with two level-2 columns (int64 and float64) of
/// `pages_per_column` equal pages, deletes `fraction` of the rows per pattern
/// and reports bytes_rewritten, file_bytes, pages_rewritten, rewrite_ratio,
/// full_rewrite_ratio (always 1), reduction_factor and elapsed_ms.
/// Clustered rows are contiguous from the middle page; scattered rows are
/// evenly spaced over the whole file.
BenchReport bench_delete(const DeleteBenchOptions& options);

/// Rows selected by a pattern, ascending.
std::vector<std::uint64_t> pick_rows(std::uint64_t num_rows, double fraction, DeletePattern pattern);

const char* pattern_name(DeletePattern pattern);

}  // namespace bullion::bench
