#include "bullion/bench.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "bullion/error.hpp"
#include "bullion/format.hpp"
#include "bullion/io.hpp"

namespace bullion::bench {

namespace {

using Clock = std::chrono::steady_clock;

double micros_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::micro>(Clock::now() - t0).count();
}

double percentile(std::vector<double> xs, double q) {
  std::sort(xs.begin(), xs.end());
  const auto idx = static_cast<std::size_t>(std::lround(q * static_cast<double>(xs.size() - 1)));
  return xs[idx];
}

std::string random_name(std::mt19937_64& rng, std::uint32_t index) {
  static constexpr char kAlphabet[] = "abcdefghijklmnopqrstuvwxyz";
  std::string name = "feat_";
  for (int i = 0; i < 6; ++i) name += kAlphabet[rng() % 26];
  return name + "_" + std::to_string(index);
}

RecordBatch wide_batch(std::uint32_t columns, std::uint32_t rows, std::mt19937_64& rng,
                       std::vector<std::string>& names) {
  RecordBatch batch;
  names.clear();
  for (std::uint32_t c = 0; c < columns; ++c) {
    names.push_back(random_name(rng, c));
    batch.schema.columns.push_back({names.back(), LogicalType::Int64, false, std::nullopt});
    std::vector<std::int64_t> v(rows);
    for (auto& x : v) x = static_cast<std::int64_t>(rng() % 1000);
    batch.columns.push_back(ColumnVector::scalar(LogicalType::Int64, Values(std::move(v))));
  }
  return batch;
}

void add(BenchReport& report, const std::string& parameter, const std::string& value, const std::string& metric,
         double measurement, const std::string& unit) {
  report.rows.push_back({parameter, value, metric, measurement, unit});
}

}  // namespace

std::string BenchReport::to_csv() const {
  std::string out = "parameter,parameter_value,metric,value,unit\n";
  char buf[64];
  for (const auto& r : rows) {
    if (r.value == std::floor(r.value) && std::fabs(r.value) < 1e15)
      std::snprintf(buf, sizeof buf, "%.0f", r.value);
    else
      std::snprintf(buf, sizeof buf, "%.6g", r.value);
    out += r.parameter + "," + r.parameter_value + "," + r.metric + "," + buf + "," + r.unit + "\n";
  }
  return out;
}

double BenchReport::get(std::string_view parameter_value, std::string_view metric) const {
  for (const auto& r : rows)
    if (r.parameter_value == parameter_value && r.metric == metric) return r.value;
  fail(ErrorCode::InvalidArgument, "no bench row " + std::string(parameter_value) + "/" + std::string(metric));
}

BenchReport bench_footer(const FooterBenchOptions& options) {
  check(!options.column_counts.empty() && options.trials > 0 && options.rows > 0, ErrorCode::InvalidArgument,
        "bench-footer needs column counts, trials and rows");
  const auto dir = options.work_dir.empty() ? std::filesystem::temp_directory_path()
                                            : std::filesystem::path(options.work_dir);
  std::mt19937_64 rng(options.seed);
  BenchReport report;
  std::vector<std::string> names;
  std::uint64_t sink = 0;

  for (const auto count : options.column_counts) {
    check(count > 0, ErrorCode::InvalidArgument, "column counts must be positive");
    const auto batch = wide_batch(count, options.rows, rng, names);
    format::WriteOptions wo;
    wo.rows_per_page = options.rows;
    const auto written = format::write_file(batch, wo);
    const auto path = (dir / ("bullion_bench_footer_" + std::to_string(::getpid()) + "_" + std::to_string(count) + ".bln")).string();
    io::write_whole_file(path, written.bytes);

    std::vector<std::string> targets(options.trials);
    for (auto& t : targets) t = names[rng() % names.size()];

    // One untimed pass brings the file into the page cache.
    {
      io::MappedFile warm(path);
      sink += format::lookup_column(format::FooterView::open(warm.bytes()), targets.front());
    }

    std::vector<double> open_lookup;
    for (const auto& name : targets) {
      const auto t0 = Clock::now();
      io::MappedFile mapped(path);
      const auto footer = format::FooterView::open(mapped.bytes());
      sink += format::lookup_column(footer, name);
      open_lookup.push_back(micros_since(t0));
    }

    std::vector<double> lookup_only;
    {
      io::MappedFile mapped(path);
      const auto footer = format::FooterView::open(mapped.bytes());
      for (const auto& name : targets) {
        const auto t0 = Clock::now();
        sink += format::lookup_column(footer, name);
        lookup_only.push_back(micros_since(t0));
      }
    }
    if (!options.keep_files) std::filesystem::remove(path);

    const auto key = std::to_string(count);
    add(report, "columns", key, "open_lookup_median", percentile(open_lookup, 0.5), "us");
    add(report, "columns", key, "open_lookup_p90", percentile(open_lookup, 0.9), "us");
    add(report, "columns", key, "lookup_only_median", percentile(lookup_only, 0.5), "us");
    add(report, "columns", key, "footer_bytes", static_cast<double>(written.stats.footer_bytes), "bytes");
    add(report, "columns", key, "file_bytes", static_cast<double>(written.stats.file_bytes), "bytes");
  }
  // Keeps the lookups observable to the optimizer.
  if (sink == 0xFFFFFFFFFFFFFFFFull) std::fputc('\0', stderr);
  return report;
}

const char* pattern_name(DeletePattern pattern) {
  return pattern == DeletePattern::Clustered ? "clustered" : "scattered";
}

std::vector<std::uint64_t> pick_rows(std::uint64_t num_rows, double fraction, DeletePattern pattern) {
  check(fraction >= 0 && fraction <= 1, ErrorCode::InvalidArgument, "fraction must lie in [0, 1]");
  const auto k = static_cast<std::uint64_t>(std::llround(fraction * static_cast<double>(num_rows)));
  std::vector<std::uint64_t> rows;
  rows.reserve(k);
  if (k == 0) return rows;
  if (pattern == DeletePattern::Clustered) {
    const auto start = std::min(num_rows / 2, num_rows - k);
    // With an even page count the midpoint is a page boundary.
    for (std::uint64_t i = 0; i < k; ++i) rows.push_back(start + i);
  } else {
    for (std::uint64_t i = 0; i < k; ++i) rows.push_back(i * num_rows / k);
  }
  return rows;
}

BenchReport bench_delete(const DeleteBenchOptions& options) {
  check(options.pages_per_column > 0 && options.rows_per_page > 0, ErrorCode::InvalidArgument,
        "bench-delete needs pages and rows per page");
  const std::uint64_t num_rows = std::uint64_t{options.pages_per_column} * options.rows_per_page;
  std::mt19937_64 rng(options.seed);
  std::vector<std::int64_t> ids(num_rows);
  std::vector<double> scores(num_rows);
  for (std::uint64_t i = 0; i < num_rows; ++i) {
    ids[i] = static_cast<std::int64_t>(rng() % (1u << 30));
    scores[i] = static_cast<double>(rng() % 100000) / 8.0;
  }
  RecordBatch batch;
  batch.schema.columns = {{"user_id", LogicalType::Int64, false, std::nullopt, 2},
                          {"score", LogicalType::Float64, false, std::nullopt, 2}};
  batch.columns = {ColumnVector::scalar(LogicalType::Int64, Values(std::move(ids))),
                   ColumnVector::scalar(LogicalType::Float64, Values(std::move(scores)))};
  format::WriteOptions wo;
  wo.rows_per_page = options.rows_per_page;
  wo.pages_per_group = options.pages_per_group;
  const auto original = format::write_file(batch, wo).bytes;

  BenchReport report;
  for (const auto pattern : options.patterns) {
    io::MemoryFile file(original);
    const auto rows = pick_rows(num_rows, options.fraction, pattern);
    const auto t0 = Clock::now();
    const auto stats = compliance::delete_rows(file, rows, options.level);
    const auto elapsed_ms = micros_since(t0) / 1000.0;
    const double ratio = static_cast<double>(stats.bytes_rewritten) / static_cast<double>(stats.file_bytes);
    const std::string key = pattern_name(pattern);
    add(report, "pattern", key, "rows_deleted", static_cast<double>(stats.rows_deleted), "rows");
    add(report, "pattern", key, "pages_rewritten", static_cast<double>(stats.pages_rewritten), "pages");
    add(report, "pattern", key, "bytes_rewritten", static_cast<double>(stats.bytes_rewritten), "bytes");
    add(report, "pattern", key, "file_bytes", static_cast<double>(stats.file_bytes), "bytes");
    add(report, "pattern", key, "rewrite_ratio", ratio, "ratio");
    add(report, "pattern", key, "full_rewrite_ratio", 1.0, "ratio");
    add(report, "pattern", key, "reduction_factor", ratio > 0 ? 1.0 / ratio : 0.0, "x");
    add(report, "pattern", key, "elapsed_ms", elapsed_ms, "ms");
  }
  return report;
}

}  // namespace bullion::bench
