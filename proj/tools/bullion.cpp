// Command-line front end: ingest, inspect, project, delete, verify and the two
// benchmarks. Results go to stdout; errors go to stderr and exit with status 1
// (as a JSON object when --json is set).

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "bullion/bench.hpp"
#include "bullion/compliance.hpp"
#include "bullion/error.hpp"
#include "bullion/format.hpp"
#include "bullion/io.hpp"
#include "bullion/table_io.hpp"

namespace {

using namespace bullion;
using nlohmann::json;

struct Globals {
  bool json = false;
  std::uint64_t seed = 42;
};

std::string read_text(const std::string& path) {
  const auto bytes = io::read_whole_file(path);
  return {reinterpret_cast<const char*>(bytes.data()), bytes.size()};
}

void print_json(const json& doc) { std::cout << doc.dump(2) << "\n"; }

std::vector<std::uint64_t> parse_row_ids(std::string_view text) {
  std::vector<std::uint64_t> ids;
  std::size_t i = 0;
  std::size_t line = 1;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
    } else if (c == '\n') {
      ++line;
      ++i;
    } else if (c == ' ' || c == '\t' || c == '\r' || c == ',') {
      ++i;
    } else {
      std::uint64_t v = 0;
      const auto [end, ec] = std::from_chars(text.data() + i, text.data() + text.size(), v);
      check(ec == std::errc() && end != text.data() + i, ErrorCode::ParseError,
            "row id file line " + std::to_string(line) + ": expected a non-negative integer");
      ids.push_back(v);
      i = static_cast<std::size_t>(end - text.data());
    }
  }
  return ids;
}

// ---------------------------------------------------------------------------
// write

struct WriteArgs {
  std::string input, schema, output;
  std::vector<std::string> quantize;
  std::string sort_by_quality, column_order;
  std::uint32_t rows_per_page = 4096;
  std::uint32_t pages_per_group = 16;
};

int cmd_write(const WriteArgs& a, const Globals& g) {
  auto schema = table_io::parse_schema(read_text(a.schema));
  for (const auto& q : a.quantize) table_io::apply_quantize_flag(schema, q);
  const auto batch = table_io::read_table_file(a.input, schema);

  format::WriteOptions opts;
  opts.rows_per_page = a.rows_per_page;
  opts.pages_per_group = a.pages_per_group;
  if (!a.sort_by_quality.empty()) {
    opts.row_order.mode = layout::RowOrderSpec::Mode::QualityDesc;
    opts.row_order.score_column = a.sort_by_quality;
  }
  if (!a.column_order.empty()) {
    opts.column_order.mode = layout::ColumnOrderSpec::Mode::Frequency;
    opts.column_order.frequency_ranking = table_io::read_ranking(read_text(a.column_order));
  }
  const auto result = format::write_file(batch, opts);
  io::write_whole_file(a.output, result.bytes);

  const auto& s = result.stats;
  if (g.json) {
    json cols = json::array();
    for (const auto& c : s.columns)
      cols.push_back({{"name", c.name}, {"bytes", c.bytes}, {"pages", c.pages}, {"schemes", c.page_schemes}});
    print_json({{"file", a.output},
                {"file_bytes", s.file_bytes},
                {"footer_bytes", s.footer_bytes},
                {"rows", s.num_rows},
                {"row_groups", s.num_groups},
                {"pages", s.num_pages},
                {"columns", cols}});
  } else {
    std::cout << "wrote " << a.output << ": " << s.num_rows << " rows, " << s.num_groups << " row groups, "
              << s.num_pages << " pages, " << s.file_bytes << " bytes (footer " << s.footer_bytes << ")\n";
    for (const auto& c : s.columns) {
      std::cout << "  " << c.name << ": " << c.bytes << " bytes in " << c.pages << " pages [";
      bool first = true;
      for (const auto& [scheme, n] : c.page_schemes) {
        std::cout << (first ? "" : ", ") << scheme << " x" << n;
        first = false;
      }
      std::cout << "]\n";
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// inspect / verify

std::string page_scheme(std::uint8_t tag) {
  if (tag == format::kSparseDeltaPageTag) return "SparseDelta";
  if (encoding::is_valid_scheme_tag(tag)) return std::string(encoding::scheme_name(static_cast<encoding::SchemeId>(tag)));
  return "unknown(" + std::to_string(tag) + ")";
}

const char* role_name(format::ColumnRole role) {
  switch (role) {
    case format::ColumnRole::DualHi:
      return "dual_hi";
    case format::ColumnRole::DualLo:
      return "dual_lo";
    default:
      return "plain";
  }
}

json verify_json(const format::VerifyReport& r) {
  json out{{"ok", r.ok}, {"root_ok", r.root_ok}, {"message", r.message}};
  if (r.first_bad_page) out["first_bad_page"] = *r.first_bad_page;
  if (r.first_bad_group) out["first_bad_group"] = *r.first_bad_group;
  return out;
}

int cmd_inspect(const std::string& path, const Globals& g) {
  io::PosixFile file(path, io::PosixFile::Mode::Read);
  const auto footer = format::FooterView::read(file);
  const auto report = format::verify_file(file);

  std::uint64_t deleted = 0, erased = 0;
  for (std::uint64_t r = 0; r < footer.num_rows(); ++r) {
    deleted += footer.is_deleted(r);
    erased += footer.is_erased(r);
  }
  json cols = json::array();
  for (std::uint32_t c = 0; c < footer.num_columns(); ++c) {
    const auto info = footer.column(c);
    std::map<std::string, std::uint64_t> schemes;
    std::uint64_t bytes = 0;
    for (std::uint32_t grp = 0; grp < footer.num_groups(); ++grp) {
      bytes += footer.column_size(grp, c);
      for (std::uint32_t k = 0; k < footer.pages_per_chunk(grp); ++k)
        ++schemes[page_scheme(footer.page_compression_type(footer.page_ordinal(grp, c, k)))];
    }
    json col{{"name", std::string(info.name)},
             {"type", std::string(logical_type_name(info.type))},
             {"nullable", info.nullable},
             {"compliance_level", info.compliance_level},
             {"sparse_sequence", info.sparse},
             {"role", role_name(info.role)},
             {"physical_position", info.physical_position},
             {"bytes", bytes},
             {"schemes", schemes}};
    if (info.quantization) col["quantization"] = std::string(quantization::target_name(*info.quantization));
    cols.push_back(std::move(col));
  }
  const json summary{{"file", path},
                     {"file_bytes", file.size()},
                     {"footer_bytes", footer.bytes().size()},
                     {"rows", footer.num_rows()},
                     {"deleted_rows", deleted},
                     {"erased_rows", erased},
                     {"row_groups", footer.num_groups()},
                     {"pages", footer.num_pages()},
                     {"root_checksum", footer.root_checksum()},
                     {"verify", verify_json(report)},
                     {"columns", cols}};
  if (g.json) {
    print_json(summary);
  } else {
    std::cout << path << ": " << footer.num_rows() << " rows (" << deleted << " deleted, " << erased << " erased), "
              << footer.num_groups() << " row groups, " << footer.num_pages() << " pages, " << file.size()
              << " bytes, footer " << footer.bytes().size() << " bytes\n";
    for (const auto& c : cols) {
      std::cout << "  [" << c["physical_position"].get<std::uint32_t>() << "] " << c["name"].get<std::string>() << " "
                << c["type"].get<std::string>() << (c["nullable"].get<bool>() ? "" : " not-null") << " level "
                << c["compliance_level"].get<int>();
      if (c.contains("quantization")) std::cout << " quant " << c["quantization"].get<std::string>();
      if (c["sparse_sequence"].get<bool>()) std::cout << " sparse";
      if (c["role"] != "plain") std::cout << " " << c["role"].get<std::string>();
      std::cout << ", " << c["bytes"].get<std::uint64_t>() << " bytes:";
      for (const auto& [scheme, n] : c["schemes"].items()) std::cout << " " << scheme << " x" << n.get<std::uint64_t>();
      std::cout << "\n";
    }
    std::cout << "checksums: " << (report.ok ? "ok" : "MISMATCH: " + report.message) << "\n";
  }
  return report.ok ? 0 : 2;
}

int cmd_verify(const std::string& path, const Globals& g) {
  io::PosixFile file(path, io::PosixFile::Mode::Read);
  const auto report = format::verify_file(file);
  if (g.json)
    print_json(verify_json(report));
  else
    std::cout << (report.ok ? "ok" : "corrupt: " + report.message) << "\n";
  return report.ok ? 0 : 2;
}

// ---------------------------------------------------------------------------
// project

struct ProjectArgs {
  std::string file;
  std::vector<std::string> columns;
  bool include_deleted = false;
  bool mask_as_null = false;
  std::string format = "csv";
};

int cmd_project(const ProjectArgs& a, const Globals& g) {
  auto file = std::make_shared<io::PosixFile>(a.file, io::PosixFile::Mode::Read);
  format::Reader reader(file);
  format::ReadOptions ro;
  ro.include_deleted = a.include_deleted;
  ro.mask_policy = a.mask_as_null ? format::MaskPolicy::AsNull : format::MaskPolicy::Observable;
  const auto names = a.columns.empty() ? reader.column_names() : a.columns;
  const auto projection = reader.project(names, ro);
  if (g.json || a.format == "json")
    std::cout << table_io::projection_to_json(projection) << "\n";
  else
    std::cout << table_io::projection_to_csv(projection);
  return 0;
}

// ---------------------------------------------------------------------------
// delete

struct DeleteArgs {
  std::string file, rows;
  int level = 1;
  bool append_footer = false;
};

int cmd_delete(const DeleteArgs& a) {
  const auto ids = parse_row_ids(read_text(a.rows));
  compliance::DeleteOptions opts;
  opts.footer_update = a.append_footer ? compliance::FooterUpdate::Append : compliance::FooterUpdate::InPlace;
  const auto stats = compliance::delete_rows(a.file, ids, compliance::level_from_int(a.level), opts);
  const json doc{{"rows_deleted", stats.rows_deleted},
                 {"pages_rewritten", stats.pages_rewritten},
                 {"bytes_rewritten", stats.bytes_rewritten},
                 {"file_bytes", stats.file_bytes},
                 {"warnings", stats.warnings}};
  print_json(doc);  // JSON with or without --json
  for (const auto& w : stats.warnings) std::cerr << "warning: " << w << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// benchmarks

void print_report(const bench::BenchReport& report, const Globals& g) {
  if (!g.json) {
    std::cout << report.to_csv();
    return;
  }
  json rows = json::array();
  for (const auto& r : report.rows)
    rows.push_back({{"parameter", r.parameter},
                    {"parameter_value", r.parameter_value},
                    {"metric", r.metric},
                    {"value", r.value},
                    {"unit", r.unit}});
  print_json(rows);
}

int cmd_bench_footer(bench::FooterBenchOptions opts, const Globals& g) {
  opts.seed = g.seed;
  print_report(bench::bench_footer(opts), g);
  return 0;
}

int cmd_bench_delete(bench::DeleteBenchOptions opts, int level, const std::string& pattern, const Globals& g) {
  opts.seed = g.seed;
  opts.level = compliance::level_from_int(level);
  if (pattern == "clustered")
    opts.patterns = {bench::DeletePattern::Clustered};
  else if (pattern == "scattered")
    opts.patterns = {bench::DeletePattern::Scattered};
  print_report(bench::bench_delete(opts), g);
  return 0;
}

int report_error(const std::string& code, const std::string& message, const Globals& g) {
  if (g.json)
    std::cerr << json{{"error", code}, {"message", message}}.dump() << "\n";
  else
    std::cerr << "error: " << code << ": " << message << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bullion columnar files: write, inspect, project, delete, verify, benchmark"};
  app.require_subcommand(1);
  Globals g;
  app.add_flag("--json", g.json, "Machine-readable JSON output and diagnostics");
  app.add_option("--seed", g.seed, "Seed for generated benchmark data");

  WriteArgs wa;
  auto* write = app.add_subcommand("write", "Ingest CSV or JSON lines into a Bullion file");
  write->add_option("input", wa.input, "Input .csv or .jsonl file")->required()->check(CLI::ExistingFile);
  write->add_option("--schema,-s", wa.schema, "Schema JSON file")->required()->check(CLI::ExistingFile);
  write->add_option("--output,-o", wa.output, "Output file")->required();
  write->add_option("--quantize", wa.quantize, "Quantize a column on write, e.g. emb=bf16 (repeatable)");
  write->add_option("--sort-by-quality", wa.sort_by_quality, "Sort rows by this score column, best first");
  write->add_option("--column-order", wa.column_order, "Ranking file: hottest column names first")
      ->check(CLI::ExistingFile);
  write->add_option("--rows-per-page", wa.rows_per_page, "Rows per page")->capture_default_str();
  write->add_option("--pages-per-group", wa.pages_per_group, "Pages per column chunk in a row group")
      ->capture_default_str();

  std::string inspect_path;
  auto* inspect = app.add_subcommand("inspect", "Summarize the footer, encodings and checksum status");
  inspect->add_option("file", inspect_path)->required()->check(CLI::ExistingFile);

  ProjectArgs pa;
  auto* project = app.add_subcommand("project", "Read selected columns");
  project->add_option("file", pa.file)->required()->check(CLI::ExistingFile);
  project->add_option("--columns,-c", pa.columns, "Columns to read (default: all)")->delimiter(',');
  project->add_flag("--include-deleted", pa.include_deleted, "Also return deleted rows with their states");
  project->add_flag("--mask-as-null", pa.mask_as_null, "Report masked cells as null");
  project->add_option("--format", pa.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  DeleteArgs da;
  auto* del = app.add_subcommand("delete", "Delete rows in place");
  del->add_option("--file,-f", da.file, "Bullion file")->required()->check(CLI::ExistingFile);
  del->add_option("--rows,-r", da.rows, "File of row ids (whitespace or comma separated)")
      ->required()
      ->check(CLI::ExistingFile);
  del->add_option("--level,-l", da.level, "Compliance level 0, 1 or 2")->check(CLI::Range(0, 2))->capture_default_str();
  del->add_flag("--append-footer", da.append_footer, "Write the new footer at the end instead of in place");

  std::string verify_path;
  auto* verify = app.add_subcommand("verify", "Recompute page checksums and compare with the stored tree");
  verify->add_option("file", verify_path)->required()->check(CLI::ExistingFile);

  bench::FooterBenchOptions fo;
  auto* bench_footer = app.add_subcommand("bench-footer", "Footer open + column lookup time versus column count");
  bench_footer->add_option("--columns", fo.column_counts, "Column counts")->delimiter(',');
  bench_footer->add_option("--trials", fo.trials, "Trials per count")->capture_default_str();
  bench_footer->add_option("--rows", fo.rows, "Rows in each generated file")->capture_default_str();
  bench_footer->add_option("--work-dir", fo.work_dir, "Where to place generated files");

  bench::DeleteBenchOptions dbo;
  int bench_level = 2;
  std::string bench_pattern = "both";
  auto* bench_delete = app.add_subcommand("bench-delete", "Bytes rewritten by in-place deletion versus a full rewrite");
  bench_delete->add_option("--pages", dbo.pages_per_column, "Pages per column")->capture_default_str();
  bench_delete->add_option("--rows-per-page", dbo.rows_per_page)->capture_default_str();
  bench_delete->add_option("--fraction", dbo.fraction, "Fraction of rows to delete")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  bench_delete->add_option("--level", bench_level)->check(CLI::Range(1, 2))->capture_default_str();
  bench_delete->add_option("--pattern", bench_pattern)->check(CLI::IsMember({"clustered", "scattered", "both"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (!g.json || e.get_exit_code() == 0) return app.exit(e);
    return report_error("UsageError", e.what(), g);
  }

  try {
    if (*write) return cmd_write(wa, g);
    if (*inspect) return cmd_inspect(inspect_path, g);
    if (*project) return cmd_project(pa, g);
    if (*del) return cmd_delete(da);
    if (*verify) return cmd_verify(verify_path, g);
    if (*bench_footer) return cmd_bench_footer(fo, g);
    if (*bench_delete) return cmd_bench_delete(dbo, bench_level, bench_pattern, g);
  } catch (const Error& e) {
    return report_error(std::string(error_code_name(e.code())), e.message(), g);
  } catch (const std::exception& e) {
    return report_error("InternalError", e.what(), g);
  }
  return 0;
}
