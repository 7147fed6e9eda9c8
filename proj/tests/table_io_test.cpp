#include "bullion/table_io.hpp"

#include <gtest/gtest.h>

#include <memory>

#include "bullion/compliance.hpp"
#include "bullion/error.hpp"
#include "bullion/io.hpp"

namespace bullion {
namespace {

using table_io::parse_schema;
using table_io::read_csv;
using table_io::read_jsonl;

ErrorCode code_of(const std::function<void()>& fn, std::string* message = nullptr) {
  try {
    fn();
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

constexpr const char* kSchema = R"({"columns": [
  {"name": "id", "type": "int64", "nullable": false},
  {"name": "score", "type": "float64"},
  {"name": "label", "type": "string"}
]})";

TEST(Schema, ParsesOptionsAndRoundTrips) {
  const auto schema = parse_schema(R"([
    {"name": "a", "type": "int64", "nullable": false, "compliance_level": 2},
    {"name": "emb", "type": "float32", "quantization": "bf16"},
    {"name": "toks", "type": "list<int64>", "sparse_sequence": true}
  ])");
  ASSERT_EQ(schema.columns.size(), 3u);
  EXPECT_FALSE(schema.columns[0].nullable);
  EXPECT_EQ(schema.columns[0].compliance_level, 2);
  EXPECT_EQ(schema.columns[1].quantization->target, quantization::QuantTarget::Bf16);
  EXPECT_TRUE(schema.columns[2].is_sparse_sequence);
  EXPECT_EQ(parse_schema(table_io::schema_to_json(schema)), schema);
}

TEST(Schema, RejectsBadDocuments) {
  EXPECT_EQ(code_of([] { parse_schema("{"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_schema(R"([{"name":"a","type":"decimal"}])"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_schema(R"([{"type":"int64"}])"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_schema(R"([{"name":"a","type":"int64","compliance_level":5}])"); }),
            ErrorCode::ParseError);
}

TEST(Csv, TinyTableWritesOnePageAndReadsBack) {
  const auto schema = parse_schema(kSchema);
  const auto batch = read_csv("id,score,label\n1,0.5,cat\n2,,\"\"\n3,2.25,\"a,b\"\"c\"\n", schema);
  ASSERT_EQ(batch.num_rows(), 3u);
  EXPECT_TRUE(batch.column("score").values.is_null(1));
  EXPECT_EQ(batch.column("label").values.as<std::string>()[1], "");
  EXPECT_EQ(batch.column("label").values.as<std::string>()[2], "a,b\"c");

  const auto written = format::write_file(batch);
  EXPECT_EQ(written.stats.num_pages, 3u);  // one page per column
  auto file = std::make_shared<io::MemoryFile>(written.bytes);
  const auto back = format::project_columns(file, {"id", "score", "label"});
  EXPECT_EQ(back.column("id").data, batch.column("id"));
  EXPECT_EQ(back.column("score").data, batch.column("score"));
  EXPECT_EQ(back.column("label").data, batch.column("label"));

  EXPECT_EQ(table_io::projection_to_csv(back),
            "_row,id,score,label\n0,1,0.5,cat\n1,2,,\"\"\n2,3,2.25,\"a,b\"\"c\"\n");
}

TEST(Csv, HeaderOrderIsFree) {
  const auto schema = parse_schema(kSchema);
  const auto batch = read_csv("label,id,score\nx,7,1\n", schema);
  EXPECT_EQ(batch.column("id").values.as<std::int64_t>()[0], 7);
}

TEST(Csv, DiagnosticsNameRowAndColumn) {
  const auto schema = parse_schema(kSchema);
  std::string msg;
  EXPECT_EQ(code_of([&] { read_csv("id,score,label\n1,1,a\n2,abc,b\n", schema); }, &msg), ErrorCode::ParseError);
  EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("'score'"), std::string::npos) << msg;

  EXPECT_EQ(code_of([&] { read_csv("id,score,label\n1,1,a\n,2,b\n", schema); }, &msg), ErrorCode::SchemaMismatch);
  EXPECT_NE(msg.find("row 2, column 'id'"), std::string::npos) << msg;

  EXPECT_EQ(code_of([&] { read_csv("id,score\n1,1\n", schema); }, &msg), ErrorCode::SchemaMismatch);
  EXPECT_NE(msg.find("label"), std::string::npos);
  EXPECT_EQ(code_of([&] { read_csv("id,score,label,extra\n", schema); }), ErrorCode::SchemaMismatch);
  EXPECT_EQ(code_of([&] { read_csv("id,score,label\n1,2\n", schema); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([&] { read_csv("id,score,label\n1,2,\"open\n", schema); }), ErrorCode::ParseError);
}

TEST(Jsonl, SparseListColumnRoundTrips) {
  const auto schema = parse_schema(R"([
    {"name": "id", "type": "int64", "nullable": false},
    {"name": "toks", "type": "list<int64>", "sparse_sequence": true},
    {"name": "emb", "type": "list<float32>"}
  ])");
  std::string text;
  std::vector<std::int64_t> prefix{101, 7592, 2088, 999, 4, 5};
  for (int r = 0; r < 50; ++r) {
    std::string toks = "[";
    for (std::size_t k = 0; k < prefix.size(); ++k) toks += (k ? "," : "") + std::to_string(prefix[k]);
    toks += "]";
    text += R"({"id": )" + std::to_string(r) + R"(, "toks": )" + toks + R"(, "emb": [0.5, -1.25]})" + "\n";
    prefix.push_back(r);
  }
  const auto batch = read_jsonl(text, schema);
  ASSERT_EQ(batch.num_rows(), 50u);
  format::WriteOptions opts;
  opts.rows_per_page = 16;
  const auto written = format::write_file(batch, opts);
  auto file = std::make_shared<io::MemoryFile>(written.bytes);
  const auto back = format::project_columns(file, {"toks", "emb"});
  EXPECT_EQ(back.column("toks").data, batch.column("toks"));
  EXPECT_EQ(back.column("emb").data, batch.column("emb"));
}

TEST(Jsonl, MissingKeysAreNullAndBadTypesAreReported) {
  const auto schema = parse_schema(kSchema);
  const auto batch = read_jsonl("{\"id\": 1}\n\n{\"id\": 2, \"score\": 3, \"label\": \"z\"}\n", schema);
  ASSERT_EQ(batch.num_rows(), 2u);
  EXPECT_TRUE(batch.column("label").values.is_null(0));
  std::string msg;
  EXPECT_EQ(code_of([&] { read_jsonl("{\"id\": 1}\n{\"id\": \"x\"}\n", schema); }, &msg), ErrorCode::SchemaMismatch);
  EXPECT_NE(msg.find("row 2, column 'id'"), std::string::npos) << msg;
  EXPECT_EQ(code_of([&] { read_jsonl("{\"id\": 1, \"nope\": 2}\n", schema); }), ErrorCode::SchemaMismatch);
  EXPECT_EQ(code_of([&] { read_jsonl("[1]\n", schema); }), ErrorCode::ParseError);
}

TEST(Flags, QuantizeAndRanking) {
  auto schema = parse_schema(R"([{"name": "emb", "type": "float32"}])");
  table_io::apply_quantize_flag(schema, "emb=fp8");
  EXPECT_EQ(schema.columns[0].quantization->target, quantization::QuantTarget::Fp8E4M3);
  EXPECT_EQ(code_of([&] { table_io::apply_quantize_flag(schema, "nope=bf16"); }), ErrorCode::UnknownColumn);
  EXPECT_EQ(code_of([&] { table_io::apply_quantize_flag(schema, "emb"); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(table_io::read_ranking("# hot first\nb\n\n  a  \nc # trailing\n"),
            (std::vector<std::string>{"b", "a", "c"}));
}

TEST(Export, DeletedRowsShowStatesAndMask) {
  auto schema = parse_schema(R"([{"name": "id", "type": "int64", "nullable": false, "compliance_level": 2}])");
  const auto batch = read_csv("id\n10\n20\n30\n", schema);
  auto file = std::make_shared<io::MemoryFile>(format::write_file(batch).bytes);
  compliance::delete_rows(*file, std::vector<std::uint64_t>{1}, compliance::Level::Erase);
  format::ReadOptions ro;
  ro.include_deleted = true;
  const auto all = format::project_columns(file, {"id"}, ro);
  EXPECT_EQ(table_io::projection_to_csv(all), "_row,_deleted,id\n0,0,10\n1,1,MASK\n2,0,30\n");
  EXPECT_EQ(table_io::projection_to_json(all),
            R"({"columns":{"id":[10,0,30]},"rows":[0,1,2],"states":{"id":["live","masked","live"]}})");
  const auto live = format::project_columns(file, {"id"});
  EXPECT_EQ(table_io::projection_to_json(live), R"({"columns":{"id":[10,30]},"rows":[0,2]})");
}

}  // namespace
}  // namespace bullion
