#pragma once

#include <optional>
#include <vector>

#include "bullion/encoding.hpp"

namespace bullion::encoding::detail {

/// Builds `scheme` over `values`; sub-columns are cascaded with `depth_budget - 1`.
EncodedBlock build_scheme(SchemeId scheme, const Values& values, const EncodingConfig& config,
                          int depth_budget);

/// Cascaded encoding of a sub-column whose parent block uses `parent`.
EncodedBlock cascade(const Values& values, const EncodingConfig& config, int depth_budget,
                     std::optional<SchemeId> parent);

/// Candidate schemes for one nesting level, in tag order.
std::vector<SchemeId> level_candidates(const EncodingConfig& config, std::optional<SchemeId> parent);

bool is_container(SchemeId scheme);

// Plain per-kind layouts shared by Trivial, Chunked and scalar fields.
void write_trivial(Bytes& out, const Values& values);
Values read_trivial(ByteSpan payload, ValueKind kind, std::size_t count);
void write_scalar(Bytes& out, const Values& values, std::size_t i);
void read_scalar(ByteReader& in, Values& out);

}  // namespace bullion::encoding::detail
