#include <algorithm>
#include <cmath>
#include <limits>

#include "bullion/encoding.hpp"
#include "internal.hpp"

namespace bullion::encoding {

namespace detail {

bool is_container(SchemeId scheme) {
  switch (scheme) {
    case SchemeId::MainlyConstant:
    case SchemeId::RLE:
    case SchemeId::Dictionary:
    case SchemeId::ZigZag:
    case SchemeId::Nullable:
      return true;
    default:
      return false;
  }
}

std::vector<SchemeId> level_candidates(const EncodingConfig& config, std::optional<SchemeId> parent) {
  using S = SchemeId;
  std::vector<SchemeId> allowed = config.candidate_set;
  // Sub-columns always have a plain layout to fall back on.
  if (parent) allowed.push_back(S::Trivial);
  if (!config.allow_chunked) std::erase(allowed, S::Chunked);
  if (config.maskable_only) {
    std::vector<SchemeId> policy;
    if (!parent) {
      policy = {S::Trivial, S::RLE, S::Dictionary, S::FixedBitWidth, S::Varint, S::ZigZag, S::ForDelta, S::Nullable};
    } else if (*parent == S::RLE) {
      policy = {S::Trivial, S::FixedBitWidth, S::Varint, S::ForDelta};
    } else if (*parent == S::Dictionary) {
      // Masked codes must read back as 0, which rules out ForDelta.
      policy = {S::Trivial, S::RLE, S::FixedBitWidth, S::Varint};
    } else if (*parent == S::ZigZag) {
      policy = {S::Trivial, S::FixedBitWidth, S::Varint};
    } else if (*parent == S::Nullable) {
      policy = {S::Trivial, S::RLE, S::Dictionary, S::FixedBitWidth, S::Varint, S::ZigZag, S::ForDelta};
    } else {
      policy = {S::Trivial};
    }
    std::erase_if(allowed, [&](S s) { return std::find(policy.begin(), policy.end(), s) == policy.end(); });
  }
  std::sort(allowed.begin(), allowed.end());
  allowed.erase(std::unique(allowed.begin(), allowed.end()), allowed.end());
  return allowed;
}

EncodedBlock cascade(const Values& values, const EncodingConfig& config, int depth_budget,
                     std::optional<SchemeId> parent) {
  std::vector<SchemeId> candidates;
  for (auto s : level_candidates(config, parent))
    if (scheme_accepts(s, values, depth_budget)) candidates.push_back(s);
  if (candidates.empty())
    fail(ErrorCode::UnsupportedType,
         std::string("no candidate scheme accepts ") + value_kind_name(values.kind()) + " input");
  if (candidates.size() == 1) return build_scheme(candidates[0], values, config, depth_budget);

  const Values sample = sample_values(values, config);
  const bool exact = sample.size() == values.size();

  std::vector<std::pair<std::size_t, SchemeId>> ranked;
  std::optional<EncodedBlock> best;
  std::size_t best_size = std::numeric_limits<std::size_t>::max();
  for (auto s : candidates) {
    auto block = build_scheme(s, exact ? values : sample, config, depth_budget);
    const auto size = block.serialized_size();
    ranked.emplace_back(size, s);
    if (exact && size < best_size) {
      best_size = size;
      best = std::move(block);
    }
  }
  if (exact) return std::move(*best);

  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  EncodedBlock chosen = build_scheme(ranked.front().second, values, config, depth_budget);
  // The sample can mislead; never end up larger than the plain layout.
  const bool trivial_ok = std::find(candidates.begin(), candidates.end(), SchemeId::Trivial) != candidates.end();
  if (trivial_ok && chosen.scheme != SchemeId::Trivial && chosen.serialized_size() > trivial_size(values))
    return build_scheme(SchemeId::Trivial, values, config, depth_budget);
  return chosen;
}

}  // namespace detail

void EncodingConfig::validate() const {
  check(max_recursion_depth >= 1, ErrorCode::InvalidArgument, "max_recursion_depth must be >= 1");
  check(sample_fraction > 0.0 && sample_fraction <= 1.0, ErrorCode::InvalidArgument,
        "sample_fraction must be in (0, 1]");
  check(!candidate_set.empty(), ErrorCode::InvalidArgument, "candidate_set is empty");
}

Values sample_values(const Values& values, const EncodingConfig& config) {
  const auto n = values.size();
  if (n <= config.min_sample) return values;
  const auto rest = n - config.min_sample;
  const auto extra = std::min<std::size_t>(
      rest, static_cast<std::size_t>(std::ceil(config.sample_fraction * static_cast<double>(n))));
  std::vector<std::size_t> positions(config.min_sample);
  for (std::size_t i = 0; i < config.min_sample; ++i) positions[i] = i;
  if (extra > 0) {
    const auto stride = rest / extra;
    for (std::size_t k = 0; k < extra; ++k) positions.push_back(config.min_sample + k * stride);
  }
  return values.gather(positions);
}

bool scheme_accepts(SchemeId scheme, const Values& values, int depth_budget) {
  if (detail::is_container(scheme) && depth_budget < 1) return false;
  const bool nulls = values.has_nulls();
  if (scheme == SchemeId::Nullable) return nulls;
  if (nulls) return false;
  const auto n = values.size();
  switch (scheme) {
    case SchemeId::Trivial:
    case SchemeId::Chunked:
    case SchemeId::RLE:
      return true;
    case SchemeId::Constant:
      if (n == 0) return false;
      for (std::size_t i = 1; i < n; ++i)
        if (!values.element_equal(i, values, 0)) return false;
      return true;
    case SchemeId::MainlyConstant:
    case SchemeId::Dictionary:
      return n > 0;
    case SchemeId::FixedBitWidth:
    case SchemeId::Varint:
      if (values.kind() != ValueKind::Int64) return false;
      for (auto v : values.as<std::int64_t>())
        if (v < 0) return false;
      return true;
    case SchemeId::ZigZag:
    case SchemeId::ForDelta:
      return values.kind() == ValueKind::Int64;
    case SchemeId::Nullable:
      return nulls;
  }
  return false;
}

EncodedBlock encode_cascading(const Values& values, const EncodingConfig& config) {
  config.validate();
  check(values.size() > 0, ErrorCode::EmptyInput, "cannot encode an empty sequence");
  return detail::cascade(values, config, config.max_recursion_depth, std::nullopt);
}

EncodedBlock encode_with(SchemeId scheme, const Values& values, const EncodingConfig& config) {
  config.validate();
  if (!scheme_accepts(scheme, values, config.max_recursion_depth))
    fail(ErrorCode::UnsupportedType, std::string(scheme_name(scheme)) + " does not accept this " +
                                         value_kind_name(values.kind()) + " input");
  return detail::build_scheme(scheme, values, config, config.max_recursion_depth);
}

std::size_t estimate_size(const Values& sample, SchemeId scheme, const EncodingConfig& config) {
  return encode_with(scheme, sample, config).serialized_size();
}

std::size_t trivial_size(const Values& values) {
  std::size_t payload = std::visit(
      [](const auto& vec) -> std::size_t {
        using T = typename std::decay_t<decltype(vec)>::value_type;
        if constexpr (std::is_same_v<T, std::string>) {
          std::size_t n = 0;
          for (const auto& s : vec) n += 4 + s.size();
          return n;
        } else {
          return vec.size() * sizeof(T);
        }
      },
      values.data);
  return kBlockHeaderSize + payload;
}

}  // namespace bullion::encoding
