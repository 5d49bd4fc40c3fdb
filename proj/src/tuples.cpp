#include "dstf/tuples.hpp"

#include <stdexcept>

namespace dstf {

void require_explicit_capacity(const Scope& scope) {
  if (scope.frame_cardinality() > kExplicitCapacity)
    throw std::invalid_argument("product frame exceeds explicit-mode capacity (" +
                                std::to_string(kExplicitCapacity) + " configurations)");
}

std::vector<std::size_t> decode_tuple(const Scope& scope, std::uint32_t index) {
  std::vector<std::size_t> digits(scope.size());
  for (std::size_t i = 0; i < scope.size(); ++i) {
    digits[i] = index % scope.at(i).size();
    index /= static_cast<std::uint32_t>(scope.at(i).size());
  }
  return digits;
}

std::uint32_t encode_tuple(const Scope& scope, const std::vector<std::size_t>& digits) {
  std::uint32_t index = 0;
  for (std::size_t i = scope.size(); i-- > 0;)
    index = index * static_cast<std::uint32_t>(scope.at(i).size()) +
            static_cast<std::uint32_t>(digits[i]);
  return index;
}

std::uint32_t focal_tuple_mask(const Scope& scope, const FocalKey& key) {
  require_explicit_capacity(scope);
  if (const auto* tl = std::get_if<TupleList>(&key)) {
    std::uint32_t mask = 0;
    for (auto t : tl->tuples) mask |= std::uint32_t{1} << t;
    return mask;
  }
  const auto& parts = std::get<ProductParts>(key);
  std::uint32_t mask = 0;
  std::size_t card = scope.frame_cardinality();
  for (std::uint32_t t = 0; t < card; ++t) {
    auto digits = decode_tuple(scope, t);
    bool in = true;
    for (std::size_t i = 0; i < scope.size(); ++i)
      if (!(parts[i] >> digits[i] & 1)) { in = false; break; }
    if (in) mask |= std::uint32_t{1} << t;
  }
  return mask;
}

FocalKey tuple_mask_to_key(const Scope& scope, std::uint32_t mask) {
  if (mask == 0) throw std::invalid_argument("empty tuple mask has no focal key");
  ProductParts parts(scope.size(), 0);
  std::size_t card = scope.frame_cardinality();
  std::size_t count = 0;
  for (std::uint32_t t = 0; t < card; ++t) {
    if (!(mask >> t & 1)) continue;
    ++count;
    auto digits = decode_tuple(scope, t);
    for (std::size_t i = 0; i < scope.size(); ++i)
      parts[i] |= PartMask{1} << digits[i];
  }
  if (parts_tuple_count(parts) == count) return parts;
  TupleList tl;
  for (std::uint32_t t = 0; t < card; ++t)
    if (mask >> t & 1) tl.tuples.push_back(t);
  return tl;
}

}  // namespace dstf
