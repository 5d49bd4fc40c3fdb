#pragma once

#include <cstdint>

#include "dstf/frame.hpp"
#include "dstf/mass.hpp"

namespace dstf {

// Explicit-mode tuple indexing: configurations of the product frame are
// numbered in mixed radix with the first variable fastest.

std::vector<std::size_t> decode_tuple(const Scope& scope, std::uint32_t index);
std::uint32_t encode_tuple(const Scope& scope, const std::vector<std::size_t>& digits);

// Bitmask over all configurations selected by a focal key.
std::uint32_t focal_tuple_mask(const Scope& scope, const FocalKey& key);

// Decompose a tuple mask into per-variable parts when it is a product set,
// otherwise return a TupleList key. mask must be nonzero.
FocalKey tuple_mask_to_key(const Scope& scope, std::uint32_t mask);

void require_explicit_capacity(const Scope& scope);

}  // namespace dstf
