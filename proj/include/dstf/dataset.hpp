#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dstf/mass.hpp"

namespace dstf {

// Set-valued records: one nonempty value-subset per variable.
struct RecordSet {
  Scope scope;
  std::vector<ProductParts> records;

  std::size_t size() const { return records.size(); }
};

// Declared impossible level combination, by per-variable label sets.
struct StructuralZeroSpec {
  std::map<std::string, std::vector<std::string>> levels;
};

// Parsed model file: the mass function plus serialization metadata (source
// decimal strings, structural-zero declarations).
struct ModelDocument {
  MassFunction mass;
  std::map<FocalKey, std::string> mass_text;  // original decimals, when parsed
  std::vector<StructuralZeroSpec> impossible;
};

struct RecordFile {
  RecordSet records;
  std::vector<StructuralZeroSpec> impossible;
};

ModelDocument parse_model(const std::string& text);
std::string serialize_model(const ModelDocument& doc);
std::string serialize_model(const MassFunction& m);

RecordFile parse_records(const std::string& text);
// Scope supplied explicitly (frames may not be inferable from data alone).
RecordFile parse_records(const std::string& text, const Scope& scope);
std::string serialize_records(const RecordSet& rs, const std::string& header_comment = "");

MassFunction empirical_mass(const RecordSet& records);

// Deterministic i.i.d. sampling of focal sets (inverse CDF over the canonical
// focal order, mt19937_64).
RecordSet generate_records(const MassFunction& m, std::size_t n, std::uint64_t seed);

// Name and parameters of the sampling PRNG, for record-file headers.
std::string generator_header(std::size_t n, std::uint64_t seed);

}  // namespace dstf
