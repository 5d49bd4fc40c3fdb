#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "dstf/dataset.hpp"
#include "dstf/mass.hpp"

namespace dstf::testing {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ModelDocument load_fixture() {
  return parse_model(read_file(std::string(DSTF_DATA_DIR) + "/xyz_example.json"));
}

inline Scope xyz_scope() {
  return Scope({{"X", {"p", "q"}}, {"Y", {"r", "s", "t"}}, {"Z", {"a", "b", "c"}}});
}

inline ProductParts parts(std::initializer_list<PartMask> masks) { return ProductParts(masks); }

// Random proper normal mass function with product-form focal sets.
inline MassFunction random_mass(const Scope& scope, std::mt19937_64& rng,
                                std::size_t max_focals = 5) {
  std::uniform_int_distribution<std::size_t> nf(1, max_focals);
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  std::map<FocalKey, double> acc;
  std::size_t n = nf(rng);
  for (std::size_t f = 0; f < n; ++f) {
    ProductParts p;
    for (const auto& var : scope.variables()) {
      std::uniform_int_distribution<PartMask> mask(1, var.full_mask());
      p.push_back(mask(rng));
    }
    acc[std::move(p)] += weight(rng);
  }
  double total = 0.0;
  for (auto& [k, v] : acc) total += v;
  for (auto& [k, v] : acc) v /= total;
  return MassFunction(scope, std::move(acc));
}

}  // namespace dstf::testing
