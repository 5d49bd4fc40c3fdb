#include <doctest.h>

#include <bit>
#include <random>

#include "dstf/frame.hpp"
#include "helpers.hpp"

using namespace dstf;
using dstf::testing::parts;
using dstf::testing::xyz_scope;

namespace {

// {p} x {r} x {a,b} style shorthand over the X,Y,Z scope.
ProductFocalSet xyz(PartMask x, PartMask y, PartMask z) {
  return ProductFocalSet(xyz_scope(), {x, y, z});
}

}  // namespace

TEST_CASE("scope invariants") {
  CHECK_THROWS(Scope(std::vector<Variable>{{"X", {}}}));
  CHECK_THROWS(Scope(std::vector<Variable>{{"", {"a"}}}));
  CHECK_THROWS(Scope({{"X", {"a", "a"}}}));
  CHECK_THROWS(Scope({{"X", {"a"}}, {"X", {"b"}}}));
  CHECK(xyz_scope().frame_cardinality() == 18);
}

TEST_CASE("focal set construction rejects empty and out-of-frame parts") {
  CHECK_THROWS(ProductFocalSet(xyz_scope(), {0b01, 0b000, 0b011}));
  CHECK_THROWS(ProductFocalSet(xyz_scope(), {0b100, 0b001, 0b001}));
  CHECK_THROWS(ProductFocalSet(xyz_scope(), {0b01, 0b001}));
}

TEST_CASE("projection") {
  auto a = xyz(0b01, 0b001, 0b011);  // {p} x {r} x {a,b}
  auto pz = project_focal(a, {"Z"});
  CHECK(pz.scope.size() == 1);
  CHECK(pz.parts == parts({0b011}));

  auto b = xyz(0b01, 0b110, 0b010);  // {p} x {s,t} x {b}
  auto pxy = project_focal(b, {"X", "Y"});
  CHECK(pxy.parts == parts({0b01, 0b110}));

  CHECK(project_focal(a, {"X", "Y", "Z"}) == a);
  CHECK_THROWS(project_focal(a, {"W"}));
}

TEST_CASE("projection order is canonical regardless of request order") {
  auto a = xyz(0b01, 0b001, 0b011);
  CHECK(project_focal(a, {"Z", "X"}) == project_focal(a, {"X", "Z"}));
  CHECK(project_focal(a, {"Z", "X"}).scope.at(0).name == "X");
}

TEST_CASE("intersection") {
  auto a = xyz(0b01, 0b001, 0b011);
  auto b = xyz(0b01, 0b001, 0b110);
  auto r = intersect_focal(a, b);
  REQUIRE(!r.empty);
  CHECK(r.set.parts == parts({0b01, 0b001, 0b010}));  // {p} x {r} x {b}

  CHECK(intersect_focal(xyz(0b01, 0b001, 0b011), xyz(0b10, 0b001, 0b011)).empty);

  auto self = intersect_focal(a, a);
  REQUIRE(!self.empty);
  CHECK(self.set == a);
}

TEST_CASE("vacuous extension") {
  Scope xz({{"X", {"p", "q"}}, {"Z", {"a", "b", "c"}}});
  ProductFocalSet a(xz, {0b01, 0b011});
  auto ext = vacuous_extend_focal(a, xyz_scope());
  CHECK(ext.parts == parts({0b01, 0b111, 0b011}));

  CHECK(vacuous_extend_focal(ext, xyz_scope()) == ext);

  Scope z({{"Z", {"a", "b", "c"}}});
  auto zb = vacuous_extend_focal(ProductFocalSet(z, {0b010}), xyz_scope());
  CHECK(zb.parts == parts({0b11, 0b111, 0b010}));

  CHECK_THROWS(vacuous_extend_focal(ext, xz));
}

TEST_CASE("relations") {
  CHECK(focal_relation(xyz(0b01, 0b001, 0b010), xyz(0b01, 0b001, 0b011)) ==
        SetRelation::subset);
  CHECK(focal_relation(xyz(0b01, 0b110, 0b010), xyz(0b10, 0b001, 0b010)) ==
        SetRelation::disjoint);
  CHECK(focal_relation(xyz(0b01, 0b011, 0b011), xyz(0b01, 0b110, 0b110)) ==
        SetRelation::overlapping);
  CHECK(focal_relation(xyz(0b01, 0b001, 0b011), xyz(0b01, 0b001, 0b011)) ==
        SetRelation::equal);
  CHECK(focal_relation(xyz(0b01, 0b001, 0b011), xyz(0b01, 0b001, 0b010)) ==
        SetRelation::superset);
}

TEST_CASE("tuple enumeration") {
  auto four = enumerate_tuples(xyz(0b01, 0b110, 0b011));
  CHECK(std::popcount(four.tuples) == 4);

  auto one = enumerate_tuples(xyz(0b01, 0b001, 0b010));
  CHECK(std::popcount(one.tuples) == 1);

  auto all = enumerate_tuples(full_focal(xyz_scope()));
  CHECK(std::popcount(all.tuples) == 18);

  Scope big({{"A", {"0", "1", "2", "3", "4"}},
             {"B", {"0", "1", "2", "3", "4"}},
             {"C", {"0", "1"}}});  // 50 > capacity
  CHECK_THROWS(enumerate_tuples(full_focal(big)));
}

TEST_CASE("random product-set properties") {
  std::mt19937_64 rng(7);
  auto scope = xyz_scope();
  auto random_set = [&] {
    ProductParts p;
    for (const auto& var : scope.variables()) {
      std::uniform_int_distribution<PartMask> mask(1, var.full_mask());
      p.push_back(mask(rng));
    }
    return ProductFocalSet(scope, p);
  };

  for (int it = 0; it < 300; ++it) {
    auto a = random_set(), b = random_set(), c = random_set();

    // Commutativity, associativity, idempotence of intersection.
    auto ab = intersect_focal(a, b), ba = intersect_focal(b, a);
    CHECK(ab.empty == ba.empty);
    if (!ab.empty) CHECK(ab.set == ba.set);
    auto left = ab.empty ? ab : intersect_focal(ab.set, c);
    auto bc = intersect_focal(b, c);
    auto right = bc.empty ? bc : intersect_focal(a, bc.set);
    CHECK(left.empty == right.empty);
    if (!left.empty) CHECK(left.set == right.set);
    CHECK(intersect_focal(a, a).set == a);

    // Projection composition: X,Y then X equals X directly.
    auto via = project_focal(project_focal(a, {"X", "Y"}), {"X"});
    CHECK(via == project_focal(a, {"X"}));

    // Relation agrees with the explicit-mode oracle.
    auto rel = focal_relation(b, a);
    auto ta = enumerate_tuples(a).tuples, tb = enumerate_tuples(b).tuples;
    CHECK((rel == SetRelation::subset || rel == SetRelation::equal) == ((tb & ~ta) == 0));
    CHECK((rel == SetRelation::disjoint) == ((ta & tb) == 0));

    // Cardinality is the product of part sizes.
    CHECK(static_cast<std::size_t>(std::popcount(ta)) == a.tuple_count());
  }
}
