#include <doctest.h>

#include <cmath>

#include "edgedel/factor.hpp"
#include "edgedel/kernels.hpp"
#include "edgedel/types.hpp"

#include "helpers.hpp"

using namespace edgedel;
using testutil::random_row;

namespace {

Factor random_factor(Rng& rng, std::vector<VarId> scope,
                     const std::vector<int>& cards) {
  Factor f;
  f.scope = std::move(scope);
  f.table.resize(table_size(f.scope, cards));
  for (double& x : f.table) x = rng.uniform() + 0.01;
  return f;
}

}  // namespace

TEST_CASE("table layout: strides put the last scope variable fastest") {
  const std::vector<int> cards = {2, 3, 4};
  CHECK(table_size(std::vector<VarId>{0, 1, 2}, cards) == 24);
  const auto s = strides(std::vector<VarId>{0, 1, 2}, cards);
  CHECK(s == std::vector<std::size_t>{12, 4, 1});
  CHECK(table_size(std::vector<VarId>{}, cards) == 1);
}

TEST_CASE("multiply: known 2x2 product and scope ordering") {
  const std::vector<int> cards = {2, 2};
  // f over {0}, g over {0,1}: result scope is {0} then {1}.
  const Factor f({0}, {0.25, 0.75});
  const Factor g({0, 1}, {0.9, 0.1, 0.2, 0.8});
  const Factor h = multiply(f, g, cards);
  REQUIRE(h.scope == std::vector<VarId>{0, 1});
  CHECK(h.table[0] == doctest::Approx(0.25 * 0.9).epsilon(1e-15));
  CHECK(h.table[1] == doctest::Approx(0.25 * 0.1).epsilon(1e-15));
  CHECK(h.table[2] == doctest::Approx(0.75 * 0.2).epsilon(1e-15));
  CHECK(h.table[3] == doctest::Approx(0.75 * 0.8).epsilon(1e-15));

  // Disjoint scopes: g's variables are appended in g's order.
  const Factor a({1}, {0.5, 0.5});
  const Factor b({0}, {0.3, 0.7});
  CHECK(multiply(a, b, cards).scope == std::vector<VarId>{1, 0});
}

TEST_CASE("multiply by the unit scalar is the identity") {
  const std::vector<int> cards = {2, 3};
  Rng rng(11);
  const Factor f = random_factor(rng, {0, 1}, cards);
  const Factor h = multiply(f, Factor::unit(), cards);
  CHECK(h.scope == f.scope);
  CHECK(h.table == f.table);
  const Factor h2 = multiply(Factor::unit(), f, cards);
  CHECK(h2.scope == f.scope);
  CHECK(h2.table == f.table);
}

TEST_CASE("sum_out marginalizes one variable") {
  const std::vector<int> cards = {2, 2};
  const Factor g({0, 1}, {0.9, 0.1, 0.2, 0.8});
  const Factor m = sum_out(g, 1, cards);
  REQUIRE(m.scope == std::vector<VarId>{0});
  CHECK(m.table[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m.table[1] == doctest::Approx(1.0).epsilon(1e-15));
  const Factor m0 = sum_out(g, 0, cards);
  REQUIRE(m0.scope == std::vector<VarId>{1});
  CHECK(m0.table[0] == doctest::Approx(1.1).epsilon(1e-15));
  CHECK(m0.table[1] == doctest::Approx(0.9).epsilon(1e-15));
}

TEST_CASE("restrict: evidence slices") {
  const std::vector<int> cards = {2, 2};
  Evidence e;
  e.set(0, 1);

  // Factor over {X} restricted by X = x1 becomes the scalar table[1].
  const Factor f({0}, {0.3, 0.7});
  const Factor r = restrict(f, e, cards);
  CHECK(r.scalar());
  CHECK(r.value() == 0.7);

  // Empty scope: unchanged.
  const Factor s({}, {0.42});
  const Factor rs = restrict(s, e, cards);
  CHECK(rs.scalar());
  CHECK(rs.value() == 0.42);

  // CPT over {Y,X} (2x2) restricted by Y = y1 keeps row y1.
  const Factor cpt({0, 1}, {0.9, 0.1, 0.2, 0.8});
  const Factor row = restrict(cpt, e, cards);
  REQUIRE(row.scope == std::vector<VarId>{1});
  CHECK(row.table == std::vector<double>{0.2, 0.8});
}

TEST_CASE("restrict commutes with multiplication") {
  Rng rng(23);
  const std::vector<int> cards = {2, 3, 2, 4};
  for (int it = 0; it < 50; ++it) {
    const Factor f = random_factor(rng, {0, 1, 2}, cards);
    const Factor g = random_factor(rng, {1, 3}, cards);
    Evidence e;
    e.set(1, rng.below(3));
    if (rng.next() & 1) e.set(3, rng.below(4));
    const Factor lhs = restrict(multiply(f, g, cards), e, cards);
    const Factor rhs =
        multiply(restrict(f, e, cards), restrict(g, e, cards), cards);
    REQUIRE(lhs.scope == rhs.scope);
    REQUIRE(lhs.table.size() == rhs.table.size());
    for (std::size_t i = 0; i < lhs.table.size(); ++i)
      CHECK(lhs.table[i] == doctest::Approx(rhs.table[i]).epsilon(1e-12));
  }
}

TEST_CASE("reorder permutes axes without changing values") {
  const std::vector<int> cards = {2, 3};
  Rng rng(5);
  const Factor f = random_factor(rng, {0, 1}, cards);
  const Factor g = reorder(f, std::vector<VarId>{1, 0}, cards);
  REQUIRE(g.scope == std::vector<VarId>{1, 0});
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 3; ++b)
      CHECK(f.table[a * 3 + b] == g.table[b * 2 + a]);
}

TEST_CASE("parallel kernels are bit-identical to the serial reference") {
  Rng rng(99);
  const std::vector<int> cards = {2, 3, 2, 4, 3, 2};
  KernelConfig par;
  par.grain = 4;  // force the threaded path even on tiny tables
  for (int it = 0; it < 30; ++it) {
    std::vector<VarId> sa, sb;
    for (VarId v = 0; v < 6; ++v) {
      if (rng.uniform() < 0.6) sa.push_back(v);
      if (rng.uniform() < 0.6) sb.push_back(v);
    }
    if (sa.empty()) sa.push_back(0);
    if (sb.empty()) sb.push_back(5);
    const Factor f = random_factor(rng, sa, cards);
    const Factor g = random_factor(rng, sb, cards);

    const Factor m_ref = ref::multiply(f, g, cards);
    const Factor m_par = multiply(f, g, cards, par);
    REQUIRE(m_ref.scope == m_par.scope);
    CHECK(m_ref.table == m_par.table);

    const VarId v = f.scope[rng.below(static_cast<int>(f.scope.size()))];
    const Factor s_ref = ref::sum_out(f, v, cards);
    const Factor s_par = sum_out(f, v, cards, par);
    REQUIRE(s_ref.scope == s_par.scope);
    CHECK(s_ref.table == s_par.table);
  }
}
