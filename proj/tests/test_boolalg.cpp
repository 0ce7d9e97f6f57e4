#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "common.hpp"
#include "treelab/boolalg.hpp"
#include "treelab/rng.hpp"

#include <set>

using namespace treelab;
using namespace treelab::testing;

namespace {

FiniteBooleanAlgebra p4() {
    return FiniteBooleanAlgebra("P4", {"aa", "ab", "ba", "bb"});
}

SubalgebraPartition half_blocks(const FiniteBooleanAlgebra& b) {
    return partition_from_blocks(
        4, {b.element({"aa", "ab"}), b.element({"ba", "bb"})});
}

} // namespace

TEST_CASE("ro algebra of the binary tree has the leaf cones as embedding") {
    auto t = b2();
    FiniteBooleanAlgebra algebra = ro_algebra(*t);
    CHECK(algebra.atom_count() == 4);
    CHECK(algebra.embed("a") == algebra.element({"aa", "ab"}));
    CHECK(algebra.embed("root") == algebra.one());
    // embeddings of distinct same-level nodes are disjoint, and a node's
    // image is the union of its children's images
    for (int l = 0; l < t->height(); ++l) {
        for (int i : t->level_nodes(l)) {
            for (int j : t->level_nodes(l))
                if (i != j)
                    CHECK((algebra.embed(t->id_of(i)) & algebra.embed(t->id_of(j))).none());
            if (!t->children(i).empty()) {
                AtomBits sum = algebra.zero();
                for (int c : t->children(i)) sum |= algebra.embed(t->id_of(c));
                CHECK(sum == algebra.embed(t->id_of(i)));
            }
        }
    }
}

TEST_CASE("complete subalgebra generated by nothing is trivial") {
    auto b = p4();
    CHECK(complete_subalgebra(b, {}).block_count() == 1);
}

TEST_CASE("complete subalgebra closes under complement") {
    auto b = p4();
    SubalgebraPartition part = complete_subalgebra(b, {b.element({"aa", "ab"})});
    CHECK(part == half_blocks(b));
}

TEST_CASE("all singletons generate the full algebra") {
    auto b = p4();
    std::vector<AtomBits> gens;
    for (int i = 0; i < 4; ++i) gens.push_back(b.singleton(i));
    CHECK(complete_subalgebra(b, gens).block_count() == 4);
}

TEST_CASE("complete subalgebra is idempotent on its own blocks") {
    auto b = p4();
    SubalgebraPartition part = half_blocks(b);
    CHECK(complete_subalgebra(b, part.blocks) == part);
    FiniteBooleanAlgebra b6("P6", {"p", "q", "r", "s", "t", "u"});
    SubalgebraPartition p6 = partition_from_blocks(
        6, {b6.element({"p", "r"}), b6.element({"q"}), b6.element({"s", "t", "u"})});
    CHECK(complete_subalgebra(b6, p6.blocks) == p6);
}

TEST_CASE("upper projection picks the blocks meeting the element") {
    auto b = p4();
    SubalgebraPartition part = half_blocks(b);
    CHECK(upper_projection(part, b.zero()) == b.zero());
    CHECK(upper_projection(part, b.one()) == b.one());
    CHECK(upper_projection(part, b.element({"aa"})) == b.element({"aa", "ab"}));
    CHECK(lower_projection(part, b.element({"aa"})) == b.zero());
    CHECK(lower_projection(part, b.element({"aa", "ab", "ba"})) == b.element({"aa", "ab"}));
}

TEST_CASE("upper projection is monotone, additive and fixes subalgebra elements") {
    FiniteBooleanAlgebra b("P6", {"a", "b", "c", "d", "e", "f"});
    SubalgebraPartition part = partition_from_blocks(
        6, {b.element({"a", "b"}), b.element({"c"}), b.element({"d", "e", "f"})});
    SplitMix64 rng(7);
    for (int round = 0; round < 200; ++round) {
        AtomBits x(6, rng.next() & 63);
        AtomBits y(6, rng.next() & 63);
        if (x.is_subset_of(y))
            CHECK(upper_projection(part, x).is_subset_of(upper_projection(part, y)));
        CHECK(upper_projection(part, x | y) ==
              (upper_projection(part, x) | upper_projection(part, y)));
        CHECK((upper_projection(part, x) & x) == x);
    }
    for (const auto& blk : part.blocks) CHECK(upper_projection(part, blk) == blk);
}

TEST_CASE("relative algebra keeps the atoms below the element") {
    auto b = p4();
    CHECK(relative_algebra(b, b.one()).atom_count() == 4);
    FiniteBooleanAlgebra below = relative_algebra(b, b.element({"aa", "ab"}));
    CHECK(below.atoms() == std::vector<std::string>{"aa", "ab"});
    CHECK_THROWS_AS(relative_algebra(b, b.zero()), std::invalid_argument);
    // trace of the half partition on a transversal splits into singletons
    AtomBits tr = b.element({"aa", "ba"});
    FiniteBooleanAlgebra rel = relative_algebra(b, tr);
    SubalgebraPartition traced = trace_partition(b, half_blocks(b), tr, rel);
    CHECK(traced.block_count() == 2);
    for (const auto& blk : traced.blocks) CHECK(blk.count() == 1);
}

TEST_CASE("product algebra tags the atoms and pairs the diagonal") {
    FiniteBooleanAlgebra p2("P2", {"x", "y"});
    FiniteBooleanAlgebra prod = product_algebra({&p2, &p2}, "P2xP2");
    CHECK(prod.atom_count() == 4);
    CHECK(prod.atoms() == std::vector<std::string>{"0.x", "0.y", "1.x", "1.y"});
    SubalgebraPartition diag = diagonal_subalgebra(prod, p2);
    CHECK(diag.block_count() == 2);
    CHECK(diag.blocks[0] == prod.element({"0.x", "1.x"}));
    CHECK(diag.blocks[1] == prod.element({"0.y", "1.y"}));
    CHECK(inject(prod, 0, p2, p2.one()) == prod.element({"0.x", "0.y"}));
    FiniteBooleanAlgebra single = product_algebra({&p2}, "just");
    CHECK(single.atom_count() == 2);
    std::vector<const FiniteBooleanAlgebra*> none;
    CHECK_THROWS_AS(product_algebra(none, "none"), std::invalid_argument);
}

TEST_CASE("ro algebra commutes with frontier-preserving restriction") {
    auto t = full_tree(2, 4, {}, "T");
    FiniteBooleanAlgebra whole = ro_algebra(*t);
    LevelledTree r = restrict_levels(*t, {0, 1, 3});
    FiniteBooleanAlgebra reduced = ro_algebra(r);
    CHECK(whole.atoms() == reduced.atoms());
    for (int i = 0; i < r.size(); ++i)
        CHECK(reduced.embed(r.id_of(i)) == whole.embed(r.id_of(i)));
}

TEST_CASE("partition invariants are enforced") {
    auto b = p4();
    CHECK_THROWS_AS(partition_from_blocks(4, {b.element({"aa"})}), std::invalid_argument);
    CHECK_THROWS_AS(partition_from_blocks(
                        4, {b.element({"aa", "ab"}), b.element({"ab", "ba", "bb"})}),
                    std::invalid_argument);
    SubalgebraPartition part = half_blocks(b);
    CHECK(part.is_element(b.element({"aa", "ab"})));
    CHECK_FALSE(part.is_element(b.element({"aa", "ba"})));
    CHECK(refines(identity_partition(4), part));
    CHECK_FALSE(refines(part, identity_partition(4)));
    CHECK(refines(part, trivial_partition(4)));
}
