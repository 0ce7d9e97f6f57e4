#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "common.hpp"
#include "treelab/largeness.hpp"
#include "treelab/rng.hpp"

#include <numeric>
#include <set>

using namespace treelab;
using namespace treelab::testing;

namespace {

FiniteBooleanAlgebra p4() { return FiniteBooleanAlgebra("P4", {"aa", "ab", "ba", "bb"}); }

SubalgebraPartition half_blocks(const FiniteBooleanAlgebra& b) {
    return partition_from_blocks(4, {b.element({"aa", "ab"}), b.element({"ba", "bb"})});
}

std::vector<BaAutomorphism> all_permutations(int n) {
    std::vector<int> base(n);
    std::iota(base.begin(), base.end(), 0);
    std::vector<BaAutomorphism> out;
    do {
        out.push_back(BaAutomorphism{base});
    } while (std::next_permutation(base.begin(), base.end()));
    return out;
}

// literal brute-force fixed elements of a generated group
std::set<AtomBits> oracle_fixed_elements(int n, const std::vector<BaAutomorphism>& gens) {
    std::vector<BaAutomorphism> group = group_closure(gens);
    std::set<AtomBits> out;
    for (uint64_t bits = 0; bits < (uint64_t(1) << n); ++bits) {
        AtomBits b(n, bits);
        bool fixed = true;
        for (const auto& g : group)
            if (g.apply(b) != b) fixed = false;
        if (fixed) out.insert(b);
    }
    return out;
}

std::set<AtomBits> elements_of(const SubalgebraPartition& part, int n) {
    std::set<AtomBits> out;
    size_t k = part.blocks.size();
    for (uint64_t pick = 0; pick < (uint64_t(1) << k); ++pick) {
        AtomBits e(n);
        for (size_t b = 0; b < k; ++b)
            if (pick >> b & 1) e |= part.blocks[b];
        out.insert(e);
    }
    return out;
}

} // namespace

TEST_CASE("local equality set membership is the one-atom-per-block test") {
    auto b = p4();
    SubalgebraPartition part = half_blocks(b);
    CHECK(in_local_equality_set(part, b.element({"aa", "ba"})));
    CHECK(in_local_equality_set(part, b.element({"aa"})));
    CHECK(in_local_equality_set(part, b.zero()));
    CHECK_FALSE(in_local_equality_set(part, b.element({"aa", "ab"})));
}

TEST_CASE("maximal members of X are the four transversals of P4") {
    auto b = p4();
    LocalEqualityReport rep = local_equality_set(b, half_blocks(b));
    REQUIRE(rep.maximal.size() == 4);
    std::set<AtomBits> expect{b.element({"aa", "ba"}), b.element({"aa", "bb"}),
                              b.element({"ab", "ba"}), b.element({"ab", "bb"})};
    CHECK(std::set<AtomBits>(rep.maximal.begin(), rep.maximal.end()) == expect);
    CHECK(rep.checks_run);
    CHECK(rep.x_downward_closed);
    CHECK(rep.x_dense);
    CHECK(rep.maximal_cover);
    CHECK(rep.blocks_all_nontrivial);
    CHECK(rep.h_image_maximal_antichain);
    CHECK(rep.h_images_agree);
}

TEST_CASE("when the subalgebra is everything, Y is the unit") {
    auto b = p4();
    LocalEqualityReport rep = local_equality_set(b, identity_partition(4));
    REQUIRE(rep.maximal.size() == 1);
    CHECK(rep.maximal[0] == b.one());
    CHECK_FALSE(rep.blocks_all_nontrivial);
    // atoms always lie in X
    for (int i = 0; i < 4; ++i)
        CHECK(in_local_equality_set(half_blocks(b), b.singleton(i)));
}

TEST_CASE("mu-large finds the minimal witness for the half partition") {
    auto b = p4();
    MuLargeResult r = mu_large(b, half_blocks(b), 4);
    CHECK(r.minimal_size == 1);
    REQUIRE(r.certificate);
    CHECK(r.certificate->witness.size() == 1);
    CHECK(r.certificate->generated_check);
    CHECK(r.certificate->witness[0] == b.element({"ab", "bb"}));
}

TEST_CASE("the full subalgebra is 0-large") {
    auto b = p4();
    MuLargeResult r = mu_large(b, identity_partition(4), 0);
    CHECK(r.minimal_size == 0);
    REQUIRE(r.certificate);
    CHECK(r.certificate->witness.empty());
    CHECK(r.certificate->generated_check);
}

TEST_CASE("the diagonal of a square is 1-large") {
    FiniteBooleanAlgebra p2("P2", {"x", "y"});
    FiniteBooleanAlgebra prod = product_algebra({&p2, &p2}, "C");
    SubalgebraPartition diag = diagonal_subalgebra(prod, p2);
    MuLargeResult r = mu_large(prod, diag, 4);
    CHECK(r.minimal_size == 1);
    REQUIRE(r.certificate);
    // one coordinate copy witnesses: the layered witness picks one atom out
    // of each diagonal pair
    CHECK(in_local_equality_set(diag, r.certificate->witness[0]));
    CHECK(r.certificate->generated_check);
    // the first coordinate copy is itself a witness: <diag u {(1,0)}> = C
    std::vector<AtomBits> gens = diag.blocks;
    gens.push_back(inject(prod, 0, p2, p2.one()));
    CHECK(complete_subalgebra(prod, gens).block_count() == prod.atom_count());
}

TEST_CASE("mu-large refuses below the minimal size and confirms exhaustively") {
    FiniteBooleanAlgebra b("P6", {"a", "b", "c", "d", "e", "f"});
    SubalgebraPartition part = partition_from_blocks(
        6, {b.element({"a", "b", "c"}), b.element({"d", "e", "f"})});
    MuLargeResult r = mu_large(b, part, 1);
    CHECK(r.minimal_size == 2);
    CHECK_FALSE(r.certificate);
    CHECK(r.exhausted_bound == 1);
    CHECK(r.exhaustive_confirmed);
    // and the witness appears once the bound allows it
    MuLargeResult ok = mu_large(b, part, 2);
    REQUIRE(ok.certificate);
    CHECK(ok.certificate->generated_check);
    // minimality against brute force: no single element generates
    for (uint64_t bits = 0; bits < 64; ++bits) {
        AtomBits m(6, bits);
        std::vector<AtomBits> gens = part.blocks;
        gens.push_back(m);
        CHECK(complete_subalgebra(b, gens).block_count() < 6);
    }
}

TEST_CASE("frolik partition of the identity is trivial") {
    auto b = p4();
    FrolikPartition p = frolik_partition(b, ba_identity(4));
    CHECK(p.a0 == b.one());
    CHECK(p.a1.none());
    CHECK(p.a2.none());
    CHECK(p.a3.none());
}

TEST_CASE("frolik partition of a transposition 2-colors the swapped pair") {
    auto b = p4();
    BaAutomorphism f = ba_from_maplets(b, {{"aa", "ab"}, {"ab", "aa"}});
    FrolikPartition p = frolik_partition(b, f);
    CHECK(p.a0 == b.element({"ba", "bb"}));
    CHECK(p.a1 == b.element({"aa"}));
    CHECK(p.a2 == b.element({"ab"}));
    CHECK(p.a3.none());
}

TEST_CASE("a 3-cycle needs all three moved pieces") {
    FiniteBooleanAlgebra b("P3", {"x", "y", "z"});
    BaAutomorphism f = ba_from_maplets(b, {{"x", "y"}, {"y", "z"}, {"z", "x"}});
    FrolikPartition p = frolik_partition(b, f);
    CHECK(p.a0.none());
    CHECK(p.a1.any());
    CHECK(p.a2.any());
    CHECK(p.a3.any());
}

TEST_CASE("frolik clauses hold for every permutation of up to six atoms") {
    for (int n = 1; n <= 6; ++n) {
        std::vector<std::string> names;
        for (int i = 0; i < n; ++i) names.push_back(std::string(1, static_cast<char>('a' + i)));
        FiniteBooleanAlgebra b("P", names);
        for (const auto& f : all_permutations(n)) {
            FrolikPartition p = frolik_partition(b, f);
            AtomBits all = p.a0 | p.a1 | p.a2 | p.a3;
            REQUIRE(all == b.one());
            REQUIRE((p.a0 & p.a1).none());
            REQUIRE((p.a0 & p.a2).none());
            REQUIRE((p.a0 & p.a3).none());
            REQUIRE((p.a1 & p.a2).none());
            REQUIRE((p.a1 & p.a3).none());
            REQUIRE((p.a2 & p.a3).none());
            for (auto i = p.a0.find_first(); i != AtomBits::npos; i = p.a0.find_next(i))
                REQUIRE(f.perm[i] == static_cast<int>(i));
            REQUIRE((f.apply(p.a1) & p.a1).none());
            REQUIRE((f.apply(p.a2) & p.a2).none());
            REQUIRE((f.apply(p.a3) & p.a3).none());
        }
    }
}

TEST_CASE("fixed points of the trivial group are everything") {
    auto b = p4();
    FixedPointResult r = fixed_point_subalgebra(b, {ba_identity(4)});
    CHECK(r.fixed.block_count() == 4);
    CHECK(r.certificate.witness.empty());
    CHECK(r.certificate.generated_check);
    CHECK(r.group_size == 1);
    CHECK(r.replay_generates);
}

TEST_CASE("fixed points of a swap give the orbit partition and a small witness") {
    auto b = p4();
    BaAutomorphism f = ba_from_maplets(b, {{"aa", "ab"}, {"ab", "aa"}});
    FixedPointResult r = fixed_point_subalgebra(b, {f});
    SubalgebraPartition expect = partition_from_blocks(
        4, {b.element({"aa", "ab"}), b.element({"ba"}), b.element({"bb"})});
    CHECK(r.fixed == expect);
    CHECK(r.certificate.witness.size() == 1);
    CHECK(r.certificate.generated_check);
    CHECK(r.group_size == 2);
    CHECK(r.replay_generates);
    CHECK(elements_of(r.fixed, 4) == oracle_fixed_elements(4, {f}));
}

TEST_CASE("the coordinate flip of a square fixes exactly the diagonal") {
    FiniteBooleanAlgebra p2("P2", {"x", "y"});
    FiniteBooleanAlgebra prod = product_algebra({&p2, &p2}, "C");
    BaAutomorphism flip = ba_from_maplets(
        prod, {{"0.x", "1.x"}, {"1.x", "0.x"}, {"0.y", "1.y"}, {"1.y", "0.y"}});
    FixedPointResult r = fixed_point_subalgebra(prod, {flip});
    CHECK(r.fixed == diagonal_subalgebra(prod, p2));
    CHECK(r.replay_generates);
}

TEST_CASE("fixed-point subalgebra equals the brute-force fixed set on random pairs") {
    SplitMix64 rng(11);
    std::vector<std::string> names{"a", "b", "c", "d", "e", "f"};
    FiniteBooleanAlgebra b("P6", names);
    auto random_perm = [&]() {
        std::vector<int> p(6);
        std::iota(p.begin(), p.end(), 0);
        for (int i = 5; i > 0; --i) std::swap(p[i], p[rng.below(i + 1)]);
        return BaAutomorphism{p};
    };
    for (int round = 0; round < 40; ++round) {
        std::vector<BaAutomorphism> gens{random_perm(), random_perm()};
        FixedPointResult r = fixed_point_subalgebra(b, gens);
        CHECK(elements_of(r.fixed, 6) == oracle_fixed_elements(6, gens));
        CHECK(r.certificate.generated_check);
        CHECK(r.certificate.witness.size() <= 6);
        CHECK(r.replay_generates);
    }
}

TEST_CASE("decomposition over a half partition is a square") {
    auto b = p4();
    DecompositionResult r = large_decomposition(b, half_blocks(b));
    REQUIRE(r.ok);
    CHECK(r.witness_antichain.size() == 2);
    REQUIRE(r.fibers.size() == 1);
    CHECK(r.fibers[0].first == b.one());
    CHECK(r.fibers[0].second == 2);
    CHECK(r.iso_verified);
    REQUIRE(r.target);
    CHECK(r.target->atom_count() == 4);
}

TEST_CASE("decomposition over the full subalgebra is the identity power") {
    auto b = p4();
    DecompositionResult r = large_decomposition(b, identity_partition(4));
    REQUIRE(r.ok);
    CHECK(r.fibers[0].second == 1);
    CHECK(r.iso_verified);
}

TEST_CASE("decomposition of the diagonal square has exponent two") {
    FiniteBooleanAlgebra p2("P2", {"x", "y"});
    FiniteBooleanAlgebra prod = product_algebra({&p2, &p2}, "C");
    DecompositionResult r = large_decomposition(prod, diagonal_subalgebra(prod, p2));
    REQUIRE(r.ok);
    CHECK(r.fibers[0].second == 2);
    CHECK(r.iso_verified);
}

TEST_CASE("decomposition refuses unequal blocks with a structured message") {
    FiniteBooleanAlgebra b("P3", {"x", "y", "z"});
    SubalgebraPartition part =
        partition_from_blocks(3, {b.element({"x"}), b.element({"y", "z"})});
    DecompositionResult r = large_decomposition(b, part);
    CHECK_FALSE(r.ok);
    CHECK(r.refusal.find("sizes") != std::string::npos);
}

TEST_CASE("nice part split is everything for a nice relation") {
    Ter rel = block_pair_ter(full_tree(4, 3, {}, "Q"));
    NicePartSplit r = nice_part_split(rel);
    CHECK(r.b_nice == represented_subalgebra(rel).algebra.one());
    CHECK(r.b_rest.none());
    for (const auto& [id, ok] : r.node_nice) CHECK(ok);
    CHECK(r.nice_up_closed);
    CHECK(r.locally_equal_up_closed);
}

TEST_CASE("nice part split after a dense split rejects every cone below the level") {
    auto t = full_tree(4, 4, {2}, "S");
    Ter split = dense_split(block_pair_ter(t), 2, 1).refined;
    NicePartSplit r = nice_part_split(split);
    for (int i = 0; i < t->size(); ++i) {
        bool expect_nice = t->node(i).level >= 2;
        CHECK(r.node_nice.at(t->id_of(i)) == expect_nice);
    }
    CHECK(r.nice_up_closed);
    // the locally-equal part: a node's cone lies in X iff its cone meets
    // every block at most once; leaves always qualify
    for (int i : t->level_nodes(3)) CHECK(r.node_locally_equal.at(t->id_of(i)));
}

TEST_CASE("nice part split on a mixed sum is componentwise") {
    auto nice_part = full_tree(4, 4, {}, "N");
    auto split_part = full_tree(4, 4, {2}, "S");
    Ter split = dense_split(block_pair_ter(split_part), 2, 1).refined;
    LevelledTree sum = tree_sum(*nice_part, *split_part);
    auto sum_ptr = std::make_shared<LevelledTree>(sum);
    // relation: block pairs on the first summand, the split relation on the
    // second, nothing across
    std::vector<LevelClass> classes;
    for (const auto& lc : block_pair_ter(nice_part).nontrivial_classes()) {
        LevelClass shifted;
        shifted.level = lc.level + 1;
        for (const auto& id : lc.members) shifted.members.push_back("0." + id);
        classes.push_back(std::move(shifted));
    }
    for (const auto& lc : split.nontrivial_classes()) {
        LevelClass shifted;
        shifted.level = lc.level + 1;
        for (const auto& id : lc.members) shifted.members.push_back("1." + id);
        classes.push_back(std::move(shifted));
    }
    Ter mixed = Ter::from_classes(sum_ptr, classes, "mixed");
    NicePartSplit r = nice_part_split(mixed);
    // first summand cones are nice, second summand cones below the split
    // level are not, and the shared root sees the disputes
    CHECK_FALSE(r.node_nice.at("+"));
    for (int i = 0; i < sum.size(); ++i) {
        const std::string& id = sum.id_of(i);
        if (id.rfind("0.", 0) == 0) CHECK(r.node_nice.at(id));
        if (id.rfind("1.", 0) == 0) {
            bool expect_nice = sum.node(i).level - 1 >= 2;
            CHECK(r.node_nice.at(id) == expect_nice);
        }
    }
}

TEST_CASE("mu-large certificates meet the brute-force minimum on small algebras") {
    // brute force: the smallest k admitting disjoint sets M_1..M_k with
    // <A u M> = B, searched over all membership colorings atom -> {0..k}
    auto brute_minimum = [](const FiniteBooleanAlgebra& b, const SubalgebraPartition& part) {
        int n = b.atom_count();
        for (int k = 0;; ++k) {
            std::vector<int> color(n, 0);
            std::function<bool(int)> assign = [&](int i) -> bool {
                if (i == n) {
                    std::vector<AtomBits> gens = part.blocks;
                    for (int c = 1; c <= k; ++c) {
                        AtomBits m(n);
                        for (int a = 0; a < n; ++a)
                            if (color[a] == c) m.set(a);
                        if (m.any()) gens.push_back(m);
                    }
                    return complete_subalgebra(b, gens).block_count() == n;
                }
                for (int c = 0; c <= k; ++c) {
                    color[i] = c;
                    if (assign(i + 1)) return true;
                }
                return false;
            };
            if (assign(0)) return k;
        }
    };
    SplitMix64 rng(5);
    for (int round = 0; round < 20; ++round) {
        int n = 3 + static_cast<int>(rng.below(8)); // up to 10 atoms
        std::vector<std::string> names;
        for (int i = 0; i < n; ++i) names.push_back("a" + std::to_string(i));
        FiniteBooleanAlgebra b("R", names);
        // shuffled round-robin deal keeps blocks small enough for the
        // brute-force search to stay feasible
        int groups = (n + 3) / 4 + static_cast<int>(rng.below(n / 2 + 1));
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        for (size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        std::map<int, AtomBits> blocks;
        for (int i = 0; i < n; ++i) {
            auto [it, fresh] = blocks.try_emplace(i % groups, AtomBits(n));
            it->second.set(order[i]);
        }
        std::vector<AtomBits> block_list;
        for (auto& [g, blk] : blocks) block_list.push_back(blk);
        SubalgebraPartition part = partition_from_blocks(n, block_list);
        MuLargeResult r = mu_large(b, part, n);
        REQUIRE(r.certificate);
        CHECK(r.certificate->generated_check);
        CHECK(r.minimal_size == brute_minimum(b, part));
    }
}

TEST_CASE("group closure enumerates the generated group") {
    auto b = p4();
    BaAutomorphism cyc = ba_from_maplets(
        b, {{"aa", "ab"}, {"ab", "ba"}, {"ba", "bb"}, {"bb", "aa"}});
    CHECK(group_closure({cyc}).size() == 4);
    BaAutomorphism swap = ba_from_maplets(b, {{"aa", "ab"}, {"ab", "aa"}});
    CHECK(group_closure({cyc, swap}).size() == 24);
    CHECK_THROWS_AS(group_closure({cyc, swap}, 10), std::invalid_argument);
}
