#include "treelab/largeness.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>
#include <stdexcept>

namespace treelab {

AtomBits BaAutomorphism::apply(const AtomBits& e) const {
    AtomBits out(e.size());
    for (auto i = e.find_first(); i != AtomBits::npos; i = e.find_next(i)) out.set(perm[i]);
    return out;
}

bool BaAutomorphism::is_identity() const {
    for (size_t i = 0; i < perm.size(); ++i)
        if (perm[i] != static_cast<int>(i)) return false;
    return true;
}

BaAutomorphism ba_identity(int atom_count) {
    BaAutomorphism f;
    f.perm.resize(atom_count);
    std::iota(f.perm.begin(), f.perm.end(), 0);
    return f;
}

BaAutomorphism ba_compose(const BaAutomorphism& f, const BaAutomorphism& g) {
    BaAutomorphism h;
    h.perm.resize(g.perm.size());
    for (size_t i = 0; i < g.perm.size(); ++i) h.perm[i] = f.perm[g.perm[i]];
    return h;
}

BaAutomorphism ba_inverse(const BaAutomorphism& f) {
    BaAutomorphism h;
    h.perm.assign(f.perm.size(), -1);
    for (size_t i = 0; i < f.perm.size(); ++i) h.perm[f.perm[i]] = static_cast<int>(i);
    return h;
}

BaAutomorphism ba_from_maplets(const FiniteBooleanAlgebra& algebra,
                               const std::vector<std::pair<std::string, std::string>>& maplets) {
    BaAutomorphism f = ba_identity(algebra.atom_count());
    std::vector<bool> source(algebra.atom_count(), false);
    for (const auto& [from, to] : maplets) {
        int i = algebra.atom_index(from);
        if (source[i]) throw std::invalid_argument("atom " + from + " mapped twice");
        source[i] = true;
        f.perm[i] = algebra.atom_index(to);
    }
    std::vector<bool> hit(algebra.atom_count(), false);
    for (int i = 0; i < algebra.atom_count(); ++i) {
        if (hit[f.perm[i]]) throw std::invalid_argument("atom map is not a bijection");
        hit[f.perm[i]] = true;
    }
    return f;
}

bool in_local_equality_set(const SubalgebraPartition& sub, const AtomBits& x) {
    for (const auto& blk : sub.blocks)
        if ((blk & x).count() > 1) return false;
    return true;
}

LocalEqualityReport local_equality_set(const FiniteBooleanAlgebra& algebra,
                                       const SubalgebraPartition& sub,
                                       int max_exhaustive_atoms) {
    LocalEqualityReport rep;
    int n = algebra.atom_count();

    // Y: maximal members of X are the full transversals (any element missing
    // a block extends by an atom of that block)
    size_t count = 1;
    for (const auto& blk : sub.blocks) {
        count *= blk.count();
        if (count > 1000000) throw std::invalid_argument("too many maximal elements to enumerate");
    }
    std::vector<std::vector<int>> block_atoms;
    for (const auto& blk : sub.blocks) {
        std::vector<int> atoms;
        for (auto i = blk.find_first(); i != AtomBits::npos; i = blk.find_next(i))
            atoms.push_back(static_cast<int>(i));
        block_atoms.push_back(std::move(atoms));
    }
    std::vector<int> pick(block_atoms.size(), 0);
    while (true) {
        AtomBits y(n);
        for (size_t b = 0; b < pick.size(); ++b) y.set(block_atoms[b][pick[b]]);
        rep.maximal.push_back(y);
        size_t b = 0;
        while (b < pick.size() && pick[b] + 1 == static_cast<int>(block_atoms[b].size())) {
            pick[b] = 0;
            ++b;
        }
        if (b == pick.size()) break;
        ++pick[b];
    }
    std::sort(rep.maximal.begin(), rep.maximal.end(),
              [](const AtomBits& a, const AtomBits& b) { return a < b; });

    rep.blocks_all_nontrivial = true;
    for (const auto& blk : sub.blocks)
        if (blk.count() < 2) rep.blocks_all_nontrivial = false;

    if (n <= max_exhaustive_atoms) {
        rep.checks_run = true;
        // walk all elements once: downward closure, density, cover by Y
        std::vector<AtomBits> members_of_x;
        for (uint64_t bits = 0; bits < (uint64_t(1) << n); ++bits) {
            AtomBits x(n, bits);
            if (!in_local_equality_set(sub, x)) continue;
            members_of_x.push_back(x);
            // downward closed: drop any one atom, stay in X
            for (auto i = x.find_first(); i != AtomBits::npos; i = x.find_next(i)) {
                AtomBits smaller = x;
                smaller.reset(i);
                if (!in_local_equality_set(sub, smaller)) rep.x_downward_closed = false;
            }
            bool below_some = false;
            for (const auto& y : rep.maximal)
                if (x.is_subset_of(y)) below_some = true;
            if (!below_some) rep.maximal_cover = false;
        }
        for (uint64_t bits = 1; bits < (uint64_t(1) << n); ++bits) {
            AtomBits b(n, bits);
            bool bounded = false;
            for (const auto& x : members_of_x) {
                if (x.any() && x.is_subset_of(b)) {
                    bounded = true;
                    break;
                }
            }
            if (!bounded) rep.x_dense = false;
        }
        if (rep.blocks_all_nontrivial) {
            // e) h''Y is a maximal antichain of A; every member of Y meets
            // every block, hence projects to 1
            std::set<AtomBits> h_y;
            for (const auto& y : rep.maximal) h_y.insert(upper_projection(sub, y));
            AtomBits one(n);
            one.set();
            rep.h_image_maximal_antichain = h_y.size() == 1 && *h_y.begin() == one;
            // g) maximal antichains inside Y: pairwise disjoint subsets
            // covering everything; compare their h-image with h''Y
            std::function<void(size_t, AtomBits, std::set<AtomBits>&)> extend =
                [&](size_t from, AtomBits used, std::set<AtomBits>& h_m) {
                    if (used == one) {
                        if (h_m != h_y) rep.h_images_agree = false;
                        return;
                    }
                    for (size_t k = from; k < rep.maximal.size(); ++k) {
                        if ((rep.maximal[k] & used).any()) continue;
                        std::set<AtomBits> next = h_m;
                        next.insert(upper_projection(sub, rep.maximal[k]));
                        extend(k + 1, used | rep.maximal[k], next);
                    }
                };
            std::set<AtomBits> empty;
            extend(0, AtomBits(n), empty);
        }
    }
    return rep;
}

namespace {

// layered transversals: the i-th atoms of every block that is large enough;
// these are subsets of X whose union misses exactly the blocks' first atoms,
// i.e. the complement of the union is again in X
std::vector<AtomBits> layered_witness(const SubalgebraPartition& sub, int atom_count) {
    size_t max_block = 0;
    for (const auto& blk : sub.blocks) max_block = std::max(max_block, blk.count());
    std::vector<AtomBits> layers;
    for (size_t layer = 1; layer < max_block; ++layer) {
        AtomBits m(atom_count);
        for (const auto& blk : sub.blocks) {
            size_t k = 0;
            for (auto i = blk.find_first(); i != AtomBits::npos; i = blk.find_next(i), ++k)
                if (k == layer) m.set(i);
        }
        layers.push_back(m);
    }
    return layers;
}

bool generates_everything(const FiniteBooleanAlgebra& algebra, const SubalgebraPartition& sub,
                          const std::vector<AtomBits>& extra) {
    std::vector<AtomBits> gens = sub.blocks;
    gens.insert(gens.end(), extra.begin(), extra.end());
    return complete_subalgebra(algebra, gens).block_count() == algebra.atom_count();
}

// does some antichain of size <= k generate together with the subalgebra?
// equivalently: a coloring of the atoms with colors {none, 1..k} giving
// distinct colors inside every block; backtracking over blocks
bool exhaustive_witness_exists(const SubalgebraPartition& sub, int k) {
    std::function<bool(size_t)> block_ok = [&](size_t b) {
        if (b == sub.blocks.size()) return true;
        if (static_cast<int>(sub.blocks[b].count()) > k + 1) return false;
        return block_ok(b + 1);
    };
    return block_ok(0);
}

} // namespace

MuLargeResult mu_large(const FiniteBooleanAlgebra& algebra, const SubalgebraPartition& sub,
                       int m) {
    MuLargeResult out;
    out.exhausted_bound = m;
    std::vector<AtomBits> layers = layered_witness(sub, algebra.atom_count());
    out.minimal_size = static_cast<int>(layers.size());
    if (out.minimal_size <= m) {
        LargenessCertificate cert;
        cert.witness = std::move(layers);
        cert.generated_check = generates_everything(algebra, sub, cert.witness);
        out.certificate = std::move(cert);
    } else if (algebra.atom_count() <= 12) {
        out.exhaustive_confirmed = true;
        for (int k = 0; k <= m; ++k)
            if (exhaustive_witness_exists(sub, k)) out.exhaustive_confirmed = false;
    }
    return out;
}

FrolikPartition frolik_partition(const FiniteBooleanAlgebra& algebra, const BaAutomorphism& f) {
    int n = algebra.atom_count();
    FrolikPartition out{AtomBits(n), AtomBits(n), AtomBits(n), AtomBits(n)};
    std::vector<bool> seen(n, false);
    for (int start = 0; start < n; ++start) {
        if (seen[start]) continue;
        if (f.perm[start] == start) {
            seen[start] = true;
            out.a0.set(start);
            continue;
        }
        // walk the cycle from its least atom, alternating pieces 1 and 2;
        // odd cycles park their last atom in piece 3
        std::vector<int> cycle;
        for (int cur = start; !seen[cur]; cur = f.perm[cur]) {
            seen[cur] = true;
            cycle.push_back(cur);
        }
        for (size_t k = 0; k < cycle.size(); ++k) {
            if (cycle.size() % 2 == 1 && k + 1 == cycle.size())
                out.a3.set(cycle[k]);
            else if (k % 2 == 0)
                out.a1.set(cycle[k]);
            else
                out.a2.set(cycle[k]);
        }
    }
    return out;
}

std::vector<BaAutomorphism> group_closure(const std::vector<BaAutomorphism>& generators,
                                          size_t limit) {
    if (generators.empty()) return {};
    size_t n = generators.front().perm.size();
    std::set<std::vector<int>> seen;
    std::vector<BaAutomorphism> out;
    std::vector<BaAutomorphism> queue{ba_identity(static_cast<int>(n))};
    seen.insert(queue.front().perm);
    while (!queue.empty()) {
        BaAutomorphism cur = std::move(queue.back());
        queue.pop_back();
        out.push_back(cur);
        for (const auto& g : generators) {
            BaAutomorphism next = ba_compose(g, cur);
            if (seen.insert(next.perm).second) {
                if (seen.size() > limit) throw std::invalid_argument("group closure too large");
                queue.push_back(std::move(next));
            }
        }
    }
    return out;
}

FixedPointResult fixed_point_subalgebra(const FiniteBooleanAlgebra& algebra,
                                        const std::vector<BaAutomorphism>& generators,
                                        bool with_group_closure) {
    int n = algebra.atom_count();
    // orbit partition via union-find on generator edges
    std::vector<int> uf(n);
    std::iota(uf.begin(), uf.end(), 0);
    std::function<int(int)> find = [&](int i) { return uf[i] == i ? i : uf[i] = find(uf[i]); };
    for (const auto& g : generators) {
        if (g.perm.size() != static_cast<size_t>(n))
            throw std::invalid_argument("automorphism size mismatch");
        for (int i = 0; i < n; ++i) uf[find(i)] = find(g.perm[i]);
    }
    std::map<int, AtomBits> orbit;
    for (int i = 0; i < n; ++i) {
        auto [it, fresh] = orbit.try_emplace(find(i), AtomBits(n));
        it->second.set(i);
    }
    std::vector<AtomBits> blocks;
    for (auto& [root, b] : orbit) blocks.push_back(b);

    FixedPointResult out{partition_from_blocks(n, std::move(blocks)), {}, 0, false};
    MuLargeResult large = mu_large(algebra, out.fixed, n);
    if (large.certificate) out.certificate = *large.certificate;

    if (with_group_closure) out.group_size = group_closure(generators).size();

    // replay of the theorem's witness: the Frolik pieces of the group
    // elements (for a single automorphism these are exactly its powers)
    // generate a partition M with <fixed u M> = B. Any two atoms of one
    // orbit are separated by a piece of the element mapping one to the
    // other, so the group is walked lazily and the walk stops as soon as
    // the piece partition is discrete.
    std::set<AtomBits> pieces;
    std::set<std::vector<int>> seen{ba_identity(n).perm};
    std::vector<BaAutomorphism> queue{ba_identity(n)};
    SubalgebraPartition piece_partition = trivial_partition(n);
    while (!queue.empty() && piece_partition.block_count() < n) {
        BaAutomorphism cur = std::move(queue.back());
        queue.pop_back();
        if (!cur.is_identity()) {
            FrolikPartition fp = frolik_partition(algebra, cur);
            std::vector<AtomBits> refined = piece_partition.blocks;
            for (const AtomBits* p : {&fp.a0, &fp.a1, &fp.a2, &fp.a3}) {
                if (!p->any()) continue;
                pieces.insert(*p);
                refined.push_back(*p);
            }
            piece_partition = complete_subalgebra(algebra, refined);
        }
        for (const auto& g : generators) {
            BaAutomorphism next = ba_compose(g, cur);
            if (seen.insert(next.perm).second) queue.push_back(std::move(next));
        }
    }
    // close the collection under generator images (harmless once discrete)
    std::vector<AtomBits> frontier(pieces.begin(), pieces.end());
    while (!frontier.empty()) {
        AtomBits cur = frontier.back();
        frontier.pop_back();
        for (const auto& g : generators) {
            AtomBits img = g.apply(cur);
            if (pieces.insert(img).second) frontier.push_back(img);
        }
    }
    std::vector<AtomBits> piece_list(pieces.begin(), pieces.end());
    SubalgebraPartition witness_partition = complete_subalgebra(algebra, piece_list);
    std::vector<AtomBits> witness = witness_partition.blocks;
    out.replay_generates = generates_everything(algebra, out.fixed, witness);
    return out;
}

DecompositionResult large_decomposition(const FiniteBooleanAlgebra& algebra,
                                        const SubalgebraPartition& sub) {
    DecompositionResult out;
    int n = algebra.atom_count();
    size_t k = sub.blocks.front().count();
    for (const auto& blk : sub.blocks) {
        if (blk.count() != k) {
            out.refusal = "no transversal partition of unity: blocks of sizes " +
                          std::to_string(k) + " and " + std::to_string(blk.count());
            return out;
        }
    }
    out.ok = true;
    // the optimal witnesses: i-th atoms of the blocks, i < k
    for (size_t layer = 0; layer < k; ++layer) {
        AtomBits m(n);
        for (const auto& blk : sub.blocks) {
            size_t j = 0;
            for (auto i = blk.find_first(); i != AtomBits::npos; i = blk.find_next(i), ++j)
                if (j == layer) m.set(i);
        }
        out.witness_antichain.push_back(m);
    }
    AtomBits one(n);
    one.set();
    out.fibers.emplace_back(one, static_cast<int>(k));

    // B = A^k: the subalgebra as an algebra has the blocks as atoms, named by
    // their least atom
    std::vector<std::string> sub_atoms;
    for (const auto& blk : sub.blocks) sub_atoms.push_back(algebra.atom(blk.find_first()));
    FiniteBooleanAlgebra sub_algebra(algebra.name() + ".A", sub_atoms);
    std::vector<const FiniteBooleanAlgebra*> factors(k, &sub_algebra);
    out.target = product_algebra(factors, algebra.name() + ".A^" + std::to_string(k));

    for (const auto& blk : sub.blocks) {
        std::string rep = algebra.atom(blk.find_first());
        size_t j = 0;
        for (auto i = blk.find_first(); i != AtomBits::npos; i = blk.find_next(i), ++j)
            out.atom_map[algebra.atom(i)] = std::to_string(j) + "." + rep;
    }

    // elementwise verification for small algebras: the atom bijection must
    // respect complement and meet across all element pairs (tabulated over
    // plain machine words so the 2^n x 2^n sweep stays cheap)
    if (n <= 12) {
        std::vector<uint64_t> atom_image(n);
        for (int i = 0; i < n; ++i)
            atom_image[i] = uint64_t(1)
                            << out.target->atom_index(out.atom_map.at(algebra.atom(i)));
        uint64_t count = uint64_t(1) << n;
        uint64_t mask = count - 1;
        std::vector<uint64_t> image(count, 0);
        for (uint64_t x = 0; x < count; ++x) {
            uint64_t img = 0;
            for (int i = 0; i < n; ++i)
                if (x >> i & 1) img |= atom_image[i];
            image[x] = img;
        }
        out.iso_verified = true;
        std::vector<bool> hit(count, false);
        for (uint64_t x = 0; x < count && out.iso_verified; ++x) {
            if (hit[image[x]]) out.iso_verified = false; // not injective
            hit[image[x]] = true;
            if (image[(~x) & mask] != ((~image[x]) & mask)) out.iso_verified = false;
            for (uint64_t y = 0; y < count; ++y) {
                if (image[x & y] != (image[x] & image[y])) {
                    out.iso_verified = false;
                    break;
                }
            }
        }
    }
    return out;
}

NicePartSplit nice_part_split(const Ter& rel) {
    const LevelledTree& tree = rel.tree();
    RepresentedSubalgebra repr = represented_subalgebra(rel);
    int n = repr.algebra.atom_count();
    NicePartSplit out{AtomBits(n), AtomBits(n), {}, true, AtomBits(n), AtomBits(n), {}, true};

    for (int i = 0; i < tree.size(); ++i) {
        const std::string& id = tree.id_of(i);
        Ter cone = relativize_ter(rel, id);
        TerReport check = validate_ter(cone);
        bool nice = check.valid() && check.disputes.empty();
        out.node_nice[id] = nice;
        if (nice) out.b_nice |= repr.algebra.embed(id);
        bool loc = in_local_equality_set(repr.partition, repr.algebra.embed(id));
        out.node_locally_equal[id] = loc;
        if (loc) out.b_locally_equal |= repr.algebra.embed(id);
    }
    out.b_rest = ~out.b_nice;
    out.b_locally_rest = ~out.b_locally_equal;

    // both verdicts must persist upward along the tree order
    for (int i = 0; i < tree.size(); ++i) {
        for (int c : tree.children(i)) {
            if (out.node_nice.at(tree.id_of(i)) && !out.node_nice.at(tree.id_of(c)))
                out.nice_up_closed = false;
            if (out.node_locally_equal.at(tree.id_of(i)) &&
                !out.node_locally_equal.at(tree.id_of(c)))
                out.locally_equal_up_closed = false;
        }
    }
    return out;
}

} // namespace treelab
