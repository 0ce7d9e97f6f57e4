#include "treelab/boolalg.hpp"

#include <algorithm>
#include <stdexcept>

namespace treelab {

FiniteBooleanAlgebra::FiniteBooleanAlgebra(std::string name, std::vector<std::string> atoms)
    : name_(std::move(name)), atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw std::invalid_argument("algebra needs at least one atom");
    std::sort(atoms_.begin(), atoms_.end());
    for (size_t i = 0; i < atoms_.size(); ++i) {
        if (!index_.emplace(atoms_[i], static_cast<int>(i)).second)
            throw std::invalid_argument("duplicate atom " + atoms_[i]);
    }
}

int FiniteBooleanAlgebra::atom_index(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw std::invalid_argument("unknown atom " + id);
    return it->second;
}

AtomBits FiniteBooleanAlgebra::singleton(int i) const {
    AtomBits e(atoms_.size());
    e.set(i);
    return e;
}

AtomBits FiniteBooleanAlgebra::element(const std::vector<std::string>& atom_ids) const {
    AtomBits e(atoms_.size());
    for (const auto& a : atom_ids) e.set(atom_index(a));
    return e;
}

std::vector<std::string> FiniteBooleanAlgebra::atom_names(const AtomBits& e) const {
    std::vector<std::string> out;
    for (auto i = e.find_first(); i != AtomBits::npos; i = e.find_next(i))
        out.push_back(atoms_[i]);
    return out;
}

const AtomBits& FiniteBooleanAlgebra::embed(const std::string& node_id) const {
    auto it = embedding_.find(node_id);
    if (it == embedding_.end()) throw std::invalid_argument("no embedding for node " + node_id);
    return it->second;
}

bool SubalgebraPartition::is_element(const AtomBits& e) const {
    for (const auto& b : blocks) {
        AtomBits meet = e & b;
        if (meet.any() && meet != b) return false;
    }
    return true;
}

SubalgebraPartition partition_from_blocks(int atom_count, std::vector<AtomBits> blocks) {
    SubalgebraPartition p;
    std::sort(blocks.begin(), blocks.end(),
              [](const AtomBits& a, const AtomBits& b) { return a.find_first() < b.find_first(); });
    p.blocks = std::move(blocks);
    p.block_of.assign(atom_count, -1);
    for (size_t k = 0; k < p.blocks.size(); ++k) {
        const auto& blk = p.blocks[k];
        if (blk.none()) throw std::invalid_argument("empty partition block");
        if (static_cast<int>(blk.size()) != atom_count)
            throw std::invalid_argument("block width does not match atom count");
        for (auto i = blk.find_first(); i != AtomBits::npos; i = blk.find_next(i)) {
            if (p.block_of[i] != -1) throw std::invalid_argument("overlapping partition blocks");
            p.block_of[i] = static_cast<int>(k);
        }
    }
    for (int i = 0; i < atom_count; ++i)
        if (p.block_of[i] == -1) throw std::invalid_argument("partition does not cover all atoms");
    return p;
}

SubalgebraPartition identity_partition(int atom_count) {
    std::vector<AtomBits> blocks;
    for (int i = 0; i < atom_count; ++i) {
        AtomBits b(atom_count);
        b.set(i);
        blocks.push_back(b);
    }
    return partition_from_blocks(atom_count, std::move(blocks));
}

SubalgebraPartition trivial_partition(int atom_count) {
    AtomBits b(atom_count);
    b.set();
    return partition_from_blocks(atom_count, {b});
}

bool refines(const SubalgebraPartition& fine, const SubalgebraPartition& coarse) {
    if (fine.block_of.size() != coarse.block_of.size()) return false;
    for (const auto& blk : fine.blocks) {
        auto first = blk.find_first();
        if (!blk.is_subset_of(coarse.blocks[coarse.block_of[first]])) return false;
    }
    return true;
}

FiniteBooleanAlgebra ro_algebra(const LevelledTree& tree) {
    std::vector<int> frontier = tree.frontier();
    std::vector<std::string> atoms;
    atoms.reserve(frontier.size());
    for (int i : frontier) atoms.push_back(tree.id_of(i));
    FiniteBooleanAlgebra algebra(tree.name(), std::move(atoms));

    // frontier cones bottom-up: a node's cone is the union of its children's,
    // a frontier node is its own atom
    std::vector<AtomBits> cone(tree.size(), algebra.zero());
    for (int i : frontier) cone[i].set(algebra.atom_index(tree.id_of(i)));
    for (int i = tree.size() - 1; i >= 0; --i) {
        for (int c : tree.children(i)) cone[i] |= cone[c];
    }
    std::map<std::string, AtomBits> emb;
    for (int i = 0; i < tree.size(); ++i) emb.emplace(tree.id_of(i), cone[i]);
    algebra.set_embedding(std::move(emb));
    return algebra;
}

SubalgebraPartition complete_subalgebra(const FiniteBooleanAlgebra& algebra,
                                        const std::vector<AtomBits>& generators) {
    int n = algebra.atom_count();
    // refine the trivial partition one generator at a time: two atoms stay
    // together exactly when no generator separates them
    std::vector<int> group(n, 0);
    int group_count = 1;
    for (const auto& g : generators) {
        std::map<std::pair<int, bool>, int> remap;
        std::vector<int> next(n);
        for (int i = 0; i < n; ++i) {
            auto key = std::make_pair(group[i], g.test(i));
            auto it = remap.find(key);
            if (it == remap.end()) it = remap.emplace(key, static_cast<int>(remap.size())).first;
            next[i] = it->second;
        }
        if (static_cast<int>(remap.size()) > group_count) {
            group = std::move(next);
            group_count = static_cast<int>(remap.size());
        }
        if (group_count == n) break;
    }
    std::vector<AtomBits> blocks(group_count, AtomBits(n));
    for (int i = 0; i < n; ++i) blocks[group[i]].set(i);
    return partition_from_blocks(n, std::move(blocks));
}

AtomBits upper_projection(const SubalgebraPartition& sub, const AtomBits& b) {
    AtomBits out(b.size());
    for (const auto& blk : sub.blocks)
        if ((blk & b).any()) out |= blk;
    return out;
}

AtomBits lower_projection(const SubalgebraPartition& sub, const AtomBits& b) {
    AtomBits out(b.size());
    for (const auto& blk : sub.blocks)
        if (blk.is_subset_of(b)) out |= blk;
    return out;
}

FiniteBooleanAlgebra relative_algebra(const FiniteBooleanAlgebra& algebra, const AtomBits& b) {
    if (b.none()) throw std::invalid_argument("relative algebra of zero");
    std::vector<std::string> atoms;
    for (auto i = b.find_first(); i != AtomBits::npos; i = b.find_next(i))
        atoms.push_back(algebra.atom(i));
    return FiniteBooleanAlgebra(algebra.name() + "|b", std::move(atoms));
}

SubalgebraPartition trace_partition(const FiniteBooleanAlgebra& algebra,
                                    const SubalgebraPartition& sub, const AtomBits& b,
                                    const FiniteBooleanAlgebra& relative) {
    std::vector<AtomBits> blocks;
    for (const auto& blk : sub.blocks) {
        AtomBits meet = blk & b;
        if (meet.none()) continue;
        AtomBits tr(relative.atom_count());
        for (auto i = meet.find_first(); i != AtomBits::npos; i = meet.find_next(i))
            tr.set(relative.atom_index(algebra.atom(i)));
        blocks.push_back(tr);
    }
    return partition_from_blocks(relative.atom_count(), std::move(blocks));
}

FiniteBooleanAlgebra product_algebra(const std::vector<const FiniteBooleanAlgebra*>& factors,
                                     const std::string& name) {
    if (factors.empty()) throw std::invalid_argument("product of no factors");
    std::vector<std::string> atoms;
    for (size_t k = 0; k < factors.size(); ++k)
        for (const auto& a : factors[k]->atoms())
            atoms.push_back(std::to_string(k) + "." + a);
    return FiniteBooleanAlgebra(name, std::move(atoms));
}

AtomBits inject(const FiniteBooleanAlgebra& product, int factor_index,
                const FiniteBooleanAlgebra& factor, const AtomBits& e) {
    AtomBits out(product.atom_count());
    for (auto i = e.find_first(); i != AtomBits::npos; i = e.find_next(i))
        out.set(product.atom_index(std::to_string(factor_index) + "." + factor.atom(i)));
    return out;
}

SubalgebraPartition diagonal_subalgebra(const FiniteBooleanAlgebra& product,
                                        const FiniteBooleanAlgebra& factor) {
    std::vector<AtomBits> blocks;
    for (int i = 0; i < factor.atom_count(); ++i) {
        AtomBits b(product.atom_count());
        b.set(product.atom_index("0." + factor.atom(i)));
        b.set(product.atom_index("1." + factor.atom(i)));
        blocks.push_back(b);
    }
    return partition_from_blocks(product.atom_count(), std::move(blocks));
}

} // namespace treelab
