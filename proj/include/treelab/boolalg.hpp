#pragma once

// Finite complete Boolean algebras as powerset-of-atoms.
//
// Elements are atom bitsets; complete subalgebras are represented exclusively
// by partitions of the atom set (finite completeness makes this lossless), so
// subalgebra arithmetic is partition arithmetic.  ro_algebra realizes the
// regular open algebra of a finite tree exactly: regular opens correspond to
// sets of maximal (frontier) nodes, and a node embeds as its set of frontier
// descendants.

#include "treelab/tree.hpp"

#include <boost/dynamic_bitset.hpp>

#include <map>
#include <string>
#include <vector>

namespace treelab {

using AtomBits = boost::dynamic_bitset<uint64_t>;

class FiniteBooleanAlgebra {
public:
    FiniteBooleanAlgebra(std::string name, std::vector<std::string> atoms);

    const std::string& name() const { return name_; }
    int atom_count() const { return static_cast<int>(atoms_.size()); }
    const std::vector<std::string>& atoms() const { return atoms_; }
    const std::string& atom(int i) const { return atoms_[i]; }
    int atom_index(const std::string& id) const; // throws on unknown atom
    bool has_atom(const std::string& id) const { return index_.count(id) > 0; }

    AtomBits zero() const { return AtomBits(atoms_.size()); }
    AtomBits one() const { return ~zero(); }
    AtomBits singleton(int i) const;
    AtomBits element(const std::vector<std::string>& atom_ids) const;
    std::vector<std::string> atom_names(const AtomBits& e) const;

    // Tree embedding (present on ro_algebra outputs): node id -> element.
    bool has_embedding() const { return !embedding_.empty(); }
    const AtomBits& embed(const std::string& node_id) const;
    const std::map<std::string, AtomBits>& embedding() const { return embedding_; }
    void set_embedding(std::map<std::string, AtomBits> emb) { embedding_ = std::move(emb); }

private:
    std::string name_;
    std::vector<std::string> atoms_; // sorted, unique
    std::map<std::string, int> index_;
    std::map<std::string, AtomBits> embedding_;
};

// Partition of the atoms; blocks are sorted by least atom index.  Stands for
// the complete subalgebra whose elements are the unions of blocks.
struct SubalgebraPartition {
    std::vector<AtomBits> blocks;
    std::vector<int> block_of; // atom index -> block index

    int block_count() const { return static_cast<int>(blocks.size()); }
    bool is_element(const AtomBits& e) const; // union of blocks?
    bool operator==(const SubalgebraPartition& other) const { return blocks == other.blocks; }
};

SubalgebraPartition partition_from_blocks(int atom_count, std::vector<AtomBits> blocks);
SubalgebraPartition identity_partition(int atom_count);
SubalgebraPartition trivial_partition(int atom_count); // one block

// True when every block of fine is contained in a block of coarse.
bool refines(const SubalgebraPartition& fine, const SubalgebraPartition& coarse);

// Regular open algebra of a finite tree: atoms are the frontier nodes and
// every node embeds as its frontier cone.
FiniteBooleanAlgebra ro_algebra(const LevelledTree& tree);

// Atoms of the complete subalgebra generated by the given elements: two atoms
// share a block iff no generator separates them.
SubalgebraPartition complete_subalgebra(const FiniteBooleanAlgebra& algebra,
                                        const std::vector<AtomBits>& generators);

// Canonical upper projection h(b): least element of the subalgebra above b,
// i.e. the union of all blocks meeting b.
AtomBits upper_projection(const SubalgebraPartition& sub, const AtomBits& b);

// The literal reading of the sum formula "h(b) = sum of a in A with ab = a":
// union of the blocks contained in b.  Kept alongside upper_projection; the
// two differ exactly on elements that cut across a block.
AtomBits lower_projection(const SubalgebraPartition& sub, const AtomBits& b);

// Relative algebra B|b: atoms of B under b (atom names preserved). b != 0.
FiniteBooleanAlgebra relative_algebra(const FiniteBooleanAlgebra& algebra, const AtomBits& b);

// Induced partition bA on B|b: nonzero traces of blocks on b, re-indexed to
// the relative algebra's atoms.
SubalgebraPartition trace_partition(const FiniteBooleanAlgebra& algebra,
                                    const SubalgebraPartition& sub, const AtomBits& b,
                                    const FiniteBooleanAlgebra& relative);

// Product algebra: atoms are the tagged disjoint union "<k>.<atom>".
FiniteBooleanAlgebra product_algebra(const std::vector<const FiniteBooleanAlgebra*>& factors,
                                     const std::string& name);

// Injection of a factor element into the product (all other coordinates 0).
AtomBits inject(const FiniteBooleanAlgebra& product, int factor_index,
                const FiniteBooleanAlgebra& factor, const AtomBits& e);

// Diagonal subalgebra {(b,b)} of a two-factor product of one algebra with
// itself: blocks pair atom i of factor 0 with atom i of factor 1.
SubalgebraPartition diagonal_subalgebra(const FiniteBooleanAlgebra& product,
                                        const FiniteBooleanAlgebra& factor);

} // namespace treelab
