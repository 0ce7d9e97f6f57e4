#pragma once

// Finite normal trees with explicit levels and designated limit levels.
//
// A LevelledTree is a levelled forest-shaped structure that is *expected* to
// be a normal tree but may be structurally degenerate (two roots, missing
// splits, ...): validate_normal reports violations instead of refusing to
// construct, so that damaged inputs can be diagnosed.  Node identity is the
// id string; ids are unique and all set-valued outputs are sorted by id, which
// anchors determinism everywhere else in the library.
//
// Limit levels are ordinary levels carrying a marker.  Limit-specific
// semantics (branch-determined nodes, density of chosen extensions) live in
// the branchspace and simulator modules, not here.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace treelab {

struct NodeSpec {
    std::string id;
    int level = 0;
    std::string parent; // empty = no parent
};

struct TreeNode {
    std::string id;
    int level = 0;
    int parent = -1; // node index, -1 = none
};

class LevelledTree {
public:
    // Throws std::invalid_argument on duplicate ids or dangling parent
    // references (the parser-level invariants).  Structural defects such as
    // several roots or parents on the wrong level are representable and left
    // to validate_normal.
    LevelledTree(std::string name, std::set<int> limit_levels,
                 const std::vector<NodeSpec>& specs);

    const std::string& name() const { return name_; }
    int height() const { return height_; } // levels run 0..height-1
    int size() const { return static_cast<int>(nodes_.size()); }
    const std::set<int>& limit_levels() const { return limit_levels_; }
    bool is_limit_level(int level) const { return limit_levels_.count(level) > 0; }

    const TreeNode& node(int i) const { return nodes_[i]; }
    const std::vector<int>& level_nodes(int level) const { return levels_[level]; }
    const std::vector<int>& children(int i) const { return children_[i]; }
    int parent(int i) const { return nodes_[i].parent; }

    bool has_node(const std::string& id) const { return index_.count(id) > 0; }
    int index_of(const std::string& id) const; // throws on unknown id
    const std::string& id_of(int i) const { return nodes_[i].id; }

    // Unique ancestor of i at the given level (level <= level(i); i itself
    // when equal).
    int ancestor_at(int i, int level) const;
    // Chain of node indices from the root of i's component down to i.
    std::vector<int> chain(int i) const;
    bool is_ancestor(int a, int d) const; // a <= d in tree order

    // Nodes without children, sorted by id. Equals the top level exactly when
    // the tree is strictly normal.
    std::vector<int> frontier() const;

    // Canonical shape signature of the cone above i; equal signatures mean
    // isomorphic cones.
    const std::string& signature(int i) const;

private:
    std::string name_;
    int height_ = 0;
    std::set<int> limit_levels_;
    std::vector<TreeNode> nodes_; // sorted by (level, id)
    std::vector<std::vector<int>> levels_;
    std::vector<std::vector<int>> children_;
    std::map<std::string, int> index_;
    mutable std::vector<std::string> signatures_; // lazily filled
};

using TreePtr = std::shared_ptr<const LevelledTree>;

struct TreeViolation {
    std::string clause; // "root.unique" | "root.level" | "parent.level" | "split" | "limits.unique"
    std::string node;   // offending node id, empty when global
    std::string detail;
};

struct ValidationReport {
    std::vector<TreeViolation> violations;
    bool ok() const { return violations.empty(); }
};

// Checks the normal-tree clauses; never throws. With strict=false the
// splitting clause is skipped (simulator intermediate stages legitimately
// hold frontier nodes awaiting extension, and limit transitions hold
// single-child branches).
ValidationReport validate_normal(const LevelledTree& tree, bool strict);

// Restriction to a level set C (0 must be in C). New parents are the nearest
// retained ancestors; level indices are renumbered consecutively. A retained
// level keeps its limit marker only when the level immediately below it was
// retained too; otherwise it becomes an ordinary (successor) level.
LevelledTree restrict_levels(const LevelledTree& tree, const std::set<int>& levels);

// Cone above t with t as new root; levels renumbered from 0.
LevelledTree relativize(const LevelledTree& tree, const std::string& id);

// Level-wise product: nodes at level g are pairs of level-g nodes, parents
// componentwise. Pair ids are "<s>*<t>". Heights must agree.
LevelledTree tree_product(const LevelledTree& s, const LevelledTree& t);

// Fresh root below the two roots; heights must agree. Ids are tagged "0."
// and "1." to keep the union disjoint; the new root is "+".
LevelledTree tree_sum(const LevelledTree& s, const LevelledTree& t);

struct TreeAutomorphism {
    std::vector<int> perm; // node index -> node index, level-preserving

    int operator()(int i) const { return perm[i]; }
    bool is_identity() const;
};

TreeAutomorphism compose(const TreeAutomorphism& f, const TreeAutomorphism& g); // f after g
TreeAutomorphism inverse_of(const TreeAutomorphism& f);

// True when perm is a level-preserving order-automorphism of the tree.
bool is_tree_automorphism(const LevelledTree& tree, const std::vector<int>& perm);

struct AutomorphismList {
    std::vector<TreeAutomorphism> autos; // lexicographic by image sequence; identity first
    bool truncated = false;
};

AutomorphismList enumerate_automorphisms(const LevelledTree& tree, size_t limit);

// Shape-signature comparison: equality is isomorphism for rooted trees.
bool trees_isomorphic(const LevelledTree& s, const LevelledTree& t);

} // namespace treelab
