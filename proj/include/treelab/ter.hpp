#pragma once

// Tree equivalence relations: level-respecting, order-compatible equivalence
// relations on a levelled tree, together with validation (disputes, honesty),
// niceness grades, quotients, represented subalgebras and the
// relation-building transformations (dense split, homogeneous 2-nice family).
//
// A dispute is a triple (s, s', t) with s ~ t, s < s', and no successor of t
// on s'-level equivalent to s'.  A relation is honest when every dispute is
// already a dispute one level above s; nice when there are no disputes at
// all; almost nice when no dispute has s on a successor (non-limit) level.

#include "treelab/boolalg.hpp"
#include "treelab/tree.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace treelab {

struct LevelClass {
    int level = 0;
    std::vector<std::string> members;
};

class Ter {
public:
    // Builds the relation from explicit classes; singleton classes may be
    // omitted.  Throws std::invalid_argument on unknown ids, level mismatches
    // or overlapping classes.
    static Ter from_classes(TreePtr tree, const std::vector<LevelClass>& classes,
                            std::string name = "ter");
    // Internal/derived relations: class ids per node index, renumbered
    // canonically (per level, classes ordered by least member).
    static Ter from_class_ids(TreePtr tree, const std::vector<int>& class_of,
                              std::string name = "ter");

    const std::string& name() const { return name_; }
    const LevelledTree& tree() const { return *tree_; }
    TreePtr tree_ptr() const { return tree_; }

    int class_of(int node) const { return class_of_[node]; }
    const std::vector<int>& class_members(int cls) const { return classes_[cls]; }
    int class_count() const { return static_cast<int>(classes_.size()); }
    const std::vector<int>& level_classes(int level) const { return level_classes_[level]; }
    bool equivalent(int a, int b) const { return class_of_[a] == class_of_[b]; }
    int class_level(int cls) const;
    // Least member's id, the canonical class label.
    const std::string& class_rep(int cls) const;

    // Classes with at least two members, as explicit level/member lists.
    std::vector<LevelClass> nontrivial_classes() const;

    bool same_partition(const Ter& other) const;

public:
    Ter() = default; // empty shell; only assignment and destruction are valid

private:
    std::string name_;
    TreePtr tree_;
    std::vector<int> class_of_;
    std::vector<std::vector<int>> classes_;
    std::vector<std::vector<int>> level_classes_;
};

struct Dispute {
    std::string s;
    std::string s_prime;
    std::string t;
    bool witnessed_at_successor = false; // the one-level-up triple is a dispute too
};

struct TerReport {
    // pairs of equivalent nodes whose parents are not equivalent
    std::vector<std::pair<std::string, std::string>> compat_violations;
    bool quotient_checked = false;
    ValidationReport quotient_normal; // clause (iii), strict
    std::vector<Dispute> disputes;
    bool honest = true;

    bool compatible() const { return compat_violations.empty(); }
    bool valid() const { return compatible() && quotient_checked && quotient_normal.ok() && honest; }
};

TerReport validate_ter(const Ter& rel);

enum class NicenessGrade { nice, almost_nice, honest_only, dishonest };

struct GradeResult {
    NicenessGrade grade = NicenessGrade::dishonest;
    bool honest = false;
    bool no_disputes = false;
    bool no_successor_disputes = false; // no dispute with s on a non-limit level
    bool m_nice = false;
    int m = 0;
};

GradeResult niceness_grade(const Ter& rel, int m);

const char* grade_name(NicenessGrade g);

struct QuotientResult {
    LevelledTree tree;                          // nodes are classes, labelled by least member
    std::map<std::string, std::string> class_of; // node id -> quotient node id
    ValidationReport normal;                    // strict normality of the quotient
};

QuotientResult quotient_tree(const Ter& rel);

struct RepresentedSubalgebra {
    FiniteBooleanAlgebra algebra; // ro_algebra of the carrier tree
    SubalgebraPartition partition;
};

RepresentedSubalgebra represented_subalgebra(const Ter& rel);

// Class sum of a node inside ro_algebra(tree): union of the members' cones.
AtomBits pi_element(const Ter& rel, const FiniteBooleanAlgebra& algebra, int node);

struct ProjectionComparison {
    std::vector<std::string> disagreements; // node ids with pi != h
    bool agree_everywhere = false;
    bool agree_on_successor_levels = false;
    // asserted equivalences against the dispute analysis
    bool matches_nice = false;
    bool matches_almost_nice = false;
};

ProjectionComparison projection_vs_h(const Ter& rel);

struct TraceDensityFailure {
    std::string s; // node on the limit level
    std::string y; // branch (node one level down) without a witness
};

struct TraceDensityVerdict {
    std::string class_rep;
    bool pass = true;
    std::vector<TraceDensityFailure> failures;
};

struct TraceDensityResult {
    std::vector<TraceDensityVerdict> verdicts; // one per class on the limit level
    bool all_pass = true;
};

// Finite honesty criterion at a designated limit level: for every node s on
// level alpha and every branch y through alpha-1 whose chain is trace
// equivalent to s's chain, some t ~ s on level alpha sits above y restricted
// to the resolution level.
TraceDensityResult class_trace_density(const Ter& rel, int limit_level, int resolution);

struct DenseSplitResult {
    Ter refined;                      // coincides with rel up to the split level
    std::map<std::string, int> color; // split-level node id -> 0/1
    QuotientResult quotient;          // quotient of the refined relation
    TreeAutomorphism swap;            // color-swap automorphism of quotient.tree
    bool swap_ok = false;             // swap verified as a tree automorphism
};

// Splits every class on the designated limit level into two parts, each part
// hitting every cone (at resolution limit_level-1) that the whole class hits;
// above the level the refinement keeps only same-colored pairs equivalent.
// Unsplittable classes raise std::invalid_argument naming the class.
DenseSplitResult dense_split(const Ter& rel, int limit_level, uint64_t seed);

// Family of cone isomorphisms phi[s][t] : T(s) -> T(t) for equivalent pairs,
// stored as node-index maps on the cone of s.
struct ConeIsoFamily {
    std::map<std::pair<int, int>, std::map<int, int>> maps;

    const std::map<int, int>& at(int s, int t) const;
    bool has(int s, int t) const { return maps.count({s, t}) > 0; }
};

struct TwoNiceResult {
    Ter rel;
    ConeIsoFamily family;
};

// Builds a 2-nice relation plus the commuting, coherent family of cone
// isomorphisms on a level-homogeneous tree splitting at least 4-fold.
TwoNiceResult homogeneous_2nice(TreePtr tree, uint64_t seed);

// Induced relation on a level restriction / on a cone.
Ter restrict_ter(const Ter& rel, const std::set<int>& levels);
Ter relativize_ter(const Ter& rel, const std::string& node_id);

} // namespace treelab
