#pragma once

// Finite-resolution analogs of the branch-space topology.
//
// Branches of a materialized finite tree are its frontier nodes (each
// determines its full chain). "Dense", "comeagre" and "suitable" only
// survive finitely relative to a coarser resolution level g and a
// multiplicity c: a family is (g,c)-dense when every node on level g carries
// at least c selected branches. This is the single biggest modeling decision
// of the library; defaults are g = frontier-2, c = 2.

#include "treelab/ter.hpp"
#include "treelab/tree.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace treelab {

struct FrontierFamily {
    TreePtr tree;
    std::vector<int> branches; // frontier node indices, sorted by id
    int resolution = 0;
    int multiplicity = 1;

    bool contains(int node) const;
};

FrontierFamily family_from_ids(TreePtr tree, const std::vector<std::string>& ids, int resolution,
                               int multiplicity);
FrontierFamily full_frontier_family(TreePtr tree, int resolution, int multiplicity);

struct ConeCount {
    std::string node; // level-resolution node
    int count = 0;
};

struct DensityVerdict {
    std::vector<ConeCount> cones;
    bool dense = true; // all counts >= multiplicity
};

DensityVerdict is_dense(const FrontierFamily& family);

// Antichain presentation of a dense open set of branches.
struct DenseOpenPresentation {
    std::vector<std::string> antichain;
    bool antichain_ok = false; // pairwise incomparable
    bool maximal = false;      // every frontier branch passes through a member
};

DenseOpenPresentation presentation_from_ids(const LevelledTree& tree,
                                            const std::vector<std::string>& ids);

struct ReduceResult {
    FrontierFamily reduced;
    DensityVerdict density;
    bool suitable = false; // re-checked on the output
};

// Keeps exactly the members of classes whose family trace hits every
// resolution cone the class hits: the finite transcription of
// "x/~ meets M densely in x/~". Idempotent and monotone.
ReduceResult reduce_suitable(const FrontierFamily& family, const Ter& rel);

struct SuitabilityConstraint {
    const Ter* rel = nullptr;
    int class_multiplicity = 1; // selected members per nonempty (class, cone) cell
};

struct SelectionConstraints {
    std::vector<std::vector<std::string>> meets; // antichains to pass through
    std::vector<std::string> include;
    std::vector<std::string> exclude;
    std::vector<SuitabilityConstraint> suitable;
    int resolution = 0;
    int multiplicity = 1;
    uint64_t seed = 0;
};

struct SelectionResult {
    bool ok = false;
    std::string refusal; // names the first failing cone when not ok
    std::optional<FrontierFamily> family;
    DensityVerdict density;
};

// Deterministic, seeded branch selection meeting all constraints: contains
// include, avoids exclude, passes through every meet antichain, is
// (resolution, multiplicity)-dense, and is suitable for the given relation
// relative to the surviving candidate pool (class traces are taken inside
// the pool, which is what lets a diagonalization starve a chosen class).
SelectionResult diagonal_select(TreePtr tree, int level, const SelectionConstraints& constraints);

struct BackForthResult {
    bool ok = false;
    std::map<std::string, std::string> iso; // node id of S -> node id of T
    std::string refusal;                    // distinguishing invariant
};

// Enumerated back-and-forth on branch lists (even steps forth, odd steps
// back); on finite trees it produces a full isomorphism whenever one exists
// and otherwise refuses with a level-size or splitting-profile mismatch.
// Partner choices are shape-guarded, so the partial map never needs revision.
BackForthResult kurepa_backforth(const LevelledTree& s, const LevelledTree& t, uint64_t seed);

} // namespace treelab
