#pragma once

// Staged tree construction driven by a deterministic oracle schedule.
//
// Successor blocks extend every frontier node m-fold and extend the
// maintained relations by block partition; limit stages run a diagonal
// branch selection against the stage's event (seal an antichain, kill a
// guessed t.e.r. or automorphism, register a relation to preserve) and prune
// the branches that were not extended.  The transcript records the claims
// (selections, prunings, final structures) and verify_transcript re-checks
// each event with independent oracles.
//
// Honesty and m-niceness of preserved relations are asserted on the club of
// levels that excludes each pruning window (resolution, limit level): a
// selection only controls class traces down to the stage resolution, which
// is the finite shadow of club-relative representation.

#include "treelab/branchspace.hpp"
#include "treelab/io.hpp"
#include "treelab/report.hpp"
#include "treelab/ter.hpp"
#include "treelab/tree.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace treelab {

struct OracleEvent {
    enum class Kind { seal_antichain, kill_ter, kill_automorphism, preserve_ter, noop };
    Kind kind = Kind::noop;
    std::string payload; // file name relative to the schedule directory, "-" = none
};

const char* event_name(OracleEvent::Kind k);

using Calc52Blocks = std::vector<std::vector<std::vector<int>>>; // P[xi][eta] = child indices

struct Stage {
    enum class Kind { grow, limit, red_green, calc52 };
    Kind kind = Kind::grow;
    int levels = 0;    // grow
    int splitting = 0; // grow, red_green
    OracleEvent event; // limit
    Calc52Blocks blocks; // calc52
};

struct ConstructionSchedule {
    std::string name;
    uint64_t seed = 0;
    int density_offset = 2;
    int multiplicity = 2;
    std::vector<Stage> stages;
    std::string base_dir; // payload file resolution
};

ConstructionSchedule parse_schedule(std::istream& in, std::string base_dir);
ConstructionSchedule load_schedule(const std::string& path);

struct StageRecord {
    int index = 0;
    Stage stage;
    int limit_level = -1; // level created by a limit stage
    int resolution = -1;
    std::vector<std::string> selected;
    std::vector<std::string> pruned;
    std::string kill_target;      // class rep / automorphism point targeted
    std::map<std::string, int> colors; // red_green coloring of the limit level
    bool refused = false;
    std::string refusal;
};

struct Transcript {
    ConstructionSchedule schedule;
    std::string schedule_file; // empty when built in memory
    std::vector<StageRecord> stages;
    std::optional<LevelledTree> final_tree;
    std::vector<Ter> maintained; // preserved relations on the final tree
    std::vector<std::string> maintained_expect_nice; // names of relations never red-greened
    std::set<int> club; // verification levels (pruning windows removed)
    bool completed = false;
    Report checks; // per-stage verdicts collected while running
};

// Test/negative-control support: force the selection of the given branches
// at one limit stage in addition to what the constraints choose.
struct SelectionOverride {
    int stage_index = 0;
    std::vector<std::string> force_select;
};

Transcript run_construction(const ConstructionSchedule& schedule,
                            const std::vector<SelectionOverride>& overrides = {});

// Transcript file: header, stage claims, references to the emitted tree and
// t.e.r. files. save_transcript writes <name>.transcript, <name>.final.tree
// and one <name>.<rel>.ter per maintained relation into dir.
std::string transcript_filename(const Transcript& t);
void save_transcript(const std::string& dir, const Transcript& t);
Transcript load_transcript(const std::string& path);

// Independent re-verification of a transcript's claims: sealed antichains
// maximal in the final tree, killed relations dishonest at their stage (via
// the class-trace-density criterion on the pre-prune stage tree), killed
// automorphisms not extendible to the final tree, preserved relations honest
// and m-nice on the club, selections dense.
Report verify_transcript(const Transcript& t, size_t max_autos = 20000);

// One red/green successor step above a freshly built limit level: colors the
//
// limit-level classes in two resolution-dense parts, grows one level and
// extends the relation so that same-colored equivalent nodes transfer their
// successors while different colors separate.
struct RedGreenResult {
    TreePtr tree; // one level taller
    Ter rel;
    std::map<std::string, int> colors;
    Report checks; // the three extension clauses
};

RedGreenResult red_green_stage(const Ter& rel, int limit_level, int resolution, int splitting,
                               uint64_t seed);

// Local successor calculus: a full n-splitting prefix with a coarse and a
// fine relation extended by a two-level index partition, a quotient map onto
// a comparison prefix, and a commuting family of prefix automorphisms.
struct Calc52State {
    TreePtr tree;
    Ter eq;   // classes follow the outer blocks
    Ter fine; // classes follow the sub-blocks
    TreePtr comparison;
    std::map<std::string, std::string> phi; // tree node -> comparison node
    std::vector<Calc52Blocks> step_blocks;  // one entry per successor step
};

Calc52State calc52_init(const std::string& name);
Calc52State successor_calculus_52(const Calc52State& state, const Calc52Blocks& blocks);

// Image of node w under the family automorphism phi[s][t] (s, t of equal
// height); acts by child-index transpositions along the chains of s and t.
std::string calc52_family_apply(const Calc52State& state, const std::string& s,
                                const std::string& t, const std::string& w);

// The four local assertions plus the induced quotient-prefix isomorphism,
// checked exhaustively.
Report calc52_local_checks(const Calc52State& state);

// How a proposed relation differs from the maintained one above a node:
// the three-way case split driving which differences a construction can and
// cannot destroy.
//
//   negligible      the proposal refines the base and some maximal antichain
//                   E above the node splits it into cones where it coincides
//                   with the base or with equality, coherently across cones
//                   (such proposals survive every diagonalization);
//   thin_refinement the proposal refines the base but no such antichain
//                   exists: some cone carries a class trace that is a proper
//                   thin part of a base class;
//   not_refinement  the proposal relates nodes the base separates.
enum class DifferenceCase { negligible, thin_refinement, not_refinement };

struct DifferenceReport {
    DifferenceCase kind = DifferenceCase::negligible;
    std::vector<std::string> antichain; // case negligible: the witnessing E
    std::string witness_a, witness_b;   // other cases: an offending node pair
};

DifferenceReport classify_difference(const Ter& base, const Ter& proposed,
                                     const std::string& node);

const char* difference_name(DifferenceCase c);

} // namespace treelab
