#pragma once

// CLI dispatch table: which subcommand drives which library operation.
// Every operation is reachable from exactly one subcommand; the cli test
// asserts this coverage.

#include <array>
#include <string_view>

namespace treelab {

struct DispatchEntry {
    std::string_view op;
    std::string_view subcommand;
};

inline constexpr std::array<DispatchEntry, 33> kDispatchTable{{
    {"validate_normal", "validate-tree"},
    {"enumerate_automorphisms", "validate-tree"},
    {"restrict_levels", "tree-op"},
    {"relativize", "tree-op"},
    {"tree_product", "tree-op"},
    {"tree_sum", "tree-op"},
    {"ro_algebra", "project"},
    {"complete_subalgebra", "project"},
    {"upper_projection", "project"},
    {"represented_subalgebra", "project"},
    {"projection_vs_h", "project"},
    {"relative_algebra", "large"},
    {"local_equality_set", "large"},
    {"mu_large", "large"},
    {"product_algebra", "decompose"},
    {"large_decomposition", "decompose"},
    {"validate_ter", "validate-ter"},
    {"niceness_grade", "validate-ter"},
    {"class_trace_density", "validate-ter"},
    {"quotient_tree", "quotient"},
    {"dense_split", "dense-split"},
    {"homogeneous_2nice", "two-nice"},
    {"nice_part_split", "nice-split"},
    {"frolik_partition", "frolik"},
    {"fixed_point_subalgebra", "fixed-points"},
    {"is_dense", "reduce"},
    {"reduce_suitable", "reduce"},
    {"diagonal_select", "select"},
    {"kurepa_backforth", "kurepa"},
    {"run_construction", "simulate"},
    {"red_green_stage", "simulate"},
    {"successor_calculus_52", "simulate"},
    {"verify_transcript", "verify"},
}};

} // namespace treelab
