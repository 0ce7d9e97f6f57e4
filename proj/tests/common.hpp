#pragma once

// Shared corpus builders and independent oracles for the test suites. The
// oracles deliberately reimplement the checked computations with straight
// loops over raw structures, not via the library's own helpers.

#include "treelab/io.hpp"
#include "treelab/ter.hpp"
#include "treelab/tree.hpp"

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace treelab::testing {

// Path-labelled tree: root "root", every other node's id is its letter path
// ("a", "ab", ...). Children of a node append one letter.
inline std::vector<NodeSpec> full_tree_specs(int arity, int height) {
    std::vector<NodeSpec> specs{{"root", 0, ""}};
    std::vector<std::string> level{""};
    for (int l = 1; l < height; ++l) {
        std::vector<std::string> next;
        for (const auto& p : level) {
            for (int j = 0; j < arity; ++j) {
                std::string id = p + static_cast<char>('a' + j);
                specs.push_back({id, l, p.empty() ? "root" : p});
                next.push_back(id);
            }
        }
        level = std::move(next);
    }
    return specs;
}

inline TreePtr full_tree(int arity, int height, std::set<int> limits = {},
                         std::string name = "t") {
    return std::make_shared<LevelledTree>(
        LevelledTree(std::move(name), std::move(limits), full_tree_specs(arity, height)));
}

inline TreePtr b2() { return full_tree(2, 3, {}, "B2"); }

// Raw structure for oracle computations.
struct RawTree {
    std::map<std::string, std::string> parent;
    std::map<std::string, int> level;
    std::vector<std::string> ids;

    explicit RawTree(const LevelledTree& t) {
        for (int i = 0; i < t.size(); ++i) {
            ids.push_back(t.id_of(i));
            level[t.id_of(i)] = t.node(i).level;
            parent[t.id_of(i)] = t.parent(i) >= 0 ? t.id_of(t.parent(i)) : "";
        }
    }

    std::string ancestor(const std::string& id, int lvl) const {
        std::string cur = id;
        while (level.at(cur) > lvl) cur = parent.at(cur);
        return cur;
    }

    bool is_ancestor(const std::string& a, const std::string& d) const {
        return ancestor(d, level.at(a)) == a;
    }
};

// Brute-force dispute and honesty oracle: literal triple loops over the
// definition, independent of validate_ter's enumeration (which walks the
// class lists and caches descendant classes).
struct OracleDispute {
    std::string s, sp, t;
};

namespace detail {

// flat arrays over node indices so that the quadruple loop stays honest but
// does not drown in string lookups
struct FlatTree {
    std::vector<int> level, parent;

    explicit FlatTree(const LevelledTree& t) : level(t.size()), parent(t.size()) {
        for (int i = 0; i < t.size(); ++i) {
            level[i] = t.node(i).level;
            parent[i] = t.parent(i);
        }
    }

    int ancestor(int i, int lvl) const {
        while (level[i] > lvl) i = parent[i];
        return i;
    }

    bool strictly_above(int a, int d) const {
        return level[d] > level[a] && ancestor(d, level[a]) == a;
    }
};

} // namespace detail

inline std::vector<OracleDispute> oracle_disputes(const Ter& rel) {
    const LevelledTree& tree = rel.tree();
    detail::FlatTree flat(tree);
    int n = tree.size();
    std::vector<OracleDispute> out;
    for (int s = 0; s < n; ++s) {
        for (int t = 0; t < n; ++t) {
            if (s == t || flat.level[s] != flat.level[t]) continue;
            if (!rel.equivalent(s, t)) continue;
            for (int sp = 0; sp < n; ++sp) {
                if (!flat.strictly_above(s, sp)) continue;
                bool witness = false;
                for (int tp = 0; tp < n; ++tp) {
                    if (flat.level[tp] != flat.level[sp]) continue;
                    if (flat.strictly_above(t, tp) && rel.equivalent(tp, sp)) witness = true;
                }
                if (!witness)
                    out.push_back({tree.id_of(s), tree.id_of(sp), tree.id_of(t)});
            }
        }
    }
    return out;
}

inline bool oracle_honest(const Ter& rel) {
    const LevelledTree& tree = rel.tree();
    detail::FlatTree flat(tree);
    auto disputes = oracle_disputes(rel);
    std::set<std::tuple<int, int, int>> dset;
    for (const auto& d : disputes)
        dset.insert({tree.index_of(d.s), tree.index_of(d.sp), tree.index_of(d.t)});
    for (const auto& d : disputes) {
        int s = tree.index_of(d.s);
        int anc = flat.ancestor(tree.index_of(d.sp), flat.level[s] + 1);
        if (!dset.count({s, anc, tree.index_of(d.t)})) return false;
    }
    return true;
}

// Product relation of the third-section example: (s,t) ~ (u,v) iff s = u,
// on a product tree with "<s>*<t>" pair ids.
inline Ter product_first_factor_ter(TreePtr product, const LevelledTree& s,
                                    const LevelledTree& t) {
    std::vector<LevelClass> classes;
    for (int l = 0; l < s.height(); ++l) {
        for (int i : s.level_nodes(l)) {
            LevelClass lc;
            lc.level = l;
            for (int j : t.level_nodes(l))
                lc.members.push_back(s.id_of(i) + "*" + t.id_of(j));
            classes.push_back(std::move(lc));
        }
    }
    return Ter::from_classes(std::move(product), classes, "prodter");
}

// 2-nice block relation on a full even-arity tree: children of equivalent
// nodes pair up in blocks of two, giving classes that project 2-to-1.
inline Ter block_pair_ter(TreePtr tree, std::string name = "pairs") {
    const LevelledTree& t = *tree;
    std::vector<int> class_of(t.size(), -1);
    class_of[t.index_of("root")] = 0;
    int next = 1;
    for (int l = 0; l + 1 < t.height(); ++l) {
        std::map<std::pair<int, int>, int> fresh; // (parent class, block) -> class
        for (int i : t.level_nodes(l)) {
            const auto& kids = t.children(i);
            for (size_t k = 0; k < kids.size(); ++k) {
                auto key = std::make_pair(class_of[i], static_cast<int>(k / 2));
                auto it = fresh.find(key);
                if (it == fresh.end()) it = fresh.emplace(key, next++).first;
                class_of[kids[k]] = it->second;
            }
        }
    }
    return Ter::from_class_ids(std::move(tree), class_of, std::move(name));
}

inline TreePtr quotient_ptr(QuotientResult&& q) {
    return std::make_shared<LevelledTree>(std::move(q.tree));
}

} // namespace treelab::testing
