#include "treelab/branchspace.hpp"

#include "treelab/rng.hpp"

#include <algorithm>
#include <stdexcept>

namespace treelab {

namespace {

std::vector<int> sorted_by_id(const LevelledTree& tree, std::vector<int> nodes) {
    std::sort(nodes.begin(), nodes.end(),
              [&tree](int a, int b) { return tree.id_of(a) < tree.id_of(b); });
    return nodes;
}

} // namespace

bool FrontierFamily::contains(int node) const {
    return std::binary_search(branches.begin(), branches.end(), node,
                              [this](int a, int b) { return tree->id_of(a) < tree->id_of(b); });
}

FrontierFamily family_from_ids(TreePtr tree, const std::vector<std::string>& ids, int resolution,
                               int multiplicity) {
    FrontierFamily f;
    f.resolution = resolution;
    f.multiplicity = multiplicity;
    std::set<int> frontier;
    for (int i : tree->frontier()) frontier.insert(i);
    for (const auto& id : ids) {
        int i = tree->index_of(id);
        if (!frontier.count(i))
            throw std::invalid_argument("node " + id + " is not a frontier node");
        f.branches.push_back(i);
    }
    f.branches = sorted_by_id(*tree, std::move(f.branches));
    f.branches.erase(std::unique(f.branches.begin(), f.branches.end()), f.branches.end());
    f.tree = std::move(tree);
    return f;
}

FrontierFamily full_frontier_family(TreePtr tree, int resolution, int multiplicity) {
    FrontierFamily f;
    f.resolution = resolution;
    f.multiplicity = multiplicity;
    f.branches = tree->frontier(); // already id-sorted
    f.tree = std::move(tree);
    return f;
}

DensityVerdict is_dense(const FrontierFamily& family) {
    const LevelledTree& tree = *family.tree;
    if (family.resolution < 0 || family.resolution >= tree.height())
        throw std::invalid_argument("resolution level out of range");
    std::map<int, int> counts;
    for (int i : tree.level_nodes(family.resolution)) counts[i] = 0;
    for (int b : family.branches) {
        if (tree.node(b).level < family.resolution) continue;
        ++counts[tree.ancestor_at(b, family.resolution)];
    }
    DensityVerdict v;
    for (int i : tree.level_nodes(family.resolution)) {
        v.cones.push_back({tree.id_of(i), counts[i]});
        if (counts[i] < family.multiplicity) v.dense = false;
    }
    return v;
}

DenseOpenPresentation presentation_from_ids(const LevelledTree& tree,
                                            const std::vector<std::string>& ids) {
    DenseOpenPresentation p;
    p.antichain = ids;
    std::sort(p.antichain.begin(), p.antichain.end());
    p.antichain_ok = true;
    std::vector<int> nodes;
    for (const auto& id : p.antichain) nodes.push_back(tree.index_of(id));
    for (size_t a = 0; a < nodes.size(); ++a)
        for (size_t b = 0; b < nodes.size(); ++b)
            if (a != b && tree.is_ancestor(nodes[a], nodes[b])) p.antichain_ok = false;
    p.maximal = true;
    for (int br : tree.frontier()) {
        bool hit = false;
        for (int m : nodes)
            if (tree.is_ancestor(m, br)) hit = true;
        if (!hit) p.maximal = false;
    }
    return p;
}

ReduceResult reduce_suitable(const FrontierFamily& family, const Ter& rel) {
    const LevelledTree& tree = *family.tree;
    if (rel.tree().size() != tree.size())
        throw std::invalid_argument("relation lives on a different tree");

    std::set<int> in_family(family.branches.begin(), family.branches.end());
    FrontierFamily reduced;
    reduced.tree = family.tree;
    reduced.resolution = family.resolution;
    reduced.multiplicity = family.multiplicity;

    // class by class: a class survives when its family trace hits every
    // resolution cone the full class hits
    std::set<int> done;
    for (int b : family.branches) {
        int cls = rel.class_of(b);
        if (!done.insert(cls).second) continue;
        std::set<int> class_cones, trace_cones;
        for (int m : rel.class_members(cls)) {
            int cone = tree.ancestor_at(m, family.resolution);
            class_cones.insert(cone);
            if (in_family.count(m)) trace_cones.insert(cone);
        }
        if (class_cones == trace_cones) {
            for (int m : rel.class_members(cls))
                if (in_family.count(m)) reduced.branches.push_back(m);
        }
    }
    reduced.branches = sorted_by_id(tree, std::move(reduced.branches));

    ReduceResult out{std::move(reduced), {}, true};
    out.density = is_dense(out.reduced);
    // suitability of the output, by definition
    std::set<int> kept(out.reduced.branches.begin(), out.reduced.branches.end());
    std::set<int> seen;
    for (int b : out.reduced.branches) {
        int cls = rel.class_of(b);
        if (!seen.insert(cls).second) continue;
        std::set<int> class_cones, trace_cones;
        for (int m : rel.class_members(cls)) {
            class_cones.insert(tree.ancestor_at(m, family.resolution));
            if (kept.count(m)) trace_cones.insert(tree.ancestor_at(m, family.resolution));
        }
        if (class_cones != trace_cones) out.suitable = false;
    }
    return out;
}

SelectionResult diagonal_select(TreePtr tree_ptr, int level,
                                const SelectionConstraints& constraints) {
    const LevelledTree& tree = *tree_ptr;
    SelectionResult out;

    std::vector<int> frontier = tree.frontier();
    for (int b : frontier)
        if (tree.node(b).level != level)
            throw std::invalid_argument("frontier is not concentrated on level " +
                                        std::to_string(level));
    if (constraints.resolution < 0 || constraints.resolution >= level)
        throw std::invalid_argument("resolution must lie below the selection level");

    std::set<int> include, exclude;
    for (const auto& id : constraints.include) include.insert(tree.index_of(id));
    for (const auto& id : constraints.exclude) exclude.insert(tree.index_of(id));
    for (int i : include)
        if (exclude.count(i))
            throw std::invalid_argument("node " + tree.id_of(i) + " both included and excluded");

    // meet constraints: branch passes through every antichain
    std::vector<std::vector<int>> meets;
    for (const auto& ids : constraints.meets) {
        DenseOpenPresentation p = presentation_from_ids(tree, ids);
        if (!p.antichain_ok) throw std::invalid_argument("meet constraint is not an antichain");
        std::vector<int> nodes;
        for (const auto& id : p.antichain) nodes.push_back(tree.index_of(id));
        meets.push_back(std::move(nodes));
    }
    auto passes_meets = [&](int b) {
        for (const auto& m : meets) {
            bool hit = false;
            for (int a : m)
                if (tree.is_ancestor(a, b)) hit = true;
            if (!hit) return false;
        }
        return true;
    };

    std::vector<int> pool;
    for (int b : frontier) {
        if (exclude.count(b)) continue;
        if (!passes_meets(b)) {
            if (include.count(b)) {
                out.refusal = "included branch " + tree.id_of(b) + " misses a meet antichain";
                return out;
            }
            continue;
        }
        pool.push_back(b);
    }
    for (int b : include)
        if (!std::count(pool.begin(), pool.end(), b)) {
            out.refusal = "included branch " + tree.id_of(b) + " is not selectable";
            return out;
        }

    std::set<int> chosen(include.begin(), include.end());

    // suitability relative to the pool: for every class, every resolution
    // cone hit by the pooled trace gets class_multiplicity members
    for (const auto& suit : constraints.suitable) {
        const Ter& rel = *suit.rel;
        if (rel.tree().size() != tree.size())
            throw std::invalid_argument("suitability relation lives on a different tree");
        std::map<std::pair<int, int>, std::vector<int>> cells; // (class, cone) -> pool members
        for (int b : pool)
            cells[{rel.class_of(b), tree.ancestor_at(b, constraints.resolution)}].push_back(b);
        for (auto& [key, members] : cells) {
            if (static_cast<int>(members.size()) < suit.class_multiplicity) {
                out.refusal = "cone " + tree.id_of(key.second) + " holds only " +
                              std::to_string(members.size()) + " candidate(s) of class " +
                              rel.class_rep(key.first);
                return out;
            }
            int have = 0;
            for (int b : members)
                if (chosen.count(b)) ++have;
            uint64_t rot = mix_seed(constraints.seed, (uint64_t)key.first * 31 + key.second);
            for (size_t k = 0; k < members.size() && have < suit.class_multiplicity; ++k) {
                int b = members[(k + rot) % members.size()];
                if (chosen.insert(b).second) ++have;
            }
        }
    }

    // density fill: every resolution cone gets multiplicity branches
    std::map<int, std::vector<int>> by_cone;
    for (int b : pool) by_cone[tree.ancestor_at(b, constraints.resolution)].push_back(b);
    for (int cone : tree.level_nodes(constraints.resolution)) {
        auto it = by_cone.find(cone);
        int have = 0;
        for (int b : chosen)
            if (tree.ancestor_at(b, constraints.resolution) == cone) ++have;
        if (have >= constraints.multiplicity) continue;
        if (it == by_cone.end() ||
            static_cast<int>(it->second.size()) < constraints.multiplicity) {
            out.refusal = "cone " + tree.id_of(cone) + " holds " +
                          std::to_string(it == by_cone.end() ? 0 : it->second.size()) +
                          " candidate(s), needs " + std::to_string(constraints.multiplicity);
            return out;
        }
        uint64_t rot = mix_seed(constraints.seed, (uint64_t)cone);
        for (size_t k = 0; k < it->second.size() && have < constraints.multiplicity; ++k) {
            int b = it->second[(k + rot) % it->second.size()];
            if (chosen.insert(b).second) ++have;
        }
    }

    std::vector<std::string> ids;
    for (int b : chosen) ids.push_back(tree.id_of(b));
    out.family = family_from_ids(tree_ptr, ids, constraints.resolution, constraints.multiplicity);
    out.density = is_dense(*out.family);
    out.ok = out.density.dense;
    if (!out.ok) out.refusal = "selection failed the density check";
    return out;
}

namespace {

struct BackForth {
    const LevelledTree& s;
    const LevelledTree& t;
    std::map<int, int> fwd; // S node -> T node
    std::map<int, int> bwd;

    bool map_chain(const LevelledTree& from, const LevelledTree& to, std::map<int, int>& m,
                   std::map<int, int>& back, int branch, int to_branch) {
        std::vector<int> cf = from.chain(branch);
        std::vector<int> ct = to.chain(to_branch);
        if (cf.size() != ct.size()) return false;
        for (size_t k = 0; k < cf.size(); ++k) {
            auto it = m.find(cf[k]);
            if (it != m.end()) {
                if (it->second != ct[k]) return false;
                continue;
            }
            if (back.count(ct[k])) return false;
            if (from.signature(cf[k]) != to.signature(ct[k])) return false;
            m[cf[k]] = ct[k];
            back[ct[k]] = cf[k];
        }
        return true;
    }

    // deepest level along the branch whose node is already mapped
    int mapped_depth(const LevelledTree& from, const std::map<int, int>& m, int branch) const {
        int depth = -1;
        for (int cur = branch; cur >= 0; cur = from.parent(cur)) {
            if (m.count(cur)) {
                depth = from.node(cur).level;
                break;
            }
        }
        return depth;
    }

    // greedy shape-guarded partner: a fresh branch through the image of the
    // deepest mapped ancestor whose chain matches level by level
    int find_partner(const LevelledTree& from, const LevelledTree& to, const std::map<int, int>& m,
                     const std::map<int, int>& back, int branch) {
        int d = mapped_depth(from, m, branch);
        int cur_to = d < 0 ? -1 : m.at(from.ancestor_at(branch, d));
        int top = from.node(branch).level;
        for (int lvl = d + 1; lvl <= top; ++lvl) {
            int want = from.ancestor_at(branch, lvl);
            int next = -1;
            std::vector<int> candidates;
            if (lvl == 0) {
                for (int r : to.level_nodes(0))
                    if (to.parent(r) < 0) candidates.push_back(r);
            } else {
                candidates = to.children(cur_to);
            }
            std::sort(candidates.begin(), candidates.end(),
                      [&to](int a, int b) { return to.id_of(a) < to.id_of(b); });
            for (int c : candidates) {
                if (to.signature(c) != from.signature(want)) continue;
                if (lvl == d + 1 && back.count(c)) continue; // must diverge freshly
                next = c;
                break;
            }
            if (next < 0) return -1;
            cur_to = next;
        }
        return cur_to;
    }
};

} // namespace

BackForthResult kurepa_backforth(const LevelledTree& s, const LevelledTree& t, uint64_t seed) {
    if (s.height() != t.height()) throw std::invalid_argument("trees have different heights");
    BackForthResult out;

    // distinguishing invariants first: level sizes, then splitting profiles
    for (int l = 0; l < s.height(); ++l) {
        if (s.level_nodes(l).size() != t.level_nodes(l).size()) {
            out.refusal = "level " + std::to_string(l) + " sizes " +
                          std::to_string(s.level_nodes(l).size()) + " != " +
                          std::to_string(t.level_nodes(l).size());
            return out;
        }
    }
    if (!trees_isomorphic(s, t)) {
        // deepest level where the multisets of cone shapes differ
        for (int l = s.height() - 1; l >= 0; --l) {
            std::multiset<std::string> ms, mt;
            for (int i : s.level_nodes(l)) ms.insert(s.signature(i));
            for (int i : t.level_nodes(l)) mt.insert(t.signature(i));
            if (ms != mt) {
                out.refusal = "splitting profile differs at level " + std::to_string(l);
                return out;
            }
        }
        out.refusal = "trees are not isomorphic";
        return out;
    }

    std::vector<int> xs = s.frontier();
    std::vector<int> ys = t.frontier();
    if (seed != 0) {
        size_t rx = mix_seed(seed, 1) % xs.size();
        size_t ry = mix_seed(seed, 2) % ys.size();
        std::rotate(xs.begin(), xs.begin() + rx, xs.end());
        std::rotate(ys.begin(), ys.begin() + ry, ys.end());
    }

    BackForth bf{s, t, {}, {}};
    size_t xi = 0, yi = 0;
    bool forth = true; // even steps forth, odd steps back
    size_t made = 0;
    while (xi < xs.size() || yi < ys.size()) {
        if (forth) {
            while (xi < xs.size() && bf.fwd.count(xs[xi])) ++xi;
            if (xi < xs.size()) {
                int x = xs[xi];
                int y = bf.find_partner(s, t, bf.fwd, bf.bwd, x);
                if (y < 0 || !bf.map_chain(s, t, bf.fwd, bf.bwd, x, y)) {
                    out.refusal = "back-and-forth got stuck (internal)";
                    return out;
                }
                ++made;
            }
        } else {
            while (yi < ys.size() && bf.bwd.count(ys[yi])) ++yi;
            if (yi < ys.size()) {
                int y = ys[yi];
                int x = bf.find_partner(t, s, bf.bwd, bf.fwd, y);
                if (x < 0 || !bf.map_chain(t, s, bf.bwd, bf.fwd, y, x)) {
                    out.refusal = "back-and-forth got stuck (internal)";
                    return out;
                }
                ++made;
            }
        }
        forth = !forth;
        if (made > xs.size() + ys.size()) break; // safety net
    }

    // the branch maps assemble to a full node isomorphism
    if (bf.fwd.size() != static_cast<size_t>(s.size())) {
        out.refusal = "back-and-forth incomplete (internal)";
        return out;
    }
    std::vector<int> perm(s.size());
    for (auto [a, b] : bf.fwd) perm[a] = b;
    for (int i = 0; i < s.size(); ++i) {
        int j = perm[i];
        if (t.node(j).level != s.node(i).level ||
            ((s.parent(i) >= 0) != (t.parent(j) >= 0)) ||
            (s.parent(i) >= 0 && perm[s.parent(i)] != t.parent(j))) {
            out.refusal = "assembled map is not an isomorphism (internal)";
            return out;
        }
    }
    out.ok = true;
    for (auto [a, b] : bf.fwd) out.iso[s.id_of(a)] = t.id_of(b);
    return out;
}

} // namespace treelab
