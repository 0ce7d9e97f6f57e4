#include "treelab/tree.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

namespace treelab {

LevelledTree::LevelledTree(std::string name, std::set<int> limit_levels,
                           const std::vector<NodeSpec>& specs)
    : name_(std::move(name)), limit_levels_(std::move(limit_levels)) {
    if (specs.empty()) throw std::invalid_argument("tree has no nodes");

    std::vector<NodeSpec> sorted = specs;
    std::sort(sorted.begin(), sorted.end(), [](const NodeSpec& a, const NodeSpec& b) {
        if (a.level != b.level) return a.level < b.level;
        return a.id < b.id;
    });

    for (const auto& s : sorted) {
        if (s.level < 0) throw std::invalid_argument("negative level for node " + s.id);
        if (index_.count(s.id)) throw std::invalid_argument("duplicate node id " + s.id);
        int idx = static_cast<int>(nodes_.size());
        index_[s.id] = idx;
        nodes_.push_back(TreeNode{s.id, s.level, -1});
        height_ = std::max(height_, s.level + 1);
    }
    levels_.assign(height_, {});
    children_.assign(nodes_.size(), {});
    for (size_t i = 0; i < sorted.size(); ++i) {
        const auto& s = sorted[i];
        levels_[s.level].push_back(static_cast<int>(i));
        if (!s.parent.empty()) {
            auto it = index_.find(s.parent);
            if (it == index_.end())
                throw std::invalid_argument("dangling parent " + s.parent + " for node " + s.id);
            nodes_[i].parent = it->second;
            children_[it->second].push_back(static_cast<int>(i));
        }
    }
    // children were appended in (level, id) node order, hence sorted by id
    for (int l : limit_levels_)
        if (l <= 0 || l >= height_)
            throw std::invalid_argument("limit level out of range");
}

int LevelledTree::index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw std::invalid_argument("unknown node id " + id);
    return it->second;
}

int LevelledTree::ancestor_at(int i, int level) const {
    if (level > nodes_[i].level) throw std::invalid_argument("ancestor level above node");
    while (nodes_[i].level > level) {
        i = nodes_[i].parent;
        if (i < 0) throw std::invalid_argument("broken parent chain");
    }
    return i;
}

std::vector<int> LevelledTree::chain(int i) const {
    std::vector<int> out;
    for (int cur = i; cur >= 0; cur = nodes_[cur].parent) out.push_back(cur);
    std::reverse(out.begin(), out.end());
    return out;
}

bool LevelledTree::is_ancestor(int a, int d) const {
    if (nodes_[a].level > nodes_[d].level) return false;
    return ancestor_at(d, nodes_[a].level) == a;
}

std::vector<int> LevelledTree::frontier() const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
        if (children_[i].empty()) out.push_back(i);
    std::sort(out.begin(), out.end(),
              [&](int a, int b) { return nodes_[a].id < nodes_[b].id; });
    return out;
}

const std::string& LevelledTree::signature(int i) const {
    if (signatures_.empty()) signatures_.assign(nodes_.size(), "");
    std::string& sig = signatures_[i];
    if (!sig.empty()) return sig;
    std::vector<std::string> parts;
    parts.reserve(children_[i].size());
    for (int c : children_[i]) parts.push_back(signature(c));
    std::sort(parts.begin(), parts.end());
    sig = "(";
    for (const auto& p : parts) sig += p;
    sig += ")";
    return sig;
}

ValidationReport validate_normal(const LevelledTree& tree, bool strict) {
    ValidationReport rep;
    // root uniqueness: exactly one parentless node, at level 0
    std::vector<int> roots;
    for (int i = 0; i < tree.size(); ++i)
        if (tree.parent(i) < 0) roots.push_back(i);
    if (roots.size() != 1) {
        for (int r : roots)
            rep.violations.push_back({"root.unique", tree.id_of(r),
                                      "tree has " + std::to_string(roots.size()) + " parentless nodes"});
        if (roots.empty())
            rep.violations.push_back({"root.unique", "", "tree has no parentless node"});
    }
    for (int r : roots)
        if (tree.node(r).level != 0)
            rep.violations.push_back({"root.level", tree.id_of(r),
                                      "parentless node at level " + std::to_string(tree.node(r).level)});

    // parent levels
    for (int i = 0; i < tree.size(); ++i) {
        const auto& n = tree.node(i);
        if (n.parent >= 0 && tree.node(n.parent).level != n.level - 1)
            rep.violations.push_back({"parent.level", n.id,
                                      "parent " + tree.id_of(n.parent) + " at level " +
                                          std::to_string(tree.node(n.parent).level) + ", expected " +
                                          std::to_string(n.level - 1)});
        if (n.parent < 0 && n.level > 0 && roots.size() == 1)
            rep.violations.push_back({"parent.level", n.id, "non-root node without parent"});
    }

    // splitting: every node below the top level has >= 2 children
    if (strict) {
        for (int i = 0; i < tree.size(); ++i) {
            const auto& n = tree.node(i);
            if (n.level < tree.height() - 1 && tree.children(i).size() < 2)
                rep.violations.push_back({"split", n.id,
                                          "node " + n.id + " has " + std::to_string(tree.children(i).size()) +
                                              " child(ren) at level " + std::to_string(n.level) + "->" +
                                              std::to_string(n.level + 1)});
        }
    }

    // unique limits: distinct nodes at a limit level have distinct full
    // predecessor chains (chains include the node itself, so this amounts to
    // id uniqueness; asserted anyway).
    for (int l : tree.limit_levels()) {
        std::set<std::vector<int>> seen;
        for (int i : tree.level_nodes(l)) {
            auto c = tree.chain(i);
            if (!seen.insert(c).second)
                rep.violations.push_back({"limits.unique", tree.id_of(i),
                                          "duplicate predecessor chain at limit level " + std::to_string(l)});
        }
    }
    return rep;
}

LevelledTree restrict_levels(const LevelledTree& tree, const std::set<int>& levels) {
    if (levels.empty() || *levels.begin() != 0)
        throw std::invalid_argument("restriction level set must contain 0");
    if (*levels.rbegin() >= tree.height())
        throw std::invalid_argument("restriction level beyond tree height");

    std::vector<int> order(levels.begin(), levels.end());
    std::map<int, int> new_level;
    for (size_t j = 0; j < order.size(); ++j) new_level[order[j]] = static_cast<int>(j);

    std::set<int> new_limits;
    for (size_t j = 1; j < order.size(); ++j)
        if (tree.is_limit_level(order[j]) && order[j - 1] == order[j] - 1)
            new_limits.insert(static_cast<int>(j));

    std::vector<NodeSpec> specs;
    for (size_t j = 0; j < order.size(); ++j) {
        int src = order[j];
        for (int i : tree.level_nodes(src)) {
            NodeSpec s;
            s.id = tree.id_of(i);
            s.level = static_cast<int>(j);
            if (j > 0) s.parent = tree.id_of(tree.ancestor_at(i, order[j - 1]));
            specs.push_back(std::move(s));
        }
    }
    return LevelledTree(tree.name(), new_limits, specs);
}

LevelledTree relativize(const LevelledTree& tree, const std::string& id) {
    int root = tree.index_of(id);
    int base = tree.node(root).level;
    std::set<int> new_limits;
    for (int l : tree.limit_levels())
        if (l > base) new_limits.insert(l - base);
    std::vector<NodeSpec> specs;
    for (int i = 0; i < tree.size(); ++i) {
        if (!tree.is_ancestor(root, i)) continue;
        NodeSpec s;
        s.id = tree.id_of(i);
        s.level = tree.node(i).level - base;
        if (i != root) s.parent = tree.id_of(tree.parent(i));
        specs.push_back(std::move(s));
    }
    // drop markers beyond the cone
    std::set<int> trimmed;
    int h = 0;
    for (const auto& s : specs) h = std::max(h, s.level + 1);
    for (int l : new_limits)
        if (l < h) trimmed.insert(l);
    return LevelledTree(tree.name() + "(" + id + ")", trimmed, specs);
}

LevelledTree tree_product(const LevelledTree& s, const LevelledTree& t) {
    if (s.height() != t.height())
        throw std::invalid_argument("tree product requires equal heights");
    std::set<int> limits;
    for (int l : s.limit_levels()) limits.insert(l);
    for (int l : t.limit_levels()) limits.insert(l);
    std::vector<NodeSpec> specs;
    for (int g = 0; g < s.height(); ++g) {
        for (int a : s.level_nodes(g)) {
            for (int b : t.level_nodes(g)) {
                NodeSpec n;
                n.id = s.id_of(a) + "*" + t.id_of(b);
                n.level = g;
                if (g > 0)
                    n.parent = s.id_of(s.parent(a)) + "*" + t.id_of(t.parent(b));
                specs.push_back(std::move(n));
            }
        }
    }
    return LevelledTree("(" + s.name() + "*" + t.name() + ")", limits, specs);
}

LevelledTree tree_sum(const LevelledTree& s, const LevelledTree& t) {
    if (s.height() != t.height())
        throw std::invalid_argument("tree sum requires equal heights");
    std::set<int> limits;
    for (int l : s.limit_levels()) limits.insert(l + 1);
    for (int l : t.limit_levels()) limits.insert(l + 1);
    std::vector<NodeSpec> specs;
    specs.push_back({"+", 0, ""});
    auto add = [&specs](const LevelledTree& part, const std::string& tag) {
        for (int i = 0; i < part.size(); ++i) {
            NodeSpec n;
            n.id = tag + part.id_of(i);
            n.level = part.node(i).level + 1;
            n.parent = part.parent(i) >= 0 ? tag + part.id_of(part.parent(i)) : "+";
            specs.push_back(std::move(n));
        }
    };
    add(s, "0.");
    add(t, "1.");
    return LevelledTree("(" + s.name() + "+" + t.name() + ")", limits, specs);
}

bool TreeAutomorphism::is_identity() const {
    for (size_t i = 0; i < perm.size(); ++i)
        if (perm[i] != static_cast<int>(i)) return false;
    return true;
}

TreeAutomorphism compose(const TreeAutomorphism& f, const TreeAutomorphism& g) {
    TreeAutomorphism h;
    h.perm.resize(g.perm.size());
    for (size_t i = 0; i < g.perm.size(); ++i) h.perm[i] = f.perm[g.perm[i]];
    return h;
}

TreeAutomorphism inverse_of(const TreeAutomorphism& f) {
    TreeAutomorphism h;
    h.perm.assign(f.perm.size(), -1);
    for (size_t i = 0; i < f.perm.size(); ++i) h.perm[f.perm[i]] = static_cast<int>(i);
    return h;
}

bool is_tree_automorphism(const LevelledTree& tree, const std::vector<int>& perm) {
    if (perm.size() != static_cast<size_t>(tree.size())) return false;
    std::vector<bool> hit(perm.size(), false);
    for (size_t i = 0; i < perm.size(); ++i) {
        int j = perm[i];
        if (j < 0 || j >= tree.size() || hit[j]) return false;
        hit[j] = true;
        if (tree.node(j).level != tree.node(i).level) return false;
        int p = tree.parent(static_cast<int>(i));
        int q = tree.parent(j);
        if ((p < 0) != (q < 0)) return false;
        if (p >= 0 && perm[p] != q) return false;
    }
    return true;
}

namespace {

struct AutoSearch {
    const LevelledTree& tree;
    size_t limit;
    std::vector<int> perm;
    std::vector<bool> used;
    AutomorphismList out;

    explicit AutoSearch(const LevelledTree& t, size_t lim)
        : tree(t), limit(lim), perm(t.size(), -1), used(t.size(), false) {}

    // Nodes are visited in index order, which is (level, id) order, so the
    // enumeration is lexicographic in the image sequence and the identity
    // comes first.
    bool rec(int i) {
        if (i == tree.size()) {
            if (out.autos.size() >= limit) {
                out.truncated = true;
                return false;
            }
            out.autos.push_back(TreeAutomorphism{perm});
            return true;
        }
        const auto& n = tree.node(i);
        for (int j : tree.level_nodes(n.level)) {
            if (used[j]) continue;
            if (tree.signature(i) != tree.signature(j)) continue;
            int p = n.parent;
            if (p >= 0 && perm[p] != tree.parent(j)) continue;
            if (p < 0 && tree.parent(j) >= 0) continue;
            perm[i] = j;
            used[j] = true;
            bool go_on = rec(i + 1);
            used[j] = false;
            perm[i] = -1;
            if (!go_on) return false;
        }
        return true;
    }
};

} // namespace

AutomorphismList enumerate_automorphisms(const LevelledTree& tree, size_t limit) {
    AutoSearch search(tree, limit);
    search.rec(0);
    return std::move(search.out);
}

bool trees_isomorphic(const LevelledTree& s, const LevelledTree& t) {
    if (s.height() != t.height() || s.size() != t.size()) return false;
    if (s.level_nodes(0).size() != 1 || t.level_nodes(0).size() != 1) return false;
    return s.signature(s.level_nodes(0)[0]) == t.signature(t.level_nodes(0)[0]);
}

} // namespace treelab
