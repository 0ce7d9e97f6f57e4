#include "treelab/ter.hpp"

#include "treelab/rng.hpp"

#include <algorithm>
#include <stdexcept>

namespace treelab {

namespace {

// class ids of strict descendants, per node; one entry per (node, ancestor)
// pair, so linear in nodes x height
std::vector<std::set<int>> descendant_classes(const Ter& rel) {
    const LevelledTree& tree = rel.tree();
    std::vector<std::set<int>> out(tree.size());
    for (int u = 0; u < tree.size(); ++u) {
        for (int a = tree.parent(u); a >= 0; a = tree.parent(a))
            out[a].insert(rel.class_of(u));
    }
    return out;
}

} // namespace

Ter Ter::from_classes(TreePtr tree, const std::vector<LevelClass>& classes, std::string name) {
    const LevelledTree& t = *tree;
    std::vector<int> class_of(t.size(), -1);
    int next = 0;
    for (const auto& lc : classes) {
        if (lc.level < 0 || lc.level >= t.height())
            throw std::invalid_argument("class level out of range");
        if (lc.members.empty()) throw std::invalid_argument("empty class");
        for (const auto& id : lc.members) {
            int i = t.index_of(id);
            if (t.node(i).level != lc.level)
                throw std::invalid_argument("node " + id + " not on level " + std::to_string(lc.level));
            if (class_of[i] != -1) throw std::invalid_argument("node " + id + " in two classes");
            class_of[i] = next;
        }
        ++next;
    }
    for (int i = 0; i < t.size(); ++i)
        if (class_of[i] == -1) class_of[i] = next++; // implicit singleton
    return from_class_ids(std::move(tree), class_of, std::move(name));
}

Ter Ter::from_class_ids(TreePtr tree, const std::vector<int>& class_of, std::string name) {
    Ter rel;
    rel.name_ = std::move(name);
    rel.tree_ = std::move(tree);
    const LevelledTree& t = *rel.tree_;
    if (class_of.size() != static_cast<size_t>(t.size()))
        throw std::invalid_argument("class assignment size mismatch");

    // canonical renumbering: per level, classes ordered by least member
    // (node indices are already in (level, id) order)
    std::map<int, int> renumber;
    rel.class_of_.assign(t.size(), -1);
    rel.level_classes_.assign(t.height(), {});
    for (int i = 0; i < t.size(); ++i) {
        int raw = class_of[i];
        auto it = renumber.find(raw);
        int cls;
        if (it == renumber.end()) {
            cls = static_cast<int>(rel.classes_.size());
            renumber.emplace(raw, cls);
            rel.classes_.emplace_back();
            rel.level_classes_[t.node(i).level].push_back(cls);
        } else {
            cls = it->second;
            if (t.node(rel.classes_[cls].front()).level != t.node(i).level)
                throw std::invalid_argument("class spans several levels");
        }
        rel.class_of_[i] = cls;
        rel.classes_[cls].push_back(i);
    }
    return rel;
}

int Ter::class_level(int cls) const { return tree_->node(classes_[cls].front()).level; }

const std::string& Ter::class_rep(int cls) const { return tree_->id_of(classes_[cls].front()); }

std::vector<LevelClass> Ter::nontrivial_classes() const {
    std::vector<LevelClass> out;
    for (const auto& members : classes_) {
        if (members.size() < 2) continue;
        LevelClass lc;
        lc.level = tree_->node(members.front()).level;
        for (int i : members) lc.members.push_back(tree_->id_of(i));
        out.push_back(std::move(lc));
    }
    return out;
}

bool Ter::same_partition(const Ter& other) const {
    return class_of_ == other.class_of_ && tree_->size() == other.tree_->size();
}

TerReport validate_ter(const Ter& rel) {
    const LevelledTree& tree = rel.tree();
    TerReport rep;

    // clause (ii): parents of equivalent nodes are equivalent
    for (int cls = 0; cls < rel.class_count(); ++cls) {
        const auto& members = rel.class_members(cls);
        if (members.size() < 2 || tree.node(members.front()).level == 0) continue;
        int first = members.front();
        int pc = rel.class_of(tree.parent(first));
        for (size_t k = 1; k < members.size(); ++k) {
            if (rel.class_of(tree.parent(members[k])) != pc)
                rep.compat_violations.emplace_back(tree.id_of(first), tree.id_of(members[k]));
        }
    }

    // clause (iii): quotient order must be a normal tree order
    if (rep.compatible()) {
        rep.quotient_checked = true;
        rep.quotient_normal = quotient_tree(rel).normal;
    }

    // dispute list and clause (iv)
    auto desc = descendant_classes(rel);
    for (int cls = 0; cls < rel.class_count(); ++cls) {
        const auto& members = rel.class_members(cls);
        if (members.size() < 2) continue;
        int base_level = tree.node(members.front()).level;
        for (int s : members) {
            // strict descendants of s in index order (level, id)
            std::vector<int> above;
            for (int u = 0; u < tree.size(); ++u)
                if (u != s && tree.node(u).level > base_level && tree.is_ancestor(s, u))
                    above.push_back(u);
            for (int t : members) {
                if (t == s) continue;
                for (int sp : above) {
                    if (desc[t].count(rel.class_of(sp))) continue;
                    Dispute d;
                    d.s = tree.id_of(s);
                    d.s_prime = tree.id_of(sp);
                    d.t = tree.id_of(t);
                    if (tree.node(sp).level == base_level + 1) {
                        d.witnessed_at_successor = true;
                    } else {
                        int anc = tree.ancestor_at(sp, base_level + 1);
                        d.witnessed_at_successor = desc[t].count(rel.class_of(anc)) == 0;
                    }
                    if (!d.witnessed_at_successor) rep.honest = false;
                    rep.disputes.push_back(std::move(d));
                }
            }
        }
    }
    return rep;
}

const char* grade_name(NicenessGrade g) {
    switch (g) {
        case NicenessGrade::nice: return "nice";
        case NicenessGrade::almost_nice: return "almost_nice";
        case NicenessGrade::honest_only: return "honest_only";
        case NicenessGrade::dishonest: return "dishonest";
    }
    return "?";
}

GradeResult niceness_grade(const Ter& rel, int m) {
    const LevelledTree& tree = rel.tree();
    TerReport rep = validate_ter(rel);
    GradeResult out;
    out.m = m;
    out.honest = rep.honest;
    out.no_disputes = rep.disputes.empty();
    out.no_successor_disputes = true;
    for (const auto& d : rep.disputes) {
        int lvl = tree.node(tree.index_of(d.s)).level;
        if (!tree.is_limit_level(lvl)) out.no_successor_disputes = false;
    }
    if (!out.honest)
        out.grade = NicenessGrade::dishonest;
    else if (out.no_disputes)
        out.grade = NicenessGrade::nice;
    else if (out.no_successor_disputes)
        out.grade = NicenessGrade::almost_nice;
    else
        out.grade = NicenessGrade::honest_only;

    // m-nice: nice, and between any two levels the class projections are
    // (>= m)-to-one onto every point of the projected class
    out.m_nice = out.no_disputes;
    if (out.m_nice) {
        for (int cls = 0; cls < rel.class_count() && out.m_nice; ++cls) {
            const auto& members = rel.class_members(cls);
            int beta = tree.node(members.front()).level;
            for (int alpha = 0; alpha < beta && out.m_nice; ++alpha) {
                std::map<int, int> hits; // ancestor node -> member count
                for (int s : members) ++hits[tree.ancestor_at(s, alpha)];
                int proj_class = rel.class_of(tree.ancestor_at(members.front(), alpha));
                for (int r : rel.class_members(proj_class)) {
                    auto it = hits.find(r);
                    if (it == hits.end() || it->second < m) {
                        out.m_nice = false;
                        break;
                    }
                }
            }
        }
    }
    return out;
}

QuotientResult quotient_tree(const Ter& rel) {
    const LevelledTree& tree = rel.tree();
    // well-definedness of quotient parents needs clause (ii)
    for (int cls = 0; cls < rel.class_count(); ++cls) {
        const auto& members = rel.class_members(cls);
        if (members.size() < 2 || tree.node(members.front()).level == 0) continue;
        int pc = rel.class_of(tree.parent(members.front()));
        for (int s : members)
            if (rel.class_of(tree.parent(s)) != pc)
                throw std::invalid_argument("quotient undefined: relation not order-compatible");
    }

    std::vector<NodeSpec> specs;
    for (int cls = 0; cls < rel.class_count(); ++cls) {
        int first = rel.class_members(cls).front();
        NodeSpec s;
        s.id = tree.id_of(first);
        s.level = tree.node(first).level;
        if (tree.parent(first) >= 0) s.parent = rel.class_rep(rel.class_of(tree.parent(first)));
        specs.push_back(std::move(s));
    }
    QuotientResult out{LevelledTree(tree.name() + "/" + rel.name(), tree.limit_levels(), specs),
                       {},
                       {}};
    for (int i = 0; i < tree.size(); ++i)
        out.class_of[tree.id_of(i)] = rel.class_rep(rel.class_of(i));
    out.normal = validate_normal(out.tree, true);
    return out;
}

AtomBits pi_element(const Ter& rel, const FiniteBooleanAlgebra& algebra, int node) {
    AtomBits out = algebra.zero();
    for (int s : rel.class_members(rel.class_of(node))) out |= algebra.embed(rel.tree().id_of(s));
    return out;
}

RepresentedSubalgebra represented_subalgebra(const Ter& rel) {
    FiniteBooleanAlgebra algebra = ro_algebra(rel.tree());
    std::vector<AtomBits> gens;
    gens.reserve(rel.class_count());
    for (int cls = 0; cls < rel.class_count(); ++cls) {
        AtomBits g = algebra.zero();
        for (int s : rel.class_members(cls)) g |= algebra.embed(rel.tree().id_of(s));
        gens.push_back(std::move(g));
    }
    SubalgebraPartition part = complete_subalgebra(algebra, gens);
    return RepresentedSubalgebra{std::move(algebra), std::move(part)};
}

ProjectionComparison projection_vs_h(const Ter& rel) {
    const LevelledTree& tree = rel.tree();
    RepresentedSubalgebra repr = represented_subalgebra(rel);
    ProjectionComparison out;
    out.agree_everywhere = true;
    out.agree_on_successor_levels = true;
    for (int i = 0; i < tree.size(); ++i) {
        AtomBits pi = pi_element(rel, repr.algebra, i);
        AtomBits h = upper_projection(repr.partition, repr.algebra.embed(tree.id_of(i)));
        if (pi != h) {
            out.disagreements.push_back(tree.id_of(i));
            out.agree_everywhere = false;
            if (!tree.is_limit_level(tree.node(i).level)) out.agree_on_successor_levels = false;
        }
    }
    GradeResult grade = niceness_grade(rel, 2);
    out.matches_nice = out.agree_everywhere == grade.no_disputes;
    out.matches_almost_nice = out.agree_on_successor_levels == grade.no_successor_disputes;
    return out;
}

TraceDensityResult class_trace_density(const Ter& rel, int limit_level, int resolution) {
    const LevelledTree& tree = rel.tree();
    if (!tree.is_limit_level(limit_level))
        throw std::invalid_argument("level " + std::to_string(limit_level) + " is not a limit level");
    if (resolution < 0 || resolution >= limit_level)
        throw std::invalid_argument("resolution must lie below the limit level");

    TraceDensityResult out;
    for (int cls : rel.level_classes(limit_level)) {
        const auto& members = rel.class_members(cls);
        TraceDensityVerdict v;
        v.class_rep = rel.class_rep(cls);
        std::set<int> witness_cones;
        for (int s : members) witness_cones.insert(tree.ancestor_at(s, resolution));
        for (int s : members) {
            // branches through limit_level-1 whose chain is trace equivalent
            // to the chain of s: by order-compatibility these are exactly the
            // members of the parent's class
            for (int y : rel.class_members(rel.class_of(tree.parent(s)))) {
                if (witness_cones.count(tree.ancestor_at(y, resolution))) continue;
                v.pass = false;
                v.failures.push_back({tree.id_of(s), tree.id_of(y)});
            }
        }
        if (!v.pass) out.all_pass = false;
        out.verdicts.push_back(std::move(v));
    }
    return out;
}

DenseSplitResult dense_split(const Ter& rel, int limit_level, uint64_t seed) {
    const LevelledTree& tree = rel.tree();
    if (!tree.is_limit_level(limit_level))
        throw std::invalid_argument("level " + std::to_string(limit_level) + " is not a limit level");
    int resolution = limit_level - 1; // module default: level immediately below

    // color each class on the limit level in two parts, both parts hitting
    // every resolution cone the class hits
    std::map<std::string, int> color;
    int class_seq = 0;
    for (int cls : rel.level_classes(limit_level)) {
        const auto& members = rel.class_members(cls);
        std::map<int, std::vector<int>> by_cone; // resolution ancestor -> members
        for (int s : members) by_cone[tree.ancestor_at(s, resolution)].push_back(s);
        for (const auto& [cone, group] : by_cone) {
            if (group.size() < 2)
                throw std::invalid_argument("unsplittable class " + rel.class_rep(cls) +
                                            ": only " + std::to_string(group.size()) +
                                            " member(s) above " + tree.id_of(cone));
        }
        int gidx = 0;
        for (const auto& [cone, group] : by_cone) {
            int start = static_cast<int>(mix_seed(seed, (uint64_t)class_seq * 7919 + gidx) & 1);
            for (size_t k = 0; k < group.size(); ++k)
                color[tree.id_of(group[k])] = (start + static_cast<int>(k)) % 2;
            ++gidx;
        }
        ++class_seq;
    }

    // refined relation: unchanged up to the limit level, color-refined above
    std::vector<int> class_of(tree.size());
    std::map<std::pair<int, int>, int> split_ids;
    int next = rel.class_count();
    for (int i = 0; i < tree.size(); ++i) {
        if (tree.node(i).level <= limit_level) {
            class_of[i] = rel.class_of(i);
        } else {
            int c = color.at(tree.id_of(tree.ancestor_at(i, limit_level)));
            auto key = std::make_pair(rel.class_of(i), c);
            auto it = split_ids.find(key);
            if (it == split_ids.end()) it = split_ids.emplace(key, next++).first;
            class_of[i] = it->second;
        }
    }
    Ter refined = Ter::from_class_ids(rel.tree_ptr(), class_of, rel.name() + "~");
    QuotientResult quotient = quotient_tree(refined);
    DenseSplitResult out{std::move(refined), std::move(color), std::move(quotient), {}, false};

    // color-swap automorphism of the quotient: exchanges the two refined
    // classes inside each original class above the limit level
    const LevelledTree& q = out.quotient.tree;
    std::vector<int> perm(q.size());
    for (int i = 0; i < q.size(); ++i) perm[i] = i;
    bool matched = true;
    const Ter& fine = out.refined;
    std::map<std::pair<int, int>, int> part_class; // (orig class, color) -> fine class
    for (int cls = 0; cls < fine.class_count(); ++cls) {
        int first = fine.class_members(cls).front();
        if (tree.node(first).level <= limit_level) continue;
        int orig = rel.class_of(first);
        int c = out.color.at(tree.id_of(tree.ancestor_at(first, limit_level)));
        part_class[{orig, c}] = cls;
    }
    for (const auto& [key, cls] : part_class) {
        auto other = part_class.find({key.first, 1 - key.second});
        if (other == part_class.end()) {
            matched = false;
            continue;
        }
        perm[q.index_of(fine.class_rep(cls))] = q.index_of(fine.class_rep(other->second));
    }
    out.swap.perm = perm;
    out.swap_ok = matched && is_tree_automorphism(q, perm);
    return out;
}

namespace {

// canonical isomorphism between cones of equal shape: children are matched
// signature group by signature group in id order
void canonical_iso_rec(const LevelledTree& tree, int a, int b, std::map<int, int>& out) {
    out[a] = b;
    auto ca = tree.children(a);
    auto cb = tree.children(b);
    auto by_sig = [&tree](std::vector<int>& v) {
        std::stable_sort(v.begin(), v.end(), [&tree](int x, int y) {
            if (tree.signature(x) != tree.signature(y)) return tree.signature(x) < tree.signature(y);
            return tree.id_of(x) < tree.id_of(y);
        });
    };
    by_sig(ca);
    by_sig(cb);
    if (ca.size() != cb.size()) throw std::invalid_argument("cones not isomorphic");
    for (size_t k = 0; k < ca.size(); ++k) {
        if (tree.signature(ca[k]) != tree.signature(cb[k]))
            throw std::invalid_argument("cones not isomorphic");
        canonical_iso_rec(tree, ca[k], cb[k], out);
    }
}

std::map<int, int> canonical_iso(const LevelledTree& tree, int a, int b) {
    std::map<int, int> out;
    canonical_iso_rec(tree, a, b, out);
    return out;
}

std::map<int, int> invert_map(const std::map<int, int>& m) {
    std::map<int, int> out;
    for (auto [k, v] : m) out[v] = k;
    return out;
}

} // namespace

const std::map<int, int>& ConeIsoFamily::at(int s, int t) const {
    auto it = maps.find({s, t});
    if (it == maps.end()) throw std::invalid_argument("no isomorphism for the given pair");
    return it->second;
}

TwoNiceResult homogeneous_2nice(TreePtr tree_ptr, uint64_t seed) {
    const LevelledTree& tree = *tree_ptr;
    if (tree.level_nodes(0).size() != 1)
        throw std::invalid_argument("homogeneous_2nice needs a unique root");
    for (int l = 0; l < tree.height(); ++l) {
        const auto& nodes = tree.level_nodes(l);
        for (int i : nodes) {
            if (tree.signature(i) != tree.signature(nodes.front()))
                throw std::invalid_argument("tree is not level-homogeneous at level " +
                                            std::to_string(l));
            if (l < tree.height() - 1 && tree.children(i).size() < 4)
                throw std::invalid_argument("node " + tree.id_of(i) +
                                            " has fewer than 4 children");
        }
    }

    std::vector<int> class_of(tree.size(), -1);
    ConeIsoFamily family;
    int root = tree.level_nodes(0).front();
    class_of[root] = 0;
    int next_class = 1;

    struct ClassInfo {
        std::vector<int> members; // sorted by id
        int rep;                  // also the class with respect to which phi maps are stored
    };
    std::vector<ClassInfo> current{{{root}, root}};
    family.maps[{root, root}] = canonical_iso(tree, root, root);

    for (int level = 0; level + 1 < tree.height(); ++level) {
        std::vector<ClassInfo> next_level;
        for (const auto& D : current) {
            int r = D.rep;
            std::vector<int> kids = tree.children(r);
            std::sort(kids.begin(), kids.end(),
                      [&tree](int a, int b) { return tree.id_of(a) < tree.id_of(b); });
            // two alternating parts of the representative's successors, on
            // every level: a branch-determined limit level (where the
            // extension would be forced) cannot occur under the 4-fold
            // splitting precondition
            constexpr int nparts = 2;
            int start = static_cast<int>(mix_seed(seed, (uint64_t)r * 2654435761u) & 1);
            std::map<int, int> part_of; // child of r -> part
            for (size_t k = 0; k < kids.size(); ++k)
                part_of[kids[k]] = (start + static_cast<int>(k)) % nparts;

            for (int part = 0; part < nparts; ++part) {
                ClassInfo C;
                for (int s : D.members) {
                    const auto& to_rep = family.at(s, r);
                    for (int u : tree.children(s))
                        if (part_of.at(to_rep.at(u)) == part) C.members.push_back(u);
                }
                std::sort(C.members.begin(), C.members.end(), [&tree](int a, int b) {
                    return tree.id_of(a) < tree.id_of(b);
                });
                // representative: least child of r inside the part
                C.rep = -1;
                for (int u : C.members)
                    if (tree.parent(u) == r) {
                        C.rep = u;
                        break;
                    }
                int cls = next_class++;
                for (int u : C.members) class_of[u] = cls;

                // bridge isomorphisms between the representative's children
                // inside the part, then phi maps towards the class rep
                std::map<int, std::map<int, int>> omega; // child of r -> iso onto C.rep's twin
                int rho = C.rep;
                for (auto [u, p] : part_of)
                    if (p == part) omega[u] = canonical_iso(tree, u, rho);
                for (int u : C.members) {
                    int s = tree.parent(u);
                    const auto& s_to_r = family.at(s, r);
                    int a = s_to_r.at(u);
                    std::map<int, int> to_rho;
                    const auto& bridge = omega.at(a);
                    for (int x = 0; x < tree.size(); ++x) {
                        if (!tree.is_ancestor(u, x)) continue;
                        to_rho[x] = bridge.at(s_to_r.at(x));
                    }
                    family.maps[{u, rho}] = to_rho;
                    family.maps[{rho, u}] = invert_map(to_rho);
                }
                for (int u : C.members) {
                    const auto& u_to_rho = family.at(u, rho);
                    for (int w : C.members) {
                        if (u == w && u != rho) {
                            std::map<int, int> idm;
                            for (auto [x, y] : u_to_rho) idm[x] = x;
                            family.maps[{u, u}] = std::move(idm);
                            continue;
                        }
                        if (u == rho || w == rho) continue;
                        const auto& rho_to_w = family.at(rho, w);
                        std::map<int, int> comp;
                        for (auto [x, y] : u_to_rho) comp[x] = rho_to_w.at(y);
                        family.maps[{u, w}] = std::move(comp);
                    }
                }
                next_level.push_back(std::move(C));
            }
        }
        current = std::move(next_level);
    }
    return TwoNiceResult{Ter::from_class_ids(tree_ptr, class_of, "2nice"), std::move(family)};
}

Ter restrict_ter(const Ter& rel, const std::set<int>& levels) {
    auto restricted = std::make_shared<LevelledTree>(restrict_levels(rel.tree(), levels));
    std::vector<int> class_of(restricted->size());
    for (int i = 0; i < restricted->size(); ++i)
        class_of[i] = rel.class_of(rel.tree().index_of(restricted->id_of(i)));
    return Ter::from_class_ids(restricted, class_of, rel.name() + "|C");
}

Ter relativize_ter(const Ter& rel, const std::string& node_id) {
    auto cone = std::make_shared<LevelledTree>(relativize(rel.tree(), node_id));
    std::vector<int> class_of(cone->size());
    for (int i = 0; i < cone->size(); ++i)
        class_of[i] = rel.class_of(rel.tree().index_of(cone->id_of(i)));
    return Ter::from_class_ids(cone, class_of, rel.name() + "(" + node_id + ")");
}

} // namespace treelab
