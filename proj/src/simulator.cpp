#include "treelab/simulator.hpp"

#include "treelab/rng.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace treelab {

namespace {

namespace fs = std::filesystem;

std::string child_id(const std::string& parent, int j) {
    if (j < 0 || j >= 26) throw std::invalid_argument("splitting beyond 26 not supported");
    return parent + static_cast<char>('a' + j);
}

int child_index_of(const std::string& parent, const std::string& child) {
    if (child.size() != parent.size() + 1 || child.compare(0, parent.size(), parent) != 0)
        throw std::invalid_argument("node " + child + " is not an immediate child of " + parent);
    return child.back() - 'a';
}

std::string resolve_payload(const ConstructionSchedule& schedule, const std::string& payload) {
    fs::path p(payload);
    if (p.is_absolute() || schedule.base_dir.empty()) return payload;
    return (fs::path(schedule.base_dir) / p).string();
}

Calc52Blocks parse_blockspec(const std::string& spec) {
    Calc52Blocks blocks;
    std::istringstream outer(spec);
    std::string block;
    while (std::getline(outer, block, '|')) {
        std::vector<std::vector<int>> subs;
        std::istringstream inner(block);
        std::string sub;
        while (std::getline(inner, sub, ';')) {
            std::vector<int> indices;
            for (const auto& tok : io::split_commas(sub)) indices.push_back(std::stoi(tok));
            if (indices.empty()) throw ParseError("empty sub-block in " + spec);
            subs.push_back(std::move(indices));
        }
        if (subs.empty()) throw ParseError("empty block in " + spec);
        blocks.push_back(std::move(subs));
    }
    if (blocks.empty()) throw ParseError("empty block spec");
    std::set<int> all;
    int n = 0;
    for (const auto& b : blocks)
        for (const auto& s : b)
            for (int i : s) {
                if (!all.insert(i).second) throw ParseError("index repeated in block spec");
                n = std::max(n, i + 1);
            }
    if (static_cast<int>(all.size()) != n) throw ParseError("block spec does not cover 0..n-1");
    return blocks;
}

std::string blockspec_to_string(const Calc52Blocks& blocks) {
    std::string out;
    for (size_t b = 0; b < blocks.size(); ++b) {
        if (b) out += "|";
        for (size_t s = 0; s < blocks[b].size(); ++s) {
            if (s) out += ";";
            for (size_t i = 0; i < blocks[b][s].size(); ++i) {
                if (i) out += ",";
                out += std::to_string(blocks[b][s][i]);
            }
        }
    }
    return out;
}

OracleEvent::Kind event_kind_from(const std::string& s) {
    if (s == "seal") return OracleEvent::Kind::seal_antichain;
    if (s == "kill-ter") return OracleEvent::Kind::kill_ter;
    if (s == "kill-auto") return OracleEvent::Kind::kill_automorphism;
    if (s == "preserve") return OracleEvent::Kind::preserve_ter;
    if (s == "noop") return OracleEvent::Kind::noop;
    throw ParseError("unknown limit event " + s);
}

} // namespace

const char* event_name(OracleEvent::Kind k) {
    switch (k) {
        case OracleEvent::Kind::seal_antichain: return "seal";
        case OracleEvent::Kind::kill_ter: return "kill-ter";
        case OracleEvent::Kind::kill_automorphism: return "kill-auto";
        case OracleEvent::Kind::preserve_ter: return "preserve";
        case OracleEvent::Kind::noop: return "noop";
    }
    return "?";
}

ConstructionSchedule parse_schedule(std::istream& in, std::string base_dir) {
    ConstructionSchedule s;
    s.base_dir = std::move(base_dir);
    std::string line;
    bool header = false;
    int calc = 0, constr = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::vector<std::string> toks;
        std::string tok;
        while (ls >> tok) toks.push_back(tok);
        if (toks.empty() || toks[0][0] == '#') continue;
        if (!header) {
            if (toks[0] != "schedule" || toks.size() != 7 || toks[2] != "seed" ||
                toks[4] != "density")
                throw ParseError("expected: schedule <name> seed <n> density <offset> <c>");
            s.name = toks[1];
            s.seed = std::stoull(toks[3]);
            s.density_offset = std::stoi(toks[5]);
            s.multiplicity = std::stoi(toks[6]);
            if (s.density_offset < 1 || s.multiplicity < 1) throw ParseError("bad density/c");
            header = true;
            continue;
        }
        Stage st;
        if (toks[0] == "grow" && toks.size() == 3) {
            st.kind = Stage::Kind::grow;
            st.levels = std::stoi(toks[1]);
            st.splitting = std::stoi(toks[2]);
            if (st.levels < 1 || st.splitting < 2) throw ParseError("bad grow line");
            ++constr;
        } else if (toks[0] == "limit" && toks.size() == 3) {
            st.kind = Stage::Kind::limit;
            st.event.kind = event_kind_from(toks[1]);
            st.event.payload = toks[2];
            if (st.event.kind != OracleEvent::Kind::noop && st.event.payload == "-")
                throw ParseError("event " + toks[1] + " needs a payload file");
            ++constr;
        } else if (toks[0] == "redgreen" && toks.size() == 2) {
            st.kind = Stage::Kind::red_green;
            st.splitting = std::stoi(toks[1]);
            if (st.splitting < 2) throw ParseError("bad redgreen line");
            ++constr;
        } else if (toks[0] == "calc52" && toks.size() == 2) {
            st.kind = Stage::Kind::calc52;
            st.blocks = parse_blockspec(toks[1]);
            ++calc;
        } else {
            throw ParseError("unknown schedule line: " + line);
        }
        s.stages.push_back(std::move(st));
    }
    if (!header) throw ParseError("missing schedule header");
    if (s.stages.empty()) throw ParseError("schedule has no stages");
    if (calc > 0 && constr > 0)
        throw ParseError("calc52 stages cannot be mixed with construction stages");
    if (constr > 0 && s.stages.front().kind != Stage::Kind::grow)
        throw ParseError("construction schedules start with a grow stage");
    return s;
}

ConstructionSchedule load_schedule(const std::string& path) {
    std::istringstream in(io::read_file(path));
    return parse_schedule(in, fs::path(path).parent_path().string());
}

// ---------------------------------------------------------------------------
// red/green step and the local successor calculus

RedGreenResult red_green_stage(const Ter& rel, int limit_level, int resolution, int splitting,
                               uint64_t seed) {
    TreePtr tree_ptr = rel.tree_ptr();
    const LevelledTree& tree = *tree_ptr;
    if (limit_level != tree.height() - 1 || !tree.is_limit_level(limit_level))
        throw std::invalid_argument("red/green stage needs the frontier on a limit level");
    if (resolution < 0 || resolution >= limit_level)
        throw std::invalid_argument("resolution must lie below the limit level");

    // two parts per class, both hitting every resolution cone the class hits
    std::map<std::string, int> colors;
    int seq = 0;
    for (int cls : rel.level_classes(limit_level)) {
        std::map<int, std::vector<int>> by_cone;
        for (int s : rel.class_members(cls))
            by_cone[tree.ancestor_at(s, resolution)].push_back(s);
        for (auto& [cone, group] : by_cone) {
            if (group.size() < 2)
                throw std::invalid_argument("unsplittable class " + rel.class_rep(cls) +
                                            " above " + tree.id_of(cone));
        }
        int gidx = 0;
        for (auto& [cone, group] : by_cone) {
            int start = static_cast<int>(mix_seed(seed, (uint64_t)seq * 8191 + gidx) & 1);
            for (size_t k = 0; k < group.size(); ++k)
                colors[tree.id_of(group[k])] = (start + static_cast<int>(k)) % 2;
            ++gidx;
        }
        ++seq;
    }

    // grow one level; new classes pair same-indexed successors across
    // equivalent nodes of the same color
    std::vector<NodeSpec> specs;
    for (int i = 0; i < tree.size(); ++i)
        specs.push_back({tree.id_of(i), tree.node(i).level,
                         tree.parent(i) >= 0 ? tree.id_of(tree.parent(i)) : ""});
    for (int f : tree.level_nodes(limit_level))
        for (int j = 0; j < splitting; ++j)
            specs.push_back({child_id(tree.id_of(f), j), limit_level + 1, tree.id_of(f)});
    auto grown =
        std::make_shared<LevelledTree>(LevelledTree(tree.name(), tree.limit_levels(), specs));

    std::vector<LevelClass> classes = rel.nontrivial_classes();
    for (int cls : rel.level_classes(limit_level)) {
        for (int color = 0; color < 2; ++color) {
            for (int j = 0; j < splitting; ++j) {
                LevelClass lc;
                lc.level = limit_level + 1;
                for (int s : rel.class_members(cls))
                    if (colors.at(tree.id_of(s)) == color)
                        lc.members.push_back(child_id(tree.id_of(s), j));
                if (lc.members.size() > 1) classes.push_back(std::move(lc));
            }
        }
    }
    RedGreenResult out{grown, Ter::from_classes(grown, classes, rel.name()), std::move(colors), {}};

    const Ter& ext = out.rel;
    bool partition_ok = true, transfer_ok = true, separation_ok = true;
    for (int s : tree.level_nodes(limit_level)) {
        std::set<int> kid_classes;
        for (int j = 0; j < splitting; ++j)
            kid_classes.insert(ext.class_of(grown->index_of(child_id(tree.id_of(s), j))));
        if (static_cast<int>(kid_classes.size()) != splitting) partition_ok = false;
        for (int t : tree.level_nodes(limit_level)) {
            if (s == t) continue;
            bool equiv = rel.equivalent(s, t);
            bool same_color = out.colors.at(tree.id_of(s)) == out.colors.at(tree.id_of(t));
            for (int j = 0; j < splitting; ++j) {
                int cs = ext.class_of(grown->index_of(child_id(tree.id_of(s), j)));
                bool found = false;
                for (int k = 0; k < splitting; ++k)
                    if (ext.class_of(grown->index_of(child_id(tree.id_of(t), k))) == cs)
                        found = true;
                if (equiv && same_color && !found) transfer_ok = false;
                if ((!equiv || !same_color) && found) separation_ok = false;
            }
        }
    }
    out.checks.add(partition_ok, "redgreen.partition",
                   "successor sets split into distinct classes");
    out.checks.add(transfer_ok, "redgreen.transfer", "same color transfers successors");
    out.checks.add(separation_ok, "redgreen.separation",
                   "different colors never share successors");
    return out;
}

Calc52State calc52_init(const std::string& name) {
    std::vector<NodeSpec> root{{"r", 0, ""}};
    auto tree = std::make_shared<LevelledTree>(LevelledTree(name, {}, root));
    auto comparison = std::make_shared<LevelledTree>(LevelledTree(name + ".q", {}, root));
    Calc52State st;
    st.tree = tree;
    st.eq = Ter::from_classes(tree, {}, "eq");
    st.fine = Ter::from_classes(tree, {}, "fine");
    st.comparison = comparison;
    st.phi["r"] = "r";
    return st;
}

Calc52State successor_calculus_52(const Calc52State& state, const Calc52Blocks& blocks) {
    int n = 0;
    for (const auto& b : blocks)
        for (const auto& s : b) n += static_cast<int>(s.size());
    int k = static_cast<int>(blocks.size());
    if (k < 2) throw std::invalid_argument("need at least two blocks");
    std::vector<int> block_of(n, -1);
    std::vector<std::pair<int, int>> sub_of(n, {-1, -1});
    for (int b = 0; b < k; ++b)
        for (size_t s = 0; s < blocks[b].size(); ++s)
            for (int i : blocks[b][s]) {
                if (i < 0 || i >= n || block_of[i] != -1)
                    throw std::invalid_argument("malformed block partition");
                block_of[i] = b;
                sub_of[i] = {b, static_cast<int>(s)};
            }

    const LevelledTree& tree = *state.tree;
    int top = tree.height() - 1;

    std::vector<NodeSpec> specs;
    for (int i = 0; i < tree.size(); ++i)
        specs.push_back({tree.id_of(i), tree.node(i).level,
                         tree.parent(i) >= 0 ? tree.id_of(tree.parent(i)) : ""});
    for (int f : tree.level_nodes(top))
        for (int j = 0; j < n; ++j)
            specs.push_back({child_id(tree.id_of(f), j), top + 1, tree.id_of(f)});
    auto grown = std::make_shared<LevelledTree>(LevelledTree(tree.name(), {}, specs));

    const LevelledTree& comp = *state.comparison;
    std::vector<NodeSpec> cspecs;
    for (int i = 0; i < comp.size(); ++i)
        cspecs.push_back({comp.id_of(i), comp.node(i).level,
                          comp.parent(i) >= 0 ? comp.id_of(comp.parent(i)) : ""});
    for (int f : comp.level_nodes(top))
        for (int j = 0; j < k; ++j)
            cspecs.push_back({child_id(comp.id_of(f), j), top + 1, comp.id_of(f)});
    auto comp_grown = std::make_shared<LevelledTree>(LevelledTree(comp.name(), {}, cspecs));

    Calc52State out;
    out.tree = grown;
    out.comparison = comp_grown;
    out.step_blocks = state.step_blocks;
    out.step_blocks.push_back(blocks);

    std::vector<LevelClass> eq_classes = state.eq.nontrivial_classes();
    std::vector<LevelClass> fine_classes = state.fine.nontrivial_classes();
    for (int cls = 0; cls < state.eq.class_count(); ++cls) {
        if (state.eq.class_level(cls) != top) continue;
        for (int b = 0; b < k; ++b) {
            LevelClass lc;
            lc.level = top + 1;
            for (int s : state.eq.class_members(cls))
                for (int j = 0; j < n; ++j)
                    if (block_of[j] == b) lc.members.push_back(child_id(tree.id_of(s), j));
            if (lc.members.size() > 1) eq_classes.push_back(std::move(lc));
        }
    }
    for (int cls = 0; cls < state.fine.class_count(); ++cls) {
        if (state.fine.class_level(cls) != top) continue;
        std::map<std::pair<int, int>, LevelClass> per_sub;
        for (int s : state.fine.class_members(cls))
            for (int j = 0; j < n; ++j) {
                auto& lc = per_sub[sub_of[j]];
                lc.level = top + 1;
                lc.members.push_back(child_id(tree.id_of(s), j));
            }
        for (auto& [key, lc] : per_sub)
            if (lc.members.size() > 1) fine_classes.push_back(std::move(lc));
    }
    out.eq = Ter::from_classes(grown, eq_classes, "eq");
    out.fine = Ter::from_classes(grown, fine_classes, "fine");

    out.phi = state.phi;
    for (int f : tree.level_nodes(top))
        for (int j = 0; j < n; ++j)
            out.phi[child_id(tree.id_of(f), j)] =
                child_id(state.phi.at(tree.id_of(f)), block_of[j]);
    return out;
}

std::string calc52_family_apply(const Calc52State& state, const std::string& s,
                                const std::string& t, const std::string& w) {
    const LevelledTree& tree = *state.tree;
    int si = tree.index_of(s), ti = tree.index_of(t), wi = tree.index_of(w);
    if (tree.node(si).level != tree.node(ti).level)
        throw std::invalid_argument("family pairs must share a level");
    auto cs = tree.chain(si);
    auto ct = tree.chain(ti);
    auto cw = tree.chain(wi);
    std::string out = "r";
    for (size_t lvl = 1; lvl < cw.size(); ++lvl) {
        int eps = child_index_of(tree.id_of(tree.parent(cw[lvl])), tree.id_of(cw[lvl]));
        int img = eps;
        if (lvl < cs.size()) {
            int a = child_index_of(tree.id_of(tree.parent(cs[lvl])), tree.id_of(cs[lvl]));
            int b = child_index_of(tree.id_of(tree.parent(ct[lvl])), tree.id_of(ct[lvl]));
            if (eps == a)
                img = b;
            else if (eps == b)
                img = a;
        }
        out = child_id(out, img);
    }
    return out;
}

Report calc52_local_checks(const Calc52State& state) {
    Report rep;
    const LevelledTree& tree = *state.tree;

    bool refines_ok = true;
    for (int cls = 0; cls < state.fine.class_count(); ++cls) {
        const auto& members = state.fine.class_members(cls);
        for (int m : members)
            if (!state.eq.equivalent(members.front(), m)) refines_ok = false;
    }
    rep.add(refines_ok, "calc52.refines", "fine relation refines the coarse one");

    bool invariant_ok = true;
    for (int cls = 0; cls < state.eq.class_count(); ++cls) {
        const auto& members = state.eq.class_members(cls);
        for (int m : members)
            if (state.phi.at(tree.id_of(m)) != state.phi.at(tree.id_of(members.front())))
                invariant_ok = false;
    }
    rep.add(invariant_ok, "calc52.phi-invariant", "quotient map constant on classes");

    // materialize each family automorphism level by level: the map acts by a
    // child-index transposition per level along the chains of s and t, so
    // image(child j of u) = child tau(j) of image(u)
    bool maps_ok = true, autos_ok = true;
    std::vector<int> child_index(tree.size(), -1);
    for (int u = 0; u < tree.size(); ++u) {
        const auto& kids = tree.children(u);
        for (size_t j = 0; j < kids.size(); ++j) child_index[kids[j]] = static_cast<int>(j);
    }
    for (int lvl = 0; lvl < tree.height(); ++lvl) {
        for (int s : tree.level_nodes(lvl)) {
            auto cs = tree.chain(s);
            for (int t : tree.level_nodes(lvl)) {
                auto ct = tree.chain(t);
                std::vector<int> perm(tree.size(), -1);
                for (int w = 0; w < tree.size(); ++w) {
                    if (tree.parent(w) < 0) {
                        perm[w] = w;
                        continue;
                    }
                    int wl = tree.node(w).level;
                    int eps = child_index[w];
                    int img = eps;
                    if (wl < static_cast<int>(cs.size())) {
                        int a = child_index[cs[wl]];
                        int b = child_index[ct[wl]];
                        if (eps == a)
                            img = b;
                        else if (eps == b)
                            img = a;
                    }
                    perm[w] = tree.children(perm[tree.parent(w)])[img];
                }
                if (perm[s] != t) maps_ok = false;
                if (!is_tree_automorphism(tree, perm)) autos_ok = false;
            }
        }
    }
    rep.add(maps_ok, "calc52.family-maps", "phi_st sends s to t for every pair");
    rep.add(autos_ok, "calc52.family-autos", "every phi_st is a prefix automorphism");

    const LevelledTree& comp = *state.comparison;
    bool iso_ok = state.eq.class_count() == comp.size();
    std::set<std::string> hit;
    for (int cls = 0; cls < state.eq.class_count() && iso_ok; ++cls) {
        int first = state.eq.class_members(cls).front();
        const std::string& img = state.phi.at(tree.id_of(first));
        if (!comp.has_node(img) ||
            comp.node(comp.index_of(img)).level != tree.node(first).level) {
            iso_ok = false;
            break;
        }
        if (!hit.insert(img).second) iso_ok = false;
        if (tree.parent(first) >= 0) {
            const std::string& pimg = state.phi.at(tree.id_of(tree.parent(first)));
            if (comp.id_of(comp.parent(comp.index_of(img))) != pimg) iso_ok = false;
        }
    }
    if (iso_ok && hit.size() != static_cast<size_t>(comp.size())) iso_ok = false;
    rep.add(iso_ok, "calc52.quotient-iso", "quotient prefix isomorphic to the comparison prefix");
    return rep;
}

namespace {

// lowest common ancestor of two same-level nodes
int meet_of(const LevelledTree& tree, int x, int y) {
    while (x != y) {
        x = tree.parent(x);
        y = tree.parent(y);
    }
    return x;
}

void mark_up_to(std::vector<bool>& flag, const LevelledTree& tree, int from, int stop) {
    for (int cur = from;; cur = tree.parent(cur)) {
        flag[cur] = false;
        if (cur == stop || cur < 0) break;
    }
}

} // namespace

DifferenceReport classify_difference(const Ter& base, const Ter& proposed,
                                     const std::string& node) {
    const LevelledTree& tree = base.tree();
    if (proposed.tree().size() != tree.size() || proposed.tree().name() != tree.name())
        throw std::invalid_argument("relations live on different trees");
    int root = tree.index_of(node);
    DifferenceReport out;

    std::vector<std::vector<int>> cone_levels(tree.height());
    for (int i = 0; i < tree.size(); ++i)
        if (tree.is_ancestor(root, i)) cone_levels[tree.node(i).level].push_back(i);

    // agreement flags per cone: with the base relation, and with equality
    std::vector<bool> agrees_base(tree.size(), true), agrees_id(tree.size(), true);
    for (const auto& level : cone_levels) {
        for (size_t a = 0; a < level.size(); ++a) {
            for (size_t b = a + 1; b < level.size(); ++b) {
                int x = level[a], y = level[b];
                bool pe = proposed.equivalent(x, y);
                bool be = base.equivalent(x, y);
                if (pe && !be) {
                    out.kind = DifferenceCase::not_refinement;
                    out.witness_a = tree.id_of(x);
                    out.witness_b = tree.id_of(y);
                    return out;
                }
                int m = meet_of(tree, x, y);
                if (pe != be) mark_up_to(agrees_base, tree, m, root);
                if (pe) mark_up_to(agrees_id, tree, m, root);
            }
        }
    }

    // canonical antichain: minimal nodes with a proper cone where the
    // proposal coincides with the base or with equality; frontier nodes
    // carry no structure and do not count as witnesses
    auto proper = [&](int s) { return tree.node(s).level < tree.height() - 1; };
    std::vector<int> antichain;
    std::function<bool(int)> cover = [&](int s) -> bool {
        if (proper(s) && (agrees_base[s] || agrees_id[s])) {
            antichain.push_back(s);
            return true;
        }
        if (tree.children(s).empty() || !proper(s)) {
            out.witness_a = tree.id_of(s);
            return false;
        }
        for (int c : tree.children(s))
            if (!cover(c)) return false;
        return true;
    };
    if (!cover(root)) {
        out.kind = DifferenceCase::thin_refinement;
        return out;
    }

    // coherence across base-agreeing antichain members: branches are frontier
    // nodes, and a cross-cone equivalent pair of branches forces full
    // agreement between the branch relations on the union of the two cones;
    // violations refine the offending members (the witnessing antichain has
    // to be quite fine)
    const auto& frontier_level = cone_levels[tree.height() - 1];
    auto cross_violation = [&](int s, int t) {
        bool hypothesis = false, agree = true;
        for (int x : frontier_level) {
            if (!tree.is_ancestor(s, x)) continue;
            for (int y : frontier_level) {
                if (!tree.is_ancestor(t, y)) continue;
                if (proposed.equivalent(x, y)) hypothesis = true;
                if (proposed.equivalent(x, y) != base.equivalent(x, y)) agree = false;
            }
        }
        return hypothesis && !agree;
    };
    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t a = 0; a < antichain.size() && !changed; ++a) {
            for (size_t b = a + 1; b < antichain.size() && !changed; ++b) {
                int s = antichain[a], t = antichain[b];
                if (!agrees_base[s] || !agrees_base[t]) continue;
                if (!cross_violation(s, t)) continue;
                std::vector<int> refined;
                bool refinable = false;
                for (int m : antichain) {
                    bool offender = m == s || m == t;
                    bool can_split = !tree.children(m).empty() &&
                                     proper(tree.children(m).front());
                    if (offender && can_split) {
                        for (int c : tree.children(m)) refined.push_back(c);
                        refinable = true;
                    } else {
                        refined.push_back(m);
                    }
                }
                if (!refinable) {
                    out.kind = DifferenceCase::thin_refinement;
                    out.witness_a = tree.id_of(s);
                    out.witness_b = tree.id_of(t);
                    return out;
                }
                antichain = std::move(refined);
                changed = true;
            }
        }
    }
    out.kind = DifferenceCase::negligible;
    for (int s : antichain) out.antichain.push_back(tree.id_of(s));
    std::sort(out.antichain.begin(), out.antichain.end());
    return out;
}

const char* difference_name(DifferenceCase c) {
    switch (c) {
        case DifferenceCase::negligible: return "negligible";
        case DifferenceCase::thin_refinement: return "thin-refinement";
        case DifferenceCase::not_refinement: return "not-refinement";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// construction engine

namespace {

struct MaintainedRel {
    std::string name;
    std::vector<LevelClass> classes; // nontrivial classes only
    bool expect_nice = true;
};

struct BuildState {
    std::string name;
    std::vector<NodeSpec> specs;
    std::set<int> limits;
    TreePtr tree;
    std::vector<MaintainedRel> rels;
    std::set<int> club;
    std::optional<Calc52State> calc;

    void rebuild() { tree = std::make_shared<LevelledTree>(LevelledTree(name, limits, specs)); }

    Ter rel_ter(const MaintainedRel& r) const {
        return Ter::from_classes(tree, r.classes, r.name);
    }
};

void grow_one_level(BuildState& st, int splitting) {
    const LevelledTree& t = *st.tree;
    int top = t.height() - 1;
    for (auto& r : st.rels) {
        Ter rel = st.rel_ter(r);
        for (int cls : rel.level_classes(top)) {
            LevelClass lc;
            lc.level = top + 1;
            for (int s : rel.class_members(cls))
                for (int j = 0; j < splitting; ++j)
                    lc.members.push_back(child_id(t.id_of(s), j));
            if (lc.members.size() > 1) r.classes.push_back(std::move(lc));
        }
    }
    for (int f : t.frontier())
        for (int j = 0; j < splitting; ++j)
            st.specs.push_back({child_id(t.id_of(f), j), top + 1, t.id_of(f)});
    st.club.insert(top + 1);
    st.rebuild();
}

void filter_rels_to_survivors(BuildState& st, const std::set<std::string>& survivors) {
    for (auto& r : st.rels) {
        std::vector<LevelClass> kept;
        for (auto& lc : r.classes) {
            LevelClass out;
            out.level = lc.level;
            for (const auto& id : lc.members)
                if (survivors.count(id)) out.members.push_back(id);
            if (out.members.size() > 1) kept.push_back(std::move(out));
        }
        r.classes = std::move(kept);
    }
}

struct KillTarget {
    std::string include;
    std::vector<std::string> exclude;
};

// deterministic choice: least frontier class with members spread over at
// least two resolution cones
std::optional<KillTarget> pick_kill_target(const Ter& rel, int resolution) {
    const LevelledTree& tree = rel.tree();
    int top = tree.height() - 1;
    for (int cls : rel.level_classes(top)) {
        const auto& members = rel.class_members(cls);
        if (members.size() < 2) continue;
        std::set<int> cones;
        for (int m : members) cones.insert(tree.ancestor_at(m, resolution));
        if (cones.size() < 2) continue;
        KillTarget kt;
        kt.include = tree.id_of(members.front());
        for (size_t k = 1; k < members.size(); ++k) kt.exclude.push_back(tree.id_of(members[k]));
        return kt;
    }
    return std::nullopt;
}

// pick the automorphism's least moved frontier point
std::optional<std::pair<std::string, std::string>> pick_moved_point(
    const LevelledTree& tree, const std::vector<int>& perm) {
    for (int f : tree.frontier())
        if (perm[f] != f) return std::make_pair(tree.id_of(f), tree.id_of(perm[f]));
    return std::nullopt;
}

std::vector<int> auto_perm_from_file(const LevelledTree& tree, const io::AutoFile& file) {
    std::vector<int> perm(tree.size());
    for (int i = 0; i < tree.size(); ++i) perm[i] = i;
    for (const auto& [from, to] : file.maplets)
        perm[tree.index_of(from)] = tree.index_of(to);
    if (!is_tree_automorphism(tree, perm))
        throw ParseError("payload " + file.name + " is not a tree automorphism");
    return perm;
}

// the unique extension of a relation to a fresh limit level holding one new
// node per extended branch
Ter extend_to_limit(const Ter& rel, TreePtr extended_tree,
                    const std::vector<std::string>& extended_branches) {
    std::vector<LevelClass> classes = rel.nontrivial_classes();
    std::map<int, LevelClass> per_class;
    for (const auto& id : extended_branches) {
        int b = rel.tree().index_of(id);
        auto& lc = per_class[rel.class_of(b)];
        lc.level = rel.tree().height();
        lc.members.push_back(child_id(id, 0));
    }
    for (auto& [cls, lc] : per_class)
        if (lc.members.size() > 1) classes.push_back(lc);
    return Ter::from_classes(std::move(extended_tree), classes, rel.name() + "+");
}

TreePtr pre_prune_extension(const std::string& name, const std::vector<NodeSpec>& specs,
                            const std::set<int>& limits,
                            const std::vector<std::string>& selected, int new_level) {
    std::vector<NodeSpec> all = specs;
    for (const auto& id : selected) all.push_back({child_id(id, 0), new_level, id});
    std::set<int> lim = limits;
    lim.insert(new_level);
    return std::make_shared<LevelledTree>(LevelledTree(name, lim, all));
}

void preserved_rel_checks(const BuildState& st, int stage_index, int m, Report& checks) {
    for (const auto& r : st.rels) {
        Ter rel = st.rel_ter(r);
        std::set<int> club;
        for (int l : st.club)
            if (l < st.tree->height()) club.insert(l);
        Ter on_club = restrict_ter(rel, club);
        TerReport tr = validate_ter(on_club);
        std::string prefix = "stage" + std::to_string(stage_index) + ".preserved." + r.name;
        // strict quotient splitting cannot hold across a pruned limit
        // transition; the preserved claims are order-compatibility and
        // honesty on the verification club
        checks.add(tr.compatible() && tr.honest, prefix + ".honest",
                   tr.honest ? "honest on the verification club" : "dishonest");
        if (r.expect_nice) {
            GradeResult g = niceness_grade(on_club, m);
            checks.add(g.m_nice, prefix + ".mnice",
                       std::string(grade_name(g.grade)) + " m=" + std::to_string(m));
        }
    }
}

// per-stage event verification shared by run and verify: checks the claims
// of one limit stage against the pre-stage tree
void limit_stage_checks(const ConstructionSchedule& schedule, const BuildState& st,
                        const StageRecord& rec, Report& checks) {
    const LevelledTree& tree = *st.tree;
    int top = tree.height() - 1;
    int resolution = rec.resolution;
    std::string sp = "stage" + std::to_string(rec.index);

    // claims partition the frontier
    std::set<std::string> frontier_ids;
    for (int f : tree.frontier()) frontier_ids.insert(tree.id_of(f));
    std::set<std::string> claimed(rec.selected.begin(), rec.selected.end());
    std::set<std::string> pruned(rec.pruned.begin(), rec.pruned.end());
    bool partition_ok = claimed.size() + pruned.size() == frontier_ids.size();
    for (const auto& id : claimed)
        if (!frontier_ids.count(id) || pruned.count(id)) partition_ok = false;
    for (const auto& id : pruned)
        if (!frontier_ids.count(id)) partition_ok = false;
    checks.add(partition_ok, sp + ".claims", "selected and pruned partition the frontier");

    // density of the recorded selection
    std::map<int, int> counts;
    for (int u : tree.level_nodes(resolution)) counts[u] = 0;
    for (const auto& id : rec.selected) ++counts[tree.ancestor_at(tree.index_of(id), resolution)];
    bool dense = true;
    for (auto [u, c] : counts)
        if (c < schedule.multiplicity) dense = false;
    checks.add(dense, sp + ".density",
               "selection is (" + std::to_string(resolution) + "," +
                   std::to_string(schedule.multiplicity) + ")-dense");

    switch (rec.stage.event.kind) {
        case OracleEvent::Kind::noop:
            break;
        case OracleEvent::Kind::seal_antichain: {
            io::AntichainFile ac =
                io::load_antichain(resolve_payload(schedule, rec.stage.event.payload));
            DenseOpenPresentation p = presentation_from_ids(tree, ac.members);
            bool meets = p.antichain_ok;
            for (const auto& id : rec.selected) {
                bool hit = false;
                for (const auto& m : ac.members)
                    if (tree.is_ancestor(tree.index_of(m), tree.index_of(id))) hit = true;
                if (!hit) meets = false;
            }
            checks.add(meets, sp + ".seal.meets", "every extended branch passes the antichain");
            break;
        }
        case OracleEvent::Kind::kill_ter: {
            io::TerFile tf = io::load_ter(resolve_payload(schedule, rec.stage.event.payload));
            Ter killed = io::resolve_ter(tf, st.tree);
            // how the guessed relation differs from each maintained one:
            // negligible differences survive every diagonalization
            for (const auto& r : st.rels) {
                Ter maintained = st.rel_ter(r);
                DifferenceReport diff = classify_difference(maintained, killed, "r");
                checks.add(true, sp + ".kill.case." + r.name, difference_name(diff.kind));
            }
            auto target = pick_kill_target(killed, resolution);
            if (!target) {
                checks.add(false, sp + ".kill.fails", "no killable class in the payload");
                break;
            }
            TreePtr ext_tree = pre_prune_extension(st.name, st.specs, st.limits, rec.selected,
                                                   top + 1);
            Ter ext = extend_to_limit(killed, ext_tree, rec.selected);
            TraceDensityResult td = class_trace_density(ext, top + 1, resolution);
            bool target_fails = false;
            int failing = 0;
            for (const auto& v : td.verdicts) {
                if (!v.pass) ++failing;
                if (!v.pass && v.class_rep == child_id(target->include, 0)) target_fails = true;
            }
            checks.add(target_fails, sp + ".kill.fails",
                       "killed relation dishonest at its stage");
            checks.add(failing == 1, sp + ".kill.exact",
                       std::to_string(failing) + " class(es) fail the trace criterion");
            break;
        }
        case OracleEvent::Kind::kill_automorphism: {
            io::AutoFile af = io::load_auto(resolve_payload(schedule, rec.stage.event.payload));
            std::vector<int> perm = auto_perm_from_file(tree, af);
            auto moved = pick_moved_point(tree, perm);
            bool split = moved && claimed.count(moved->first) > 0 &&
                         pruned.count(moved->second) > 0;
            checks.add(split, sp + ".killauto.split", "point extended, image branch pruned");
            break;
        }
        case OracleEvent::Kind::preserve_ter:
            // validity of the payload is checked where it is registered
            break;
    }
}

// applies the recorded selection of a limit stage to the build state
void apply_limit_stage(BuildState& st, const StageRecord& rec,
                       const std::optional<Ter>& preserve_rel) {
    const LevelledTree& tree = *st.tree;
    int top = tree.height() - 1;

    if (preserve_rel) {
        MaintainedRel mr;
        mr.name = preserve_rel->name();
        mr.classes = preserve_rel->nontrivial_classes();
        mr.expect_nice = true;
        st.rels.push_back(std::move(mr));
    }
    for (auto& r : st.rels) {
        Ter rel = st.rel_ter(r);
        std::map<int, LevelClass> per_class;
        for (const auto& id : rec.selected) {
            int b = tree.index_of(id);
            auto& lc = per_class[rel.class_of(b)];
            lc.level = top + 1;
            lc.members.push_back(child_id(id, 0));
        }
        for (auto& [cls, lc] : per_class)
            if (lc.members.size() > 1) r.classes.push_back(std::move(lc));
    }

    std::set<std::string> survivors;
    for (const auto& id : rec.selected)
        for (int cur = tree.index_of(id); cur >= 0; cur = tree.parent(cur))
            survivors.insert(tree.id_of(cur));
    std::vector<NodeSpec> new_specs;
    for (int i = 0; i < tree.size(); ++i) {
        if (!survivors.count(tree.id_of(i))) continue;
        new_specs.push_back({tree.id_of(i), tree.node(i).level,
                             tree.parent(i) >= 0 ? tree.id_of(tree.parent(i)) : ""});
    }
    for (const auto& id : rec.selected) {
        new_specs.push_back({child_id(id, 0), top + 1, id});
        survivors.insert(child_id(id, 0));
    }
    filter_rels_to_survivors(st, survivors);

    st.specs = std::move(new_specs);
    st.limits.insert(top + 1);
    st.club.insert(top + 1);
    for (int l = rec.resolution + 1; l <= top; ++l) st.club.erase(l);
    st.rebuild();
}

// red/green schedule stage applied to the head relation; others extend
// coarsely over the new level
void apply_red_green(BuildState& st, const Stage& stage, uint64_t stage_seed, StageRecord& rec,
                     Report& checks) {
    if (st.rels.empty()) throw std::invalid_argument("red/green stage needs a relation");
    int top = st.tree->height() - 1;
    // the coloring resolution is the deepest club level below the frontier
    int resolution = -1;
    for (int l : st.club)
        if (l < top) resolution = std::max(resolution, l);
    if (resolution < 0) throw std::invalid_argument("no resolution level below the frontier");
    rec.resolution = resolution;

    Ter head = st.rel_ter(st.rels.front());
    RedGreenResult rg = red_green_stage(head, top, resolution, stage.splitting, stage_seed);
    rec.colors = rg.colors;
    checks.merge(rg.checks);

    std::vector<MaintainedRel> others(st.rels.begin() + 1, st.rels.end());
    st.rels.clear();
    MaintainedRel new_head;
    new_head.name = rg.rel.name();
    new_head.classes = rg.rel.nontrivial_classes();
    new_head.expect_nice = false;
    st.rels.push_back(std::move(new_head));

    const LevelledTree& grown = *rg.tree;
    st.specs.clear();
    for (int i = 0; i < grown.size(); ++i)
        st.specs.push_back({grown.id_of(i), grown.node(i).level,
                            grown.parent(i) >= 0 ? grown.id_of(grown.parent(i)) : ""});
    st.limits = grown.limit_levels();
    st.club.insert(top + 1);
    st.rebuild();

    for (auto& other : others) {
        Ter orel = Ter::from_classes(st.tree, other.classes, other.name);
        for (int cls : orel.level_classes(top)) {
            LevelClass lc;
            lc.level = top + 1;
            for (int s : orel.class_members(cls))
                for (int j = 0; j < stage.splitting; ++j)
                    lc.members.push_back(child_id(st.tree->id_of(s), j));
            if (lc.members.size() > 1) other.classes.push_back(std::move(lc));
        }
        st.rels.push_back(std::move(other));
    }
}

} // namespace

Transcript run_construction(const ConstructionSchedule& schedule,
                            const std::vector<SelectionOverride>& overrides) {
    Transcript t;
    t.schedule = schedule;

    BuildState st;
    st.name = schedule.name;
    st.specs.push_back({"r", 0, ""});
    st.club.insert(0);
    st.rebuild();

    bool calculus =
        !schedule.stages.empty() && schedule.stages.front().kind == Stage::Kind::calc52;
    if (calculus) st.calc = calc52_init(schedule.name);

    for (size_t k = 0; k < schedule.stages.size(); ++k) {
        const Stage& stage = schedule.stages[k];
        StageRecord rec;
        rec.index = static_cast<int>(k);
        rec.stage = stage;

        if (stage.kind == Stage::Kind::grow) {
            for (int step = 0; step < stage.levels; ++step) grow_one_level(st, stage.splitting);
            t.stages.push_back(std::move(rec));
            continue;
        }
        if (stage.kind == Stage::Kind::calc52) {
            st.calc = successor_calculus_52(*st.calc, stage.blocks);
            t.checks.merge(calc52_local_checks(*st.calc));
            t.stages.push_back(std::move(rec));
            continue;
        }
        if (stage.kind == Stage::Kind::red_green) {
            apply_red_green(st, stage, mix_seed(schedule.seed, k), rec, t.checks);
            preserved_rel_checks(st, rec.index, schedule.multiplicity, t.checks);
            t.stages.push_back(std::move(rec));
            continue;
        }

        // limit stage
        int top = st.tree->height() - 1;
        rec.resolution = top - schedule.density_offset;
        if (rec.resolution < 0) {
            rec.refused = true;
            rec.refusal = "resolution below the root: grow further first";
            t.stages.push_back(std::move(rec));
            t.final_tree = *st.tree;
            t.club = st.club;
            return t;
        }

        SelectionConstraints cons;
        cons.resolution = rec.resolution;
        cons.multiplicity = schedule.multiplicity;
        cons.seed = mix_seed(schedule.seed, k);

        std::vector<Ter> suit_rels;
        for (const auto& r : st.rels) suit_rels.push_back(st.rel_ter(r));
        std::optional<Ter> killed_rel;
        std::optional<Ter> preserve_rel;

        switch (stage.event.kind) {
            case OracleEvent::Kind::noop:
                break;
            case OracleEvent::Kind::seal_antichain: {
                io::AntichainFile ac =
                    io::load_antichain(resolve_payload(schedule, stage.event.payload));
                if (ac.tree_name != st.name)
                    throw ParseError("antichain " + ac.name + " declares tree " + ac.tree_name);
                DenseOpenPresentation p = presentation_from_ids(*st.tree, ac.members);
                if (!p.antichain_ok)
                    throw ParseError("payload " + ac.name + " is not an antichain");
                cons.meets.push_back(ac.members);
                break;
            }
            case OracleEvent::Kind::kill_ter: {
                io::TerFile tf = io::load_ter(resolve_payload(schedule, stage.event.payload));
                killed_rel = io::resolve_ter(tf, st.tree);
                auto target = pick_kill_target(*killed_rel, rec.resolution);
                if (!target) {
                    rec.refused = true;
                    rec.refusal = "no killable class: needs members over distinct cones";
                    break;
                }
                rec.kill_target = target->include;
                cons.include.push_back(target->include);
                cons.exclude = target->exclude;
                break;
            }
            case OracleEvent::Kind::kill_automorphism: {
                io::AutoFile af =
                    io::load_auto(resolve_payload(schedule, stage.event.payload));
                if (af.kind != "tree" || af.ref != st.name)
                    throw ParseError("automorphism payload must reference tree " + st.name);
                std::vector<int> perm = auto_perm_from_file(*st.tree, af);
                auto moved = pick_moved_point(*st.tree, perm);
                if (!moved) {
                    rec.refused = true;
                    rec.refusal = "automorphism is the identity on the frontier";
                    break;
                }
                rec.kill_target = moved->first;
                cons.include.push_back(moved->first);
                cons.exclude.push_back(moved->second);
                break;
            }
            case OracleEvent::Kind::preserve_ter: {
                io::TerFile tf = io::load_ter(resolve_payload(schedule, stage.event.payload));
                preserve_rel = io::resolve_ter(tf, st.tree);
                // validity is judged on the club: a payload guessed after a
                // pruning stage lives on a prefix whose limit transitions
                // are single-child, where strict splitting cannot hold
                std::set<int> club;
                for (int l : st.club)
                    if (l < st.tree->height()) club.insert(l);
                TerReport tr = validate_ter(restrict_ter(*preserve_rel, club));
                if (!tr.valid()) {
                    rec.refused = true;
                    rec.refusal = "preserve payload is not a valid t.e.r. on the club";
                    break;
                }
                suit_rels.push_back(*preserve_rel);
                break;
            }
        }
        if (rec.refused) {
            t.stages.push_back(std::move(rec));
            t.final_tree = *st.tree;
            t.club = st.club;
            return t;
        }

        for (const auto& r : suit_rels)
            cons.suitable.push_back({&r, schedule.multiplicity});
        if (killed_rel) cons.suitable.push_back({&*killed_rel, 1});

        SelectionResult sel = diagonal_select(st.tree, top, cons);
        if (!sel.ok) {
            rec.refused = true;
            rec.refusal = sel.refusal;
            t.stages.push_back(std::move(rec));
            t.final_tree = *st.tree;
            t.club = st.club;
            return t;
        }

        std::set<std::string> selected;
        for (int b : sel.family->branches) selected.insert(st.tree->id_of(b));
        for (const auto& ov : overrides)
            if (ov.stage_index == static_cast<int>(k))
                for (const auto& id : ov.force_select) selected.insert(id);
        for (const auto& id : selected) rec.selected.push_back(id);
        for (int f : st.tree->frontier())
            if (!selected.count(st.tree->id_of(f))) rec.pruned.push_back(st.tree->id_of(f));

        limit_stage_checks(schedule, st, rec, t.checks);
        apply_limit_stage(st, rec, preserve_rel);
        preserved_rel_checks(st, rec.index, schedule.multiplicity, t.checks);

        std::string sp = "stage" + std::to_string(k);
        bool low_intact = true;
        for (int l = 0; l <= rec.resolution; ++l)
            if (st.tree->level_nodes(l).empty()) low_intact = false;
        t.checks.add(low_intact, sp + ".prefix", "levels up to the resolution are populated");
        t.stages.push_back(std::move(rec));
    }

    t.completed = true;
    if (st.calc) {
        t.final_tree = *st.calc->tree;
        t.maintained.push_back(st.calc->eq);
        t.maintained.push_back(st.calc->fine);
    } else {
        t.final_tree = *st.tree;
        for (const auto& r : st.rels) {
            t.maintained.push_back(st.rel_ter(r));
            if (r.expect_nice) t.maintained_expect_nice.push_back(r.name);
        }
    }
    t.club = st.club;
    return t;
}

// ---------------------------------------------------------------------------
// transcript serialization

std::string transcript_filename(const Transcript& t) {
    return t.schedule.name + ".transcript";
}

void save_transcript(const std::string& dir, const Transcript& t) {
    fs::create_directories(dir);
    std::ostringstream os;
    os << "transcript " << t.schedule.name << " seed " << t.schedule.seed << " density "
       << t.schedule.density_offset << " " << t.schedule.multiplicity << "\n";
    os << "schedule-file " << (t.schedule_file.empty() ? "-" : t.schedule_file) << "\n";
    if (t.completed) {
        os << "result completed\n";
    } else {
        int k = t.stages.empty() ? 0 : t.stages.back().index;
        std::string why = t.stages.empty() ? "empty" : t.stages.back().refusal;
        os << "result refused " << k << " " << why << "\n";
    }
    for (const auto& rec : t.stages) {
        const Stage& s = rec.stage;
        os << "stage " << rec.index << " ";
        switch (s.kind) {
            case Stage::Kind::grow:
                os << "grow " << s.levels << " " << s.splitting;
                break;
            case Stage::Kind::limit:
                os << "limit " << event_name(s.event.kind) << " " << s.event.payload;
                break;
            case Stage::Kind::red_green:
                os << "redgreen " << s.splitting;
                break;
            case Stage::Kind::calc52:
                os << "calc52 " << blockspec_to_string(s.blocks);
                break;
        }
        os << "\n";
        if (s.kind == Stage::Kind::limit && !rec.refused) {
            os << "selected " << rec.index << " " << io::join_commas(rec.selected) << "\n";
            os << "pruned " << rec.index << " "
               << (rec.pruned.empty() ? "-" : io::join_commas(rec.pruned)) << "\n";
            if (!rec.kill_target.empty())
                os << "killtarget " << rec.index << " " << rec.kill_target << "\n";
        }
        if (rec.refused) os << "refused " << rec.index << " " << rec.refusal << "\n";
    }
    std::vector<std::string> club_s;
    for (int l : t.club) club_s.push_back(std::to_string(l));
    os << "club " << (club_s.empty() ? "-" : io::join_commas(club_s)) << "\n";

    std::string tree_file = t.schedule.name + ".final.tree";
    if (t.final_tree) {
        io::save_tree((fs::path(dir) / tree_file).string(), *t.final_tree);
        os << "final-tree " << tree_file << "\n";
    }
    for (const auto& rel : t.maintained) {
        std::string f = t.schedule.name + "." + rel.name() + ".ter";
        io::save_ter((fs::path(dir) / f).string(), rel);
        os << "final-ter " << rel.name() << " " << f << "\n";
    }
    for (const auto& name : t.maintained_expect_nice)
        os << "expect-nice " << name << "\n";
    io::write_file((fs::path(dir) / transcript_filename(t)).string(), os.str());
    // per-stage verdicts as a report file next to the claims
    io::write_file((fs::path(dir) / (t.schedule.name + ".report")).string(),
                   t.checks.to_string());
}

Transcript load_transcript(const std::string& path) {
    fs::path dir = fs::path(path).parent_path();
    std::istringstream in(io::read_file(path));
    Transcript t;
    std::string line;
    std::string tree_file;
    std::vector<std::pair<std::string, std::string>> ter_files;
    std::map<int, StageRecord> records;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::vector<std::string> toks;
        std::string tok;
        while (ls >> tok) toks.push_back(tok);
        if (toks.empty() || toks[0][0] == '#') continue;
        if (toks[0] == "transcript") {
            // header fields are re-read from the schedule file
        } else if (toks[0] == "schedule-file" && toks.size() == 2) {
            t.schedule_file = toks[1];
            fs::path sp(toks[1]);
            if (!sp.is_absolute() && fs::exists(dir / sp)) sp = dir / sp;
            t.schedule = load_schedule(sp.string());
        } else if (toks[0] == "result") {
            t.completed = toks.size() >= 2 && toks[1] == "completed";
        } else if (toks[0] == "stage") {
            int k = std::stoi(toks[1]);
            records[k].index = k;
        } else if (toks[0] == "selected" && toks.size() == 3) {
            records[std::stoi(toks[1])].selected = io::split_commas(toks[2]);
        } else if (toks[0] == "pruned" && toks.size() == 3) {
            if (toks[2] != "-") records[std::stoi(toks[1])].pruned = io::split_commas(toks[2]);
        } else if (toks[0] == "killtarget" && toks.size() == 3) {
            records[std::stoi(toks[1])].kill_target = toks[2];
        } else if (toks[0] == "refused") {
            records[std::stoi(toks[1])].refused = true;
        } else if (toks[0] == "club" && toks.size() == 2) {
            if (toks[1] != "-")
                for (const auto& l : io::split_commas(toks[1])) t.club.insert(std::stoi(l));
        } else if (toks[0] == "final-tree" && toks.size() == 2) {
            tree_file = toks[1];
        } else if (toks[0] == "final-ter" && toks.size() == 3) {
            ter_files.emplace_back(toks[1], toks[2]);
        } else if (toks[0] == "expect-nice" && toks.size() == 2) {
            t.maintained_expect_nice.push_back(toks[1]);
        } else {
            throw ParseError("unknown transcript line: " + line);
        }
    }
    if (t.schedule.stages.empty()) throw ParseError("transcript without schedule");
    for (auto& [k, rec] : records) {
        if (k < 0 || k >= static_cast<int>(t.schedule.stages.size()))
            throw ParseError("transcript stage index out of range");
        rec.stage = t.schedule.stages[k];
        t.stages.push_back(rec);
    }
    std::sort(t.stages.begin(), t.stages.end(),
              [](const StageRecord& a, const StageRecord& b) { return a.index < b.index; });
    if (!tree_file.empty()) t.final_tree = io::load_tree((dir / tree_file).string());
    if (t.final_tree) {
        auto final_ptr = std::make_shared<LevelledTree>(*t.final_tree);
        for (const auto& [name, file] : ter_files) {
            io::TerFile tf = io::load_ter((dir / file).string());
            t.maintained.push_back(io::resolve_ter(tf, final_ptr));
        }
    }
    return t;
}

Report verify_transcript(const Transcript& t, size_t max_autos) {
    Report rep;
    const ConstructionSchedule& schedule = t.schedule;

    BuildState st;
    st.name = schedule.name;
    st.specs.push_back({"r", 0, ""});
    st.club.insert(0);
    st.rebuild();
    bool calculus =
        !schedule.stages.empty() && schedule.stages.front().kind == Stage::Kind::calc52;
    if (calculus) st.calc = calc52_init(schedule.name);

    std::vector<io::AntichainFile> sealed;
    std::vector<io::AutoFile> killed_autos;
    bool aborted = false;

    for (size_t k = 0; k < schedule.stages.size() && !aborted; ++k) {
        const Stage& stage = schedule.stages[k];
        const StageRecord* rec = nullptr;
        for (const auto& r : t.stages)
            if (r.index == static_cast<int>(k)) rec = &r;
        if (!rec) {
            rep.add(false, "transcript.stages", "stage " + std::to_string(k) + " missing");
            break;
        }
        if (rec->refused) {
            rep.add(true, "stage" + std::to_string(k) + ".refused", "construction halted here");
            break;
        }
        switch (stage.kind) {
            case Stage::Kind::grow:
                for (int step = 0; step < stage.levels; ++step)
                    grow_one_level(st, stage.splitting);
                break;
            case Stage::Kind::calc52:
                st.calc = successor_calculus_52(*st.calc, stage.blocks);
                rep.merge(calc52_local_checks(*st.calc));
                break;
            case Stage::Kind::red_green: {
                StageRecord tmp = *rec;
                apply_red_green(st, stage, mix_seed(schedule.seed, k), tmp, rep);
                preserved_rel_checks(st, tmp.index, schedule.multiplicity, rep);
                break;
            }
            case Stage::Kind::limit: {
                StageRecord checked = *rec;
                checked.resolution = st.tree->height() - 1 - schedule.density_offset;
                if (checked.resolution < 0) {
                    rep.add(false, "stage" + std::to_string(k) + ".claims",
                            "resolution below the root");
                    aborted = true;
                    break;
                }
                // claims must name existing frontier branches before anything
                // else is replayed against them
                std::set<std::string> frontier_ids;
                for (int f : st.tree->frontier()) frontier_ids.insert(st.tree->id_of(f));
                bool ids_ok = !checked.selected.empty();
                for (const auto& id : checked.selected)
                    if (!frontier_ids.count(id)) ids_ok = false;
                if (!ids_ok) {
                    rep.add(false, "stage" + std::to_string(k) + ".claims",
                            "selected branches are not frontier branches");
                    aborted = true;
                    break;
                }
                std::optional<Ter> preserve_rel;
                if (stage.event.kind == OracleEvent::Kind::preserve_ter) {
                    io::TerFile tf =
                        io::load_ter(resolve_payload(schedule, stage.event.payload));
                    preserve_rel = io::resolve_ter(tf, st.tree);
                    std::set<int> club;
                    for (int l : st.club)
                        if (l < st.tree->height()) club.insert(l);
                    TerReport tr = validate_ter(restrict_ter(*preserve_rel, club));
                    rep.add(tr.valid(), "stage" + std::to_string(k) + ".preserve.valid",
                            "payload is a valid t.e.r. on the club");
                }
                if (stage.event.kind == OracleEvent::Kind::seal_antichain)
                    sealed.push_back(
                        io::load_antichain(resolve_payload(schedule, stage.event.payload)));
                if (stage.event.kind == OracleEvent::Kind::kill_automorphism)
                    killed_autos.push_back(
                        io::load_auto(resolve_payload(schedule, stage.event.payload)));
                limit_stage_checks(schedule, st, checked, rep);
                apply_limit_stage(st, checked, preserve_rel);
                preserved_rel_checks(st, checked.index, schedule.multiplicity, rep);
                break;
            }
        }
    }

    // final artifacts must match the replay of the recorded claims
    if (!aborted && t.completed) {
        const LevelledTree& replay_final = st.calc ? *st.calc->tree : *st.tree;
        if (t.final_tree) {
            rep.add(io::tree_to_string(replay_final) == io::tree_to_string(*t.final_tree),
                    "final.tree", "emitted tree matches the replayed construction");
        } else {
            rep.add(false, "final.tree", "transcript has no final tree");
        }
        std::vector<std::pair<std::string, std::string>> replay_ters;
        if (st.calc) {
            replay_ters.emplace_back("eq", io::ter_to_string(st.calc->eq));
            replay_ters.emplace_back("fine", io::ter_to_string(st.calc->fine));
        } else {
            for (const auto& r : st.rels)
                replay_ters.emplace_back(r.name, io::ter_to_string(st.rel_ter(r)));
        }
        for (const auto& [name, text] : replay_ters) {
            bool found = false, same = false;
            for (const auto& rel : t.maintained)
                if (rel.name() == name) {
                    found = true;
                    same = io::ter_to_string(rel) == text;
                }
            rep.add(found && same, "final.ter." + name,
                    "emitted relation matches the replayed construction");
        }

        // sealed antichains are maximal in the claimed final tree
        const LevelledTree* final_tree = t.final_tree ? &*t.final_tree : &replay_final;
        for (size_t i = 0; i < sealed.size(); ++i) {
            bool maximal = true;
            for (int br : final_tree->frontier()) {
                bool hit = false;
                for (const auto& m : sealed[i].members) {
                    if (!final_tree->has_node(m)) continue;
                    if (final_tree->is_ancestor(final_tree->index_of(m), br)) hit = true;
                }
                if (!hit) maximal = false;
            }
            rep.add(maximal, "seal." + std::to_string(i) + ".maximal",
                    "antichain " + sealed[i].name + " is maximal in the final tree");
        }

        // killed automorphisms extend to no automorphism of the final tree
        for (size_t i = 0; i < killed_autos.size(); ++i) {
            AutomorphismList autos = enumerate_automorphisms(*final_tree, max_autos);
            bool extends = false;
            for (const auto& a : autos.autos) {
                bool agrees = true;
                for (const auto& [from, to] : killed_autos[i].maplets) {
                    if (!final_tree->has_node(from)) continue;
                    int img = a(final_tree->index_of(from));
                    if (!final_tree->has_node(to) || img != final_tree->index_of(to))
                        agrees = false;
                }
                if (agrees) extends = true;
            }
            rep.add(!extends, "killauto." + std::to_string(i) + ".rigid",
                    std::string("no automorphism of the final tree extends the payload") +
                        (autos.truncated ? " (enumeration truncated)" : ""));
        }
    }
    return rep;
}

} // namespace treelab
