// treelab command line: parse the text formats, dispatch the library
// operations, emit deterministic PASS/FAIL reports.
//
// Exit codes: 0 all checks pass, 1 some check failed (the report says
// which), 2 unreadable input / parse error / bad usage.

#include "treelab/branchspace.hpp"
#include "treelab/dispatch.hpp"
#include "treelab/io.hpp"
#include "treelab/largeness.hpp"
#include "treelab/report.hpp"
#include "treelab/simulator.hpp"
#include "treelab/ter.hpp"
#include "treelab/tree.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <memory>

namespace fs = std::filesystem;
using namespace treelab;

namespace {

struct Options {
    uint64_t seed = 0;
    std::string density; // "<offset>:<c>"
    size_t max_autos = 10000;
    bool porcelain = false;
};

int finish(const Report& rep, const Options& opt) {
    rep.render(std::cout, opt.porcelain);
    return rep.all_pass() ? 0 : 1;
}

TreePtr load_tree_ptr(const std::string& path) {
    return std::make_shared<LevelledTree>(io::load_tree(path));
}

std::pair<int, int> parse_density(const std::string& s, int def_off, int def_c) {
    if (s.empty()) return {def_off, def_c};
    auto colon = s.find(':');
    if (colon == std::string::npos) throw ParseError("density must be <offset>:<c>");
    return {std::stoi(s.substr(0, colon)), std::stoi(s.substr(colon + 1))};
}

void report_tree_validation(const ValidationReport& v, Report& rep) {
    const char* clauses[] = {"root.unique", "root.level", "parent.level", "split",
                             "limits.unique"};
    for (const char* c : clauses) {
        bool any = false;
        for (const auto& viol : v.violations) {
            if (viol.clause == c) {
                rep.add(false, std::string("normal.") + c, viol.detail);
                any = true;
            }
        }
        if (!any) rep.add(true, std::string("normal.") + c);
    }
}

void report_grade(const GradeResult& g, Report& rep) {
    rep.add(true, "grade", grade_name(g.grade));
    rep.add(g.honest, "grade.honest");
    if (g.m > 0)
        rep.add(g.m_nice, "grade.mnice", "m=" + std::to_string(g.m));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"treelab: finite normal trees, tree equivalence relations and "
                 "their Boolean algebra representations"};
    app.require_subcommand(1);
    Options opt;
    app.add_option("--seed", opt.seed, "seed for all randomized choices");
    app.add_option("--density", opt.density, "density as <offset>:<c>");
    app.add_option("--max-autos", opt.max_autos, "automorphism enumeration bound");
    app.add_flag("--porcelain", opt.porcelain, "machine-stable key=value output");

    // validate-tree
    std::string vt_file;
    bool vt_lax = false, vt_autos = false;
    auto* vt = app.add_subcommand("validate-tree", "check the normal-tree clauses");
    vt->add_option("file", vt_file)->required();
    vt->add_flag("--lax", vt_lax, "skip the strict splitting clause");
    vt->add_flag("--autos", vt_autos, "also enumerate automorphisms");

    // tree-op
    std::string to_file, to_restrict, to_relativize, to_product, to_sum, to_out;
    auto* to = app.add_subcommand("tree-op", "restriction, relativization, product, sum");
    to->add_option("file", to_file)->required();
    to->add_option("--restrict", to_restrict, "comma list of levels");
    to->add_option("--relativize", to_relativize, "node id");
    to->add_option("--product", to_product, "second tree file");
    to->add_option("--sum", to_sum, "second tree file");
    to->add_option("--out", to_out, "output file (default stdout)");

    // validate-ter
    std::string vr_ter, vr_tree, vr_trace;
    int vr_m = 2;
    auto* vr = app.add_subcommand("validate-ter", "check the t.e.r. clauses and grade");
    vr->add_option("ter", vr_ter)->required();
    vr->add_option("--tree", vr_tree)->required();
    vr->add_option("--grade-m", vr_m, "multiplicity for the m-nice check");
    vr->add_option("--trace-density", vr_trace, "<limit-level>:<resolution>");

    // quotient
    std::string qt_ter, qt_tree, qt_out;
    auto* qt = app.add_subcommand("quotient", "quotient tree of a relation");
    qt->add_option("ter", qt_ter)->required();
    qt->add_option("--tree", qt_tree)->required();
    qt->add_option("--out", qt_out, "write the quotient tree here");

    // project
    std::string pj_ter, pj_tree, pj_algebra, pj_element;
    auto* pj = app.add_subcommand("project",
                                  "projection against the represented subalgebra, or "
                                  "upper/lower projection of an explicit element");
    pj->add_option("--ter", pj_ter);
    pj->add_option("--tree", pj_tree);
    pj->add_option("--algebra", pj_algebra, "algebra file with block lines");
    pj->add_option("--element", pj_element, "comma list of atoms");

    // large
    std::string lg_algebra, lg_relative;
    int lg_m = -1;
    auto* lg = app.add_subcommand("large", "largeness analysis of a subalgebra");
    lg->add_option("algebra", lg_algebra, "algebra file with block lines")->required();
    lg->add_option("-m", lg_m, "witness size bound (default: atom count)");
    lg->add_option("--relative", lg_relative, "restrict to the relative algebra below this element");

    // frolik
    std::string fr_algebra, fr_auto;
    auto* fr = app.add_subcommand("frolik", "Frolik partition of an automorphism");
    fr->add_option("algebra", fr_algebra)->required();
    fr->add_option("auto", fr_auto)->required();

    // fixed-points
    std::string fp_algebra;
    std::vector<std::string> fp_autos;
    auto* fp = app.add_subcommand("fixed-points", "fixed-point subalgebra of a group");
    fp->add_option("algebra", fp_algebra)->required();
    fp->add_option("autos", fp_autos, "automorphism files")->required();

    // decompose
    std::string dc_algebra;
    auto* dc = app.add_subcommand("decompose", "representation over a large subalgebra");
    dc->add_option("algebra", dc_algebra, "algebra file with block lines")->required();

    // reduce
    std::string rd_tree, rd_ter, rd_family = "all";
    auto* rd = app.add_subcommand("reduce", "suitability reduction of a branch family");
    rd->add_option("tree", rd_tree)->required();
    rd->add_option("ter", rd_ter)->required();
    rd->add_option("--family", rd_family, "comma list of frontier ids, or 'all'");

    // select
    std::string sl_file;
    auto* sl = app.add_subcommand("select", "diagonal branch selection from a constraint file");
    sl->add_option("file", sl_file)->required();

    // kurepa
    std::string ku_a, ku_b;
    auto* ku = app.add_subcommand("kurepa", "back-and-forth isomorphism search");
    ku->add_option("treeA", ku_a)->required();
    ku->add_option("treeB", ku_b)->required();

    // dense-split
    std::string ds_ter, ds_tree, ds_out;
    int ds_level = -1;
    auto* ds = app.add_subcommand("dense-split", "split every class on a limit level");
    ds->add_option("ter", ds_ter)->required();
    ds->add_option("--tree", ds_tree)->required();
    ds->add_option("--level", ds_level)->required();
    ds->add_option("--out", ds_out, "write the refined relation here");

    // two-nice
    std::string tn_tree, tn_out;
    auto* tn = app.add_subcommand("two-nice", "2-nice relation on a homogeneous tree");
    tn->add_option("tree", tn_tree)->required();
    tn->add_option("--out", tn_out, "write the relation here");

    // nice-split
    std::string ns_ter, ns_tree;
    auto* ns = app.add_subcommand("nice-split", "nice part and locally-equal part per cone");
    ns->add_option("ter", ns_ter)->required();
    ns->add_option("--tree", ns_tree)->required();

    // simulate
    std::string sm_schedule, sm_out;
    auto* sm = app.add_subcommand("simulate", "run a construction schedule");
    sm->add_option("schedule", sm_schedule)->required();
    sm->add_option("--out", sm_out, "transcript output directory (default: schedule directory)");

    // verify
    std::string vf_transcript;
    auto* vf = app.add_subcommand("verify", "re-verify a transcript's claims");
    vf->add_option("transcript", vf_transcript)->required();

    // usage errors are input errors: exit 2, one diagnostic line
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cout << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (vt->parsed()) {
            auto tree = io::load_tree(vt_file);
            Report rep;
            report_tree_validation(validate_normal(tree, !vt_lax), rep);
            if (vt_autos) {
                AutomorphismList autos = enumerate_automorphisms(tree, opt.max_autos);
                rep.add(!autos.autos.empty() && autos.autos.front().is_identity(),
                        "autos.identity-first");
                rep.add(true, "autos.count",
                        std::to_string(autos.autos.size()) +
                            (autos.truncated ? " (truncated)" : ""));
            }
            return finish(rep, opt);
        }
        if (to->parsed()) {
            auto tree = io::load_tree(to_file);
            std::unique_ptr<LevelledTree> result;
            int modes = !to_restrict.empty() + !to_relativize.empty() + !to_product.empty() +
                        !to_sum.empty();
            if (modes != 1) throw ParseError("tree-op needs exactly one operation flag");
            if (!to_restrict.empty()) {
                std::set<int> levels;
                for (const auto& l : io::split_commas(to_restrict)) levels.insert(std::stoi(l));
                result = std::make_unique<LevelledTree>(restrict_levels(tree, levels));
            } else if (!to_relativize.empty()) {
                result = std::make_unique<LevelledTree>(relativize(tree, to_relativize));
            } else if (!to_product.empty()) {
                result = std::make_unique<LevelledTree>(
                    tree_product(tree, io::load_tree(to_product)));
            } else {
                result = std::make_unique<LevelledTree>(tree_sum(tree, io::load_tree(to_sum)));
            }
            if (to_out.empty())
                io::write_tree(std::cout, *result);
            else
                io::save_tree(to_out, *result);
            return 0;
        }
        if (vr->parsed()) {
            auto tree = load_tree_ptr(vr_tree);
            Ter rel = io::resolve_ter(io::load_ter(vr_ter), tree);
            Report rep;
            TerReport tr = validate_ter(rel);
            rep.add(tr.compatible(), "ter.compat",
                    tr.compatible() ? "" : "parents of equivalent nodes differ");
            rep.add(tr.quotient_checked && tr.quotient_normal.ok(), "ter.quotient",
                    tr.quotient_checked ? "" : "not checkable");
            rep.add(tr.honest, "ter.honest");
            for (const auto& d : tr.disputes)
                if (!d.witnessed_at_successor)
                    rep.add(false, "honest.dispute",
                            "s=" + d.s + " s'=" + d.s_prime + " t=" + d.t);
            report_grade(niceness_grade(rel, vr_m), rep);
            if (!vr_trace.empty()) {
                auto [alpha, gamma] = parse_density(vr_trace, -1, -1);
                TraceDensityResult td = class_trace_density(rel, alpha, gamma);
                rep.add(td.all_pass, "trace.density");
                for (const auto& v : td.verdicts)
                    if (!v.pass)
                        rep.add(false, "trace.class",
                                "class=" + v.class_rep + " failures=" +
                                    std::to_string(v.failures.size()));
            }
            return finish(rep, opt);
        }
        if (qt->parsed()) {
            auto tree = load_tree_ptr(qt_tree);
            Ter rel = io::resolve_ter(io::load_ter(qt_ter), tree);
            QuotientResult q = quotient_tree(rel);
            Report rep;
            rep.add(q.normal.ok(), "quotient.normal",
                    q.normal.ok() ? "" : q.normal.violations.front().detail);
            rep.add(true, "quotient.size", std::to_string(q.tree.size()) + " classes");
            if (!qt_out.empty()) io::save_tree(qt_out, q.tree);
            return finish(rep, opt);
        }
        if (pj->parsed()) {
            Report rep;
            if (!pj_ter.empty()) {
                auto tree = load_tree_ptr(pj_tree);
                Ter rel = io::resolve_ter(io::load_ter(pj_ter), tree);
                ProjectionComparison pc = projection_vs_h(rel);
                rep.add(pc.agree_everywhere, "project.agree",
                        std::to_string(pc.disagreements.size()) + " disagreement(s)");
                for (const auto& id : pc.disagreements)
                    rep.add(false, "project.disagree", "node=" + id);
                rep.add(pc.matches_nice, "project.matches-nice",
                        "agreement everywhere iff no disputes");
                rep.add(pc.matches_almost_nice, "project.matches-almost-nice",
                        "successor-level agreement iff no successor disputes");
            } else if (!pj_algebra.empty()) {
                io::AlgebraFile af = io::load_algebra(pj_algebra);
                if (!af.blocks) throw ParseError("algebra file needs block lines");
                AtomBits e = af.algebra.element(io::split_commas(pj_element));
                rep.add(true, "project.upper",
                        io::join_commas(af.algebra.atom_names(upper_projection(*af.blocks, e))));
                rep.add(true, "project.lower",
                        io::join_commas(af.algebra.atom_names(lower_projection(*af.blocks, e))));
            } else {
                throw ParseError("project needs --ter/--tree or --algebra/--element");
            }
            return finish(rep, opt);
        }
        if (lg->parsed()) {
            io::AlgebraFile af = io::load_algebra(lg_algebra);
            if (!af.blocks) throw ParseError("algebra file needs block lines");
            FiniteBooleanAlgebra algebra = af.algebra;
            SubalgebraPartition sub = *af.blocks;
            if (!lg_relative.empty()) {
                AtomBits b = algebra.element(io::split_commas(lg_relative));
                FiniteBooleanAlgebra rel_alg = relative_algebra(algebra, b);
                sub = trace_partition(algebra, sub, b, rel_alg);
                algebra = rel_alg;
            }
            Report rep;
            LocalEqualityReport ler = local_equality_set(algebra, sub);
            rep.add(true, "large.maximal-count", std::to_string(ler.maximal.size()));
            if (ler.checks_run) {
                rep.add(ler.x_downward_closed, "large.x-downward");
                rep.add(ler.x_dense, "large.x-dense");
                rep.add(ler.maximal_cover, "large.x-cover");
                if (ler.blocks_all_nontrivial) {
                    rep.add(ler.h_image_maximal_antichain, "large.h-image");
                    rep.add(ler.h_images_agree, "large.h-agree");
                }
            }
            int bound = lg_m < 0 ? algebra.atom_count() : lg_m;
            MuLargeResult mu = mu_large(algebra, sub, bound);
            rep.add(true, "large.minimal", std::to_string(mu.minimal_size));
            if (mu.certificate) {
                rep.add(mu.certificate->generated_check, "large.witness",
                        "size " + std::to_string(mu.certificate->witness.size()));
            } else {
                rep.add(false, "large.witness",
                        "minimal size " + std::to_string(mu.minimal_size) + " exceeds bound " +
                            std::to_string(bound) +
                            (mu.exhaustive_confirmed ? " (confirmed exhaustively)" : ""));
            }
            return finish(rep, opt);
        }
        if (fr->parsed()) {
            io::AlgebraFile af = io::load_algebra(fr_algebra);
            io::AutoFile auf = io::load_auto(fr_auto);
            BaAutomorphism f = ba_from_maplets(af.algebra, auf.maplets);
            FrolikPartition p = frolik_partition(af.algebra, f);
            Report rep;
            AtomBits all = p.a0 | p.a1 | p.a2 | p.a3;
            bool disjoint = (p.a0 & p.a1).none() && (p.a0 & p.a2).none() &&
                            (p.a0 & p.a3).none() && (p.a1 & p.a2).none() &&
                            (p.a1 & p.a3).none() && (p.a2 & p.a3).none();
            rep.add(all == af.algebra.one() && disjoint, "frolik.partition",
                    "a0=" + io::join_commas(af.algebra.atom_names(p.a0)));
            bool fixed = true;
            for (auto i = p.a0.find_first(); i != AtomBits::npos; i = p.a0.find_next(i))
                if (f.perm[i] != static_cast<int>(i)) fixed = false;
            rep.add(fixed, "frolik.identity", "f restricted below a0 is the identity");
            bool moved = (f.apply(p.a1) & p.a1).none() && (f.apply(p.a2) & p.a2).none() &&
                         (f.apply(p.a3) & p.a3).none();
            rep.add(moved, "frolik.disjoint", "pieces meet their images trivially");
            return finish(rep, opt);
        }
        if (fp->parsed()) {
            io::AlgebraFile af = io::load_algebra(fp_algebra);
            std::vector<BaAutomorphism> gens;
            for (const auto& path : fp_autos)
                gens.push_back(ba_from_maplets(af.algebra, io::load_auto(path).maplets));
            FixedPointResult r = fixed_point_subalgebra(af.algebra, gens);
            Report rep;
            rep.add(true, "fixedpoints.blocks", std::to_string(r.fixed.block_count()));
            rep.add(r.certificate.generated_check, "fixedpoints.large",
                    "witness size " + std::to_string(r.certificate.witness.size()));
            rep.add(r.replay_generates, "fixedpoints.replay",
                    "Frolik piece construction generates");
            rep.add(true, "fixedpoints.group", std::to_string(r.group_size));
            return finish(rep, opt);
        }
        if (dc->parsed()) {
            io::AlgebraFile af = io::load_algebra(dc_algebra);
            if (!af.blocks) throw ParseError("algebra file needs block lines");
            DecompositionResult r = large_decomposition(af.algebra, *af.blocks);
            Report rep;
            rep.add(r.ok, "decompose.ok", r.ok ? "" : r.refusal);
            if (r.ok) {
                rep.add(true, "decompose.exponent", std::to_string(r.fibers.front().second));
                rep.add(r.iso_verified || af.algebra.atom_count() > 12, "decompose.iso",
                        af.algebra.atom_count() > 12 ? "not verified above 12 atoms"
                                                     : "verified elementwise");
            }
            return finish(rep, opt);
        }
        if (rd->parsed()) {
            auto tree = load_tree_ptr(rd_tree);
            Ter rel = io::resolve_ter(io::load_ter(rd_ter), tree);
            auto [off, c] = parse_density(opt.density, 2, 2);
            int resolution = tree->height() - 1 - off;
            FrontierFamily family =
                rd_family == "all"
                    ? full_frontier_family(tree, resolution, c)
                    : family_from_ids(tree, io::split_commas(rd_family), resolution, c);
            ReduceResult r = reduce_suitable(family, rel);
            Report rep;
            rep.add(true, "reduce.kept", std::to_string(r.reduced.branches.size()) + " of " +
                                             std::to_string(family.branches.size()));
            rep.add(r.density.dense, "reduce.dense");
            rep.add(r.suitable, "reduce.suitable");
            return finish(rep, opt);
        }
        if (sl->parsed()) {
            io::SelectFile sf = io::load_select(sl_file);
            fs::path dir = fs::path(sl_file).parent_path();
            auto tree = load_tree_ptr((dir / (sf.tree_name + ".tree")).string());
            SelectionConstraints cons;
            cons.meets = sf.meets;
            cons.include = sf.include;
            cons.exclude = sf.exclude;
            cons.resolution = sf.resolution;
            cons.multiplicity = sf.multiplicity;
            cons.seed = opt.seed;
            std::optional<Ter> suit;
            if (sf.suitable) {
                suit = io::resolve_ter(
                    io::load_ter((dir / (*sf.suitable + ".ter")).string()), tree);
                cons.suitable.push_back({&*suit, 1});
            }
            SelectionResult r = diagonal_select(tree, sf.level, cons);
            Report rep;
            rep.add(r.ok, "select.ok", r.ok ? "" : r.refusal);
            if (r.ok) {
                std::vector<std::string> ids;
                for (int b : r.family->branches) ids.push_back(tree->id_of(b));
                rep.add(true, "select.family", io::join_commas(ids));
                rep.add(r.density.dense, "select.dense");
            }
            return finish(rep, opt);
        }
        if (ku->parsed()) {
            auto a = io::load_tree(ku_a);
            auto b = io::load_tree(ku_b);
            BackForthResult r = kurepa_backforth(a, b, opt.seed);
            Report rep;
            rep.add(r.ok, "kurepa.iso",
                    r.ok ? std::to_string(r.iso.size()) + " nodes mapped" : r.refusal);
            return finish(rep, opt);
        }
        if (ds->parsed()) {
            auto tree = load_tree_ptr(ds_tree);
            Ter rel = io::resolve_ter(io::load_ter(ds_ter), tree);
            DenseSplitResult r = dense_split(rel, ds_level, opt.seed);
            Report rep;
            GradeResult g = niceness_grade(r.refined, 2);
            rep.add(true, "split.grade", grade_name(g.grade));
            RepresentedSubalgebra coarse = represented_subalgebra(rel);
            RepresentedSubalgebra fine = represented_subalgebra(r.refined);
            rep.add(refines(fine.partition, coarse.partition), "split.refines",
                    "refined subalgebra refines the original");
            rep.add(r.swap_ok, "split.swap", "color swap is a quotient automorphism");
            if (!ds_out.empty()) io::save_ter(ds_out, r.refined);
            return finish(rep, opt);
        }
        if (tn->parsed()) {
            auto tree = load_tree_ptr(tn_tree);
            TwoNiceResult r = homogeneous_2nice(tree, opt.seed);
            Report rep;
            GradeResult g = niceness_grade(r.rel, 2);
            rep.add(g.grade == NicenessGrade::nice, "twonice.nice");
            rep.add(g.m_nice, "twonice.mnice", "m=2");
            rep.add(true, "twonice.family", std::to_string(r.family.maps.size()) + " maps");
            if (!tn_out.empty()) io::save_ter(tn_out, r.rel);
            return finish(rep, opt);
        }
        if (ns->parsed()) {
            auto tree = load_tree_ptr(ns_tree);
            Ter rel = io::resolve_ter(io::load_ter(ns_ter), tree);
            NicePartSplit r = nice_part_split(rel);
            Report rep;
            int nice = 0;
            for (const auto& [id, ok] : r.node_nice) nice += ok ? 1 : 0;
            rep.add(true, "nicesplit.nodes",
                    std::to_string(nice) + " of " + std::to_string(r.node_nice.size()) +
                        " cones nice");
            rep.add(r.nice_up_closed, "nicesplit.up-closed");
            rep.add(r.locally_equal_up_closed, "nicesplit.local-up-closed");
            RepresentedSubalgebra repr = represented_subalgebra(rel);
            rep.add(true, "nicesplit.nice-part",
                    io::join_commas(repr.algebra.atom_names(r.b_nice)));
            return finish(rep, opt);
        }
        if (sm->parsed()) {
            ConstructionSchedule schedule = load_schedule(sm_schedule);
            if (!opt.density.empty()) {
                auto [off, c] = parse_density(opt.density, schedule.density_offset,
                                              schedule.multiplicity);
                schedule.density_offset = off;
                schedule.multiplicity = c;
            }
            Transcript t = run_construction(schedule);
            t.schedule_file = fs::absolute(sm_schedule).string();
            std::string out_dir =
                sm_out.empty() ? fs::path(sm_schedule).parent_path().string() : sm_out;
            if (out_dir.empty()) out_dir = ".";
            save_transcript(out_dir, t);
            Report rep = t.checks;
            rep.add(t.completed, "simulate.completed",
                    t.completed ? transcript_filename(t)
                                : (t.stages.empty() ? "" : t.stages.back().refusal));
            return finish(rep, opt);
        }
        if (vf->parsed()) {
            Transcript t = load_transcript(vf_transcript);
            Report rep = verify_transcript(t, opt.max_autos);
            return finish(rep, opt);
        }
    } catch (const ParseError& e) {
        std::cout << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cout << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cout << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
