#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "common.hpp"
#include "treelab/dispatch.hpp"
#include "treelab/io.hpp"

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>

using namespace treelab;
using namespace treelab::testing;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int status = -1;
    std::string output;
};

CliResult run_cli(const std::string& args) {
    std::string cmd = std::string(TREELAB_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CliResult r;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
    int rc = pclose(pipe);
    r.status = WEXITSTATUS(rc);
    return r;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("treelab_cli_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    void write(const std::string& name, const std::string& content) const {
        std::ofstream out(file(name), std::ios::binary);
        out << content;
    }
};

} // namespace

TEST_CASE("dispatch table covers every operation exactly once") {
    std::map<std::string, int> seen;
    std::set<std::string> subcommands;
    for (const auto& e : kDispatchTable) {
        ++seen[std::string(e.op)];
        subcommands.insert(std::string(e.subcommand));
    }
    for (const auto& [op, count] : seen) {
        INFO(op);
        CHECK(count == 1);
    }
    // the primary subcommand set all appears in the table
    for (const char* required :
         {"validate-tree", "validate-ter", "quotient", "project", "large", "frolik",
          "fixed-points", "decompose", "reduce", "select", "kurepa", "simulate", "verify"})
        CHECK(subcommands.count(required));
    CHECK(seen.size() == kDispatchTable.size());
}

TEST_CASE("every subcommand in the dispatch table is accepted by the binary") {
    std::set<std::string> subcommands;
    for (const auto& e : kDispatchTable) subcommands.insert(std::string(e.subcommand));
    CliResult help = run_cli("--help");
    for (const auto& sc : subcommands) {
        INFO(sc);
        CHECK(help.output.find(sc) != std::string::npos);
    }
}

TEST_CASE("validate-tree reports the clauses and exits clean on a normal tree") {
    TempDir dir;
    dir.write("b2.tree", io::tree_to_string(*b2()));
    CliResult r = run_cli("validate-tree " + dir.file("b2.tree"));
    CHECK(r.status == 0);
    CHECK(r.output.find("PASS normal.root.unique") != std::string::npos);
    CHECK(r.output.find("PASS normal.split") != std::string::npos);
    CliResult autos = run_cli("validate-tree --autos " + dir.file("b2.tree"));
    CHECK(autos.status == 0);
    CHECK(autos.output.find("autos.count 8") != std::string::npos);
}

TEST_CASE("validate-ter reports the dishonest dispute with the expected line") {
    TempDir dir;
    dir.write("t4.tree", io::tree_to_string(*full_tree(2, 4, {}, "T4")));
    dir.write("dis.ter",
              "ter dis tree T4\nclass 1 a,b\nclass 2 ab,bb\nclass 3 aba,bba\n");
    CliResult r = run_cli("validate-ter " + dir.file("dis.ter") + " --tree " + dir.file("t4.tree"));
    CHECK(r.status == 1);
    CHECK(r.output.find("FAIL honest.dispute s=a s'=abb t=b") != std::string::npos);
    CHECK(r.output.find("FAIL ter.honest") != std::string::npos);
}

TEST_CASE("unreadable files and parse errors exit with status two") {
    CliResult missing = run_cli("validate-tree /nonexistent/file.tree");
    CHECK(missing.status == 2);
    CHECK(missing.output.rfind("error:", 0) == 0);
    TempDir dir;
    dir.write("bad.tree", "not a tree\n");
    CHECK(run_cli("validate-tree " + dir.file("bad.tree")).status == 2);
    CHECK(run_cli("definitely-not-a-subcommand").status == 2);
    CHECK(run_cli("validate-tree --bogus-flag x").status == 2);
    CHECK(run_cli("").status == 2);
}

TEST_CASE("tree-op emits derived trees") {
    TempDir dir;
    dir.write("b2.tree", io::tree_to_string(*b2()));
    CliResult r = run_cli("tree-op --restrict 0,2 " + dir.file("b2.tree"));
    CHECK(r.status == 0);
    CHECK(r.output.find("tree B2 height 2") != std::string::npos);
    CliResult p = run_cli("tree-op --product " + dir.file("b2.tree") + " " + dir.file("b2.tree"));
    CHECK(p.status == 0);
    CHECK(p.output.find("node a*a 1 root*root") != std::string::npos);
}

TEST_CASE("project, quotient and grade pipelines work end to end") {
    TempDir dir;
    auto t = full_tree(4, 3, {}, "Q");
    dir.write("q.tree", io::tree_to_string(*t));
    dir.write("pairs.ter", io::ter_to_string(block_pair_ter(t, "pairs")));
    CliResult v = run_cli("validate-ter " + dir.file("pairs.ter") + " --tree " + dir.file("q.tree"));
    CHECK(v.status == 0);
    CHECK(v.output.find("PASS grade nice") != std::string::npos);
    CHECK(v.output.find("PASS grade.mnice") != std::string::npos);
    CliResult q = run_cli("quotient " + dir.file("pairs.ter") + " --tree " + dir.file("q.tree") +
                          " --out " + dir.file("quot.tree"));
    CHECK(q.status == 0);
    CHECK(fs::exists(dir.file("quot.tree")));
    CliResult pj = run_cli("project --ter " + dir.file("pairs.ter") + " --tree " + dir.file("q.tree"));
    CHECK(pj.status == 0);
    CHECK(pj.output.find("PASS project.agree") != std::string::npos);
}

TEST_CASE("trace density and element projection flags") {
    TempDir dir;
    auto t = full_tree(4, 4, {2}, "S");
    dir.write("s.tree", io::tree_to_string(*t));
    dir.write("pairs.ter", io::ter_to_string(block_pair_ter(t, "pairs")));
    CliResult td = run_cli("validate-ter " + dir.file("pairs.ter") + " --tree " +
                           dir.file("s.tree") + " --trace-density 2:1");
    CHECK(td.status == 0);
    CHECK(td.output.find("PASS trace.density") != std::string::npos);

    dir.write("p4.alg", "algebra P4 atoms aa,ab,ba,bb\nblock aa,ab\nblock ba,bb\n");
    CliResult pe = run_cli("project --algebra " + dir.file("p4.alg") + " --element aa");
    CHECK(pe.status == 0);
    CHECK(pe.output.find("PASS project.upper aa,ab") != std::string::npos);
    CHECK(pe.output.find("PASS project.lower") != std::string::npos);
}

TEST_CASE("largeness pipeline: large, frolik, fixed-points, decompose") {
    TempDir dir;
    dir.write("p4.alg", "algebra P4 atoms aa,ab,ba,bb\nblock aa,ab\nblock ba,bb\n");
    CliResult lg = run_cli("large " + dir.file("p4.alg"));
    CHECK(lg.status == 0);
    CHECK(lg.output.find("PASS large.minimal 1") != std::string::npos);
    CliResult lgr = run_cli("large --relative aa,ab " + dir.file("p4.alg"));
    CHECK(lgr.status == 0);

    dir.write("swap.auto", "auto swap algebra P4\nmap aa ab\nmap ab aa\n");
    CliResult fr = run_cli("frolik " + dir.file("p4.alg") + " " + dir.file("swap.auto"));
    CHECK(fr.status == 0);
    CHECK(fr.output.find("PASS frolik.partition") != std::string::npos);
    CliResult fp = run_cli("fixed-points " + dir.file("p4.alg") + " " + dir.file("swap.auto"));
    CHECK(fp.status == 0);
    CHECK(fp.output.find("PASS fixedpoints.replay") != std::string::npos);
    CliResult dc = run_cli("decompose " + dir.file("p4.alg"));
    CHECK(dc.status == 0);
    CHECK(dc.output.find("PASS decompose.exponent 2") != std::string::npos);
}

TEST_CASE("reduce, select and kurepa run from files") {
    TempDir dir;
    auto t = full_tree(4, 3, {}, "T");
    dir.write("T.tree", io::tree_to_string(*t));
    dir.write("pairs.ter", io::ter_to_string(block_pair_ter(t, "pairs")));
    CliResult rd = run_cli("--density 1:2 reduce " + dir.file("T.tree") + " " +
                           dir.file("pairs.ter") + " --family all");
    CHECK(rd.status == 0);
    CHECK(rd.output.find("PASS reduce.suitable") != std::string::npos);

    dir.write("pick.select",
              "select tree T level 2 density 1 2\nmeet a,b,c,d\ninclude aa\nsuitable pairs\n");
    CliResult sl = run_cli("select " + dir.file("pick.select"));
    CHECK(sl.status == 0);
    CHECK(sl.output.find("PASS select.ok") != std::string::npos);

    dir.write("S.tree", io::tree_to_string(*full_tree(2, 3, {}, "S")));
    dir.write("U.tree", io::tree_to_string(*full_tree(3, 3, {}, "U")));
    CliResult ku = run_cli("kurepa " + dir.file("S.tree") + " " + dir.file("S.tree"));
    CHECK(ku.status == 0);
    CliResult kn = run_cli("kurepa " + dir.file("S.tree") + " " + dir.file("U.tree"));
    CHECK(kn.status == 1);
    CHECK(kn.output.find("level 1 sizes 2 != 3") != std::string::npos);
}

TEST_CASE("dense-split, two-nice and nice-split subcommands") {
    TempDir dir;
    auto t = full_tree(4, 4, {2}, "S");
    dir.write("S.tree", io::tree_to_string(*t));
    dir.write("pairs.ter", io::ter_to_string(block_pair_ter(t, "pairs")));
    CliResult ds = run_cli("dense-split " + dir.file("pairs.ter") + " --tree " + dir.file("S.tree") +
                           " --level 2 --out " + dir.file("split.ter"));
    CHECK(ds.status == 0);
    CHECK(ds.output.find("PASS split.grade almost_nice") != std::string::npos);
    CHECK(ds.output.find("PASS split.swap") != std::string::npos);
    CHECK(fs::exists(dir.file("split.ter")));

    dir.write("H.tree", io::tree_to_string(*full_tree(4, 3, {}, "H")));
    CliResult tn = run_cli("two-nice " + dir.file("H.tree"));
    CHECK(tn.status == 0);
    CHECK(tn.output.find("PASS twonice.mnice") != std::string::npos);

    CliResult ns = run_cli("nice-split " + dir.file("split.ter") + " --tree " + dir.file("S.tree"));
    CHECK(ns.status == 0);
    CHECK(ns.output.find("PASS nicesplit.up-closed") != std::string::npos);
}

TEST_CASE("simulate and verify round-trip through the CLI") {
    TempDir dir;
    dir.write("eq.ter",
              "ter eq tree demo\nclass 1 ra,rb\nclass 1 rc,rd\n"
              "class 2 raa,rab,rba,rbb\nclass 2 rac,rad,rbc,rbd\n"
              "class 2 rca,rcb,rda,rdb\nclass 2 rcc,rcd,rdc,rdd\n");
    dir.write("demo.schedule",
              "schedule demo seed 1 density 1 2\ngrow 2 4\nlimit preserve eq.ter\ngrow 1 4\n");
    CliResult sm = run_cli("simulate " + dir.file("demo.schedule"));
    CHECK(sm.status == 0);
    CHECK(sm.output.find("PASS simulate.completed") != std::string::npos);
    REQUIRE(fs::exists(dir.file("demo.transcript")));
    CliResult vf = run_cli("verify " + dir.file("demo.transcript"));
    CHECK(vf.status == 0);
    CHECK(vf.output.find("PASS final.tree") != std::string::npos);
}

TEST_CASE("identical invocations produce byte-identical reports") {
    TempDir dir;
    auto t = full_tree(4, 3, {}, "T");
    dir.write("T.tree", io::tree_to_string(*t));
    dir.write("pairs.ter", io::ter_to_string(block_pair_ter(t, "pairs")));
    std::vector<std::string> invocations{
        "validate-tree " + dir.file("T.tree"),
        "validate-ter " + dir.file("pairs.ter") + " --tree " + dir.file("T.tree"),
        "--seed 42 kurepa " + dir.file("T.tree") + " " + dir.file("T.tree"),
        "project --ter " + dir.file("pairs.ter") + " --tree " + dir.file("T.tree"),
        "--porcelain validate-tree " + dir.file("T.tree"),
    };
    for (const auto& inv : invocations) {
        CliResult a = run_cli(inv);
        CliResult b = run_cli(inv);
        CHECK(a.output == b.output);
        CHECK(a.status == b.status);
    }
}
