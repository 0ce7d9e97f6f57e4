#include "treelab/io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace treelab::io {

namespace {

std::vector<std::vector<std::string>> tokenize(std::istream& in) {
    std::vector<std::vector<std::string>> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::vector<std::string> toks;
        std::string tok;
        while (ls >> tok) toks.push_back(tok);
        if (toks.empty() || toks.front()[0] == '#') continue;
        lines.push_back(std::move(toks));
    }
    return lines;
}

int parse_int(const std::string& s, const std::string& what) {
    try {
        size_t pos = 0;
        int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("bad " + what + ": " + s);
    }
}

} // namespace

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::string join_commas(const std::vector<std::string>& items) {
    std::string out;
    for (size_t i = 0; i < items.size(); ++i) {
        if (i) out += ",";
        out += items[i];
    }
    return out;
}

LevelledTree parse_tree(std::istream& in) {
    auto lines = tokenize(in);
    if (lines.empty() || lines[0][0] != "tree" || lines[0].size() != 6 ||
        lines[0][2] != "height" || lines[0][4] != "limits")
        throw ParseError("expected header: tree <name> height <H> limits <list|->");
    std::string name = lines[0][1];
    int height = parse_int(lines[0][3], "height");
    std::set<int> limits;
    if (lines[0][5] != "-")
        for (const auto& l : split_commas(lines[0][5])) limits.insert(parse_int(l, "limit level"));

    std::vector<NodeSpec> specs;
    for (size_t k = 1; k < lines.size(); ++k) {
        const auto& toks = lines[k];
        if (toks[0] != "node" || toks.size() != 4)
            throw ParseError("expected: node <id> <level> <parent|->");
        NodeSpec s;
        s.id = toks[1];
        s.level = parse_int(toks[2], "level");
        if (toks[3] != "-") s.parent = toks[3];
        specs.push_back(std::move(s));
    }
    try {
        LevelledTree tree(name, limits, specs);
        if (tree.height() != height)
            throw ParseError("declared height " + std::to_string(height) + " but nodes span " +
                             std::to_string(tree.height()) + " levels");
        return tree;
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
}

void write_tree(std::ostream& out, const LevelledTree& tree) {
    std::vector<std::string> limits;
    for (int l : tree.limit_levels()) limits.push_back(std::to_string(l));
    out << "tree " << tree.name() << " height " << tree.height() << " limits "
        << (limits.empty() ? "-" : join_commas(limits)) << "\n";
    for (int l = 0; l < tree.height(); ++l) {
        for (int i : tree.level_nodes(l)) {
            out << "node " << tree.id_of(i) << " " << l << " "
                << (tree.parent(i) >= 0 ? tree.id_of(tree.parent(i)) : "-") << "\n";
        }
    }
}

std::string tree_to_string(const LevelledTree& tree) {
    std::ostringstream os;
    write_tree(os, tree);
    return os.str();
}

TerFile parse_ter(std::istream& in) {
    auto lines = tokenize(in);
    if (lines.empty() || lines[0][0] != "ter" || lines[0].size() != 4 || lines[0][2] != "tree")
        throw ParseError("expected header: ter <name> tree <treename>");
    TerFile f;
    f.name = lines[0][1];
    f.tree_name = lines[0][3];
    for (size_t k = 1; k < lines.size(); ++k) {
        const auto& toks = lines[k];
        if (toks[0] != "class" || toks.size() != 3)
            throw ParseError("expected: class <level> <id,id,...>");
        LevelClass lc;
        lc.level = parse_int(toks[1], "class level");
        lc.members = split_commas(toks[2]);
        f.classes.push_back(std::move(lc));
    }
    return f;
}

Ter resolve_ter(const TerFile& file, TreePtr tree) {
    if (file.tree_name != tree->name())
        throw ParseError("t.e.r. " + file.name + " declares tree " + file.tree_name +
                         " but was given " + tree->name());
    try {
        return Ter::from_classes(std::move(tree), file.classes, file.name);
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
}

void write_ter(std::ostream& out, const Ter& rel) {
    out << "ter " << rel.name() << " tree " << rel.tree().name() << "\n";
    for (const auto& lc : rel.nontrivial_classes())
        out << "class " << lc.level << " " << join_commas(lc.members) << "\n";
}

std::string ter_to_string(const Ter& rel) {
    std::ostringstream os;
    write_ter(os, rel);
    return os.str();
}

AlgebraFile parse_algebra(std::istream& in) {
    auto lines = tokenize(in);
    if (lines.empty() || lines[0][0] != "algebra" || lines[0].size() != 4 ||
        lines[0][2] != "atoms")
        throw ParseError("expected header: algebra <name> atoms <a,b,...>");
    try {
        FiniteBooleanAlgebra algebra(lines[0][1], split_commas(lines[0][3]));
        std::vector<AtomBits> blocks;
        for (size_t k = 1; k < lines.size(); ++k) {
            const auto& toks = lines[k];
            if (toks[0] != "block" || toks.size() != 2)
                throw ParseError("expected: block <a,b,...>");
            blocks.push_back(algebra.element(split_commas(toks[1])));
        }
        AlgebraFile f{std::move(algebra), std::nullopt};
        if (!blocks.empty())
            f.blocks = partition_from_blocks(f.algebra.atom_count(), std::move(blocks));
        return f;
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
}

void write_algebra(std::ostream& out, const FiniteBooleanAlgebra& algebra,
                   const SubalgebraPartition* blocks) {
    out << "algebra " << algebra.name() << " atoms " << join_commas(algebra.atoms()) << "\n";
    if (blocks)
        for (const auto& b : blocks->blocks)
            out << "block " << join_commas(algebra.atom_names(b)) << "\n";
}

AutoFile parse_auto(std::istream& in) {
    auto lines = tokenize(in);
    if (lines.empty() || lines[0][0] != "auto" || lines[0].size() != 4 ||
        (lines[0][2] != "algebra" && lines[0][2] != "tree"))
        throw ParseError("expected header: auto <name> algebra|tree <refname>");
    AutoFile f;
    f.name = lines[0][1];
    f.kind = lines[0][2];
    f.ref = lines[0][3];
    for (size_t k = 1; k < lines.size(); ++k) {
        const auto& toks = lines[k];
        if (toks[0] != "map" || toks.size() != 3) throw ParseError("expected: map <from> <to>");
        f.maplets.emplace_back(toks[1], toks[2]);
    }
    return f;
}

void write_auto(std::ostream& out, const AutoFile& file) {
    out << "auto " << file.name << " " << file.kind << " " << file.ref << "\n";
    auto sorted = file.maplets;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& [from, to] : sorted) out << "map " << from << " " << to << "\n";
}

AntichainFile parse_antichain(std::istream& in) {
    auto lines = tokenize(in);
    if (lines.empty() || lines[0][0] != "antichain" || lines[0].size() != 4 ||
        lines[0][2] != "tree")
        throw ParseError("expected header: antichain <name> tree <treename>");
    AntichainFile f;
    f.name = lines[0][1];
    f.tree_name = lines[0][3];
    for (size_t k = 1; k < lines.size(); ++k) {
        const auto& toks = lines[k];
        if (toks[0] != "member" || toks.size() != 2) throw ParseError("expected: member <id>");
        f.members.push_back(toks[1]);
    }
    std::sort(f.members.begin(), f.members.end());
    return f;
}

void write_antichain(std::ostream& out, const AntichainFile& file) {
    out << "antichain " << file.name << " tree " << file.tree_name << "\n";
    auto sorted = file.members;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& m : sorted) out << "member " << m << "\n";
}

SelectFile parse_select(std::istream& in) {
    auto lines = tokenize(in);
    if (lines.empty() || lines[0][0] != "select" || lines[0].size() != 8 ||
        lines[0][1] != "tree" || lines[0][3] != "level" || lines[0][5] != "density")
        throw ParseError("expected header: select tree <name> level <a> density <g> <c>");
    SelectFile f;
    f.tree_name = lines[0][2];
    f.level = parse_int(lines[0][4], "level");
    f.resolution = parse_int(lines[0][6], "resolution");
    f.multiplicity = parse_int(lines[0][7], "multiplicity");
    for (size_t k = 1; k < lines.size(); ++k) {
        const auto& toks = lines[k];
        if (toks[0] == "meet" && toks.size() == 2)
            f.meets.push_back(split_commas(toks[1]));
        else if (toks[0] == "include" && toks.size() == 2) {
            auto ids = split_commas(toks[1]);
            f.include.insert(f.include.end(), ids.begin(), ids.end());
        } else if (toks[0] == "exclude" && toks.size() == 2) {
            auto ids = split_commas(toks[1]);
            f.exclude.insert(f.exclude.end(), ids.begin(), ids.end());
        } else if (toks[0] == "suitable" && toks.size() == 2) {
            f.suitable = toks[1];
        } else {
            throw ParseError("unknown select line: " + toks[0]);
        }
    }
    return f;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path);
    out << content;
}

LevelledTree load_tree(const std::string& path) {
    std::istringstream in(read_file(path));
    return parse_tree(in);
}

void save_tree(const std::string& path, const LevelledTree& tree) {
    write_file(path, tree_to_string(tree));
}

TerFile load_ter(const std::string& path) {
    std::istringstream in(read_file(path));
    return parse_ter(in);
}

void save_ter(const std::string& path, const Ter& rel) {
    write_file(path, ter_to_string(rel));
}

AlgebraFile load_algebra(const std::string& path) {
    std::istringstream in(read_file(path));
    return parse_algebra(in);
}

AutoFile load_auto(const std::string& path) {
    std::istringstream in(read_file(path));
    return parse_auto(in);
}

AntichainFile load_antichain(const std::string& path) {
    std::istringstream in(read_file(path));
    return parse_antichain(in);
}

SelectFile load_select(const std::string& path) {
    std::istringstream in(read_file(path));
    return parse_select(in);
}

} // namespace treelab::io
