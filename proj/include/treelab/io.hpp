#pragma once

// Text formats (UTF-8, LF). Blank lines and lines starting with '#' are
// ignored. Writers emit canonical, byte-stable output: nodes sorted by
// (level, id), comma lists in atom/id order.
//
//   tree <name> height <H> limits <l,l,...|->
//   node <id> <level> <parent|->
//
//   ter <name> tree <treename>
//   class <level> <id,id,...>          (singleton classes implicit)
//
//   algebra <name> atoms <a,b,...>
//   block <a,b,...>                    (optional subalgebra partition)
//
//   auto <name> algebra|tree <refname>
//   map <from> <to>                    (unmapped points are fixed)
//
//   antichain <name> tree <treename>
//   member <id>

#include "treelab/boolalg.hpp"
#include "treelab/ter.hpp"
#include "treelab/tree.hpp"

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace treelab {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace io {

std::vector<std::string> split_commas(const std::string& s);
std::string join_commas(const std::vector<std::string>& items);

LevelledTree parse_tree(std::istream& in);
LevelledTree load_tree(const std::string& path);
void write_tree(std::ostream& out, const LevelledTree& tree);
std::string tree_to_string(const LevelledTree& tree);
void save_tree(const std::string& path, const LevelledTree& tree);

struct TerFile {
    std::string name;
    std::string tree_name;
    std::vector<LevelClass> classes;
};

TerFile parse_ter(std::istream& in);
TerFile load_ter(const std::string& path);
// Checks that the declared tree name matches tree->name().
Ter resolve_ter(const TerFile& file, TreePtr tree);
void write_ter(std::ostream& out, const Ter& rel);
std::string ter_to_string(const Ter& rel);
void save_ter(const std::string& path, const Ter& rel);

struct AlgebraFile {
    FiniteBooleanAlgebra algebra;
    std::optional<SubalgebraPartition> blocks;
};

AlgebraFile parse_algebra(std::istream& in);
AlgebraFile load_algebra(const std::string& path);
void write_algebra(std::ostream& out, const FiniteBooleanAlgebra& algebra,
                   const SubalgebraPartition* blocks = nullptr);

struct AutoFile {
    std::string name;
    std::string kind; // "algebra" | "tree"
    std::string ref;
    std::vector<std::pair<std::string, std::string>> maplets;
};

AutoFile parse_auto(std::istream& in);
AutoFile load_auto(const std::string& path);
void write_auto(std::ostream& out, const AutoFile& file);

struct AntichainFile {
    std::string name;
    std::string tree_name;
    std::vector<std::string> members;
};

AntichainFile parse_antichain(std::istream& in);
AntichainFile load_antichain(const std::string& path);
void write_antichain(std::ostream& out, const AntichainFile& file);

struct SelectFile {
    std::string tree_name;
    int level = 0;
    int resolution = 0;
    int multiplicity = 1;
    std::vector<std::vector<std::string>> meets;
    std::vector<std::string> include;
    std::vector<std::string> exclude;
    std::optional<std::string> suitable; // t.e.r. name
};

SelectFile parse_select(std::istream& in);
SelectFile load_select(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

} // namespace io
} // namespace treelab
