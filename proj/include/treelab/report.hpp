#pragma once

// Line-oriented check reports shared by the CLI and the verification ops.
// Plain text keeps golden-file testing trivial; --porcelain emits
// machine-stable key=value lines instead.

#include <iosfwd>
#include <string>
#include <vector>

namespace treelab {

struct CheckLine {
    bool pass = false;
    std::string id;
    std::string detail;
};

struct Report {
    std::vector<CheckLine> lines;

    void add(bool pass, std::string id, std::string detail = "");
    void merge(const Report& other);
    bool all_pass() const;
    size_t fail_count() const;

    // Lines sorted by check id (stable for duplicates).
    void render(std::ostream& os, bool porcelain = false) const;
    std::string to_string(bool porcelain = false) const;
};

} // namespace treelab
