#include "treelab/report.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

namespace treelab {

void Report::add(bool pass, std::string id, std::string detail) {
    lines.push_back({pass, std::move(id), std::move(detail)});
}

void Report::merge(const Report& other) {
    lines.insert(lines.end(), other.lines.begin(), other.lines.end());
}

bool Report::all_pass() const {
    return std::all_of(lines.begin(), lines.end(), [](const CheckLine& l) { return l.pass; });
}

size_t Report::fail_count() const {
    size_t n = 0;
    for (const auto& l : lines)
        if (!l.pass) ++n;
    return n;
}

void Report::render(std::ostream& os, bool porcelain) const {
    std::vector<CheckLine> sorted = lines;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const CheckLine& a, const CheckLine& b) { return a.id < b.id; });
    for (const auto& l : sorted) {
        if (porcelain) {
            os << "check=" << l.id << " pass=" << (l.pass ? "1" : "0");
            if (!l.detail.empty()) os << " detail=" << l.detail;
            os << "\n";
        } else {
            os << (l.pass ? "PASS " : "FAIL ") << l.id;
            if (!l.detail.empty()) os << " " << l.detail;
            os << "\n";
        }
    }
}

std::string Report::to_string(bool porcelain) const {
    std::ostringstream os;
    render(os, porcelain);
    return os.str();
}

} // namespace treelab
