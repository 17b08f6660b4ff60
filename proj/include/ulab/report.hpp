#pragma once

#include <string>
#include <utility>
#include <vector>

namespace ulab {

// Flat result table keyed by (command, spec, n, u, t, p) so downstream tooling
// needs no knowledge of the producing operation. All values arrive
// pre-formatted; serialization adds no rounding, so equal tables serialize to
// identical bytes.
struct ReportRow {
    std::string command;
    std::string spec;
    std::string n;
    std::string u;
    std::string t;
    std::string p;
    std::string metric;
    std::string value;
    std::string extra;
};

struct Table {
    std::vector<std::pair<std::string, std::string>> echo;  // run configuration echo
    std::vector<ReportRow> rows;
};

std::string to_csv(const Table& table);
std::string to_text_summary(const Table& table);

}  // namespace ulab
