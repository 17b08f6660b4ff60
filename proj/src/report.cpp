#include "ulab/report.hpp"

#include <algorithm>
#include <array>
#include <sstream>

namespace ulab {
namespace {

constexpr std::array<const char*, 9> kColumns = {"command", "spec", "n", "u", "t", "p",
                                                 "metric", "value", "extra"};

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::array<const std::string*, 9> fields(const ReportRow& row) {
    return {&row.command, &row.spec, &row.n, &row.u, &row.t, &row.p, &row.metric, &row.value, &row.extra};
}

}  // namespace

std::string to_csv(const Table& table) {
    std::ostringstream out;
    for (const auto& [key, value] : table.echo) out << "# " << key << "=" << value << "\n";
    for (std::size_t c = 0; c < kColumns.size(); ++c) out << (c ? "," : "") << kColumns[c];
    out << "\n";
    for (const ReportRow& row : table.rows) {
        auto f = fields(row);
        for (std::size_t c = 0; c < f.size(); ++c) out << (c ? "," : "") << csv_escape(*f[c]);
        out << "\n";
    }
    return out.str();
}

std::string to_text_summary(const Table& table) {
    std::ostringstream out;
    for (const auto& [key, value] : table.echo) out << key << " = " << value << "\n";
    if (!table.echo.empty()) out << "\n";
    std::array<std::size_t, 9> width{};
    for (std::size_t c = 0; c < kColumns.size(); ++c) width[c] = std::string(kColumns[c]).size();
    auto cell = [](const std::string& s) -> const std::string& {
        static const std::string dash = "-";
        return s.empty() ? dash : s;
    };
    for (const ReportRow& row : table.rows) {
        auto f = fields(row);
        for (std::size_t c = 0; c < f.size(); ++c) width[c] = std::max(width[c], cell(*f[c]).size());
    }
    for (std::size_t c = 0; c < kColumns.size(); ++c) {
        std::string head = kColumns[c];
        if (c + 1 < kColumns.size()) head.resize(width[c], ' ');
        out << (c ? "  " : "") << head;
    }
    out << "\n";
    for (const ReportRow& row : table.rows) {
        auto f = fields(row);
        for (std::size_t c = 0; c < f.size(); ++c) {
            std::string text = cell(*f[c]);
            if (c + 1 < f.size()) text.resize(width[c], ' ');
            out << (c ? "  " : "") << text;
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace ulab
