#include "ulab/kernel_io.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "ulab/errors.hpp"
#include "ulab/numfmt.hpp"

namespace ulab {

namespace {

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

Kernel parse_kernel_text(std::string_view text) {
    std::map<std::string, std::string> fields;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::size_t colon = t.find(':');
        if (colon == std::string::npos)
            throw InputError("kernel file line " + std::to_string(lineno) + ": expected 'key: value', got '" + t + "'");
        std::string key = trim(t.substr(0, colon));
        std::string value = trim(t.substr(colon + 1));
        if (fields.count(key)) throw InputError(key + ": duplicate field");
        fields[key] = value;
    }

    auto take = [&](const std::string& key) {
        auto it = fields.find(key);
        if (it == fields.end()) throw InputError(key + ": missing required field");
        std::string v = it->second;
        fields.erase(it);
        return v;
    };

    long long format = parse_int(take("format"), "format");
    if (format != 1) throw InputError("format: unsupported schema version " + std::to_string(format));
    long long d = parse_int(take("d"), "d");
    long long m = parse_int(take("m"), "m");
    long long q = parse_int(take("q"), "q");
    if (d < 1 || d > 16) throw InputError("d: order must be in 1..16");
    if (m < 1) throw InputError("m: alphabet size must be >= 1");
    if (q < 1) throw InputError("q: value dimension must be >= 1");

    std::optional<bool> symmetric;
    if (auto it = fields.find("symmetric"); it != fields.end()) {
        if (it->second == "true") symmetric = true;
        else if (it->second == "false") symmetric = false;
        else throw InputError("symmetric: expected 'true' or 'false', got '" + it->second + "'");
        fields.erase(it);
    }

    std::vector<double> probs;
    for (const std::string& tok : split_ws(take("probs"))) probs.push_back(parse_double(tok, "probs"));
    std::vector<double> values;
    for (const std::string& tok : split_ws(take("values"))) values.push_back(parse_double(tok, "values"));

    if (!fields.empty()) throw InputError(fields.begin()->first + ": unknown field");

    if (static_cast<long long>(probs.size()) != m)
        throw InputError("probs: expected " + std::to_string(m) + " entries, got " + std::to_string(probs.size()));
    return Kernel(static_cast<int>(d), static_cast<int>(m), static_cast<int>(q), std::move(values),
                  DiscreteDistribution(std::move(probs)), symmetric);
}

std::string kernel_to_text(const Kernel& h) {
    std::string out;
    out += "format: 1\n";
    out += "d: " + std::to_string(h.d()) + "\n";
    out += "m: " + std::to_string(h.m()) + "\n";
    out += "q: " + std::to_string(h.q()) + "\n";
    if (h.declared_symmetric().has_value())
        out += std::string("symmetric: ") + (*h.declared_symmetric() ? "true" : "false") + "\n";
    out += "probs:";
    for (double p : h.law().probs()) out += " " + format_double(p);
    out += "\nvalues:";
    for (double v : h.raw()) out += " " + format_double(v);
    out += "\n";
    return out;
}

Kernel load_kernel(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("kernel file: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_kernel_text(buf.str());
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
}

void save_kernel(const Kernel& h, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("kernel file: cannot write '" + path + "'");
    out << kernel_to_text(h);
    if (!out) throw InputError("kernel file: write failed for '" + path + "'");
}

}  // namespace ulab
