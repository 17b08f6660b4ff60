#include "ulab/indexing.hpp"

#include <algorithm>
#include <limits>

#include "ulab/errors.hpp"
#include "ulab/numfmt.hpp"

namespace ulab {

CoordSet::CoordSet(std::vector<int> members) : members_(std::move(members)) {
    std::sort(members_.begin(), members_.end());
    for (std::size_t i = 0; i < members_.size(); ++i) {
        if (members_[i] < 1) throw InputError("CoordSet: labels are 1-based, got " + std::to_string(members_[i]));
        if (i > 0 && members_[i] == members_[i - 1])
            throw InputError("CoordSet: duplicate label " + std::to_string(members_[i]));
    }
}

CoordSet CoordSet::full(int d) {
    std::vector<int> m(static_cast<std::size_t>(d < 0 ? 0 : d));
    for (int i = 0; i < d; ++i) m[static_cast<std::size_t>(i)] = i + 1;
    CoordSet s;
    s.members_ = std::move(m);
    return s;
}

CoordSet CoordSet::from_mask(std::uint32_t mask) {
    std::vector<int> m;
    for (int b = 0; b < 32; ++b)
        if (mask & (1u << b)) m.push_back(b + 1);
    CoordSet s;
    s.members_ = std::move(m);
    return s;
}

bool CoordSet::contains(int label) const {
    return std::binary_search(members_.begin(), members_.end(), label);
}

CoordSet CoordSet::complement(int d) const {
    std::vector<int> out;
    for (int label = 1; label <= d; ++label)
        if (!contains(label)) out.push_back(label);
    CoordSet s;
    s.members_ = std::move(out);
    return s;
}

std::uint32_t CoordSet::mask() const {
    std::uint32_t m = 0;
    for (int label : members_) m |= 1u << (label - 1);
    return m;
}

bool is_valid_partition(const Partition& part, const CoordSet& ground) {
    std::uint32_t seen = 0;
    for (const CoordSet& b : part.blocks) {
        if (b.empty()) return false;
        if (seen & b.mask()) return false;  // overlap
        seen |= b.mask();
    }
    return seen == ground.mask();
}

bool is_valid_spec(const PartitionSpec& spec, int d) {
    if (d < 1) return false;
    std::uint32_t all = (d >= 32) ? ~0u : ((1u << d) - 1u);
    if (spec.K.mask() & ~all) return false;
    return is_valid_partition(spec.J, spec.K.complement(d));
}

std::vector<Partition> enumerate_partitions(const CoordSet& ground) {
    std::vector<Partition> out;
    const std::vector<int>& labels = ground.members();
    const int k = static_cast<int>(labels.size());
    if (k == 0) {
        out.push_back(Partition{});  // P_{} = { empty partition }, deg 0
        return out;
    }
    // restricted growth strings: a[0] = 0, a[i] <= 1 + max(a[0..i-1]),
    // generated in lexicographic order
    std::vector<int> a(static_cast<std::size_t>(k), 0);
    std::function<void(int, int)> rec = [&](int pos, int maxUsed) {
        if (pos == k) {
            int nblocks = maxUsed + 1;
            std::vector<std::vector<int>> blocks(static_cast<std::size_t>(nblocks));
            for (int i = 0; i < k; ++i)
                blocks[static_cast<std::size_t>(a[static_cast<std::size_t>(i)])].push_back(labels[static_cast<std::size_t>(i)]);
            Partition p;
            for (auto& b : blocks) p.blocks.emplace_back(std::move(b));
            out.push_back(std::move(p));
            return;
        }
        for (int v = 0; v <= maxUsed + 1; ++v) {
            a[static_cast<std::size_t>(pos)] = v;
            rec(pos + 1, std::max(maxUsed, v));
        }
    };
    a[0] = 0;
    rec(1, 0);
    return out;
}

std::vector<PartitionSpec> enumerate_partition_specs(int d) {
    if (d < 1) throw InputError("enumerate_partition_specs: order must be >= 1, got " + std::to_string(d));
    if (d > 20) throw GuardError("enumerate_partition_specs: order cap 20 exceeded");
    std::vector<PartitionSpec> out;
    for (std::uint32_t mask = 0; mask < (1u << d); ++mask) {
        CoordSet K = CoordSet::from_mask(mask);
        for (Partition& J : enumerate_partitions(K.complement(d)))
            out.push_back(PartitionSpec{K, std::move(J)});
    }
    return out;
}

std::string to_string(const CoordSet& s) {
    std::string out = "{";
    for (std::size_t i = 0; i < s.members().size(); ++i) {
        if (i > 0) out += ' ';
        out += std::to_string(s.members()[i]);
    }
    out += '}';
    return out;
}

std::string to_string(const Partition& p) {
    if (p.blocks.empty()) return "{}";
    std::string out = "{";
    for (const CoordSet& b : p.blocks) out += to_string(b);
    out += '}';
    return out;
}

std::string to_string(const PartitionSpec& spec) {
    return "K=" + to_string(spec.K) + " J=" + to_string(spec.J);
}

namespace {

// parses "{1 3}" starting at pos; advances pos past the closing brace
std::vector<int> parse_brace_list(const std::string& text, std::size_t& pos, const std::string& what) {
    if (pos >= text.size() || text[pos] != '{') throw InputError(what + ": expected '{' in '" + text + "'");
    ++pos;
    std::vector<int> labels;
    std::string tok;
    while (pos < text.size() && text[pos] != '}') {
        char ch = text[pos];
        if (ch == ' ') {
            if (!tok.empty()) {
                labels.push_back(static_cast<int>(parse_int(tok, what)));
                tok.clear();
            }
        } else {
            tok += ch;
        }
        ++pos;
    }
    if (pos >= text.size()) throw InputError(what + ": missing '}' in '" + text + "'");
    if (!tok.empty()) labels.push_back(static_cast<int>(parse_int(tok, what)));
    ++pos;  // consume '}'
    return labels;
}

}  // namespace

PartitionSpec parse_partition_spec(const std::string& text, int d) {
    std::size_t pos = 0;
    auto expect = [&](const std::string& lit) {
        if (text.compare(pos, lit.size(), lit) != 0)
            throw InputError("partition spec: expected '" + lit + "' at position " + std::to_string(pos) + " in '" + text + "'");
        pos += lit.size();
    };
    expect("K=");
    PartitionSpec spec;
    spec.K = CoordSet(parse_brace_list(text, pos, "partition spec K"));
    expect(" J=");
    if (pos + 1 < text.size() && text[pos] == '{' && text[pos + 1] == '{') {
        ++pos;  // outer brace
        while (pos < text.size() && text[pos] == '{')
            spec.J.blocks.emplace_back(parse_brace_list(text, pos, "partition spec block"));
        if (pos >= text.size() || text[pos] != '}')
            throw InputError("partition spec: missing closing '}' in '" + text + "'");
        ++pos;
    } else {
        expect("{}");  // empty partition
    }
    if (pos != text.size()) throw InputError("partition spec: trailing characters in '" + text + "'");
    if (!is_valid_spec(spec, d))
        throw InputError("partition spec: '" + text + "' does not partition {1.." + std::to_string(d) + "}");
    return spec;
}

IndexStream::IndexStream(int n, int d, bool offdiag_only) : n_(n), d_(d), offdiag_(offdiag_only) {
    if (n < 1 || d < 1) throw InputError("IndexStream: need n >= 1 and d >= 1");
    cur_.assign(static_cast<std::size_t>(d), 1);
    done_ = offdiag_ && n < d;  // no injective tuple exists
}

bool IndexStream::next(MultiIndex& out) {
    auto distinct = [&]() {
        for (int i = 0; i < d_; ++i)
            for (int j = i + 1; j < d_; ++j)
                if (cur_[static_cast<std::size_t>(i)] == cur_[static_cast<std::size_t>(j)]) return false;
        return true;
    };
    auto advance = [&]() {
        int pos = d_ - 1;
        while (pos >= 0) {
            if (++cur_[static_cast<std::size_t>(pos)] <= n_) return true;
            cur_[static_cast<std::size_t>(pos)] = 1;
            --pos;
        }
        return false;
    };
    while (!done_) {
        if (!started_) {
            started_ = true;
        } else if (!advance()) {
            done_ = true;
            break;
        }
        if (!offdiag_ || distinct()) {
            out = cur_;
            return true;
        }
    }
    return false;
}

std::uint64_t IndexStream::count(int n, int d, bool offdiag_only) {
    if (n < 1 || d < 1) throw InputError("IndexStream::count: need n >= 1 and d >= 1");
    std::uint64_t total = 1;
    for (int k = 0; k < d; ++k) {
        std::uint64_t factor = offdiag_only ? static_cast<std::uint64_t>(std::max(0, n - k))
                                            : static_cast<std::uint64_t>(n);
        if (factor != 0 && total > std::numeric_limits<std::uint64_t>::max() / factor)
            throw GuardError("IndexStream::count: index count overflows 64 bits");
        total *= factor;
    }
    return total;
}

void for_each_index(int n, int d, bool offdiag_only, const std::function<void(const MultiIndex&)>& fn) {
    IndexStream stream(n, d, offdiag_only);
    MultiIndex idx;
    while (stream.next(idx)) fn(idx);
}

}  // namespace ulab
