#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace ulab {

// Coordinate labels are 1-based: an order-d kernel has coordinates {1, .., d}.
// A CoordSet is a sorted duplicate-free subset of them.
class CoordSet {
public:
    CoordSet() = default;
    explicit CoordSet(std::vector<int> members);  // sorts, rejects duplicates and labels < 1
    static CoordSet full(int d);                  // {1, .., d}
    static CoordSet from_mask(std::uint32_t mask);  // bit b-1 <-> label b

    int size() const { return static_cast<int>(members_.size()); }
    bool empty() const { return members_.empty(); }
    bool contains(int label) const;
    CoordSet complement(int d) const;
    std::uint32_t mask() const;
    const std::vector<int>& members() const { return members_; }

    friend bool operator==(const CoordSet&, const CoordSet&) = default;
    friend auto operator<=>(const CoordSet&, const CoordSet&) = default;

private:
    std::vector<int> members_;
};

// Set partition: nonempty pairwise-disjoint blocks, kept sorted by smallest
// element. The empty partition (of the empty set) has deg 0.
struct Partition {
    std::vector<CoordSet> blocks;
    int deg() const { return static_cast<int>(blocks.size()); }
    friend bool operator==(const Partition&, const Partition&) = default;
};

// A pair (K, J): K together with a partition J of its complement in {1..d}.
struct PartitionSpec {
    CoordSet K;
    Partition J;
    int deg() const { return J.deg(); }
    friend bool operator==(const PartitionSpec&, const PartitionSpec&) = default;
};

bool is_valid_partition(const Partition& part, const CoordSet& ground);
bool is_valid_spec(const PartitionSpec& spec, int d);

// All set partitions of `ground`, in restricted-growth-string order so that
// enumeration order (and every downstream report) is byte-stable.
// ground = {} yields exactly the empty partition.
std::vector<Partition> enumerate_partitions(const CoordSet& ground);

// Every (K, J) pair for order d: K runs over subsets of {1..d} in increasing
// mask order, J over enumerate_partitions of the complement.
std::vector<PartitionSpec> enumerate_partition_specs(int d);

// "{1 3}" / "{}"
std::string to_string(const CoordSet& s);
// "{{1 3}{2}}" / "{}"
std::string to_string(const Partition& p);
// "K={1} J={{2}{3}}"
std::string to_string(const PartitionSpec& spec);
// Inverse of to_string(PartitionSpec); throws InputError naming the defect.
PartitionSpec parse_partition_spec(const std::string& text, int d);

using MultiIndex = std::vector<int>;  // 1-based coordinates, each in {1..n}

// Lazy odometer over {1..n}^d (last coordinate fastest), optionally restricted
// to tuples with pairwise-distinct coordinates. Never materializes the grid.
class IndexStream {
public:
    IndexStream(int n, int d, bool offdiag_only);
    bool next(MultiIndex& out);  // fills d coords; false once exhausted
    // n^d or the falling factorial n(n-1)...(n-d+1); throws GuardError on
    // 64-bit overflow.
    static std::uint64_t count(int n, int d, bool offdiag_only);

private:
    int n_ = 0;
    int d_ = 0;
    bool offdiag_ = false;
    bool started_ = false;
    bool done_ = false;
    std::vector<int> cur_;
};

void for_each_index(int n, int d, bool offdiag_only, const std::function<void(const MultiIndex&)>& fn);

}  // namespace ulab
