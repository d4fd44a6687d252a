#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace abm {

// Binary agent configuration x in {0,1}^N, bit-packed, with the infected count cached.
class PopulationState {
public:
    PopulationState() = default;
    explicit PopulationState(std::size_t num_agents);

    static PopulationState from_values(std::span<const int> values);
    // Little-endian integer encoding: agent n is bit n. Requires N <= 64.
    static PopulationState from_code(std::uint64_t code, std::size_t num_agents);

    std::size_t size() const { return size_; }
    std::size_t count() const { return count_; }

    bool operator[](std::size_t n) const { return (words_[n >> 6] >> (n & 63)) & 1ULL; }
    void set(std::size_t n, bool value);
    void flip(std::size_t n) { set(n, !(*this)[n]); }
    void clear();

    // Index of the k-th agent (zero-based) with state 1, resp. 0.
    std::size_t nth_one(std::size_t k) const;
    std::size_t nth_zero(std::size_t k) const;

    std::uint64_t code() const;
    std::vector<int> to_values() const;
    std::span<const std::uint64_t> words() const { return words_; }

    friend bool operator==(const PopulationState& a, const PopulationState& b) {
        return a.size_ == b.size_ && a.words_ == b.words_;
    }

private:
    std::size_t size_ = 0;
    std::size_t count_ = 0;
    std::vector<std::uint64_t> words_;
};

// SIR configuration over {0,1,2}^N (0 susceptible, 1 infected, 2 recovered),
// stored as an infected plane and a recovered plane.
class SirState {
public:
    SirState() = default;
    explicit SirState(std::size_t num_agents) : infected_(num_agents), recovered_(num_agents) {}

    static SirState from_values(std::span<const int> values);
    // Base-3 little-endian encoding, agent n is digit n.
    static SirState from_code(std::uint64_t code, std::size_t num_agents);

    std::size_t size() const { return infected_.size(); }
    std::size_t infected() const { return infected_.count(); }
    std::size_t recovered() const { return recovered_.count(); }
    std::size_t susceptible() const { return size() - infected() - recovered(); }

    int operator[](std::size_t n) const { return infected_[n] ? 1 : (recovered_[n] ? 2 : 0); }
    void set(std::size_t n, int value);

    const PopulationState& infected_plane() const { return infected_; }
    const PopulationState& recovered_plane() const { return recovered_; }

    std::uint64_t code() const;
    std::vector<int> to_values() const;

    friend bool operator==(const SirState& a, const SirState& b) {
        return a.infected_ == b.infected_ && a.recovered_ == b.recovered_;
    }

private:
    PopulationState infected_;
    PopulationState recovered_;
};

}  // namespace abm
