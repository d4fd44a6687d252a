#include "abm/state.hpp"

#include <bit>
#include <stdexcept>

namespace abm {

PopulationState::PopulationState(std::size_t num_agents)
    : size_(num_agents), words_((num_agents + 63) / 64, 0ULL) {}

PopulationState PopulationState::from_values(std::span<const int> values) {
    PopulationState x(values.size());
    for (std::size_t n = 0; n < values.size(); ++n) {
        if (values[n] != 0 && values[n] != 1)
            throw std::invalid_argument("binary agent state must be 0 or 1");
        x.set(n, values[n] == 1);
    }
    return x;
}

PopulationState PopulationState::from_code(std::uint64_t code, std::size_t num_agents) {
    if (num_agents > 64) throw std::invalid_argument("state code supports at most 64 agents");
    PopulationState x(num_agents);
    if (num_agents > 0) {
        const std::uint64_t mask = num_agents == 64 ? ~0ULL : ((1ULL << num_agents) - 1);
        x.words_[0] = code & mask;
        x.count_ = static_cast<std::size_t>(std::popcount(x.words_[0]));
    }
    return x;
}

void PopulationState::set(std::size_t n, bool value) {
    const std::uint64_t bit = 1ULL << (n & 63);
    std::uint64_t& w = words_[n >> 6];
    const bool old = (w & bit) != 0;
    if (old == value) return;
    if (value) {
        w |= bit;
        ++count_;
    } else {
        w &= ~bit;
        --count_;
    }
}

void PopulationState::clear() {
    for (auto& w : words_) w = 0;
    count_ = 0;
}

std::size_t PopulationState::nth_one(std::size_t k) const {
    for (std::size_t wi = 0; wi < words_.size(); ++wi) {
        std::uint64_t w = words_[wi];
        const auto c = static_cast<std::size_t>(std::popcount(w));
        if (k >= c) {
            k -= c;
            continue;
        }
        for (; k > 0; --k) w &= w - 1;  // drop the lowest set bits
        return wi * 64 + static_cast<std::size_t>(std::countr_zero(w));
    }
    throw std::out_of_range("nth_one: not enough agents in state 1");
}

std::size_t PopulationState::nth_zero(std::size_t k) const {
    for (std::size_t wi = 0; wi < words_.size(); ++wi) {
        std::uint64_t w = ~words_[wi];
        if (wi + 1 == words_.size() && (size_ & 63) != 0) w &= (1ULL << (size_ & 63)) - 1;
        const auto c = static_cast<std::size_t>(std::popcount(w));
        if (k >= c) {
            k -= c;
            continue;
        }
        for (; k > 0; --k) w &= w - 1;
        return wi * 64 + static_cast<std::size_t>(std::countr_zero(w));
    }
    throw std::out_of_range("nth_zero: not enough agents in state 0");
}

std::uint64_t PopulationState::code() const {
    if (size_ > 64) throw std::logic_error("state code supports at most 64 agents");
    return words_.empty() ? 0ULL : words_[0];
}

std::vector<int> PopulationState::to_values() const {
    std::vector<int> out(size_);
    for (std::size_t n = 0; n < size_; ++n) out[n] = (*this)[n] ? 1 : 0;
    return out;
}

SirState SirState::from_values(std::span<const int> values) {
    SirState x(values.size());
    for (std::size_t n = 0; n < values.size(); ++n) x.set(n, values[n]);
    return x;
}

SirState SirState::from_code(std::uint64_t code, std::size_t num_agents) {
    if (num_agents > 40) throw std::invalid_argument("SIR state code supports at most 40 agents");
    SirState x(num_agents);
    for (std::size_t n = 0; n < num_agents; ++n) {
        x.set(n, static_cast<int>(code % 3));
        code /= 3;
    }
    return x;
}

void SirState::set(std::size_t n, int value) {
    if (value < 0 || value > 2) throw std::invalid_argument("SIR agent state must be 0, 1 or 2");
    infected_.set(n, value == 1);
    recovered_.set(n, value == 2);
}

std::uint64_t SirState::code() const {
    std::uint64_t code = 0;
    for (std::size_t n = size(); n-- > 0;) code = code * 3 + static_cast<std::uint64_t>((*this)[n]);
    return code;
}

std::vector<int> SirState::to_values() const {
    std::vector<int> out(size());
    for (std::size_t n = 0; n < size(); ++n) out[n] = (*this)[n];
    return out;
}

}  // namespace abm
