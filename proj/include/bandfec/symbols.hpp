#pragma once

// Symbol payload containers.
//
// SymbolStore is the solver-facing type: a fixed-size array of equal-length
// byte buffers indexed like matrix rows, with an XOR combine.  SymbolBlock is
// the codec-facing type: one buffer per code symbol plus presence flags and a
// tag recording how each symbol became known.

#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <vector>

namespace bandfec {

class SymbolStore {
public:
    SymbolStore() = default;

    SymbolStore(std::size_t count, std::size_t symbol_size)
        : count_(count),
          symbol_size_(symbol_size),
          stride_((symbol_size + 7) / 8),
          data_(count * stride_, 0) {}

    std::size_t count() const { return count_; }
    std::size_t symbol_size() const { return symbol_size_; }

    std::span<std::uint8_t> row(std::size_t i) {
        return {reinterpret_cast<std::uint8_t*>(data_.data() + i * stride_), symbol_size_};
    }

    std::span<const std::uint8_t> row(std::size_t i) const {
        return {reinterpret_cast<const std::uint8_t*>(data_.data() + i * stride_), symbol_size_};
    }

    void assign(std::size_t i, std::span<const std::uint8_t> bytes) {
        if (bytes.size() != symbol_size_) throw std::invalid_argument("SymbolStore::assign: size mismatch");
        std::memcpy(data_.data() + i * stride_, bytes.data(), bytes.size());
    }

    void xor_rows(std::size_t dst, std::size_t src) {
        std::uint64_t* d = data_.data() + dst * stride_;
        const std::uint64_t* s = data_.data() + src * stride_;
        for (std::size_t w = 0; w < stride_; ++w) d[w] ^= s[w];
    }

    void xor_bytes(std::size_t dst, std::span<const std::uint8_t> bytes) {
        std::uint8_t* d = reinterpret_cast<std::uint8_t*>(data_.data() + dst * stride_);
        for (std::size_t i = 0; i < bytes.size() && i < symbol_size_; ++i) d[i] ^= bytes[i];
    }

    bool row_is_zero(std::size_t i) const {
        const std::uint64_t* s = data_.data() + i * stride_;
        for (std::size_t w = 0; w < stride_; ++w) {
            if (s[w] != 0) return false;
        }
        return true;
    }

private:
    std::size_t count_ = 0;
    std::size_t symbol_size_ = 0;
    std::size_t stride_ = 0;  // in 64-bit words
    std::vector<std::uint64_t> data_;
};

enum class SlotState : std::uint8_t {
    Missing = 0,
    Received = 1,
    Iterative = 2,  // recovered by the peeling decoder
    Ml = 3,         // recovered by the maximum-likelihood solver
};

class SymbolBlock {
public:
    SymbolBlock() = default;

    SymbolBlock(std::size_t slots, std::size_t symbol_size)
        : store_(slots, symbol_size), state_(slots, SlotState::Missing) {}

    std::size_t slots() const { return state_.size(); }
    std::size_t symbol_size() const { return store_.symbol_size(); }

    bool present(std::size_t i) const { return state_[i] != SlotState::Missing; }
    SlotState state(std::size_t i) const { return state_[i]; }

    std::span<const std::uint8_t> symbol(std::size_t i) const { return store_.row(i); }
    std::span<std::uint8_t> symbol_mut(std::size_t i) { return store_.row(i); }

    void receive(std::size_t i, std::span<const std::uint8_t> bytes) {
        store_.assign(i, bytes);
        state_[i] = SlotState::Received;
    }

    // Marks a slot recovered; payload must already be in place.
    void mark(std::size_t i, SlotState how) { state_[i] = how; }

    // XORs slot src into slot dst, word-wise.  Presence flags are untouched.
    void xor_from(std::size_t dst, std::size_t src) { store_.xor_rows(dst, src); }

    std::size_t present_count() const {
        std::size_t n = 0;
        for (SlotState s : state_) n += s != SlotState::Missing;
        return n;
    }

    std::size_t count_state(SlotState which) const {
        std::size_t n = 0;
        for (SlotState s : state_) n += s == which;
        return n;
    }

private:
    SymbolStore store_;
    std::vector<SlotState> state_;
};

}  // namespace bandfec
