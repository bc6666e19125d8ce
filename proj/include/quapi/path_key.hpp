// path_key.hpp - packed path identities: 2 bits per masked time point

#pragma once

#include <array>
#include <cstdint>
#include <functional>

namespace quapi {

template <std::size_t Words>
struct WideKey {
    std::array<std::uint64_t, Words> w{};
    friend bool operator==(const WideKey&, const WideKey&) = default;
};

template <typename Key>
struct KeyTraits;

template <>
struct KeyTraits<std::uint64_t> {
    static constexpr int slots = 32;
    static void set(std::uint64_t& k, int slot, unsigned code) { k |= static_cast<std::uint64_t>(code & 3u) << (2 * slot); }
    static unsigned get(const std::uint64_t& k, int slot) { return static_cast<unsigned>(k >> (2 * slot)) & 3u; }
    static std::uint64_t hash(std::uint64_t k) {
        k ^= k >> 33;
        k *= 0xff51afd7ed558ccdULL;
        k ^= k >> 33;
        k *= 0xc4ceb9fe1a85ec53ULL;
        k ^= k >> 33;
        return k;
    }
    // swaps the two bits of every slot: (plus, minus) -> (minus, plus)
    static std::uint64_t mirror(std::uint64_t k) { return ((k & 0x5555555555555555ULL) << 1) | ((k >> 1) & 0x5555555555555555ULL); }
};

template <std::size_t Words>
struct KeyTraits<WideKey<Words>> {
    static constexpr int slots = static_cast<int>(32 * Words);
    static void set(WideKey<Words>& k, int slot, unsigned code) {
        k.w[static_cast<std::size_t>(slot / 32)] |= static_cast<std::uint64_t>(code & 3u) << (2 * (slot % 32));
    }
    static unsigned get(const WideKey<Words>& k, int slot) {
        return static_cast<unsigned>(k.w[static_cast<std::size_t>(slot / 32)] >> (2 * (slot % 32))) & 3u;
    }
    static std::uint64_t hash(const WideKey<Words>& k) {
        std::uint64_t h = 0x9e3779b97f4a7c15ULL;
        for (auto x : k.w) h = KeyTraits<std::uint64_t>::hash(h ^ x) + 0x9e3779b97f4a7c15ULL;
        return h;
    }
    static WideKey<Words> mirror(WideKey<Words> k) {
        for (auto& x : k.w) x = KeyTraits<std::uint64_t>::mirror(x);
        return k;
    }
};

} // namespace quapi
