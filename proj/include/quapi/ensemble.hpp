// ensemble.hpp - path storage, hash merging under a mask, amplitude filtering

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "quapi/errors.hpp"
#include "quapi/path_key.hpp"

namespace quapi {

using cplx = std::complex<double>;

// Paths at one time step. Each path keeps `stride` history bytes, oldest first; byte bits 0-1
// hold the sigma_z pair code of that time point and bits 2-3 the sigma_x pair code of the
// segment before it (none at step 0).
struct PathEnsemble {
    int step{0};
    std::size_t stride{0};
    std::vector<cplx> amps;
    std::vector<std::uint8_t> history;

    std::size_t size() const { return amps.size(); }
    const std::uint8_t* hist(std::size_t i) const { return history.data() + i * stride; }
    std::size_t mem_bytes() const { return amps.size() * sizeof(cplx) + history.size(); }
};

inline unsigned z_code(std::uint8_t b) { return b & 3u; }
inline unsigned x_code(std::uint8_t b) { return (b >> 2) & 3u; }

// Which lags of which bath identify a path. Z lags occupy key slots first, X lags follow.
struct KeyLayout {
    std::vector<int> z_lags, x_lags;
    int slots() const { return static_cast<int>(z_lags.size() + x_lags.size()); }
};

// Key of a path at `step` from its history (history[len - 1] is at `step`). `shift` moves every lag
// back by that many points, which gives the parent's share of a child's key when shift = 1.
template <typename Key>
Key history_key(const std::uint8_t* hist, std::size_t len, int step, const KeyLayout& layout, int shift = 0) {
    using T = KeyTraits<Key>;
    Key k{};
    const int n = static_cast<int>(len);
    int slot = 0;
    for (int lag : layout.z_lags) {
        const int p = lag - shift;
        if (p >= 0 && p < n && step - p >= 0) T::set(k, slot, z_code(hist[n - 1 - p]));
        ++slot;
    }
    for (int lag : layout.x_lags) {
        const int p = lag - shift;
        if (p >= 0 && p < n && step - p >= 1) T::set(k, slot, x_code(hist[n - 1 - p]));
        ++slot;
    }
    return k;
}

// Newest-first lexicographic comparison of the last `count` bytes of two histories.
inline bool history_less(const std::uint8_t* a, const std::uint8_t* b, std::size_t len, std::size_t count) {
    for (std::size_t i = 1; i <= count; ++i) {
        const auto x = a[len - i], y = b[len - i];
        if (x != y) return x < y;
    }
    return false;
}

// Exchanging the forward and backward branch maps pair code (a, b) to (b, a).
constexpr unsigned mirror_code(unsigned c) { return ((c & 1u) << 1) | ((c >> 1) & 1u); }
inline std::uint8_t mirror_byte(std::uint8_t b) { return static_cast<std::uint8_t>(mirror_code(b & 3u) | mirror_code((b >> 2) & 3u) << 2); }

// Order on histories (last `count` bytes, then `newest`) that a branch swap leaves unchanged:
// each history is read in whichever orientation is smaller, newest first.
inline bool canonical_less(const std::uint8_t* a, const std::uint8_t* b, std::size_t len, std::size_t count, std::uint8_t newest) {
    const auto flipped = [&](const std::uint8_t* h) {
        const auto m = mirror_byte(newest);
        if (m != newest) return m < newest;
        for (std::size_t i = 1; i <= count; ++i) {
            const auto x = h[len - i], y = mirror_byte(x);
            if (x != y) return y < x;
        }
        return false;
    };
    const bool fa = flipped(a), fb = flipped(b);
    for (std::size_t i = 1; i <= count; ++i) {
        const auto x = fa ? mirror_byte(a[len - i]) : a[len - i];
        const auto y = fb ? mirror_byte(b[len - i]) : b[len - i];
        if (x != y) return x < y;
    }
    return false;
}

// Open-addressing accumulator: sums amplitudes that share a key and tracks the representative
// (largest |amplitude|, ties to the smaller history as judged by `less`). Magnitudes within a
// relative 1e-12 count as tied, so rounding cannot pick different members for mirrored keys.
template <typename Key>
class KeyedMerger {
public:
    static constexpr std::uint32_t empty = std::numeric_limits<std::uint32_t>::max();

    explicit KeyedMerger(std::size_t expected = 16) { rehash(std::bit_ceil(std::max<std::size_t>(16, 2 * expected))); }

    template <typename Less>
    void add(const Key& key, cplx amp, std::uint32_t src, Less&& less) {
        std::size_t h = KeyTraits<Key>::hash(key) & mask_;
        while (true) {
            const std::uint32_t e = index_[h];
            if (e == empty) break;
            if (keys_[e] == key) {
                sums_[e] += amp;
                const double m = std::abs(amp);
                const double tie = 1e-12 * rep_mag_[e];
                if (m > rep_mag_[e] + tie || (m >= rep_mag_[e] - tie && less(src, reps_[e]))) {
                    rep_mag_[e] = m;
                    reps_[e] = src;
                }
                return;
            }
            h = (h + 1) & mask_;
        }
        if (keys_.size() >= std::numeric_limits<std::uint32_t>::max() - 1) throw ResourceError("merge table overflow");
        index_[h] = static_cast<std::uint32_t>(keys_.size());
        keys_.push_back(key);
        sums_.push_back(amp);
        rep_mag_.push_back(std::abs(amp));
        reps_.push_back(src);
        if (2 * keys_.size() > index_.size()) rehash(2 * index_.size());
    }

    std::size_t size() const { return keys_.size(); }
    const std::vector<cplx>& sums() const { return sums_; }
    const std::vector<std::uint32_t>& reps() const { return reps_; }
    const std::vector<Key>& keys() const { return keys_; }
    std::size_t mem_bytes() const {
        return keys_.capacity() * sizeof(Key) + sums_.capacity() * sizeof(cplx) + rep_mag_.capacity() * sizeof(double) +
               reps_.capacity() * 4 + index_.capacity() * 4;
    }

private:
    void rehash(std::size_t cap) {
        index_.assign(cap, empty);
        mask_ = cap - 1;
        for (std::uint32_t e = 0; e < keys_.size(); ++e) {
            std::size_t h = KeyTraits<Key>::hash(keys_[e]) & mask_;
            while (index_[h] != empty) h = (h + 1) & mask_;
            index_[h] = e;
        }
    }

    std::vector<std::uint32_t> index_;
    std::size_t mask_{0};
    std::vector<Key> keys_;
    std::vector<cplx> sums_;
    std::vector<double> rep_mag_;
    std::vector<std::uint32_t> reps_;
};

// Merges paths of `in` that agree on every masked point. The merged path carries the summed
// amplitude and its representative's full history; output follows first occurrence.
template <typename Key = std::uint64_t>
PathEnsemble merge_by_mask(const PathEnsemble& in, const KeyLayout& layout) {
    if (layout.slots() > KeyTraits<Key>::slots) throw ConfigError("mask too large for key type");
    KeyedMerger<Key> merger(in.size());
    const auto less = [&](std::uint32_t a, std::uint32_t b) { return history_less(in.hist(a), in.hist(b), in.stride, in.stride); };
    for (std::size_t i = 0; i < in.size(); ++i)
        merger.add(history_key<Key>(in.hist(i), in.stride, in.step, layout), in.amps[i], static_cast<std::uint32_t>(i), less);
    PathEnsemble out{in.step, in.stride, merger.sums(), {}};
    out.history.reserve(out.size() * in.stride);
    for (auto r : merger.reps()) out.history.insert(out.history.end(), in.hist(r), in.hist(r) + in.stride);
    return out;
}

struct FilterCounts {
    std::size_t zeros{0};
    std::size_t below_threshold{0};
    std::size_t quantile{0};
};

// Indices kept by the filter: exact zeros and |a| < theta go, then the floor(drop_fraction * n)
// smallest survivors (ties by position).
inline std::vector<std::size_t> filter_indices(const std::vector<cplx>& amps, double theta, double drop_fraction,
                                               FilterCounts* counts = nullptr) {
    if (theta < 0.0) throw DomainError("filter threshold must be >= 0");
    if (drop_fraction < 0.0 || drop_fraction >= 1.0) throw DomainError("drop fraction must lie in [0, 1)");
    FilterCounts c;
    std::vector<std::size_t> keep;
    keep.reserve(amps.size());
    for (std::size_t i = 0; i < amps.size(); ++i) {
        if (amps[i] == cplx{}) ++c.zeros;
        else if (std::abs(amps[i]) < theta) ++c.below_threshold;
        else keep.push_back(i);
    }
    const auto drop = static_cast<std::size_t>(std::floor(drop_fraction * static_cast<double>(keep.size())));
    if (drop > 0) {
        const auto by_mag = [&](std::size_t a, std::size_t b) {
            const double x = std::abs(amps[a]), y = std::abs(amps[b]);
            return x != y ? x < y : a < b;
        };
        std::nth_element(keep.begin(), keep.begin() + static_cast<std::ptrdiff_t>(drop), keep.end(), by_mag);
        keep.erase(keep.begin(), keep.begin() + static_cast<std::ptrdiff_t>(drop));
        std::sort(keep.begin(), keep.end());
        c.quantile = drop;
    }
    if (counts) *counts = c;
    return keep;
}

inline FilterCounts filter_paths(PathEnsemble& e, double theta, double drop_fraction = 0.0) {
    FilterCounts c;
    const auto keep = filter_indices(e.amps, theta, drop_fraction, &c);
    std::vector<cplx> amps;
    std::vector<std::uint8_t> hist;
    amps.reserve(keep.size());
    hist.reserve(keep.size() * e.stride);
    for (auto i : keep) {
        amps.push_back(e.amps[i]);
        hist.insert(hist.end(), e.hist(i), e.hist(i) + e.stride);
    }
    e.amps = std::move(amps);
    e.history = std::move(hist);
    return c;
}

} // namespace quapi
