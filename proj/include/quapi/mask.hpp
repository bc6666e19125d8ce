// mask.hpp - sets of time lags that define coarse-grained path identity

#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "quapi/errors.hpp"
#include "quapi/spectral.hpp"

namespace quapi {

struct Mask {
    std::vector<int> lags; // strictly increasing, starts at 0
    Axis axis{Axis::Z};

    static Mask uniform(int size, Axis axis) {
        Mask m{std::vector<int>(static_cast<std::size_t>(size)), axis};
        std::iota(m.lags.begin(), m.lags.end(), 0);
        return m;
    }

    int size() const { return static_cast<int>(lags.size()); }
    bool contains(int lag) const { return std::binary_search(lags.begin(), lags.end(), lag); }

    // Throws ConfigError unless lag 0 is present, lags strictly increase and all are < window.
    void validate(int window) const {
        const std::string who = std::string("mask_") + to_string(axis);
        if (lags.empty() || lags.front() != 0) throw ConfigError(who + ": lag 0 must be a member");
        for (std::size_t i = 1; i < lags.size(); ++i)
            if (lags[i] <= lags[i - 1]) throw ConfigError(who + ": lags must be strictly increasing");
        if (lags.back() >= window)
            throw ConfigError(who + ": lag " + std::to_string(lags.back()) + " >= memory window " + std::to_string(window));
    }

    friend bool operator==(const Mask&, const Mask&) = default;
};

} // namespace quapi
