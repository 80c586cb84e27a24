#pragma once

#include <cstdint>
#include <vector>

namespace mitig {

// Array with O(1) bulk reset via epoch stamps. The sampling hot paths touch
// a small fraction of the graph per sample, so clearing full-size buffers
// each time would dominate the runtime.
template <class T>
class StampedArray {
public:
    void reset(size_t n, T def) {
        def_ = def;
        if (val_.size() < n) {
            val_.resize(n);
            stamp_.resize(n, 0);
        }
        ++epoch_;
    }

    bool touched(size_t i) const { return stamp_[i] == epoch_; }
    T get(size_t i) const { return touched(i) ? val_[i] : def_; }
    void set(size_t i, T v) {
        val_[i] = v;
        stamp_[i] = epoch_;
    }

private:
    std::vector<T> val_;
    std::vector<uint32_t> stamp_;
    uint32_t epoch_ = 0;
    T def_{};
};

} // namespace mitig
