#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

namespace neta {

// All randomness in the project flows through one seeded generator so runs
// are reproducible bit-for-bit.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    double uniform(double lo, double hi) {
        std::uniform_real_distribution<double> dist(lo, hi);
        return dist(engine_);
    }

    double uniform01() { return uniform(0.0, 1.0); }

    std::uint64_t next() { return engine_(); }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        std::uniform_int_distribution<int> dist(lo, hi);
        return dist(engine_);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        std::shuffle(v.begin(), v.end(), engine_);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace neta
