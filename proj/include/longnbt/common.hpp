#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace longnbt {

using index_t = std::int64_t;

/// Real linear operator as a black box: out = A * in, both of length dim.
using ApplyFn = std::function<void(const std::vector<double>& in, std::vector<double>& out)>;

/// Base class for all library errors.
struct error : std::runtime_error {
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid user input: bad parameters, malformed files, config mistakes.
struct invalid_input : error {
    explicit invalid_input(const std::string& msg) : error(msg) {}
};

/// A configured size cap was exceeded; carries the offending count.
struct size_error : error {
    size_error(const std::string& msg, index_t count)
        : error(msg + " (count = " + std::to_string(count) + ")"), count(count) {}
    index_t count;
};

/// Compensated (Kahan) accumulator so parallel/MC aggregation stays
/// order-stable to ~1e-12.
class KahanSum {
public:
    void add(double x) {
        double y = x - c_;
        double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

inline double kahan_total(const std::vector<double>& xs) {
    KahanSum k;
    for (double x : xs) k.add(x);
    return k.value();
}

}  // namespace longnbt
