#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pclab {

/// Exact dyadic rational num / 2^log2_den, kept normalized (num odd or zero).
/// Hamiltonian entries in this project are all dyadic, so matrix assembly is
/// exact and the x4 integerization can be asserted rather than rounded.
struct Dyadic {
    std::int64_t num = 0;
    int log2_den = 0;

    Dyadic() = default;
    Dyadic(std::int64_t n, int k) : num(n), log2_den(k) {
        if (k < 0 || k > 62) throw std::invalid_argument("Dyadic: log2 denominator out of range");
        normalize();
    }
    static Dyadic from_int(std::int64_t n) { return Dyadic(n, 0); }

    void normalize() {
        if (num == 0) {
            log2_den = 0;
            return;
        }
        while (log2_den > 0 && (num % 2) == 0) {
            num /= 2;
            --log2_den;
        }
    }

    double value() const { return static_cast<double>(num) / static_cast<double>(std::int64_t{1} << log2_den); }
    bool is_zero() const { return num == 0; }

    /// True when value * 2^shift is an integer.
    bool integer_after_shift(int shift) const { return log2_den <= shift; }

    Dyadic operator-() const { return Dyadic(-num, log2_den); }

    friend Dyadic operator+(const Dyadic& a, const Dyadic& b) {
        const int k = a.log2_den > b.log2_den ? a.log2_den : b.log2_den;
        const std::int64_t an = a.num << (k - a.log2_den);
        const std::int64_t bn = b.num << (k - b.log2_den);
        return Dyadic(an + bn, k);
    }
    friend Dyadic operator-(const Dyadic& a, const Dyadic& b) { return a + (-b); }
    friend Dyadic operator*(const Dyadic& a, const Dyadic& b) {
        return Dyadic(a.num * b.num, a.log2_den + b.log2_den);
    }
    friend bool operator==(const Dyadic& a, const Dyadic& b) {
        return a.num == b.num && a.log2_den == b.log2_den;
    }
    friend bool operator!=(const Dyadic& a, const Dyadic& b) { return !(a == b); }

    std::string str() const {
        if (log2_den == 0) return std::to_string(num);
        return std::to_string(num) + "/2^" + std::to_string(log2_den);
    }
};

}  // namespace pclab
