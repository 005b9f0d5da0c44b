#ifndef TEP_UTIL_HPP_
#define TEP_UTIL_HPP_

#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>

namespace tep {

// Thrown when an exhaustive operation would exceed its configured cap.
struct budget_error : std::runtime_error {
    explicit budget_error(const std::string& what) : std::runtime_error(what) {}
};

// Caps and knobs for the enumeration-heavy operations. TEP_BUDGET (env) and
// CLI flags override the exhaustive cap.
struct Budget {
    std::uint64_t exhaustive_cap = std::uint64_t{1} << 24;
    std::uint64_t path_cap = std::uint64_t{1} << 16;   // complete paths per instance
    std::uint64_t sample_count = std::uint64_t{1} << 16;
    std::uint64_t sample_seed = 0x5eedULL;
    std::uint64_t search_state_cap = std::uint64_t{1} << 25;
    int jobs = 1;
};

// k^e, or nullopt on overflow.
inline std::optional<std::uint64_t> checked_pow(std::uint64_t base, std::uint64_t exp) {
    std::uint64_t r = 1;
    for (std::uint64_t i = 0; i < exp; ++i) {
        if (base != 0 && r > std::numeric_limits<std::uint64_t>::max() / base)
            return std::nullopt;
        r *= base;
    }
    return r;
}

inline std::uint64_t ipow(std::uint64_t base, std::uint64_t exp) {
    auto r = checked_pow(base, exp);
    if (!r) throw std::overflow_error("integer power overflows 64 bits");
    return *r;
}

// Exact rational with small terms; enough for pebble values p/d with d <= ~16
// and sums over <= 31 nodes.
struct Rat {
    long long num = 0;
    long long den = 1;

    Rat() = default;
    Rat(long long n) : num(n), den(1) {}
    Rat(long long n, long long d) : num(n), den(d) { normalize(); }

    void normalize() {
        if (den == 0) throw std::invalid_argument("rational with zero denominator");
        if (den < 0) { num = -num; den = -den; }
        long long g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
    }

    friend Rat operator+(const Rat& a, const Rat& b) { return Rat(a.num * b.den + b.num * a.den, a.den * b.den); }
    friend Rat operator-(const Rat& a, const Rat& b) { return Rat(a.num * b.den - b.num * a.den, a.den * b.den); }
    friend bool operator==(const Rat& a, const Rat& b) { return a.num == b.num && a.den == b.den; }
    friend bool operator!=(const Rat& a, const Rat& b) { return !(a == b); }
    friend bool operator<(const Rat& a, const Rat& b) { return a.num * b.den < b.num * a.den; }
    friend bool operator<=(const Rat& a, const Rat& b) { return a.num * b.den <= b.num * a.den; }
    friend bool operator>(const Rat& a, const Rat& b) { return b < a; }
    friend bool operator>=(const Rat& a, const Rat& b) { return b <= a; }

    std::string str() const {
        if (den == 1) return std::to_string(num);
        return std::to_string(num) + "/" + std::to_string(den);
    }
};

Rat parse_rat(const std::string& s);

// Exact value of the form log_k(num/den), num >= den >= 1. Closed under the
// additions the state-pebble-value arithmetic needs (adding values multiplies
// the ratios), and comparable against small rationals by cross-powering.
// Integer set sizes keep everything exact; no floating logs anywhere.
struct LogK {
    int k = 2;
    unsigned long long num = 1;
    unsigned long long den = 1;

    LogK() = default;
    LogK(int k_, unsigned long long n, unsigned long long d) : k(k_), num(n), den(d) { reduce(); }

    void reduce() {
        unsigned long long g = std::gcd(num, den);
        if (g > 1) { num /= g; den /= g; }
    }

    bool is_zero() const { return num == den; }

    friend LogK operator+(const LogK& a, const LogK& b) {
        return from128(a.k, mul_checked(a.num, b.num), mul_checked(a.den, b.den));
    }

    // log_k(num/den) vs p/q  <=>  num^q vs den^q * k^p   (q > 0)
    int compare(const Rat& r) const {
        if (r.num < 0) return 1;  // our values are >= 0
        auto lhs = pow_checked(num, (unsigned long long)r.den);
        auto rhs = mul_checked(pow_checked(den, (unsigned long long)r.den),
                               pow_checked((unsigned long long)k, (unsigned long long)r.num));
        if (lhs < rhs) return -1;
        if (lhs > rhs) return 1;
        return 0;
    }
    bool operator>=(const Rat& r) const { return compare(r) >= 0; }
    bool operator==(const Rat& r) const { return compare(r) == 0; }

    friend bool operator<(const LogK& a, const LogK& b) {
        return mul_checked(a.num, b.den) < mul_checked(b.num, a.den);
    }
    friend bool operator==(const LogK& a, const LogK& b) {
        return mul_checked(a.num, b.den) == mul_checked(b.num, a.den);
    }

    static unsigned __int128 mul_checked(unsigned __int128 a, unsigned __int128 b) {
        unsigned __int128 r = a * b;
        if (a != 0 && r / a != b) throw std::overflow_error("LogK arithmetic overflow");
        return r;
    }
    static unsigned __int128 pow_checked(unsigned __int128 base, unsigned long long e) {
        unsigned __int128 r = 1;
        for (unsigned long long i = 0; i < e; ++i) r = mul_checked(r, base);
        return r;
    }

private:
    static LogK from128(int k, unsigned __int128 n, unsigned __int128 d) {
        // reduce in 128 bits first so in-range ratios survive large products
        unsigned __int128 a = n, b = d;
        while (b != 0) {
            unsigned __int128 t = a % b;
            a = b;
            b = t;
        }
        n /= a;
        d /= a;
        if (n > std::numeric_limits<unsigned long long>::max() ||
            d > std::numeric_limits<unsigned long long>::max())
            throw std::overflow_error("LogK ratio overflow");
        return LogK(k, (unsigned long long)n, (unsigned long long)d);
    }
};

}  // namespace tep

#endif  // TEP_UTIL_HPP_
