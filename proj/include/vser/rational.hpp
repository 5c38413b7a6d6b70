#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>

namespace vser {

// Exact rational number. Thin wrapper over GMP's mpq_class that keeps every
// value canonical (reduced, denominator > 0) so that equality, ordering and
// hashing agree. All probabilities, rewards and values in this library are
// Rats; there is deliberately no floating-point mode.
class Rat {
public:
    Rat() : q_(0) {}
    Rat(long n) : q_(n) {}
    Rat(long n, long d) : q_(n, d) {
        if (d == 0) throw std::domain_error("rational with zero denominator");
        q_.canonicalize();
    }
    explicit Rat(const mpq_class& q) : q_(q) { q_.canonicalize(); }

    // Parses "p", "-p", or "p/q" with q unsigned. Strict: no whitespace, no
    // decimals, no sign on the denominator.
    static Rat parse(const std::string& text) {
        auto fail = [&text]() -> void {
            throw std::invalid_argument("bad rational literal: " + text);
        };
        std::size_t i = 0;
        if (i < text.size() && text[i] == '-') i++;
        std::size_t num_begin = i;
        while (i < text.size() && text[i] >= '0' && text[i] <= '9') i++;
        if (i == num_begin) fail();
        if (i != text.size()) {
            if (text[i] != '/') fail();
            std::size_t den_begin = ++i;
            while (i < text.size() && text[i] >= '0' && text[i] <= '9') i++;
            if (i == den_begin || i != text.size()) fail();
        }
        mpq_class q;
        if (q.set_str(text, 10) != 0) fail();
        if (q.get_den() == 0)
            throw std::invalid_argument("zero denominator: " + text);
        q.canonicalize();
        return Rat(q, already_canonical_tag{});
    }

    // Canonical text: "p" for integers, "p/q" otherwise.
    std::string str() const { return q_.get_str(); }
    // Always "p/q", used where the file format wants an explicit denominator.
    std::string str_frac() const {
        return q_.get_num().get_str() + "/" + q_.get_den().get_str();
    }

    bool is_zero() const { return sgn(q_) == 0; }
    bool is_one() const { return q_ == 1; }
    int sign() const { return sgn(q_); }

    double to_double() const { return q_.get_d(); }

    Rat operator+(const Rat& o) const { return Rat(mpq_class(q_ + o.q_), already_canonical_tag{}); }
    Rat operator-(const Rat& o) const { return Rat(mpq_class(q_ - o.q_), already_canonical_tag{}); }
    Rat operator*(const Rat& o) const { return Rat(mpq_class(q_ * o.q_), already_canonical_tag{}); }
    Rat operator/(const Rat& o) const {
        if (o.is_zero()) throw std::domain_error("rational division by zero");
        return Rat(mpq_class(q_ / o.q_), already_canonical_tag{});
    }
    Rat operator-() const { return Rat(mpq_class(-q_), already_canonical_tag{}); }
    Rat& operator+=(const Rat& o) { q_ += o.q_; return *this; }
    Rat& operator-=(const Rat& o) { q_ -= o.q_; return *this; }
    Rat& operator*=(const Rat& o) { q_ *= o.q_; return *this; }

    bool operator==(const Rat& o) const { return q_ == o.q_; }
    bool operator!=(const Rat& o) const { return q_ != o.q_; }
    bool operator<(const Rat& o) const { return q_ < o.q_; }
    bool operator<=(const Rat& o) const { return q_ <= o.q_; }
    bool operator>(const Rat& o) const { return q_ > o.q_; }
    bool operator>=(const Rat& o) const { return q_ >= o.q_; }

    // FNV-1a over the numerator/denominator limbs; stable within a process
    // run, which is all the hash tables here need.
    std::uint64_t hash() const {
        std::uint64_t h = 14695981039346656037ull;
        auto mix = [&h](std::uint64_t v) {
            for (int i = 0; i < 8; i++) {
                h ^= (v >> (8 * i)) & 0xff;
                h *= 1099511628211ull;
            }
        };
        auto mix_mpz = [&](const mpz_class& z) {
            mix(static_cast<std::uint64_t>(z.get_mpz_t()->_mp_size));
            int n = std::abs(z.get_mpz_t()->_mp_size);
            for (int i = 0; i < n; i++)
                mix(static_cast<std::uint64_t>(z.get_mpz_t()->_mp_d[i]));
        };
        mix_mpz(q_.get_num());
        mix_mpz(q_.get_den());
        return h;
    }

    const mpq_class& raw() const { return q_; }

private:
    struct already_canonical_tag {};
    Rat(mpq_class q, already_canonical_tag) : q_(std::move(q)) {}
    mpq_class q_;
};

inline std::ostream& operator<<(std::ostream& os, const Rat& r) { return os << r.str(); }

struct RatHash {
    std::size_t operator()(const Rat& r) const { return static_cast<std::size_t>(r.hash()); }
};

}  // namespace vser
