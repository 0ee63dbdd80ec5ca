#pragma once

#include <cmath>

namespace nkcomm {

// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2. Enough precision that
// centered moments survive the cancellation in co - sum_i*sum_j/count.
struct DoubleDouble {
    double hi = 0.0;
    double lo = 0.0;

    constexpr double value() const noexcept { return hi + lo; }

    friend bool operator==(const DoubleDouble&, const DoubleDouble&) = default;
};

namespace dd {

inline DoubleDouble two_sum(double a, double b) noexcept
{
    const double s = a + b;
    const double bb = s - a;
    return {s, (a - (s - bb)) + (b - bb)};
}

inline DoubleDouble fast_two_sum(double a, double b) noexcept
{
    const double s = a + b;
    return {s, b - (s - a)};
}

inline DoubleDouble two_prod(double a, double b) noexcept
{
    const double p = a * b;
    return {p, std::fma(a, b, -p)};
}

inline DoubleDouble add(DoubleDouble a, DoubleDouble b) noexcept
{
    auto s = two_sum(a.hi, b.hi);
    s.lo += a.lo + b.lo;
    return fast_two_sum(s.hi, s.lo);
}

inline DoubleDouble add(DoubleDouble a, double b) noexcept
{
    auto s = two_sum(a.hi, b);
    s.lo += a.lo;
    return fast_two_sum(s.hi, s.lo);
}

inline DoubleDouble mul(DoubleDouble a, DoubleDouble b) noexcept
{
    auto p = two_prod(a.hi, b.hi);
    p.lo += a.hi * b.lo + a.lo * b.hi;
    return fast_two_sum(p.hi, p.lo);
}

inline DoubleDouble div(DoubleDouble a, double b) noexcept
{
    const double q1 = a.hi / b;
    const auto p = two_prod(q1, b);
    const double q2 = ((a.hi - p.hi) - p.lo + a.lo) / b;
    return fast_two_sum(q1, q2);
}

inline DoubleDouble neg(DoubleDouble a) noexcept { return {-a.hi, -a.lo}; }

} // namespace dd
} // namespace nkcomm
