#pragma once

#include <doctest.h>

/// Purely relative comparison: |a - b| <= eps max(|a|, |b|).
inline doctest::Approx rel(double value, double eps = 1e-12)
{
    return doctest::Approx(value).scale(0.0).epsilon(eps);
}
