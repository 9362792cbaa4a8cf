#pragma once

#include <optional>
#include <string>
#include <vector>

namespace nlforms {

/// value(i) = scale * i^exponent for 1-based index i.
struct PowerLaw {
    double scale = 1.0;
    double exponent = 0.0;

    double at(double i) const;
};

/// Bracket for a (possibly infinite) series value: lo <= sum <= hi.
struct SumBracket {
    double lo = 0.0;
    double hi = 0.0;
    bool finite = true;

    double width() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
};

/// Integral-test bracket for sum_{i>n} scale * i^exponent.
/// finite == false when the tail diverges (exponent >= -1 with scale > 0).
SumBracket power_tail_bracket(const PowerLaw& law, long n);

/// Finite positive sequence indexed from 1.
///
/// When built from a power law the law is kept alongside the materialized
/// values, so elementwise products and powers of such sequences stay exact
/// power laws; that is what lets the convergence checker attach rigorous
/// integral tail bounds past the truncation.
class Sequence {
  public:
    Sequence() = default;

    static Sequence from_values(std::vector<double> values);
    static Sequence from_power_law(const PowerLaw& law, long n);

    long size() const { return static_cast<long>(values_.size()); }
    bool empty() const { return values_.empty(); }

    /// 1-based access; throws std::out_of_range beyond the truncation.
    double at(long i) const;

    const std::vector<double>& values() const { return values_; }
    const std::optional<PowerLaw>& law() const { return law_; }

    Sequence pow(double q) const;
    Sequence times(const Sequence& other) const;
    Sequence scaled(double c) const;

  private:
    std::vector<double> values_;
    std::optional<PowerLaw> law_;
};

/// Parses "i^-1", "2*i^-0.5", "0.25" (constant) into a power law.
/// Throws std::invalid_argument with the offending text otherwise.
PowerLaw parse_power_law(const std::string& text);

}  // namespace nlforms
