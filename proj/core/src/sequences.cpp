#include "nlforms/sequences.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>

namespace nlforms {

double PowerLaw::at(double i) const { return scale * std::pow(i, exponent); }

SumBracket power_tail_bracket(const PowerLaw& law, long n) {
    SumBracket b;
    if (law.scale == 0.0) return b;
    if (law.scale < 0.0) throw std::invalid_argument("power_tail_bracket: negative scale");
    if (law.exponent >= -1.0) {
        b.finite = false;
        b.lo = b.hi = std::numeric_limits<double>::infinity();
        return b;
    }
    // i^e decreasing: int_{n+1}^inf x^e dx <= sum_{i>n} i^e <= int_n^inf x^e dx
    const double k = -(law.exponent + 1.0);
    b.lo = law.scale * std::pow(static_cast<double>(n) + 1.0, -k) / k;
    b.hi = law.scale * std::pow(static_cast<double>(n), -k) / k;
    return b;
}

Sequence Sequence::from_values(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("Sequence: empty value list");
    for (double v : values) {
        if (!std::isfinite(v)) throw std::invalid_argument("Sequence: non-finite entry");
    }
    Sequence s;
    s.values_ = std::move(values);
    return s;
}

Sequence Sequence::from_power_law(const PowerLaw& law, long n) {
    if (n < 1) throw std::invalid_argument("Sequence: length must be >= 1");
    Sequence s;
    s.values_.resize(static_cast<std::size_t>(n));
    for (long i = 1; i <= n; ++i) s.values_[static_cast<std::size_t>(i - 1)] = law.at(static_cast<double>(i));
    s.law_ = law;
    return s;
}

double Sequence::at(long i) const {
    if (i < 1 || i > size()) throw std::out_of_range("Sequence::at: index outside truncation");
    return values_[static_cast<std::size_t>(i - 1)];
}

Sequence Sequence::pow(double q) const {
    Sequence out;
    out.values_.reserve(values_.size());
    for (double v : values_) out.values_.push_back(std::pow(v, q));
    if (law_) out.law_ = PowerLaw{std::pow(law_->scale, q), law_->exponent * q};
    return out;
}

Sequence Sequence::times(const Sequence& other) const {
    if (other.size() != size()) throw std::invalid_argument("Sequence::times: length mismatch");
    Sequence out;
    out.values_.reserve(values_.size());
    for (long i = 0; i < size(); ++i)
        out.values_.push_back(values_[static_cast<std::size_t>(i)] * other.values_[static_cast<std::size_t>(i)]);
    if (law_ && other.law_)
        out.law_ = PowerLaw{law_->scale * other.law_->scale, law_->exponent + other.law_->exponent};
    return out;
}

Sequence Sequence::scaled(double c) const {
    Sequence out;
    out.values_.reserve(values_.size());
    for (double v : values_) out.values_.push_back(c * v);
    if (law_) out.law_ = PowerLaw{c * law_->scale, law_->exponent};
    return out;
}

PowerLaw parse_power_law(const std::string& text) {
    // Accepted forms: "i^E", "C*i^E", "C" with C, E floating-point literals.
    const auto fail = [&]() -> PowerLaw {
        throw std::invalid_argument("parse_power_law: cannot parse '" + text + "'");
    };
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    if (s.empty()) fail();

    const auto parse_num = [&](const std::string& t) {
        char* end = nullptr;
        double v = std::strtod(t.c_str(), &end);
        if (end != t.c_str() + t.size() || t.empty()) fail();
        return v;
    };

    const auto caret = s.find("i^");
    if (caret == std::string::npos) return PowerLaw{parse_num(s), 0.0};

    double scale = 1.0;
    if (caret > 0) {
        if (s[caret - 1] != '*') fail();
        scale = parse_num(s.substr(0, caret - 1));
    }
    const double exponent = parse_num(s.substr(caret + 2));
    return PowerLaw{scale, exponent};
}

}  // namespace nlforms
