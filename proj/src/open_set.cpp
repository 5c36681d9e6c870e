#include "fraceig/open_set.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>

#include "fraceig/errors.hpp"

namespace fraceig {

namespace {

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_real(std::string_view token) {
    while (!token.empty() && (token.front() == ' ' || token.front() == '\t')) token.remove_prefix(1);
    while (!token.empty() && (token.back() == ' ' || token.back() == '\t')) token.remove_suffix(1);
    // std::from_chars for double is available in libstdc++ 11
    double value = 0.0;
    const auto* first = token.data();
    const auto* last = token.data() + token.size();
    if (!token.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (token.empty() || ec != std::errc{} || ptr != last)
        throw InvalidDomain("cannot parse endpoint '" + std::string(token) + "'");
    return value;
}

}  // namespace

OpenSet1D OpenSet1D::make(const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.empty()) throw InvalidDomain("open set needs at least one interval");
    std::vector<Interval> sorted;
    sorted.reserve(pairs.size());
    for (const auto& [a, b] : pairs) {
        if (!std::isfinite(a) || !std::isfinite(b))
            throw InvalidDomain("interval endpoints must be finite");
        if (!(a < b))
            throw InvalidDomain("degenerate interval (" + format_real(a) + ", " + format_real(b) + ")");
        sorted.push_back({a, b});
    }
    std::sort(sorted.begin(), sorted.end(),
              [](const Interval& x, const Interval& y) { return x.lo < y.lo || (x.lo == y.lo && x.hi < y.hi); });

    std::vector<Interval> merged;
    std::vector<std::string> log;
    for (const auto& iv : sorted) {
        if (!merged.empty() && iv.lo <= merged.back().hi) {
            auto& last = merged.back();
            log.push_back((iv.lo == last.hi ? "merged touching " : "merged overlapping ") +
                          std::string("(") + format_real(last.lo) + "," + format_real(last.hi) + ") and (" +
                          format_real(iv.lo) + "," + format_real(iv.hi) + ")");
            last.hi = std::max(last.hi, iv.hi);
        } else {
            merged.push_back(iv);
        }
    }
    return OpenSet1D(std::move(merged), std::move(log));
}

OpenSet1D OpenSet1D::parse(std::string_view text) {
    std::vector<std::pair<double, double>> pairs;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find(';', pos), text.size());
        const std::string_view piece = text.substr(pos, end - pos);
        if (piece.find_first_not_of(" \t") != std::string_view::npos) {
            const std::size_t comma = piece.find(',');
            if (comma == std::string_view::npos || piece.find(',', comma + 1) != std::string_view::npos)
                throw InvalidDomain("expected 'a,b' but got '" + std::string(piece) + "'");
            pairs.emplace_back(parse_real(piece.substr(0, comma)), parse_real(piece.substr(comma + 1)));
        }
        pos = end + 1;
    }
    return make(pairs);
}

double OpenSet1D::measure() const noexcept {
    double total = 0.0;
    for (const auto& iv : intervals_) total += iv.length();
    return total;
}

double OpenSet1D::diameter() const noexcept { return upper() - lower(); }

bool OpenSet1D::contains(double x) const noexcept {
    return std::any_of(intervals_.begin(), intervals_.end(), [x](const Interval& iv) { return iv.contains(x); });
}

bool OpenSet1D::is_subset_of(const OpenSet1D& other, double slack) const noexcept {
    return std::all_of(intervals_.begin(), intervals_.end(), [&](const Interval& inner) {
        return std::any_of(other.intervals_.begin(), other.intervals_.end(), [&](const Interval& outer) {
            return outer.lo <= inner.lo + slack && inner.hi <= outer.hi + slack;
        });
    });
}

std::string OpenSet1D::to_string() const {
    std::string out;
    for (std::size_t j = 0; j < intervals_.size(); ++j) {
        if (j) out += ';';
        out += format_real(intervals_[j].lo) + "," + format_real(intervals_[j].hi);
    }
    return out;
}

OpenSet1D scale_set(const OpenSet1D& omega, double t) {
    if (!(t > 0.0) || !std::isfinite(t)) throw InvalidParameter("scale factor must be positive");
    std::vector<std::pair<double, double>> pairs;
    for (const auto& iv : omega.intervals()) pairs.emplace_back(t * iv.lo, t * iv.hi);
    return OpenSet1D::make(pairs);
}

double dist_to_boundary(const OpenSet1D& omega, double x) noexcept {
    for (const auto& iv : omega.intervals())
        if (iv.contains(x)) return std::min(x - iv.lo, iv.hi - x);
    return 0.0;
}

OpenSet1D intersect_ball(const OpenSet1D& omega, double r, double center) {
    if (!(r > 0.0)) throw InvalidParameter("ball radius must be positive");
    std::vector<std::pair<double, double>> pairs;
    for (const auto& iv : omega.intervals()) {
        const double lo = std::max(iv.lo, center - r);
        const double hi = std::min(iv.hi, center + r);
        if (lo < hi) pairs.emplace_back(lo, hi);
    }
    if (pairs.empty()) throw EmptyDomain("domain does not meet the ball of radius " + format_real(r));
    return OpenSet1D::make(pairs);
}

ExteriorCone exterior_cone_params(const OpenSet1D& omega) noexcept {
    const double diameter = omega.diameter();
    double ell = diameter;
    const auto& ivs = omega.intervals();
    for (std::size_t j = 0; j + 1 < ivs.size(); ++j) ell = std::min(ell, ivs[j + 1].lo - ivs[j].hi);
    return {ell, 1.0, diameter};
}

}  // namespace fraceig
