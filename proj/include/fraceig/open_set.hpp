#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fraceig {

struct Interval {
    double lo;
    double hi;

    double length() const noexcept { return hi - lo; }
    bool contains(double x) const noexcept { return lo < x && x < hi; }
    bool operator==(const Interval&) const = default;
};

/// Geometric data entering the constructive Hardy constant.
struct ExteriorCone {
    double ell;       ///< cone length, clamped to the diameter
    double theta;     ///< unit-sphere measure of the cone; a ray in 1-D
    double diameter;
};

/// A bounded open subset of the real line stored as a finite union of
/// disjoint open intervals in increasing order.
///
/// Construction canonicalizes the input: intervals are sorted and any
/// overlapping or touching pair is merged. Merges are recorded in
/// canonicalization_log() since (a,b)∪(b,c) and (a,c) differ only on a null
/// set and the discretization cannot distinguish them.
class OpenSet1D {
public:
    static constexpr int dimension = 1;

    /// Throws InvalidDomain on empty input or any pair with a >= b.
    static OpenSet1D make(const std::vector<std::pair<double, double>>& pairs);

    /// Parses "a,b;c,d;..." and canonicalizes.
    static OpenSet1D parse(std::string_view text);

    const std::vector<Interval>& intervals() const noexcept { return intervals_; }
    const std::vector<std::string>& canonicalization_log() const noexcept { return log_; }

    double measure() const noexcept;
    double diameter() const noexcept;
    double lower() const noexcept { return intervals_.front().lo; }
    double upper() const noexcept { return intervals_.back().hi; }

    bool contains(double x) const noexcept;

    /// Each interval of this set lies inside some interval of other.
    bool is_subset_of(const OpenSet1D& other, double slack = 0.0) const noexcept;

    /// Inverse of parse, with round-trip precision.
    std::string to_string() const;

    bool operator==(const OpenSet1D& other) const noexcept { return intervals_ == other.intervals_; }

private:
    explicit OpenSet1D(std::vector<Interval> intervals, std::vector<std::string> log)
        : intervals_(std::move(intervals)), log_(std::move(log)) {}

    std::vector<Interval> intervals_;
    std::vector<std::string> log_;
};

/// Multiplies every endpoint by t > 0. Throws InvalidParameter otherwise.
OpenSet1D scale_set(const OpenSet1D& omega, double t);

/// Distance from x to the boundary of omega; zero outside omega.
double dist_to_boundary(const OpenSet1D& omega, double x) noexcept;

/// omega ∩ (center - r, center + r). Throws EmptyDomain if that is empty.
OpenSet1D intersect_ball(const OpenSet1D& omega, double r, double center = 0.0);

/// ell is the narrowest interior gap, or the diameter when there is none
/// (the outermost boundary points carry infinite exterior rays).
ExteriorCone exterior_cone_params(const OpenSet1D& omega) noexcept;

}  // namespace fraceig
