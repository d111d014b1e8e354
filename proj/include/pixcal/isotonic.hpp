#ifndef PIXCAL_ISOTONIC_HPP
#define PIXCAL_ISOTONIC_HPP

#include <vector>

#include "pixcal/errors.hpp"

namespace pixcal {

/// Weighted pool-adjacent-violators: returns the nondecreasing sequence
/// minimizing the weighted squared error to `values`.
std::vector<double> pool_adjacent_violators(const std::vector<double>& values,
                                            const std::vector<double>& weights);

/// Monotone map R: [0,1] -> [0,1] stored as interpolation knots.
///
/// Knot inputs are strictly increasing, outputs nondecreasing, and the
/// endpoints are anchored at (0,0) and (1,1) so that R composed with any CDF
/// is again a proper CDF.  Evaluation is piecewise-linear.
class IsotonicMap {
public:
    /// Identity map with knots (0,0) and (1,1).
    static IsotonicMap identity();

    /// Build from knot coordinates.  Duplicate inputs are collapsed by
    /// averaging their outputs; endpoints must come out as (0,0) and (1,1).
    static IsotonicMap from_knots(std::vector<double> inputs, std::vector<double> outputs);

    double operator()(double p) const;

    /// Inverse at q in (0,1).  On a plateau the midpoint of the preimage
    /// interval is returned.
    double invert(double q) const;

    /// Piecewise-constant derivative at p (slope of the containing segment).
    double derivative(double p) const;

    const std::vector<double>& inputs() const { return inputs_; }
    const std::vector<double>& outputs() const { return outputs_; }
    bool is_identity() const;

private:
    IsotonicMap() = default;
    std::vector<double> inputs_;
    std::vector<double> outputs_;
};

} // namespace pixcal

#endif
