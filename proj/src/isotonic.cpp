#include "pixcal/isotonic.hpp"

#include <algorithm>
#include <cmath>

namespace pixcal {

std::vector<double> pool_adjacent_violators(const std::vector<double>& values,
                                            const std::vector<double>& weights) {
    if (values.empty()) throw ValidationError("pava: empty input");
    if (values.size() != weights.size()) throw ValidationError("pava: length mismatch");

    struct Block {
        double mean;
        double weight;
        int count;
    };
    std::vector<Block> blocks;
    blocks.reserve(values.size());
    for (size_t i = 0; i < values.size(); ++i) {
        blocks.push_back({values[i], weights[i], 1});
        while (blocks.size() > 1 && blocks[blocks.size() - 2].mean > blocks.back().mean) {
            Block top = blocks.back();
            blocks.pop_back();
            Block& prev = blocks.back();
            const double w = prev.weight + top.weight;
            prev.mean = (prev.mean * prev.weight + top.mean * top.weight) / w;
            prev.weight = w;
            prev.count += top.count;
        }
    }
    std::vector<double> fitted;
    fitted.reserve(values.size());
    for (const Block& b : blocks)
        fitted.insert(fitted.end(), b.count, b.mean);
    return fitted;
}

IsotonicMap IsotonicMap::identity() {
    IsotonicMap m;
    m.inputs_ = {0.0, 1.0};
    m.outputs_ = {0.0, 1.0};
    return m;
}

IsotonicMap IsotonicMap::from_knots(std::vector<double> inputs, std::vector<double> outputs) {
    if (inputs.size() != outputs.size() || inputs.empty())
        throw ValidationError("IsotonicMap: knot arrays empty or mismatched");

    std::vector<size_t> order(inputs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return inputs[a] < inputs[b]; });

    // collapse duplicate inputs by averaging outputs
    std::vector<double> xs, ys;
    xs.reserve(inputs.size());
    ys.reserve(inputs.size());
    size_t i = 0;
    while (i < order.size()) {
        size_t j = i;
        double sum = 0.0;
        while (j < order.size() && inputs[order[j]] == inputs[order[i]]) {
            sum += outputs[order[j]];
            ++j;
        }
        xs.push_back(inputs[order[i]]);
        ys.push_back(sum / static_cast<double>(j - i));
        i = j;
    }

    if (xs.front() != 0.0 || xs.back() != 1.0 || ys.front() != 0.0 || ys.back() != 1.0)
        throw ValidationError("IsotonicMap: endpoints must be (0,0) and (1,1)");
    for (size_t k = 0; k + 1 < ys.size(); ++k) {
        if (ys[k] > ys[k + 1])
            throw ValidationError("IsotonicMap: outputs must be nondecreasing");
        if (ys[k] < 0.0 || ys[k] > 1.0)
            throw ValidationError("IsotonicMap: outputs must lie in [0,1]");
    }

    IsotonicMap m;
    m.inputs_ = std::move(xs);
    m.outputs_ = std::move(ys);
    return m;
}

double IsotonicMap::operator()(double p) const {
    if (p <= inputs_.front()) return outputs_.front();
    if (p >= inputs_.back()) return outputs_.back();
    const auto it = std::upper_bound(inputs_.begin(), inputs_.end(), p);
    const size_t hi = static_cast<size_t>(it - inputs_.begin());
    const size_t lo = hi - 1;
    if (p == inputs_[lo]) return outputs_[lo]; // exact knot hit
    const double t = (p - inputs_[lo]) / (inputs_[hi] - inputs_[lo]);
    return outputs_[lo] + t * (outputs_[hi] - outputs_[lo]);
}

double IsotonicMap::invert(double q) const {
    if (!(q > 0.0 && q < 1.0))
        throw std::domain_error("IsotonicMap::invert: q must lie in (0,1)");

    // leftmost preimage
    double p_lo = 0.0;
    for (size_t i = 0; i + 1 < inputs_.size(); ++i) {
        if (outputs_[i] >= q) {
            p_lo = inputs_[i];
            break;
        }
        if (outputs_[i + 1] >= q) {
            const double dy = outputs_[i + 1] - outputs_[i];
            p_lo = inputs_[i] + (q - outputs_[i]) / dy * (inputs_[i + 1] - inputs_[i]);
            break;
        }
    }
    // rightmost preimage
    double p_hi = 1.0;
    for (size_t i = inputs_.size() - 1; i > 0; --i) {
        if (outputs_[i] <= q) {
            p_hi = inputs_[i];
            break;
        }
        if (outputs_[i - 1] <= q) {
            const double dy = outputs_[i] - outputs_[i - 1];
            p_hi = inputs_[i - 1] + (q - outputs_[i - 1]) / dy * (inputs_[i] - inputs_[i - 1]);
            break;
        }
    }
    return 0.5 * (p_lo + p_hi);
}

double IsotonicMap::derivative(double p) const {
    size_t lo;
    if (p >= inputs_.back()) {
        lo = inputs_.size() - 2;
    } else {
        const auto it = std::upper_bound(inputs_.begin(), inputs_.end(), p);
        lo = (it == inputs_.begin()) ? 0 : static_cast<size_t>(it - inputs_.begin()) - 1;
    }
    return (outputs_[lo + 1] - outputs_[lo]) / (inputs_[lo + 1] - inputs_[lo]);
}

bool IsotonicMap::is_identity() const {
    for (size_t i = 0; i < inputs_.size(); ++i)
        if (inputs_[i] != outputs_[i]) return false;
    return true;
}

} // namespace pixcal
