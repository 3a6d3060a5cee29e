#include "doa/types.hpp"

namespace doa {

Region::Region(Vec lo, Vec hi) : lower(std::move(lo)), upper(std::move(hi)) {
    require_dim("Region upper bound", lower.size(), upper.size());
    for (Eigen::Index i = 0; i < lower.size(); ++i)
        if (!(lower(i) < upper(i)))
            throw Error("Region: lower bound must be below upper bound on coordinate " +
                        std::to_string(i));
}

Region Region::cube(Eigen::Index dim, double lo, double hi) {
    return Region(Vec::Constant(dim, lo), Vec::Constant(dim, hi));
}

bool Region::contains(const Vec& x) const {
    return x.size() == dim() && (x.array() >= lower.array()).all() &&
           (x.array() <= upper.array()).all();
}

}  // namespace doa
