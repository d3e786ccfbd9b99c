#include "mmturn/core/params.hpp"

#include <algorithm>

#include "mmturn/core/error.hpp"

namespace mmturn {

std::size_t total_size(const ParamRefs& refs) {
    std::size_t n = 0;
    for (const auto& r : refs) n += r.size();
    return n;
}

std::vector<double> flatten(const ParamRefs& refs) {
    std::vector<double> flat;
    flat.reserve(total_size(refs));
    for (const auto& r : refs) flat.insert(flat.end(), r.begin(), r.end());
    return flat;
}

void assign(const ParamRefs& refs, std::span<const double> flat) {
    check_dim("assign", total_size(refs), flat.size());
    std::size_t offset = 0;
    for (const auto& r : refs) {
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), r.size(), r.begin());
        offset += r.size();
    }
}

void zero(const ParamRefs& refs) {
    for (const auto& r : refs) std::fill(r.begin(), r.end(), 0.0);
}

double squared_norm(const ParamRefs& refs) {
    double s = 0.0;
    for (const auto& r : refs)
        for (double x : r) s += x * x;
    return s;
}

}  // namespace mmturn
