#pragma once

#include <span>
#include <vector>

namespace mmturn {

/// Ordered list of parameter blocks. Parameter structs expose `collect(ParamRefs&)`,
/// and their gradients are held in a second instance of the same struct, so the
/// two collections line up block for block.
using ParamRefs = std::vector<std::span<double>>;

std::size_t total_size(const ParamRefs& refs);
std::vector<double> flatten(const ParamRefs& refs);
void assign(const ParamRefs& refs, std::span<const double> flat);
void zero(const ParamRefs& refs);
double squared_norm(const ParamRefs& refs);

template <typename P>
ParamRefs refs_of(P& params) {
    ParamRefs refs;
    params.collect(refs);
    return refs;
}

}  // namespace mmturn
