#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "linkpred/graph.hpp"

namespace linkpred {

/// G(n, p) random graph with blank attributes.
AttributedGraph erdos_renyi(std::size_t n, double p, std::uint64_t seed,
                            std::string network_id = "er");

/// Holme-Kim power-law cluster graph: preferential attachment with `m` edges
/// per new node, each followed by a triad-formation step with probability
/// `triad_p`. Produces scale-free degree tails with tunable clustering.
AttributedGraph powerlaw_cluster(std::size_t n, std::size_t m, double triad_p,
                                 std::uint64_t seed, std::string network_id = "plc");

/// Facebook100-shaped attribute codes (status, gender, major, minor, dorm,
/// class year, high school) with roughly `missing_rate` of each field blank.
std::vector<AttributeRecord> synthetic_attributes(std::size_t n, std::uint64_t seed,
                                                  double missing_rate = 0.1);

/// Same topology with attributes replaced.
AttributedGraph with_attributes(const AttributedGraph& g, std::vector<AttributeRecord> attributes);

}  // namespace linkpred
