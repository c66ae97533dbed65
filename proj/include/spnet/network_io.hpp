#pragma once

#include <iosfwd>
#include <string>

#include "spnet/network.hpp"

namespace spnet {

/// Number formatting used when writing coordinates, weights and domain sizes.
/// Both forms read back bit-identically.
enum class FloatFormat { decimal, hex };

/// Network text format, version 1:
///
///     spnet-network 1
///     dimension <d>
///     domain <l_1> ... <l_d>
///     dirichlet_faces <k>
///     <axis> low|high            (k lines)
///     nodes <N>
///     <x_1> ... <x_d>            (N lines)
///     edges <M> [weight] [fiber] (optional column names)
///     <a> <b> [<weight>] [<fiber>]  (M lines)
///     end
///
/// Lines starting with '#' are comments. Node indices are 0-based.
void write_network(std::ostream& out, const SpatialNetwork& net, FloatFormat format = FloatFormat::decimal);
void write_network_file(const std::string& path, const SpatialNetwork& net,
                        FloatFormat format = FloatFormat::decimal);

NetworkData read_network_data(std::istream& in);
SpatialNetwork read_network(std::istream& in,
                            SpatialNetwork::Connectivity policy = SpatialNetwork::Connectivity::require);
SpatialNetwork read_network_file(const std::string& path,
                                 SpatialNetwork::Connectivity policy = SpatialNetwork::Connectivity::require);

/// Shortest decimal ("%.17g") or hexadecimal ("%a") representation.
std::string format_double(double value, FloatFormat format = FloatFormat::decimal);

} // namespace spnet
