#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "nsnn/network.hpp"

namespace nsnn {

inline constexpr int network_file_version = 1;

/// JSON network document. Synapse `pre` is an input port name (string) or a
/// neuron id (integer).
std::string serialize_network(const NetworkGraph& graph);

/// Parses and validates a network document (// and /* */ comments allowed,
/// e.g. a provenance header). Malformed JSON raises ParseError
/// with line and column; a bad or unknown field raises ParseError with its
/// path; structural problems raise ValidationError. Connectivity from inputs
/// to every output is required unless `require_connected` is false.
NetworkGraph deserialize_network(std::string_view text, bool require_connected = true);

NetworkGraph load_network(const std::filesystem::path& path, bool require_connected = true);
void save_network(const NetworkGraph& graph, const std::filesystem::path& path);

} // namespace nsnn
