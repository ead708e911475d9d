#ifndef GEMKIT_IO_HPP
#define GEMKIT_IO_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

#include "gemkit/chain.hpp"
#include "gemkit/hypergraph.hpp"
#include "gemkit/model.hpp"
#include "gemkit/verify.hpp"

namespace gemkit {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Instance format: {"schema_version", "nodes", "arcs": [{"id", "source",
/// "target", "kappa"}], "meta"?}. Node maps are written in node order.
Json to_json(const Hypergraph& h, const std::optional<Json>& meta = std::nullopt);
Hypergraph hypergraph_from_json(const Json& j);

Hypergraph read_instance(const std::filesystem::path& path);
void write_instance(const std::filesystem::path& path, const Hypergraph& h,
                    const std::optional<Json>& meta = std::nullopt);

Json to_json(const ModelConfig& cfg);
ModelConfig config_from_json(const Json& j);

/// Chains refer to nodes and arcs by id.
Json to_json(const Hypergraph& h, const ChainSolution& chain);
ChainSolution chain_from_json(const Hypergraph& h, const Json& j);

Json to_json(const ChainCertificate& cert);

/// Serialized with two-space indentation and a trailing newline.
std::string dump(const Json& j);

std::string read_text(const std::filesystem::path& path);
/// Creates missing parent directories.
void write_text(const std::filesystem::path& path, std::string_view text);
Json read_json(const std::filesystem::path& path);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace gemkit

#endif  // GEMKIT_IO_HPP
