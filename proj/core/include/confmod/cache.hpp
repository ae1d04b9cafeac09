#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "confmod/graph.hpp"

namespace confmod {

/// Versioned binary graph cache, keyed by (spec hash, level).
///
/// File layout (little-endian):
///   magic   u32  'CMGR'
///   version u32  1
///   spec    u64  FNV-1a of the canonical spec id
///   level   u32
///   cells   u64
///   edges   u64
///   body: edges * 2 u64 cell indices, each pair (u, v) with u < v,
///         sorted lexicographically.
///
/// Cells, measures and geometry are recomputed from the spec; only the
/// adjacency is stored. Loads verify the header and re-derive everything
/// else, so a cache hit is bit-for-bit equivalent to a fresh build.
class GraphCache {
public:
    explicit GraphCache(std::filesystem::path directory);

    std::filesystem::path path_for(const FractalSpec& spec, int level) const;

    /// Returns the cached graph, or nullopt on miss/version mismatch.
    std::optional<std::shared_ptr<const ApproximationGraph>> load(const FractalSpec& spec,
                                                                  int level) const;

    void store(const ApproximationGraph& graph) const;

    /// Build with cache: load on hit, otherwise build and store.
    std::shared_ptr<const ApproximationGraph> get(const FractalSpec& spec, int level,
                                                  const BuildOptions& options = {}) const;

    /// Resolves the cache directory: explicit argument, else the
    /// CONFMOD_CACHE_DIR environment variable, else a default under the
    /// system temp directory.
    static std::filesystem::path resolve_directory(const std::string& cli_override);

private:
    std::filesystem::path dir_;
};

} // namespace confmod
