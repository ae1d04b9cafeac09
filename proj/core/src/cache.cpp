#include "confmod/cache.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <vector>

#include "confmod/errors.hpp"

namespace confmod {

namespace {

constexpr std::uint32_t kMagic = 0x52474d43u; // "CMGR"
constexpr std::uint32_t kVersion = 1u;

template <typename T>
void write_pod(std::ofstream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
bool read_pod(std::ifstream& in, T& value) {
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    return static_cast<bool>(in);
}

} // namespace

GraphCache::GraphCache(std::filesystem::path directory) : dir_(std::move(directory)) {
    std::filesystem::create_directories(dir_);
}

std::filesystem::path GraphCache::path_for(const FractalSpec& spec, int level) const {
    char name[64];
    std::snprintf(name, sizeof(name), "%016llx_L%02d.graph",
                  static_cast<unsigned long long>(spec_hash(spec)), level);
    return dir_ / name;
}

std::optional<std::shared_ptr<const ApproximationGraph>> GraphCache::load(const FractalSpec& spec,
                                                                          int level) const {
    std::filesystem::path path = path_for(spec, level);
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;

    std::uint32_t magic = 0, version = 0, lvl = 0;
    std::uint64_t hash = 0, cells = 0, edge_count = 0;
    if (!read_pod(in, magic) || magic != kMagic) return std::nullopt;
    if (!read_pod(in, version) || version != kVersion) return std::nullopt;
    if (!read_pod(in, hash) || hash != spec_hash(spec)) return std::nullopt;
    if (!read_pod(in, lvl) || static_cast<int>(lvl) != level) return std::nullopt;
    if (!read_pod(in, cells) || !read_pod(in, edge_count)) return std::nullopt;

    std::vector<std::pair<std::uint64_t, std::uint64_t>> edges(edge_count);
    for (auto& [u, v] : edges)
        if (!read_pod(in, u) || !read_pod(in, v)) return std::nullopt;

    auto graph = assemble_graph_with_adjacency(spec, level, edges);
    if (graph->cell_count() != cells) throw CacheError("cached cell count mismatch");
    return graph;
}

void GraphCache::store(const ApproximationGraph& graph) const {
    std::filesystem::path path = path_for(graph.spec(), graph.level());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw CacheError("cannot write cache file " + tmp.string());
        write_pod(out, kMagic);
        write_pod(out, kVersion);
        write_pod(out, spec_hash(graph.spec()));
        write_pod(out, static_cast<std::uint32_t>(graph.level()));
        write_pod(out, static_cast<std::uint64_t>(graph.cell_count()));
        write_pod(out, graph.edge_count());
        for (CellId c = 0; c < graph.cell_count(); ++c)
            for (CellId nb : graph.neighbors(c))
                if (c < nb) {
                    write_pod(out, static_cast<std::uint64_t>(c));
                    write_pod(out, static_cast<std::uint64_t>(nb));
                }
    }
    std::filesystem::rename(tmp, path);
}

std::shared_ptr<const ApproximationGraph> GraphCache::get(const FractalSpec& spec, int level,
                                                          const BuildOptions& options) const {
    if (auto hit = load(spec, level)) return *hit;
    auto graph = build_graph(spec, level, options);
    store(*graph);
    return graph;
}

std::filesystem::path GraphCache::resolve_directory(const std::string& cli_override) {
    if (!cli_override.empty()) return cli_override;
    if (const char* env = std::getenv("CONFMOD_CACHE_DIR"); env && *env) return env;
    return std::filesystem::temp_directory_path() / "confmod-cache";
}

} // namespace confmod
