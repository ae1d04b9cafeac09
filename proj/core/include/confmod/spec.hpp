#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "confmod/rational.hpp"

namespace confmod {

enum class GeometryKind {
    Cube,    // axis-aligned subcubes of [0,1]^dim, exact digit-grid arithmetic
    Simplex, // triangle subdivision toward vertices (right-triangle embedding)
};

enum class MetricKind {
    LInf,
    L2,
};

/// One IFS factor: an alphabet of contractions of a reference body, all with
/// the same ratio 1/b, described combinatorially so that cell adjacency and
/// ball membership can be decided exactly.
struct BaseSpec {
    std::string name;
    int alphabet_size = 0;
    Rational contraction_ratio;
    GeometryKind geometry = GeometryKind::Cube;
    MetricKind metric = MetricKind::LInf;
    int dim = 1;

    // Cube geometry: per-letter translation digits, one digit in [0, b) per
    // dimension; the letter's translation vector is digits/b.
    std::vector<std::vector<int>> cube_digits;

    // Simplex geometry: letter k maps x to (x + v_k)/2 where v_k are the
    // reference triangle vertices (0,0), (1,0), (0,1).

    double hausdorff_dim() const;
    double reference_diameter() const;
};

/// A (possibly product) IFS specification. Products are kept as flattened
/// factor lists; all factors must share one contraction ratio so that level-n
/// cells of every factor live at the same scale.
struct FractalSpec {
    std::string name;                // user-facing, e.g. "square", "carpet^2"
    std::vector<BaseSpec> factors;   // size >= 1
    std::int64_t alphabet_size = 0;  // product over factors
    Rational contraction_ratio;

    bool is_product() const { return factors.size() > 1; }
    int total_dim() const;
    double hausdorff_dim() const;    // log(alphabet)/log(1/ratio)
    double reference_diameter() const; // max over factors (l-infinity product metric)

    /// Canonical identity used for cache keys: factor names joined by '*'
    /// ("square" and "interval*interval" agree here by construction).
    std::string canonical_id() const;
};

/// Validates structural invariants (digit ranges, letter collisions, ratio
/// consistency). Throws InvalidSpec.
void validate_spec(const FractalSpec& spec);

/// Cartesian product with the l-infinity metric. Throws RatioMismatch when
/// the contraction ratios differ.
FractalSpec product_spec(const FractalSpec& a, const FractalSpec& b);

// Shipped base specs.
FractalSpec interval_spec();
FractalSpec square_spec();   // = interval x interval
FractalSpec carpet_spec();
FractalSpec gasket_spec();
FractalSpec sponge_spec();

/// Registry lookup with product expressions: `A*B`, `AxB` and `A^k`, e.g.
/// "carpet^2", "interval*gasket". Throws InvalidSpec on parse failure or an
/// unknown name, RatioMismatch on inconsistent products.
FractalSpec resolve_spec(const std::string& expr);

/// Names accepted by resolve_spec as atoms.
const std::vector<std::string>& registry_names();

/// FNV-1a hash of canonical_id(); identifies the spec in graph cache headers.
std::uint64_t spec_hash(const FractalSpec& spec);

} // namespace confmod
