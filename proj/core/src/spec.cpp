#include "confmod/spec.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "confmod/errors.hpp"

namespace confmod {

double BaseSpec::hausdorff_dim() const {
    return std::log(static_cast<double>(alphabet_size)) /
           std::log(1.0 / contraction_ratio.to_double());
}

double BaseSpec::reference_diameter() const {
    if (geometry == GeometryKind::Simplex) return std::sqrt(2.0); // hypotenuse of the unit right triangle
    return 1.0; // unit cube, l-infinity
}

int FractalSpec::total_dim() const {
    int d = 0;
    for (const auto& f : factors) d += f.dim;
    return d;
}

double FractalSpec::hausdorff_dim() const {
    return std::log(static_cast<double>(alphabet_size)) /
           std::log(1.0 / contraction_ratio.to_double());
}

double FractalSpec::reference_diameter() const {
    double d = 0.0;
    for (const auto& f : factors) d = std::max(d, f.reference_diameter());
    return d;
}

std::string FractalSpec::canonical_id() const {
    std::string id;
    for (std::size_t i = 0; i < factors.size(); ++i) {
        if (i) id += '*';
        id += factors[i].name;
    }
    return id;
}

void validate_spec(const FractalSpec& spec) {
    if (spec.factors.empty()) throw InvalidSpec("spec has no factors");
    if (spec.contraction_ratio.num() != 1 || spec.contraction_ratio.den() < 2)
        throw InvalidSpec("contraction ratio must be 1/b with integer b >= 2");
    std::int64_t alphabet = 1;
    for (const auto& f : spec.factors) {
        if (f.contraction_ratio != spec.contraction_ratio)
            throw RatioMismatch("factor '" + f.name + "' has ratio " + f.contraction_ratio.str() +
                                ", spec has " + spec.contraction_ratio.str());
        if (f.alphabet_size < 2) throw InvalidSpec("factor '" + f.name + "' needs >= 2 letters");
        alphabet *= f.alphabet_size;
        if (f.geometry == GeometryKind::Cube) {
            const int b = static_cast<int>(f.contraction_ratio.den());
            std::set<std::vector<int>> seen;
            for (const auto& digits : f.cube_digits) {
                if (static_cast<int>(digits.size()) != f.dim)
                    throw InvalidSpec("cube digit vector has wrong dimension in '" + f.name + "'");
                for (int d : digits)
                    if (d < 0 || d >= b) throw InvalidSpec("cube digit out of range in '" + f.name + "'");
                if (!seen.insert(digits).second)
                    throw InvalidSpec("geometry_model letters collide in '" + f.name + "'");
            }
            if (static_cast<int>(f.cube_digits.size()) != f.alphabet_size)
                throw InvalidSpec("cube digit table size mismatch in '" + f.name + "'");
        } else {
            if (f.alphabet_size != 3 || f.dim != 2)
                throw InvalidSpec("simplex geometry is the 3-map triangle subdivision");
            if (f.contraction_ratio != Rational(1, 2))
                throw InvalidSpec("simplex geometry requires ratio 1/2");
        }
    }
    if (alphabet != spec.alphabet_size)
        throw InvalidSpec("alphabet_size does not match the factor product");
}

FractalSpec product_spec(const FractalSpec& a, const FractalSpec& b) {
    if (a.contraction_ratio != b.contraction_ratio)
        throw RatioMismatch("cannot form product: ratios " + a.contraction_ratio.str() + " vs " +
                            b.contraction_ratio.str());
    FractalSpec p;
    p.factors = a.factors;
    p.factors.insert(p.factors.end(), b.factors.begin(), b.factors.end());
    p.alphabet_size = a.alphabet_size * b.alphabet_size;
    p.contraction_ratio = a.contraction_ratio;
    p.name = a.name + "*" + b.name;
    validate_spec(p);
    return p;
}

namespace {

BaseSpec interval_base() {
    BaseSpec s;
    s.name = "interval";
    s.alphabet_size = 2;
    s.contraction_ratio = Rational(1, 2);
    s.geometry = GeometryKind::Cube;
    s.metric = MetricKind::LInf;
    s.dim = 1;
    s.cube_digits = {{0}, {1}};
    return s;
}

BaseSpec carpet_base() {
    BaseSpec s;
    s.name = "carpet";
    s.alphabet_size = 8;
    s.contraction_ratio = Rational(1, 3);
    s.geometry = GeometryKind::Cube;
    s.metric = MetricKind::LInf;
    s.dim = 2;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (!(i == 1 && j == 1)) s.cube_digits.push_back({i, j});
    return s;
}

BaseSpec gasket_base() {
    BaseSpec s;
    s.name = "gasket";
    s.alphabet_size = 3;
    s.contraction_ratio = Rational(1, 2);
    s.geometry = GeometryKind::Simplex;
    s.metric = MetricKind::L2;
    s.dim = 2;
    return s;
}

BaseSpec sponge_base() {
    BaseSpec s;
    s.name = "sponge";
    s.alphabet_size = 20;
    s.contraction_ratio = Rational(1, 3);
    s.geometry = GeometryKind::Cube;
    s.metric = MetricKind::LInf;
    s.dim = 3;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) {
                int ones = (i == 1) + (j == 1) + (k == 1);
                if (ones <= 1) s.cube_digits.push_back({i, j, k});
            }
    return s;
}

FractalSpec wrap(BaseSpec base) {
    FractalSpec s;
    s.name = base.name;
    s.alphabet_size = base.alphabet_size;
    s.contraction_ratio = base.contraction_ratio;
    s.factors = {std::move(base)};
    return s;
}

} // namespace

FractalSpec interval_spec() { return wrap(interval_base()); }
FractalSpec carpet_spec() { return wrap(carpet_base()); }
FractalSpec gasket_spec() { return wrap(gasket_base()); }
FractalSpec sponge_spec() { return wrap(sponge_base()); }

FractalSpec square_spec() {
    FractalSpec s = product_spec(interval_spec(), interval_spec());
    s.name = "square";
    return s;
}

const std::vector<std::string>& registry_names() {
    static const std::vector<std::string> names = {"interval", "square", "carpet", "gasket", "sponge"};
    return names;
}

namespace {

FractalSpec resolve_atom(const std::string& name) {
    if (name == "interval") return interval_spec();
    if (name == "square") return square_spec();
    if (name == "carpet") return carpet_spec();
    if (name == "gasket") return gasket_spec();
    if (name == "sponge") return sponge_spec();
    throw InvalidSpec("unknown spec name '" + name + "'");
}

bool is_registry_name(const std::string& name) {
    const auto& names = registry_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

// term := atom ('^' k)?   with atom possibly written as "AxB".
FractalSpec resolve_term(const std::string& term) {
    std::string base = term;
    int power = 1;
    if (auto caret = term.find('^'); caret != std::string::npos) {
        base = term.substr(0, caret);
        std::string exp = term.substr(caret + 1);
        try {
            std::size_t used = 0;
            power = std::stoi(exp, &used);
            if (used != exp.size()) throw std::invalid_argument(exp);
        } catch (const std::exception&) {
            throw InvalidSpec("bad power in spec expression '" + term + "'");
        }
        if (power < 1) throw InvalidSpec("power must be >= 1 in '" + term + "'");
    }

    FractalSpec atom;
    if (is_registry_name(base)) {
        atom = resolve_atom(base);
    } else if (base.find('x') != std::string::npos) {
        // "AxB" product shorthand; registry names contain no 'x'.
        FractalSpec acc;
        bool first = true;
        std::size_t pos = 0;
        while (pos <= base.size()) {
            std::size_t next = base.find('x', pos);
            std::string piece = base.substr(pos, next == std::string::npos ? next : next - pos);
            FractalSpec part = resolve_atom(piece);
            acc = first ? part : product_spec(acc, part);
            first = false;
            if (next == std::string::npos) break;
            pos = next + 1;
        }
        atom = acc;
    } else {
        throw InvalidSpec("unknown spec name '" + base + "'");
    }

    FractalSpec result = atom;
    for (int i = 1; i < power; ++i) result = product_spec(result, atom);
    if (power > 1) result.name = base + "^" + std::to_string(power);
    return result;
}

} // namespace

FractalSpec resolve_spec(const std::string& expr) {
    if (expr.empty()) throw InvalidSpec("empty spec expression");
    std::vector<std::string> terms;
    std::size_t pos = 0;
    while (pos <= expr.size()) {
        std::size_t next = expr.find('*', pos);
        terms.push_back(expr.substr(pos, next == std::string::npos ? next : next - pos));
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    FractalSpec result;
    bool first = true;
    for (const auto& t : terms) {
        if (t.empty()) throw InvalidSpec("empty term in spec expression '" + expr + "'");
        FractalSpec part = resolve_term(t);
        result = first ? part : product_spec(result, part);
        first = false;
    }
    result.name = expr;
    validate_spec(result);
    return result;
}

std::uint64_t spec_hash(const FractalSpec& spec) {
    const std::string id = spec.canonical_id();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : id) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace confmod
