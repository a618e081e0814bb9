#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "aff/error.hpp"
#include "scenario_internal.hpp"

namespace aff {

// Defined in the generated translation unit that embeds scenarios/*.scn.
const std::vector<ShippedScenario>& shipped_scenario_table();

namespace detail {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const std::set<std::string> kAnalyses{"calderon_scan", "property_x", "counting",     "lipschitz",
                                      "classify",      "u_c",        "frame_report", "weil_check"};

// Every key a scenario may set. Keys that exist but do not apply to the
// scenario at hand (family.base for a shearlet family, say) are rejected with
// a different message than misspelt ones.
const std::set<std::string> kKnownKeys{
    "schema", "name", "description", "seed", "group", "dim", "metric", "analyses",
    "lattice.basis", "lattice.spatial", "lattice.spacing",
    "family.kind", "family.base", "family.j_min", "family.j_max", "family.a", "family.s", "family.a_min",
    "family.a_max", "family.step", "family.p", "family.weight", "family.weight_scale", "family.weight_exponent",
    "family.weight_base", "family.truncate", "family.samples",
    "profile.kind", "profile.boxes", "profile.values", "profile.grid_box", "profile.nodes", "profile.grid_values",
    "profile.file", "profile.center", "profile.radius", "profile.value", "profile.modulation",
    "grid.lo", "grid.hi", "grid.points", "grid.mirror", "grid.exclude", "grid.k",
    "frame.A", "frame.B", "frame.tolerance",
    "orbit.rel_tol", "orbit.max_terms", "orbit.divergence_cap",
    "property_x.r", "property_x.M", "property_x.explosion_factor", "property_x.C_max", "property_x.candidate_cap",
    "counting.mode", "counting.r", "counting.samples", "counting.instances", "counting.max_cond",
    "counting.r_min", "counting.r_max", "counting.dims", "counting.sigmas",
    "lipschitz.directions", "lipschitz.tolerance",
    "classify.M", "classify.N", "classify.expect",
    "u_c.f", "u_c.f_coef", "u_c.f_exponent", "u_c.c", "u_c.t_min", "u_c.t_max", "u_c.t_points", "u_c.M",
    "u_c.cap", "u_c.expect_bounded",
    "frame_report.M", "frame_report.remainder_eps", "frame_report.remainder_points", "frame_report.C",
    "frame_report.remainder_tolerance", "frame_report.test_eps", "frame_report.test_centers",
    "frame_report.test_tolerance", "frame_report.probe_count",
    "weil_check.mode", "weil_check.instances", "weil_check.tolerance",
};

Value vec_value(const std::vector<double>& xs) {
    Value::List l;
    for (double x : xs) l.push_back(number_value(x));
    return list_value(std::move(l));
}

Value matrix_value(const Matrix& m) {
    Value::List rows;
    for (int i = 0; i < m.rows(); ++i) {
        std::vector<double> r(m.cols());
        for (int j = 0; j < m.cols(); ++j) r[j] = m(i, j);
        rows.push_back(vec_value(r));
    }
    return list_value(std::move(rows));
}

/// Reads knobs with defaults, validates them, and records the resolved value
/// of every knob it touches.
class Knobs {
public:
    explicit Knobs(const Config& cfg) : cfg_(cfg) {}

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
        if (cfg_.has(key) && cfg_.at(key).line > 0)
            throw ParseError(key + ": " + msg, cfg_.at(key).line, cfg_.at(key).column);
        throw ParseError(key + ": " + msg, 0, 0);
    }

    const Value* raw(const std::string& key) {
        used_.insert(key);
        return cfg_.has(key) ? &cfg_.at(key).value : nullptr;
    }

    double number(const std::string& key, double def, double lo = -kInf, double hi = kInf) {
        const Value* v = raw(key);
        double x = def;
        if (v) {
            if (!v->is_number()) fail(key, "expected a number");
            x = v->number();
        }
        if (!(x >= lo && x <= hi)) fail(key, "value " + number_value(x).to_text() + " outside [" +
                                                 number_value(lo).to_text() + ", " + number_value(hi).to_text() + "]");
        echo.set(key, number_value(x));
        return x;
    }

    double positive(const std::string& key, double def) {
        const double x = number(key, def);
        if (!(x > 0.0)) fail(key, "must be positive");
        return x;
    }

    /// Integral number; infinities allowed only with allow_inf.
    long integer(const std::string& key, double def, double lo, double hi, bool allow_inf = false) {
        const double x = number(key, def, lo, hi);
        if (std::isinf(x)) {
            if (!allow_inf) fail(key, "must be finite");
            return x > 0 ? AutomorphismFamily::kUnbounded : -AutomorphismFamily::kUnbounded;
        }
        if (x != std::floor(x)) fail(key, "expected an integer");
        return static_cast<long>(x);
    }

    bool flag(const std::string& key, bool def) {
        const Value* v = raw(key);
        bool b = def;
        if (v) {
            if (!v->is_bool()) fail(key, "expected true or false");
            b = v->boolean();
        }
        echo.set(key, Value{b});
        return b;
    }

    std::string text(const std::string& key, const std::string& def) {
        const Value* v = raw(key);
        std::string s = def;
        if (v) {
            if (!v->is_string()) fail(key, "expected a string");
            s = v->string();
        }
        echo.set(key, string_value(s));
        return s;
    }

    std::string choice(const std::string& key, const std::string& def, const std::vector<std::string>& allowed) {
        const std::string s = text(key, def);
        if (std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
            std::string all;
            for (const auto& a : allowed) all += (all.empty() ? "" : ", ") + a;
            fail(key, "'" + s + "' is not one of " + all);
        }
        return s;
    }

    std::vector<double> numbers(const std::string& key, const std::vector<double>& def, std::size_t size = 0) {
        const Value* v = raw(key);
        std::vector<double> xs = def;
        if (v) {
            xs = flat_numbers(key, *v);
        }
        if (size && xs.size() != size) fail(key, "expected " + std::to_string(size) + " numbers");
        echo.set(key, vec_value(xs));
        return xs;
    }

    /// A list of numeric lists, each of length `width` (0: any).
    std::vector<std::vector<double>> rows(const std::string& key, const std::vector<std::vector<double>>& def,
                                          std::size_t width) {
        const Value* v = raw(key);
        std::vector<std::vector<double>> out = def;
        if (v) {
            out.clear();
            if (!v->is_list()) fail(key, "expected a list of lists");
            for (const Value& item : v->list()) out.push_back(flat_numbers(key, item));
        }
        Value::List echoed;
        for (const auto& r : out) {
            if (width && r.size() != width) fail(key, "each entry needs " + std::to_string(width) + " numbers");
            echoed.push_back(vec_value(r));
        }
        echo.set(key, list_value(std::move(echoed)));
        return out;
    }

    Matrix matrix(const std::string& key, const Matrix& def, int n) {
        const Value* v = raw(key);
        Matrix m = def;
        if (v) {
            const std::vector<std::vector<double>> rs = rows_of(key, *v);
            if (static_cast<int>(rs.size()) != n) fail(key, "expected " + std::to_string(n) + " rows");
            m = Matrix(n, n);
            for (int i = 0; i < n; ++i) {
                if (static_cast<int>(rs[i].size()) != n) fail(key, "expected " + std::to_string(n) + " columns");
                for (int j = 0; j < n; ++j) m(i, j) = rs[i][j];
            }
        }
        echo.set(key, matrix_value(m));
        return m;
    }

    /// A number, or the word auto (returned as nullopt).
    std::optional<double> number_or_auto(const std::string& key) {
        const Value* v = raw(key);
        if (!v || (v->is_string() && v->string() == "auto")) {
            echo.set(key, string_value("auto"));
            return std::nullopt;
        }
        if (!v->is_number()) fail(key, "expected a number or auto");
        echo.set(key, *v);
        return v->number();
    }

    /// Points of dimension n, or auto (returned empty).
    std::vector<Vec> points_or_auto(const std::string& key, int n) {
        const Value* v = raw(key);
        if (!v || (v->is_string() && v->string() == "auto")) {
            echo.set(key, string_value("auto"));
            return {};
        }
        std::vector<Vec> out;
        Value::List echoed;
        for (const auto& r : rows_of(key, *v)) {
            if (static_cast<int>(r.size()) != n) fail(key, "each point needs " + std::to_string(n) + " coordinates");
            out.push_back(Vec::from(r));
            echoed.push_back(vec_value(r));
        }
        if (out.empty()) fail(key, "expected at least one point");
        echo.set(key, list_value(std::move(echoed)));
        return out;
    }

    /// Rejects keys the resolution never looked at.
    void check_unused() const {
        for (const auto& [key, e] : cfg_.entries()) {
            if (used_.count(key)) continue;
            if (kKnownKeys.count(key)) fail(key, "does not apply to this scenario");
            fail(key, "unknown key");
        }
    }

    Config echo;

private:
    std::vector<double> flat_numbers(const std::string& key, const Value& v) const {
        if (v.is_number()) return {v.number()};
        if (!v.is_list()) fail(key, "expected a list of numbers");
        std::vector<double> xs;
        for (const Value& item : v.list()) {
            if (!item.is_number()) fail(key, "expected a list of numbers");
            xs.push_back(item.number());
        }
        return xs;
    }

    std::vector<std::vector<double>> rows_of(const std::string& key, const Value& v) const {
        if (!v.is_list()) fail(key, "expected a list of lists");
        std::vector<std::vector<double>> out;
        for (const Value& item : v.list()) out.push_back(flat_numbers(key, item));
        return out;
    }

    const Config& cfg_;
    std::set<std::string> used_;
};

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw InputError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Sampled-grid profile from CSV rows `x1,...,xd,value`. Rows may come in any
/// order but must cover a uniform grid exactly once; a non-numeric first line
/// is a header.
FrequencyProfile profile_from_csv(const std::filesystem::path& path, int d) {
    std::istringstream in(read_file(path));
    std::string line;
    std::vector<std::vector<double>> rows;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> r;
        std::istringstream ls(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ls, cell, ',')) {
            try {
                std::size_t used = 0;
                r.push_back(std::stod(cell, &used));
                while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
                numeric = numeric && used == cell.size();
            } catch (const std::exception&) {
                numeric = false;
            }
        }
        if (!numeric) {
            if (rows.empty() && lineno == 1) continue;
            throw ParseError("non-numeric cell in " + path.filename().string(), lineno, 1);
        }
        if (static_cast<int>(r.size()) != d + 1)
            throw ParseError("expected " + std::to_string(d + 1) + " columns in " + path.filename().string(), lineno,
                             1);
        rows.push_back(std::move(r));
    }
    std::vector<std::vector<double>> axes(d);
    for (int i = 0; i < d; ++i) {
        for (const auto& r : rows) axes[i].push_back(r[i]);
        std::sort(axes[i].begin(), axes[i].end());
        axes[i].erase(std::unique(axes[i].begin(), axes[i].end()), axes[i].end());
        if (axes[i].size() < 2) throw InputError(path.string() + ": need at least 2 nodes per axis");
    }
    std::size_t total = 1;
    for (const auto& a : axes) total *= a.size();
    if (total != rows.size()) throw InputError(path.string() + ": rows do not form a full grid");
    std::vector<double> values(total, 0.0);
    std::vector<bool> seen(total, false);
    for (const auto& r : rows) {
        std::size_t idx = 0;
        for (int i = 0; i < d; ++i) {
            const auto pos = std::lower_bound(axes[i].begin(), axes[i].end(), r[i]) - axes[i].begin();
            idx = idx * axes[i].size() + static_cast<std::size_t>(pos);
        }
        if (seen[idx]) throw InputError(path.string() + ": duplicate grid node");
        seen[idx] = true;
        values[idx] = r[d];
    }
    Box box{Vec(d), Vec(d)};
    std::vector<int> nodes(d);
    for (int i = 0; i < d; ++i) {
        const auto& a = axes[i];
        const double h = (a.back() - a.front()) / static_cast<double>(a.size() - 1);
        for (std::size_t k = 0; k < a.size(); ++k)
            if (std::abs(a[k] - (a.front() + h * static_cast<double>(k))) > 1e-9 * (1.0 + std::abs(a[k])))
                throw InputError(path.string() + ": grid spacing is not uniform");
        box.lo[i] = a.front();
        box.hi[i] = a.back();
        nodes[i] = static_cast<int>(a.size());
    }
    return FrequencyProfile::sampled_grid(box, nodes, values);
}

WeightSpec resolve_weight(Knobs& k) {
    const std::string kind = k.choice("family.weight", "constant", {"constant", "power", "geometric"});
    const double scale = k.positive("family.weight_scale", 1.0);
    if (kind == "power") return WeightSpec::power(k.number("family.weight_exponent", 0.0), scale);
    if (kind == "geometric") return WeightSpec::geometric(k.positive("family.weight_base", 1.0), scale);
    return WeightSpec::constant(scale);
}

std::vector<double> repeat(int n, double x) { return std::vector<double>(n, x); }

}  // namespace

ResolvedScenario resolve(const ScenarioSource& src, const std::vector<std::string>& overrides) {
    Config cfg = Config::parse(src.text);
    for (const auto& o : overrides) cfg.apply_override(o);
    Knobs k(cfg);
    ResolvedScenario s;

    k.integer("schema", 1, 1, 1);
    s.name = k.text("name", src.name);
    s.description = k.text("description", "");
    s.seed = static_cast<std::uint64_t>(k.integer("seed", 20240617, 0, 9007199254740991.0));

    s.gabor = k.choice("group", "euclidean", {"euclidean", "gabor"}) == "gabor";
    if (s.gabor) {
        k.choice("metric", "gabor", {"gabor"});
        s.metric = MetricSpace::gabor();
        s.dim = 1;
        s.lattice = Lattice::gabor(k.positive("lattice.spacing", 1.0));
    } else {
        s.dim = static_cast<int>(k.integer("dim", 1, 1, 3));
        s.metric = k.choice("metric", "l2", {"l2", "linf"}) == "linf" ? MetricSpace::linf(s.dim)
                                                                        : MetricSpace::l2(s.dim);
        const Matrix basis = k.matrix("lattice.basis", Matrix::identity(s.dim), s.dim);
        s.lattice = k.flag("lattice.spatial", false) ? Lattice::annihilator_of(basis) : Lattice::from_basis(basis);
    }
    const int d = s.dim;
    const int pd = s.metric.point_dim();

    // Family.
    const std::string kind =
        s.gabor ? k.choice("family.kind", "gabor_shifts", {"gabor_shifts", "gabor_shift_grid"})
                : k.choice("family.kind", "matrix_powers",
                           {"matrix_powers", "dilations", "continuous_dilations", "shearlets"});
    const WeightSpec w = resolve_weight(k);
    bool open_sides = false;
    if (kind == "matrix_powers" || kind == "gabor_shifts") {
        const double kMax = 9e15;
        const long jmin = k.integer("family.j_min", -kInf, -kInf, kMax, true);
        const long jmax = k.integer("family.j_max", kInf, -kMax, kInf, true);
        if (jmin > jmax) k.fail("family.j_max", "must be at least family.j_min");
        if (kind == "matrix_powers")
            s.family = AutomorphismFamily::matrix_powers(k.matrix("family.base", Matrix::diag(repeat(d, 2.0)), d),
                                                         jmin, jmax, w, s.metric);
        else
            s.family = AutomorphismFamily::gabor_shifts(k.positive("family.step", 1.0), jmin, jmax, w, s.metric);
        open_sides = s.family.unbounded_below() || s.family.unbounded_above();
    } else if (kind == "dilations") {
        s.family = AutomorphismFamily::dilations(k.numbers("family.a", {0.25, 0.5, 1.0, 2.0, 4.0}), w, s.metric);
    } else if (kind == "continuous_dilations") {
        const double a_min = k.positive("family.a_min", 1.0);
        const double a_max = k.positive("family.a_max", 1e4);
        if (a_max <= a_min) k.fail("family.a_max", "must exceed family.a_min");
        s.family = AutomorphismFamily::continuous_dilations(a_min, a_max, w, s.metric);
        s.family_samples = static_cast<int>(k.integer("family.samples", 17, 2, 1e5));
    } else if (kind == "shearlets") {
        if (d != 2) k.fail("family.kind", "shearlets need dim = 2");
        s.family = AutomorphismFamily::shearlets(k.numbers("family.a", {1.0, 2.0, 4.0, 8.0}),
                                                 k.numbers("family.s", {-2.0, -1.0, 0.0, 1.0, 2.0}), w, s.metric);
    } else {
        s.family = AutomorphismFamily::gabor_shift_grid(k.numbers("family.p", {-2.0, -1.0, 0.0, 1.0, 2.0}), w,
                                                        s.metric);
    }
    if (open_sides) {
        const std::vector<double> t = k.numbers("family.truncate", {-20.0, 20.0}, 2);
        if (t[0] != std::floor(t[0]) || t[1] != std::floor(t[1]) || t[0] > t[1])
            k.fail("family.truncate", "expected integers lo <= hi");
        s.truncate_lo = std::max(static_cast<long>(t[0]), s.family.j_min());
        s.truncate_hi = std::min(static_cast<long>(t[1]), s.family.j_max());
        if (s.truncate_lo > s.truncate_hi) k.fail("family.truncate", "does not meet the family's index range");
    }

    // Profile, in base coordinates.
    const std::string pkind =
        k.choice("profile.kind", "piecewise_constant", {"piecewise_constant", "sampled_grid", "ball", "zero"});
    if (pkind == "piecewise_constant") {
        std::vector<double> unit(2 * d);
        for (int i = 0; i < d; ++i) {
            unit[i] = s.gabor ? 0.0 : -1.0;
            unit[d + i] = 1.0;
        }
        const auto boxes = k.rows("profile.boxes", {unit}, 2 * d);
        const auto values = k.numbers("profile.values", repeat(static_cast<int>(boxes.size()), 1.0));
        if (values.size() != boxes.size()) k.fail("profile.values", "needs one value per box");
        std::vector<Box> bs;
        for (const auto& b : boxes)
            bs.push_back(Box{Vec::from({b.begin(), b.begin() + d}), Vec::from({b.begin() + d, b.end()})});
        s.profile = FrequencyProfile::piecewise_constant(bs, values);
    } else if (pkind == "sampled_grid") {
        const Value* file = k.raw("profile.file");
        if (file) {
            const std::string path = k.text("profile.file", "");
            std::filesystem::path p(path);
            if (p.is_relative()) p = src.base_dir / p;
            s.profile = profile_from_csv(p, d);
        } else {
            std::vector<double> box(2 * d);
            for (int i = 0; i < d; ++i) {
                box[i] = -1.0;
                box[d + i] = 1.0;
            }
            const auto b = k.numbers("profile.grid_box", box, 2 * d);
            const auto nodes_d = k.numbers("profile.nodes", repeat(d, 3.0), d);
            std::vector<int> nodes;
            std::size_t total = 1;
            for (double n : nodes_d) {
                if (n != std::floor(n) || n < 2 || n > 1e6) k.fail("profile.nodes", "expected integers >= 2");
                nodes.push_back(static_cast<int>(n));
                total *= static_cast<std::size_t>(n);
            }
            std::vector<double> tent(total, 0.0);
            if (total % 2 == 1) tent[total / 2] = 1.0;
            const auto values = k.numbers("profile.grid_values", tent, total);
            s.profile = FrequencyProfile::sampled_grid(
                Box{Vec::from({b.begin(), b.begin() + d}), Vec::from({b.begin() + d, b.end()})}, nodes, values);
        }
    } else if (pkind == "ball") {
        const Vec c = Vec::from(k.numbers("profile.center", repeat(d, 0.0), d));
        const double r = k.positive("profile.radius", 1.0);
        const MetricSpace base = s.gabor ? MetricSpace::l2(1) : s.metric;
        s.profile = FrequencyProfile::ball_indicator(Ball{c, r, base}, k.number("profile.value", 1.0));
    } else {
        s.profile = FrequencyProfile::zero(d);
    }
    if (s.gabor) {
        s.modulation = static_cast<int>(k.integer("profile.modulation", 1, -1e6, 1e6));
        s.profile = s.profile.on_modulation_line(s.modulation);
    }

    // Analyses and their knobs. All knobs are resolved whether or not the
    // analysis runs, so the echo documents the complete configuration.
    {
        const Value* v = k.raw("analyses");
        Value::List echoed;
        if (!v) {
            s.analyses = {"calderon_scan"};
        } else {
            if (!v->is_list()) k.fail("analyses", "expected a list of analysis names");
            for (const Value& a : v->list()) {
                if (!a.is_string() || !kAnalyses.count(a.string()))
                    k.fail("analyses", "unknown analysis '" + a.to_text() + "'");
                if (std::find(s.analyses.begin(), s.analyses.end(), a.string()) != s.analyses.end())
                    k.fail("analyses", "'" + a.string() + "' listed twice");
                s.analyses.push_back(a.string());
            }
        }
        for (const auto& a : s.analyses) echoed.push_back(string_value(a));
        k.echo.set("analyses", list_value(std::move(echoed)));
    }

    s.grid.lo = Vec::from(k.numbers("grid.lo", repeat(d, s.gabor ? -4.0 : -2.0), d));
    s.grid.hi = Vec::from(k.numbers("grid.hi", repeat(d, s.gabor ? 4.0 : 2.0), d));
    s.grid.points = static_cast<int>(k.integer("grid.points", d == 1 ? 200 : d == 2 ? 21 : 9, 1, 1e6));
    s.grid.mirror = k.flag("grid.mirror", false);
    s.grid.exclude = k.number("grid.exclude", 1e-3, 0.0);
    if (s.gabor) s.grid.k = static_cast<int>(k.integer("grid.k", s.modulation, -1e6, 1e6));
    for (int i = 0; i < d; ++i)
        if (s.grid.hi[i] < s.grid.lo[i]) k.fail("grid.hi", "must be at least grid.lo on every axis");

    s.A = k.number("frame.A", 0.0, 0.0);
    s.B = k.number("frame.B", kInf, 0.0);
    if (s.B < s.A) k.fail("frame.B", "must be at least frame.A");
    s.tolerance = k.number("frame.tolerance", 1e-9, 0.0);

    s.orbit.rel_tol = k.positive("orbit.rel_tol", s.orbit.rel_tol);
    s.orbit.max_terms = k.integer("orbit.max_terms", static_cast<double>(s.orbit.max_terms), 1, 1e9);
    s.orbit.divergence_cap = k.positive("orbit.divergence_cap", s.orbit.divergence_cap);

    s.property_x.r = k.positive("property_x.r", 0.4);
    s.property_x.M = k.positive("property_x.M", 1.0);
    s.property_x.explosion = k.number("property_x.explosion_factor", 10.0, 1.0);
    s.property_x.C_max = k.number("property_x.C_max", kInf, 0.0);
    s.property_x.candidate_cap = k.integer("property_x.candidate_cap", 1e8, 1, 1e15);

    s.counting.mode = k.choice("counting.mode", "family", {"family", "random"});
    s.counting.r = k.positive("counting.r", 0.4);
    s.counting.samples = k.integer("counting.samples", 1e5, 100, 1e10);
    s.counting.instances = static_cast<int>(k.integer("counting.instances", 200, 1, 1e6));
    s.counting.max_cond = k.number("counting.max_cond", 50.0, 1.0);
    s.counting.r_min = k.positive("counting.r_min", 0.05);
    s.counting.r_max = k.positive("counting.r_max", 2.0);
    if (s.counting.r_max < s.counting.r_min) k.fail("counting.r_max", "must be at least counting.r_min");
    for (double x : k.numbers("counting.dims", {1.0, 2.0, 3.0})) {
        if (x != 1.0 && x != 2.0 && x != 3.0) k.fail("counting.dims", "dimensions must be 1, 2 or 3");
        s.counting.dims.push_back(static_cast<int>(x));
    }
    if (s.counting.dims.empty()) k.fail("counting.dims", "expected at least one dimension");
    s.counting.sigmas = k.number("counting.sigmas", 3.0, 0.0);

    s.lipschitz.directions = static_cast<int>(k.integer("lipschitz.directions", 1e5, 16, 1e8));
    s.lipschitz.tolerance = k.positive("lipschitz.tolerance", 1e-3);

    s.classify.M = k.number_or_auto("classify.M");
    s.classify.N = k.number_or_auto("classify.N");
    s.classify.expect =
        k.choice("classify.expect", "any", {"any", "uniformly_expanding", "expanding", "non_expanding"});

    const std::string f = k.choice("u_c.f", "identity", {"identity", "power"});
    if (f == "power")
        s.u_c.f = MonotoneFunction::power(k.positive("u_c.f_coef", 1.0), k.positive("u_c.f_exponent", 1.0));
    s.u_c.c = k.number("u_c.c", 2.0, 1.0);
    s.u_c.t_min = k.positive("u_c.t_min", 1.0);
    s.u_c.t_max = k.positive("u_c.t_max", 1e4);
    if (s.u_c.t_max < s.u_c.t_min) k.fail("u_c.t_max", "must be at least u_c.t_min");
    s.u_c.t_points = static_cast<int>(k.integer("u_c.t_points", 33, 1, 1e6));
    s.u_c.M = k.positive("u_c.M", 1.0);
    s.u_c.cap = k.positive("u_c.cap", 100.0);
    s.u_c.expect_bounded = k.flag("u_c.expect_bounded", true);

    s.frame_report.M = k.positive("frame_report.M", 2.0);
    s.frame_report.remainder_eps = k.positive("frame_report.remainder_eps", 0.01);
    s.frame_report.remainder_points = k.points_or_auto("frame_report.remainder_points", pd);
    s.frame_report.C = k.number_or_auto("frame_report.C");
    s.frame_report.remainder_tolerance = k.number("frame_report.remainder_tolerance", 5e-6, 0.0);
    s.frame_report.test_eps = k.numbers("frame_report.test_eps", {0.01});
    for (double e : s.frame_report.test_eps)
        if (!(e > 0.0)) k.fail("frame_report.test_eps", "radii must be positive");
    s.frame_report.test_centers = k.points_or_auto("frame_report.test_centers", pd);
    s.frame_report.test_tolerance = k.number("frame_report.test_tolerance", 1e-6, 0.0);
    s.frame_report.probe_count = static_cast<int>(k.integer("frame_report.probe_count", 0, 0, 1e6));

    s.weil.mode = k.choice("weil_check.mode", "profile", {"profile", "random"});
    s.weil.instances = static_cast<int>(k.integer("weil_check.instances", 20, 1, 1e6));
    s.weil.tolerance = k.positive("weil_check.tolerance", 1e-8);

    k.check_unused();
    s.echo = std::move(k.echo);
    return s;
}

AutomorphismFamily finite_family(const ResolvedScenario& s) {
    if (s.family.index_kind() == IndexKind::integer_range && (s.family.unbounded_below() || s.family.unbounded_above()))
        return s.family.truncated(s.truncate_lo, s.truncate_hi);
    return s.family;
}

std::vector<FamilyMember> sample_members(const ResolvedScenario& s) {
    if (s.family.index_kind() != IndexKind::continuous) return finite_family(s).members();
    std::vector<FamilyMember> out;
    const int n = s.family_samples;
    for (int i = 0; i < n; ++i) {
        const double a = s.family.a_min() * std::pow(s.family.a_max() / s.family.a_min(), i / double(n - 1));
        out.push_back(s.family.member_at({a}));
        out.back().index = i;
    }
    return out;
}

std::vector<Vec> grid_points(const ResolvedScenario& s) {
    const int d = s.dim;
    const int n = s.grid.points;
    auto coord = [&](int axis, int i) {
        return n == 1 ? s.grid.lo[axis] : s.grid.lo[axis] + (s.grid.hi[axis] - s.grid.lo[axis]) * i / (n - 1);
    };
    std::vector<Vec> base;
    std::vector<int> idx(d, 0);
    while (true) {
        Vec x(d);
        for (int a = 0; a < d; ++a) x[a] = coord(a, idx[a]);
        base.push_back(x);
        int a = d - 1;
        while (a >= 0 && ++idx[a] == n) idx[a--] = 0;
        if (a < 0) break;
    }
    std::vector<Vec> pts;
    auto push = [&](const Vec& x) {
        Vec p = x;
        if (s.gabor) p = Vec{x[0], static_cast<double>(s.grid.k)};
        const double r = s.metric.distance(p, s.metric.identity());
        if (r > 0.0 && r >= s.grid.exclude) pts.push_back(p);
    };
    if (s.grid.mirror)
        for (auto it = base.rbegin(); it != base.rend(); ++it) push(-*it);
    for (const Vec& x : base) push(x);
    return pts;
}

}  // namespace detail

const std::vector<ShippedScenario>& shipped_scenarios() { return shipped_scenario_table(); }

ScenarioSource load_scenario(const std::string& name_or_path) {
    for (const auto& s : shipped_scenarios())
        if (s.name == name_or_path) return {s.name, s.text, "shipped", std::filesystem::current_path()};
    const std::filesystem::path p(name_or_path);
    if (!std::filesystem::is_regular_file(p))
        throw InputError("no shipped scenario or file named '" + name_or_path + "' (see `list`)");
    return {p.stem().string(), detail::read_file(p), p.string(), p.parent_path().empty() ? "." : p.parent_path()};
}

Config resolve_knobs(const ScenarioSource& src, const std::vector<std::string>& overrides) {
    return detail::resolve(src, overrides).echo;
}

}  // namespace aff
