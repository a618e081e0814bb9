#include "aff/family.hpp"

#include <cmath>
#include <sstream>

#include "aff/numerics.hpp"

namespace aff {

const char* to_string(IndexKind k) {
    switch (k) {
        case IndexKind::integer_range: return "integer_range";
        case IndexKind::real_grid: return "real_grid";
        case IndexKind::continuous: return "continuous";
    }
    return "?";
}

const char* to_string(GeneratorKind k) {
    switch (k) {
        case GeneratorKind::matrix_power: return "matrix_power";
        case GeneratorKind::dilation: return "dilation";
        case GeneratorKind::shearlet: return "shearlet";
        case GeneratorKind::gabor_shift: return "gabor_shift";
    }
    return "?";
}

double WeightSpec::operator()(double first_param, long index) const {
    switch (kind) {
        case Kind::constant: return scale;
        case Kind::power: return scale * std::pow(std::abs(first_param), exponent);
        case Kind::geometric: return scale * std::pow(base, static_cast<double>(index));
    }
    return 0.0;
}

std::string WeightSpec::describe() const {
    std::ostringstream os;
    os.precision(12);
    switch (kind) {
        case Kind::constant: os << "constant(" << scale << ")"; break;
        case Kind::power: os << scale << "*|a|^" << exponent; break;
        case Kind::geometric: os << scale << "*" << base << "^j"; break;
    }
    return os.str();
}

namespace {

void check_weight(const WeightSpec& w) {
    require(std::isfinite(w.scale) && w.scale >= 0.0, "weight: scale must be finite and >= 0");
    require(std::isfinite(w.exponent) && std::isfinite(w.base) && w.base > 0.0,
            "weight: exponent/base must be finite, base > 0");
}

void check_range(long lo, long hi) {
    require(lo <= hi, "family: empty integer range");
    require(lo != AutomorphismFamily::kUnbounded && hi != -AutomorphismFamily::kUnbounded,
            "family: malformed unbounded range");
}

}  // namespace

AutomorphismFamily AutomorphismFamily::matrix_powers(const Matrix& base, long j_min, long j_max, WeightSpec w,
                                                     const MetricSpace& metric) {
    check_range(j_min, j_max);
    check_weight(w);
    require(base.square() && base.rows() == metric.point_dim(), "matrix_powers: base dimension must match metric");
    (void)inverse(base);
    AutomorphismFamily f;
    f.index_ = IndexKind::integer_range;
    f.gen_ = GeneratorKind::matrix_power;
    f.metric_ = metric;
    f.weight_ = w;
    f.base_ = base;
    f.j_min_ = j_min;
    f.j_max_ = j_max;
    return f;
}

AutomorphismFamily AutomorphismFamily::dilations(std::vector<double> a_values, WeightSpec w,
                                                 const MetricSpace& metric) {
    require(!a_values.empty(), "dilations: empty grid");
    require(!metric.is_gabor(), "dilations: euclidean metric required");
    for (double a : a_values) require(a > 0.0 && std::isfinite(a), "dilations: a must be positive");
    check_weight(w);
    AutomorphismFamily f;
    f.index_ = IndexKind::real_grid;
    f.gen_ = GeneratorKind::dilation;
    f.metric_ = metric;
    f.weight_ = w;
    f.grid_a_ = std::move(a_values);
    return f;
}

AutomorphismFamily AutomorphismFamily::continuous_dilations(double a_min, double a_max, WeightSpec density,
                                                            const MetricSpace& metric) {
    require(a_min > 0.0 && a_max > a_min, "continuous dilations: need 0 < a_min < a_max");
    require(!metric.is_gabor(), "dilations: euclidean metric required");
    check_weight(density);
    require(density.kind != WeightSpec::Kind::geometric, "continuous dilations: geometric weights need an integer index");
    AutomorphismFamily f;
    f.index_ = IndexKind::continuous;
    f.gen_ = GeneratorKind::dilation;
    f.metric_ = metric;
    f.weight_ = density;
    f.a_min_ = a_min;
    f.a_max_ = a_max;
    return f;
}

AutomorphismFamily AutomorphismFamily::shearlets(std::vector<double> a_values, std::vector<double> s_values,
                                                 WeightSpec w, const MetricSpace& metric) {
    require(!a_values.empty() && !s_values.empty(), "shearlets: empty grid");
    require(metric.point_dim() == 2 && !metric.is_gabor(), "shearlets: two-dimensional euclidean metric required");
    for (double a : a_values) require(a > 0.0 && std::isfinite(a), "shearlets: a must be positive");
    for (double s : s_values) require(std::isfinite(s), "shearlets: s must be finite");
    check_weight(w);
    require(w.kind != WeightSpec::Kind::geometric, "shearlets: geometric weights need an integer index");
    AutomorphismFamily f;
    f.index_ = IndexKind::real_grid;
    f.gen_ = GeneratorKind::shearlet;
    f.metric_ = metric;
    f.weight_ = w;
    f.grid_a_ = std::move(a_values);
    f.grid_s_ = std::move(s_values);
    return f;
}

AutomorphismFamily AutomorphismFamily::gabor_shifts(double step, long j_min, long j_max, WeightSpec w,
                                                    const MetricSpace& metric) {
    check_range(j_min, j_max);
    check_weight(w);
    require(metric.is_gabor(), "gabor_shifts: gabor metric required");
    require(step != 0.0 && std::isfinite(step), "gabor_shifts: step must be nonzero");
    AutomorphismFamily f;
    f.index_ = IndexKind::integer_range;
    f.gen_ = GeneratorKind::gabor_shift;
    f.metric_ = metric;
    f.weight_ = w;
    f.step_ = step;
    f.j_min_ = j_min;
    f.j_max_ = j_max;
    return f;
}

AutomorphismFamily AutomorphismFamily::gabor_shift_grid(std::vector<double> p_values, WeightSpec w,
                                                        const MetricSpace& metric) {
    require(!p_values.empty(), "gabor_shift_grid: empty grid");
    require(metric.is_gabor(), "gabor_shift_grid: gabor metric required");
    for (double p : p_values) require(std::isfinite(p), "gabor_shift_grid: p must be finite");
    check_weight(w);
    require(w.kind != WeightSpec::Kind::geometric, "gabor_shift_grid: geometric weights need an integer index");
    AutomorphismFamily f;
    f.index_ = IndexKind::real_grid;
    f.gen_ = GeneratorKind::gabor_shift;
    f.metric_ = metric;
    f.weight_ = w;
    f.grid_a_ = std::move(p_values);
    return f;
}

std::vector<std::string> AutomorphismFamily::param_names() const {
    switch (gen_) {
        case GeneratorKind::matrix_power: return {"j"};
        case GeneratorKind::dilation: return {"a"};
        case GeneratorKind::shearlet: return {"a", "s"};
        case GeneratorKind::gabor_shift: return {"p"};
    }
    return {};
}

std::string AutomorphismFamily::describe() const {
    std::ostringstream os;
    os.precision(12);
    os << to_string(gen_) << " over " << to_string(index_);
    auto side = [](long v) {
        if (v == kUnbounded) return std::string("+inf");
        if (v == -kUnbounded) return std::string("-inf");
        return std::to_string(v);
    };
    if (index_ == IndexKind::integer_range) os << " [" << side(j_min_) << ", " << side(j_max_) << "]";
    if (index_ == IndexKind::continuous) os << " [" << a_min_ << ", " << a_max_ << "]";
    if (index_ == IndexKind::real_grid) os << " (" << size() << " points)";
    os << ", weight " << weight_.describe() << ", metric " << metric_.name();
    return os.str();
}

bool AutomorphismFamily::is_finite() const {
    if (index_ == IndexKind::continuous) return false;
    if (index_ == IndexKind::integer_range) return !unbounded_below() && !unbounded_above();
    return true;
}

long AutomorphismFamily::size() const {
    switch (index_) {
        case IndexKind::integer_range:
            require(is_finite(), "family: unbounded integer range has no finite size");
            return j_max_ - j_min_ + 1;
        case IndexKind::real_grid:
            return static_cast<long>(grid_a_.size() * (gen_ == GeneratorKind::shearlet ? grid_s_.size() : 1));
        case IndexKind::continuous: throw InputError("family: continuous index set has no finite size");
    }
    return 0;
}

AutomorphismFamily AutomorphismFamily::truncated(long lo, long hi) const {
    require(index_ == IndexKind::integer_range, "truncated: integer families only");
    AutomorphismFamily f = *this;
    f.j_min_ = std::max(j_min_, lo);
    f.j_max_ = std::min(j_max_, hi);
    require(f.j_min_ <= f.j_max_, "truncated: empty range");
    return f;
}

Automorphism AutomorphismFamily::automorphism_for(const std::vector<double>& p) const {
    switch (gen_) {
        case GeneratorKind::matrix_power:
            return Automorphism::matrix_power(base_, static_cast<long>(p.at(0)));
        case GeneratorKind::dilation: {
            const int n = metric_.point_dim();
            return Automorphism::matrix(Matrix::diag(std::vector<double>(n, p.at(0))));
        }
        case GeneratorKind::shearlet: return Automorphism::shearlet(p.at(0), p.at(1));
        case GeneratorKind::gabor_shift: return Automorphism::gabor_shift(p.at(0));
    }
    throw InputError("family: unknown generator");
}

FamilyMember AutomorphismFamily::member_at_index(long j) const {
    require(index_ == IndexKind::integer_range, "member_at_index: integer families only");
    require(j >= j_min_ && j <= j_max_, "member_at_index: index outside the declared range");
    FamilyMember m;
    m.index = j;
    const double pj = gen_ == GeneratorKind::gabor_shift ? step_ * static_cast<double>(j) : static_cast<double>(j);
    m.param = {pj};
    m.alpha = automorphism_for(m.param);
    m.weight = weight_(pj, j);
    m.jacobian = m.alpha.jacobian();
    m.lip = lipschitz_constants(m.alpha, metric_);
    return m;
}

FamilyMember AutomorphismFamily::member_at(const std::vector<double>& param) const {
    require(static_cast<int>(param.size()) == param_dim(), "member_at: wrong parameter count");
    if (index_ == IndexKind::integer_range) {
        const double j = param[0] / (gen_ == GeneratorKind::gabor_shift ? step_ : 1.0);
        require(j == std::round(j), "member_at: parameter is not on the integer index set");
        return member_at_index(static_cast<long>(std::round(j)));
    }
    if (index_ == IndexKind::continuous)
        require(param[0] >= a_min_ && param[0] <= a_max_, "member_at: parameter outside [a_min, a_max]");
    FamilyMember m;
    m.param = param;
    m.alpha = automorphism_for(param);
    m.weight = weight_(param[0], 0);
    m.jacobian = m.alpha.jacobian();
    m.lip = lipschitz_constants(m.alpha, metric_);
    return m;
}

std::vector<std::vector<double>> AutomorphismFamily::grid_points() const {
    require(index_ == IndexKind::real_grid, "grid_points: real_grid families only");
    std::vector<std::vector<double>> out;
    if (gen_ == GeneratorKind::shearlet) {
        for (double a : grid_a_)
            for (double s : grid_s_) out.push_back({a, s});
    } else {
        for (double a : grid_a_) out.push_back({a});
    }
    return out;
}

std::vector<FamilyMember> AutomorphismFamily::members(int workers) const {
    require(is_finite(), "members: family needs a finite truncation");
    const long n = size();
    require(n <= 10'000'000, "members: truncation too large");
    std::vector<FamilyMember> out(static_cast<std::size_t>(n));
    parallel_for(n, workers, [&](long i) {
        FamilyMember m;
        if (index_ == IndexKind::integer_range) {
            m = member_at_index(j_min_ + i);
        } else if (gen_ == GeneratorKind::shearlet) {
            const std::size_t ns = grid_s_.size();
            m = member_at({grid_a_[static_cast<std::size_t>(i) / ns], grid_s_[static_cast<std::size_t>(i) % ns]});
            m.index = i;
        } else {
            m = member_at({grid_a_[static_cast<std::size_t>(i)]});
            m.index = i;
        }
        out[static_cast<std::size_t>(i)] = std::move(m);
    });
    return out;
}

std::vector<FamilyMember> level_below(const std::vector<FamilyMember>& ms, double M) {
    std::vector<FamilyMember> out;
    for (const auto& m : ms)
        if (m.lip.upper < M) out.push_back(m);
    return out;
}

std::vector<FamilyMember> level_above(const std::vector<FamilyMember>& ms, double M) {
    std::vector<FamilyMember> out;
    for (const auto& m : ms)
        if (!(m.lip.upper < M)) out.push_back(m);
    return out;
}

std::vector<FamilyMember> level_lower_above(const std::vector<FamilyMember>& ms, double N) {
    std::vector<FamilyMember> out;
    for (const auto& m : ms)
        if (m.lip.lower > N) out.push_back(m);
    return out;
}

}  // namespace aff
