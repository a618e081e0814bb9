#include "aff/profile.hpp"

#include <algorithm>
#include <cmath>

#include "aff/numerics.hpp"

namespace aff {

bool Box::contains(const Vec& x) const {
    for (int i = 0; i < lo.dim(); ++i)
        if (!(x[i] >= lo[i] && x[i] < hi[i])) return false;
    return true;
}

bool Box::empty() const {
    for (int i = 0; i < lo.dim(); ++i)
        if (!(hi[i] > lo[i])) return true;
    return false;
}

double Box::volume() const {
    if (empty()) return 0.0;
    double v = 1.0;
    for (int i = 0; i < lo.dim(); ++i) v *= hi[i] - lo[i];
    return v;
}

Box Box::intersect(const Box& o) const {
    Box b{lo, hi};
    for (int i = 0; i < lo.dim(); ++i) {
        b.lo[i] = std::max(lo[i], o.lo[i]);
        b.hi[i] = std::min(hi[i], o.hi[i]);
    }
    return b;
}

Box Box::hull(const Box& o) const {
    Box b{lo, hi};
    for (int i = 0; i < lo.dim(); ++i) {
        b.lo[i] = std::min(lo[i], o.lo[i]);
        b.hi[i] = std::max(hi[i], o.hi[i]);
    }
    return b;
}

FrequencyProfile FrequencyProfile::zero(int dim) {
    FrequencyProfile p;
    p.kind_ = ProfileKind::zero;
    p.base_dim_ = dim;
    p.support_ = {Vec(dim), Vec(dim)};
    return p;
}

FrequencyProfile FrequencyProfile::piecewise_constant(std::vector<Box> boxes,
                                                      std::vector<double> values) {
    require(boxes.size() == values.size(), "piecewise profile: boxes and values differ in length");
    if (boxes.empty()) throw InputError("piecewise profile: no boxes (use the zero profile)");
    const int dim = boxes.front().dim();
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        require(boxes[i].dim() == dim && boxes[i].hi.dim() == dim,
                "piecewise profile: box dimensions disagree");
        for (int k = 0; k < dim; ++k)
            require(std::isfinite(boxes[i].lo[k]) && std::isfinite(boxes[i].hi[k]),
                    "piecewise profile: unbounded box");
        require(!boxes[i].empty(), "piecewise profile: empty box");
        require(std::isfinite(values[i]), "piecewise profile: non-finite value");
        for (std::size_t j = 0; j < i; ++j)
            require(boxes[i].intersect(boxes[j]).empty(), "piecewise profile: boxes overlap");
    }
    FrequencyProfile p;
    p.kind_ = ProfileKind::piecewise_constant;
    p.base_dim_ = dim;
    p.support_ = boxes.front();
    for (const Box& b : boxes) p.support_ = p.support_.hull(b);
    p.boxes_ = std::move(boxes);
    p.values_ = std::move(values);
    return p;
}

FrequencyProfile FrequencyProfile::sampled_grid(Box box, std::vector<int> nodes,
                                                std::vector<double> values) {
    const int dim = box.dim();
    require(static_cast<int>(nodes.size()) == dim, "sampled grid: node counts per axis missing");
    require(!box.empty(), "sampled grid: empty box");
    std::size_t total = 1;
    for (int k = 0; k < dim; ++k) {
        require(std::isfinite(box.lo[k]) && std::isfinite(box.hi[k]), "sampled grid: unbounded box");
        require(nodes[k] >= 2, "sampled grid: need at least two nodes per axis");
        total *= static_cast<std::size_t>(nodes[k]);
    }
    require(values.size() == total, "sampled grid: expected " + std::to_string(total) + " values");
    for (double v : values) require(std::isfinite(v), "sampled grid: non-finite value");
    FrequencyProfile p;
    p.kind_ = ProfileKind::sampled_grid;
    p.base_dim_ = dim;
    p.support_ = std::move(box);
    p.nodes_ = std::move(nodes);
    p.values_ = std::move(values);
    return p;
}

FrequencyProfile FrequencyProfile::ball_indicator(const Ball& ball, double value) {
    require(ball.radius > 0.0 && std::isfinite(ball.radius), "ball profile: radius must be positive");
    require(!ball.metric.is_gabor(), "ball profile: use a base-line profile lifted to a modulation line");
    ball.metric.check_point(ball.center);
    FrequencyProfile p;
    p.kind_ = ProfileKind::ball_indicator;
    p.base_dim_ = ball.metric.point_dim();
    const Vec h(p.base_dim_, ball.radius);
    p.support_ = {ball.center - h, ball.center + h};
    p.ball_ = ball;
    p.ball_value_ = value;
    return p;
}

FrequencyProfile FrequencyProfile::on_modulation_line(int kappa) const {
    require(base_dim_ == 1 && !modulation_, "modulation lift needs a one-dimensional profile");
    FrequencyProfile p = *this;
    p.modulation_ = kappa;
    return p;
}

FrequencyProfile FrequencyProfile::base_profile() const {
    FrequencyProfile p = *this;
    p.modulation_.reset();
    return p;
}

Box FrequencyProfile::support() const {
    if (!modulation_) return support_;
    Box b{Vec(2), Vec(2)};
    b.lo[0] = support_.lo[0];
    b.hi[0] = support_.hi[0];
    b.lo[1] = *modulation_;
    b.hi[1] = *modulation_ + 1.0;
    return b;
}

double FrequencyProfile::eval_grid(const Vec& x) const {
    // Multilinear interpolation over the cell containing x.
    const int dim = base_dim_;
    std::array<int, kMaxDim> cell{};
    std::array<double, kMaxDim> frac{};
    for (int k = 0; k < dim; ++k) {
        const double h = (support_.hi[k] - support_.lo[k]) / (nodes_[k] - 1);
        const double t = (x[k] - support_.lo[k]) / h;
        int c = static_cast<int>(std::floor(t));
        c = std::clamp(c, 0, nodes_[k] - 2);
        cell[k] = c;
        frac[k] = t - c;
    }
    double acc = 0.0;
    for (int corner = 0; corner < (1 << dim); ++corner) {
        double w = 1.0;
        std::size_t flat = 0;
        for (int k = 0; k < dim; ++k) {
            const int bit = (corner >> k) & 1;
            w *= bit ? frac[k] : 1.0 - frac[k];
            flat = flat * nodes_[k] + static_cast<std::size_t>(cell[k] + bit);
        }
        if (w != 0.0) acc += w * values_[flat];
    }
    return acc;
}

double FrequencyProfile::eval_base(const Vec& x) const {
    switch (kind_) {
        case ProfileKind::zero: return 0.0;
        case ProfileKind::piecewise_constant:
            if (!support_.contains(x)) return 0.0;
            for (std::size_t i = 0; i < boxes_.size(); ++i)
                if (boxes_[i].contains(x)) return values_[i];
            return 0.0;
        case ProfileKind::sampled_grid:
            return support_.contains(x) ? eval_grid(x) : 0.0;
        case ProfileKind::ball_indicator:
            return ball_->contains(x) ? ball_value_ : 0.0;
    }
    return 0.0;
}

double FrequencyProfile::operator()(const Vec& xi) const {
    if (!modulation_) return eval_base(xi);
    if (xi[1] != *modulation_) return 0.0;
    return eval_base(Vec{xi[0]});
}

std::vector<std::vector<double>> FrequencyProfile::axis_breakpoints() const {
    std::vector<std::vector<double>> out(base_dim_);
    switch (kind_) {
        case ProfileKind::zero: break;
        case ProfileKind::piecewise_constant:
            for (const Box& b : boxes_)
                for (int k = 0; k < base_dim_; ++k) {
                    out[k].push_back(b.lo[k]);
                    out[k].push_back(b.hi[k]);
                }
            break;
        case ProfileKind::sampled_grid:
            for (int k = 0; k < base_dim_; ++k) {
                const double h = (support_.hi[k] - support_.lo[k]) / (nodes_[k] - 1);
                for (int i = 0; i < nodes_[k]; ++i)
                    out[k].push_back(i + 1 == nodes_[k] ? support_.hi[k] : support_.lo[k] + i * h);
            }
            break;
        case ProfileKind::ball_indicator:
            if (base_dim_ == 1) {
                out[0] = {support_.lo[0], support_.hi[0]};
            } else {
                out.clear();
            }
            break;
    }
    for (auto& v : out) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    return out;
}

namespace {

// Sum f(cell lower corner index, cell box) over all grid cells.
template <class F>
void for_each_grid_cell(const Box& box, const std::vector<int>& nodes, F&& f) {
    const int dim = box.dim();
    std::array<int, kMaxDim> idx{};
    long total = 1;
    for (int k = 0; k < dim; ++k) total *= nodes[k] - 1;
    for (long t = 0; t < total; ++t) {
        long rem = t;
        Box cell{Vec(dim), Vec(dim)};
        for (int k = dim - 1; k >= 0; --k) {
            idx[k] = static_cast<int>(rem % (nodes[k] - 1));
            rem /= nodes[k] - 1;
            const double h = (box.hi[k] - box.lo[k]) / (nodes[k] - 1);
            cell.lo[k] = box.lo[k] + idx[k] * h;
            cell.hi[k] = idx[k] + 2 == nodes[k] ? box.hi[k] : box.lo[k] + (idx[k] + 1) * h;
        }
        f(cell);
    }
}

}  // namespace

double FrequencyProfile::integral() const {
    switch (kind_) {
        case ProfileKind::zero: return 0.0;
        case ProfileKind::piecewise_constant: {
            CompensatedSum s;
            for (std::size_t i = 0; i < boxes_.size(); ++i) s.add(values_[i] * boxes_[i].volume());
            return s.value();
        }
        case ProfileKind::sampled_grid: {
            // Multilinear cells integrate to volume times the corner average.
            // The midpoint value of a multilinear cell equals its cell average.
            CompensatedSum s;
            for_each_grid_cell(support_, nodes_,
                               [&](const Box& cell) { s.add(eval_grid(cell.center()) * cell.volume()); });
            return s.value();
        }
        case ProfileKind::ball_indicator:
            return ball_value_ * ball_->metric.ball_measure(ball_->radius);
    }
    return 0.0;
}

double FrequencyProfile::norm_squared() const {
    switch (kind_) {
        case ProfileKind::zero: return 0.0;
        case ProfileKind::piecewise_constant: {
            CompensatedSum s;
            for (std::size_t i = 0; i < boxes_.size(); ++i)
                s.add(values_[i] * values_[i] * boxes_[i].volume());
            return s.value();
        }
        case ProfileKind::sampled_grid: {
            // Two-point Gauss per axis is exact for the squared multilinear cell.
            const GaussRule& g = gauss_legendre(2);
            const int dim = base_dim_;
            CompensatedSum s;
            for_each_grid_cell(support_, nodes_, [&](const Box& cell) {
                double acc = 0.0;
                for (int q = 0; q < (1 << dim); ++q) {
                    Vec x(dim);
                    double w = 1.0;
                    for (int k = 0; k < dim; ++k) {
                        const int b = (q >> k) & 1;
                        const double half = 0.5 * (cell.hi[k] - cell.lo[k]);
                        x[k] = cell.lo[k] + half * (1.0 + g.nodes[b]);
                        w *= half * g.weights[b];
                    }
                    const double v = eval_grid(x);
                    acc += w * v * v;
                }
                s.add(acc);
            });
            return s.value();
        }
        case ProfileKind::ball_indicator:
            return ball_value_ * ball_value_ * ball_->metric.ball_measure(ball_->radius);
    }
    return 0.0;
}

FrequencyProfile FrequencyProfile::scaled(double c) const {
    FrequencyProfile p = *this;
    for (double& v : p.values_) v *= c;
    p.ball_value_ *= c;
    return p;
}

}  // namespace aff
