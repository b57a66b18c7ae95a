#include "mhc/catalog.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mhc/error.hpp"

namespace mhc {

namespace {

constexpr double kDomainTol = 1e-12;

double ipow(double x, unsigned p)
{
    double r = 1.0;
    while (p > 0) {
        if (p & 1U) r *= x;
        x *= x;
        p >>= 1U;
    }
    return r;
}

void check_hessian(const Matrix& h, std::size_t dim)
{
    if (h.empty()) return;
    require(h.rows() == dim && h.cols() == dim, ErrorKind::dimension_mismatch,
            "catalog hessian must be " + std::to_string(dim) + "x" + std::to_string(dim));
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = i + 1; j < dim; ++j)
            require(std::abs(h(i, j) - h(j, i)) <= 1e-12, ErrorKind::invalid_argument,
                    "catalog hessian must be symmetric");
}

}  // namespace

std::string_view to_string(Family family)
{
    switch (family) {
    case Family::linear: return "linear";
    case Family::linquad: return "linquad";
    case Family::exp_cara: return "exp_cara";
    case Family::power: return "power";
    case Family::polynomial: return "polynomial";
    }
    return "linear";
}

Family family_from_string(std::string_view name)
{
    if (name == "linear") return Family::linear;
    if (name == "linquad") return Family::linquad;
    if (name == "exp_cara") return Family::exp_cara;
    if (name == "power") return Family::power;
    if (name == "polynomial" || name == "custom-polynomial") return Family::polynomial;
    fail(ErrorKind::semantic, "unknown catalog family '" + std::string(name) + "'");
}

CatalogEntry CatalogEntry::constant(std::size_t dim, double value)
{
    return linear(value, std::vector<double>(dim, 0.0));
}

CatalogEntry CatalogEntry::linear(double bias, std::vector<double> weights)
{
    CatalogEntry e;
    e.family_ = Family::linear;
    e.dim_ = weights.size();
    e.bias_ = bias;
    e.weights_ = std::move(weights);
    return e;
}

CatalogEntry CatalogEntry::linquad(double bias, std::vector<double> weights, Matrix hessian)
{
    CatalogEntry e = linear(bias, std::move(weights));
    check_hessian(hessian, e.dim_);
    e.family_ = Family::linquad;
    if (!hessian.is_zero()) e.hess_ = std::move(hessian);
    return e;
}

CatalogEntry CatalogEntry::exp_cara(std::size_t coord, double rho, double scale, double bias,
                                    std::vector<double> weights, Matrix hessian)
{
    CatalogEntry e = linquad(bias, std::move(weights), std::move(hessian));
    require(coord < e.dim_, ErrorKind::dimension_mismatch, "exp_cara coordinate out of range");
    require(rho > 0.0 && std::isfinite(rho), ErrorKind::invalid_argument, "exp_cara needs rho > 0");
    e.family_ = Family::exp_cara;
    e.shape_ = Shape::exp_cara;
    e.coord_ = coord;
    e.rate_ = rho;
    e.scale_ = scale;
    return e;
}

CatalogEntry CatalogEntry::power(std::size_t coord, double exponent, double scale, double shift,
                                 double bias, std::vector<double> weights, Matrix hessian)
{
    CatalogEntry e = linquad(bias, std::move(weights), std::move(hessian));
    require(coord < e.dim_, ErrorKind::dimension_mismatch, "power coordinate out of range");
    require(exponent > 0.0, ErrorKind::invalid_argument, "power needs exponent > 0");
    require(shift >= 0.0, ErrorKind::invalid_argument, "power needs shift >= 0");
    e.family_ = Family::power;
    e.shape_ = Shape::power;
    e.coord_ = coord;
    e.rate_ = exponent;
    e.scale_ = scale;
    e.shift_ = shift;
    return e;
}

CatalogEntry CatalogEntry::polynomial(std::size_t dim, double bias, std::vector<Monomial> terms)
{
    CatalogEntry e = linear(bias, std::vector<double>(dim, 0.0));
    for (const auto& t : terms)
        require(t.powers.size() == dim, ErrorKind::dimension_mismatch,
                "polynomial term needs one power per argument");
    e.family_ = Family::polynomial;
    e.terms_ = std::move(terms);
    return e;
}

std::vector<double> CatalogEntry::parameters() const
{
    std::vector<double> p;
    p.push_back(bias_);
    p.insert(p.end(), weights_.begin(), weights_.end());
    for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t j = 0; j < dim_; ++j) p.push_back(hess_.empty() ? 0.0 : hess_(i, j));
    if (shape_ != Shape::none) {
        p.push_back(static_cast<double>(coord_));
        p.push_back(rate_);
        p.push_back(scale_);
        p.push_back(shift_);
    }
    for (const auto& t : terms_) {
        p.push_back(t.coef);
        for (unsigned q : t.powers) p.push_back(static_cast<double>(q));
    }
    return p;
}

CatalogEntry CatalogEntry::with_domain(std::vector<double> lower, std::vector<double> upper) const
{
    require(lower.size() == dim_ && upper.size() == dim_, ErrorKind::dimension_mismatch,
            "domain bounds must match the entry dimension");
    CatalogEntry e = *this;
    e.lower_ = std::move(lower);
    e.upper_ = std::move(upper);
    return e;
}

CatalogEntry CatalogEntry::shifted(double delta) const
{
    CatalogEntry e = *this;
    e.bias_ += delta;
    return e;
}

bool CatalogEntry::contains(std::span<const double> x) const noexcept
{
    if (x.size() != dim_) return false;
    if (!lower_.empty())
        for (std::size_t k = 0; k < dim_; ++k)
            if (!(x[k] >= lower_[k] - kDomainTol && x[k] <= upper_[k] + kDomainTol)) return false;
    if (shape_ == Shape::power && !(x[coord_] + shift_ > 0.0)) return false;
    return true;
}

void CatalogEntry::check_point(std::span<const double> x) const
{
    if (x.size() != dim_)
        fail(ErrorKind::dimension_mismatch, "catalog entry expects " + std::to_string(dim_) +
                                                " arguments, got " + std::to_string(x.size()));
    if (!contains(x)) {
        std::string msg = "point (";
        for (std::size_t k = 0; k < x.size(); ++k) msg += (k ? ", " : "") + std::to_string(x[k]);
        fail(ErrorKind::out_of_domain, msg + ") outside the domain of a " +
                                           std::string(to_string(family_)) + " entry");
    }
}

double CatalogEntry::shaped_value(double xs) const
{
    if (shape_ == Shape::exp_cara) return scale_ * (1.0 - std::exp(-rate_ * xs)) / rate_;
    return scale_ * std::pow(xs + shift_, rate_);
}

double CatalogEntry::shaped_d1(double xs) const
{
    if (shape_ == Shape::exp_cara) return scale_ * std::exp(-rate_ * xs);
    return scale_ * rate_ * std::pow(xs + shift_, rate_ - 1.0);
}

double CatalogEntry::shaped_d2(double xs) const
{
    if (shape_ == Shape::exp_cara) return -scale_ * rate_ * std::exp(-rate_ * xs);
    return scale_ * rate_ * (rate_ - 1.0) * std::pow(xs + shift_, rate_ - 2.0);
}

double CatalogEntry::value(std::span<const double> x) const
{
    check_point(x);
    double v = bias_;
    for (std::size_t k = 0; k < dim_; ++k) v += weights_[k] * x[k];
    if (!hess_.empty()) {
        double q = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < dim_; ++j) row += hess_(i, j) * x[j];
            q += x[i] * row;
        }
        v += 0.5 * q;
    }
    if (shape_ != Shape::none) v += shaped_value(x[coord_]);
    for (const auto& t : terms_) {
        double m = t.coef;
        for (std::size_t j = 0; j < dim_; ++j) m *= ipow(x[j], t.powers[j]);
        v += m;
    }
    return v;
}

double CatalogEntry::partial(std::span<const double> x, std::size_t k) const
{
    check_point(x);
    double d = weights_[k];
    if (!hess_.empty())
        for (std::size_t j = 0; j < dim_; ++j) d += hess_(k, j) * x[j];
    if (shape_ != Shape::none && k == coord_) d += shaped_d1(x[coord_]);
    for (const auto& t : terms_) {
        if (t.powers[k] == 0) continue;
        double m = t.coef * t.powers[k];
        for (std::size_t j = 0; j < dim_; ++j)
            m *= ipow(x[j], j == k ? t.powers[j] - 1 : t.powers[j]);
        d += m;
    }
    return d;
}

double CatalogEntry::second_partial(std::span<const double> x, std::size_t k, std::size_t l) const
{
    check_point(x);
    double d = hess_.empty() ? 0.0 : hess_(k, l);
    if (shape_ != Shape::none && k == coord_ && l == coord_) d += shaped_d2(x[coord_]);
    for (const auto& t : terms_) {
        double m = t.coef;
        if (k == l) {
            if (t.powers[k] < 2) continue;
            m *= static_cast<double>(t.powers[k]) * (t.powers[k] - 1);
            for (std::size_t j = 0; j < dim_; ++j)
                m *= ipow(x[j], j == k ? t.powers[j] - 2 : t.powers[j]);
        } else {
            if (t.powers[k] == 0 || t.powers[l] == 0) continue;
            m *= static_cast<double>(t.powers[k]) * t.powers[l];
            for (std::size_t j = 0; j < dim_; ++j)
                m *= ipow(x[j], (j == k || j == l) ? t.powers[j] - 1 : t.powers[j]);
        }
        d += m;
    }
    return d;
}

std::vector<double> CatalogEntry::gradient(std::span<const double> x) const
{
    std::vector<double> g(dim_);
    for (std::size_t k = 0; k < dim_; ++k) g[k] = partial(x, k);
    return g;
}

Matrix CatalogEntry::hessian(std::span<const double> x) const
{
    Matrix h(dim_, dim_);
    for (std::size_t k = 0; k < dim_; ++k)
        for (std::size_t l = k; l < dim_; ++l) h(k, l) = h(l, k) = second_partial(x, k, l);
    return h;
}

EvalResult eval(const CatalogEntry& entry, std::span<const double> point, EvalKind which)
{
    switch (which) {
    case EvalKind::value: return entry.value(point);
    case EvalKind::gradient: return entry.gradient(point);
    case EvalKind::hessian: return entry.hessian(point);
    }
    return entry.value(point);
}

}  // namespace mhc
