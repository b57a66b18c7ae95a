#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "mhc/matrix.hpp"

namespace mhc {

// Closed parametric families for the model functions. Every family shares a
// quadratic part  b + w.x + 1/2 x^T H x ; the named families add one shaped
// term on a single coordinate x_s:
//
//   linear      b + w.x
//   linquad     b + w.x + 1/2 x^T H x
//   exp_cara    quadratic part + scale * (1 - exp(-rho x_s)) / rho
//   power       quadratic part + scale * (x_s + shift)^exponent
//   polynomial  b + sum_k coef_k prod_j x_j^{p_kj}
//
// All first and second partials are analytic.
enum class Family { linear, linquad, exp_cara, power, polynomial };

std::string_view to_string(Family family);
Family family_from_string(std::string_view name);

struct Monomial {
    double coef = 0.0;
    std::vector<unsigned> powers;
};

class CatalogEntry {
public:
    CatalogEntry() = default;

    static CatalogEntry constant(std::size_t dim, double value);
    static CatalogEntry linear(double bias, std::vector<double> weights);
    static CatalogEntry linquad(double bias, std::vector<double> weights, Matrix hessian);
    static CatalogEntry exp_cara(std::size_t coord, double rho, double scale, double bias,
                                 std::vector<double> weights, Matrix hessian = {});
    static CatalogEntry power(std::size_t coord, double exponent, double scale, double shift,
                              double bias, std::vector<double> weights, Matrix hessian = {});
    static CatalogEntry polynomial(std::size_t dim, double bias, std::vector<Monomial> terms);

    Family family() const noexcept { return family_; }
    std::size_t dim() const noexcept { return dim_; }

    // Flat parameter vector: [bias, weights(dim), hessian(dim*dim, row-major)]
    // followed by [coord, rho|exponent, scale, shift] for the shaped families
    // or by [coef, powers(dim)] per monomial for polynomial.
    std::vector<double> parameters() const;

    // Same function restricted to the closed box [lower, upper]; evaluation
    // outside it (beyond 1e-12) throws out_of_domain.
    CatalogEntry with_domain(std::vector<double> lower, std::vector<double> upper) const;
    const std::vector<double>& lower() const noexcept { return lower_; }
    const std::vector<double>& upper() const noexcept { return upper_; }

    CatalogEntry shifted(double delta) const;

    double value(std::span<const double> x) const;
    double partial(std::span<const double> x, std::size_t k) const;
    double second_partial(std::span<const double> x, std::size_t k, std::size_t l) const;
    std::vector<double> gradient(std::span<const double> x) const;
    Matrix hessian(std::span<const double> x) const;

    bool contains(std::span<const double> x) const noexcept;

private:
    enum class Shape { none, exp_cara, power };

    void check_point(std::span<const double> x) const;
    double shaped_value(double xs) const;
    double shaped_d1(double xs) const;
    double shaped_d2(double xs) const;

    Family family_ = Family::linear;
    std::size_t dim_ = 0;
    double bias_ = 0.0;
    std::vector<double> weights_;
    Matrix hess_;  // empty means zero
    Shape shape_ = Shape::none;
    std::size_t coord_ = 0;
    double rate_ = 0.0;  // rho for exp_cara, exponent for power
    double scale_ = 0.0;
    double shift_ = 0.0;
    std::vector<Monomial> terms_;
    std::vector<double> lower_;
    std::vector<double> upper_;
};

enum class EvalKind { value, gradient, hessian };
using EvalResult = std::variant<double, std::vector<double>, Matrix>;

EvalResult eval(const CatalogEntry& entry, std::span<const double> point, EvalKind which);

}  // namespace mhc
