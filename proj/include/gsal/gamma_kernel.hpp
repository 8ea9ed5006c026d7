#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "gsal/error.hpp"
#include "gsal/grid.hpp"

namespace gsal {

/// Fraction of the continuous kernel mass the default support must enclose.
inline constexpr double kDefaultSupportMass = 0.99;

/// Radial mass of g_{k,mu} inside radius r: the regularized lower incomplete
/// gamma P(k+1, mu*r), evaluated as a Poisson tail sum in log space.
inline double gamma_radial_mass(int k, double mu, double r) {
    const double x = mu * r;
    if (x <= 0) return 0.0;
    double outside = 0.0;
    const double lx = std::log(x);
    for (int j = 0; j <= k; ++j) outside += std::exp(j * lx - x - std::lgamma(j + 1.0));
    return std::clamp(1.0 - outside, 0.0, 1.0);
}

/// Smallest grid half-width that both contains the peak ring with its decay
/// tail (k/mu + 5/mu) and encloses kDefaultSupportMass of the kernel's mass.
inline int default_support_radius(int k, double mu) {
    int r = static_cast<int>(std::ceil(k / mu + 5.0 / mu));
    while (gamma_radial_mass(k, mu, r) < kDefaultSupportMass) ++r;
    return r;
}

/// Order k, decay mu (1/px) and sampling half-width of one 2D gamma kernel.
class GammaKernelSpec {
public:
    /// support_radius == 0 selects default_support_radius(k, mu).
    GammaKernelSpec(int k, double mu, int support_radius = 0) : k_(k), mu_(mu), support_radius_(support_radius) {
        if (k < 1) throw ValidationError("gamma kernel order k must be >= 1, got " + std::to_string(k));
        if (!(mu > 0) || !std::isfinite(mu)) throw ValidationError("gamma kernel mu must be > 0");
        if (support_radius_ == 0) support_radius_ = default_support_radius(k, mu);
        const int required = minimum_radius(k, mu);
        if (support_radius_ < required)
            throw ValidationError("support radius " + std::to_string(support_radius_) + " too small for k=" +
                                  std::to_string(k) + " mu=" + std::to_string(mu) + "; requires >= " +
                                  std::to_string(required));
    }

    /// ceil(k/mu) + 3/mu, rounded up to whole pixels.
    static int minimum_radius(int k, double mu) {
        return static_cast<int>(std::ceil(std::ceil(k / mu) + 3.0 / mu));
    }

    int k() const noexcept { return k_; }
    double mu() const noexcept { return mu_; }
    int support_radius() const noexcept { return support_radius_; }
    /// Nominal ring radius k/mu.
    double ring_radius() const noexcept { return k_ / mu_; }

    bool operator==(const GammaKernelSpec&) const = default;

private:
    int k_;
    double mu_;
    int support_radius_;
};

/// Gamma kernel density at radius r. For k = 1 the origin value is mu^2 / (2 pi); for k > 1 it is 0.
inline double gamma_kernel_value(int k, double mu, double r) {
    if (r == 0.0) return k == 1 ? mu * mu / (2.0 * std::numbers::pi) : 0.0;
    const double log_value = (k + 1) * std::log(mu) - std::log(2.0 * std::numbers::pi) - std::lgamma(k + 1.0) +
                             (k - 1) * std::log(r) - mu * r;
    return std::exp(log_value);
}

/// Kernel sampled at integer offsets on a (2R+1)^2 grid centered at (R, R).
inline GridD build_kernel(const GammaKernelSpec& spec, int radius_override = 0) {
    const int r = radius_override > 0 ? radius_override : spec.support_radius();
    const int side = 2 * r + 1;
    GridD g(side, side);
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) {
            const double dx = x - r;
            const double dy = y - r;
            g(x, y) = gamma_kernel_value(spec.k(), spec.mu(), std::sqrt(dx * dx + dy * dy));
        }
    return g;
}

/// Alternating-sign sum of center/surround gamma kernels on a shared grid.
///
/// Each component is scaled to unit discrete mass before summation so every
/// center/surround pair cancels exactly on a constant field. Point sampling
/// alone leaves a sharp center (mu = 2) about 27% heavier than its surround.
class KernelStack {
public:
    KernelStack() = default;

    explicit KernelStack(std::vector<GammaKernelSpec> specs) : specs_(std::move(specs)) {
        if (specs_.empty() || specs_.size() % 2 != 0)
            throw ValidationError("kernel stack needs an even, non-zero number of specs, got " +
                                  std::to_string(specs_.size()));
        for (std::size_t m = 0; m < specs_.size(); m += 2)
            if (specs_[m].k() != 1)
                throw ValidationError("center kernel at index " + std::to_string(m) + " must have k = 1, got " +
                                      std::to_string(specs_[m].k()));
        radius_ = 0;
        for (const auto& s : specs_) radius_ = std::max(radius_, s.support_radius());
        const int side = 2 * radius_ + 1;
        realized_ = GridD(side, side, 0.0);
        for (std::size_t s = 0; s < scales(); ++s) {
            GridD pair(side, side, 0.0);
            for (std::size_t j = 0; j < 2; ++j) {
                const GridD g = build_kernel(specs_[2 * s + j], radius_);
                const double mass = sum(g);
                const double sign = j == 0 ? 1.0 : -1.0;
                for (std::size_t i = 0; i < g.size(); ++i) pair.data()[i] += sign * g.data()[i] / mass;
            }
            for (std::size_t i = 0; i < pair.size(); ++i) realized_.data()[i] += pair.data()[i];
            pairs_.push_back(std::move(pair));
        }
    }

    const std::vector<GammaKernelSpec>& specs() const noexcept { return specs_; }
    std::size_t scales() const noexcept { return specs_.size() / 2; }
    int radius() const noexcept { return radius_; }
    const GridD& realized() const noexcept { return realized_; }
    /// Center minus surround for one scale, on the shared grid.
    const GridD& scale_kernel(std::size_t s) const { return pairs_.at(s); }
    /// Surround ring radius k/mu of scale s.
    double scale_radius(std::size_t s) const { return specs_.at(2 * s + 1).ring_radius(); }

    /// Same stack with the largest scale removed (unchanged when only one scale).
    KernelStack without_largest_scale() const {
        if (scales() <= 1) return *this;
        std::size_t largest = 0;
        for (std::size_t s = 1; s < scales(); ++s)
            if (scale_radius(s) > scale_radius(largest)) largest = s;
        std::vector<GammaKernelSpec> kept;
        for (std::size_t s = 0; s < scales(); ++s)
            if (s != largest) {
                kept.push_back(specs_[2 * s]);
                kept.push_back(specs_[2 * s + 1]);
            }
        return KernelStack(std::move(kept));
    }

private:
    std::vector<GammaKernelSpec> specs_;
    int radius_ = 0;
    GridD realized_;
    std::vector<GridD> pairs_;
};

inline KernelStack build_multiscale(std::vector<GammaKernelSpec> specs) { return KernelStack(std::move(specs)); }

/// Builds specs from parallel k/mu lists; support 0 selects each kernel's default.
inline std::vector<GammaKernelSpec> make_specs(std::span<const int> ks, std::span<const double> mus,
                                               int support_radius = 0) {
    if (ks.size() != mus.size())
        throw ValidationError("k list and mu list differ in length (" + std::to_string(ks.size()) + " vs " +
                              std::to_string(mus.size()) + ")");
    std::vector<GammaKernelSpec> specs;
    for (std::size_t i = 0; i < ks.size(); ++i) specs.emplace_back(ks[i], mus[i], support_radius);
    return specs;
}

/// Free-viewing parameters: three scales with rings at 13, 25 and 38 px.
inline const std::vector<int> kTorontoK{1, 26, 1, 25, 1, 19};
inline const std::vector<double> kTorontoMu{2, 2, 1, 1, 0.5, 0.5};

/// Feature-map parameters for naturalistic search on a 400-px support grid
/// (half-width 200, side 401).
inline const std::vector<int> kNaturalisticK{1, 60, 1, 38, 1, 19};
inline const std::vector<double> kNaturalisticMu{0.05, 0.5, 0.1, 0.5, 0.5, 0.5};
inline constexpr int kNaturalisticSupport = 200;

inline KernelStack toronto_stack() { return KernelStack(make_specs(kTorontoK, kTorontoMu)); }

}  // namespace gsal
