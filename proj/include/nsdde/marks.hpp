#pragma once

// Finite-activity mark measures on the real line: total mass (jump intensity)
// times a normalized mark law. Three built-in laws cover the CLI surface:
// a point mass, a centered Gaussian, and a uniform interval.
//
// Quadrature rules are Golub-Welsch (symmetric tridiagonal eigenproblem via
// Eigen); weights always sum to the total mass.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "core.hpp"
#include "rng.hpp"

namespace nsdde {

struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;  // sums to the measure's total mass
};

class MarkMeasure {
 public:
  enum class Kind { point, gauss, uniform };

  static MarkMeasure point(double intensity, double c) {
    MarkMeasure m(Kind::point, intensity);
    m.p1_ = c;
    return m;
  }
  static MarkMeasure gauss(double intensity, double s) {
    MarkMeasure m(Kind::gauss, intensity);
    require(s > 0.0 && std::isfinite(s), errc::invalid_parameter, "gauss mark scale must be positive");
    m.p1_ = s;
    return m;
  }
  static MarkMeasure uniform(double intensity, double a, double b) {
    MarkMeasure m(Kind::uniform, intensity);
    require(a < b && std::isfinite(a) && std::isfinite(b), errc::invalid_parameter,
            "uniform mark bounds must satisfy a < b");
    m.p1_ = a;
    m.p2_ = b;
    return m;
  }

  Kind kind() const { return kind_; }
  double intensity() const { return intensity_; }

  // Integral of u against the full measure (mass times mean of the law).
  double mean_total() const {
    switch (kind_) {
      case Kind::point: return intensity_ * p1_;
      case Kind::gauss: return 0.0;
      case Kind::uniform: return intensity_ * 0.5 * (p1_ + p2_);
    }
    return 0.0;
  }

  // Integral of |u|^p against the full measure; p >= 1.
  double abs_moment(double p) const {
    require(p >= 1.0, errc::invalid_parameter, "mark moment order must be >= 1");
    switch (kind_) {
      case Kind::point:
        return intensity_ * std::pow(std::fabs(p1_), p);
      case Kind::gauss: {
        // E|Z|^p = 2^{p/2} Gamma((p+1)/2) / sqrt(pi) for standard normal Z.
        const double ez = std::pow(2.0, 0.5 * p) * std::tgamma(0.5 * (p + 1.0)) /
                          std::sqrt(M_PI);
        return intensity_ * std::pow(p1_, p) * ez;
      }
      case Kind::uniform: {
        const double q = p + 1.0;
        const double primitive =
            (std::pow(std::fabs(p2_), q) * (p2_ >= 0 ? 1.0 : -1.0) -
             std::pow(std::fabs(p1_), q) * (p1_ >= 0 ? 1.0 : -1.0)) /
            q;
        return intensity_ * primitive / (p2_ - p1_);
      }
    }
    return 0.0;
  }

  // One mark from the normalized law.
  double sample(RngStream& g) const {
    switch (kind_) {
      case Kind::point: return p1_;
      case Kind::gauss: return p1_ * g.normal();
      case Kind::uniform: return p1_ + (p2_ - p1_) * g.uniform01();
    }
    return 0.0;
  }

  // Fixed nodes for compensator integration. Exact for polynomial mark
  // dependence up to degree 2n-1 under the Gaussian and uniform laws.
  Quadrature quadrature(int n = 32) const {
    require(n >= 1, errc::invalid_parameter, "quadrature needs at least one node");
    Quadrature q;
    switch (kind_) {
      case Kind::point:
        q.nodes = {p1_};
        q.weights = {intensity_};
        return q;
      case Kind::gauss: {
        // Hermite recurrence, physicists' weight; mu0 = sqrt(pi).
        auto gw = golub_welsch(n, [](int k) { return std::sqrt(0.5 * k); });
        const double scale = intensity_;  // weights already normalized below
        for (int i = 0; i < n; ++i) {
          q.nodes.push_back(std::sqrt(2.0) * p1_ * gw.first[i]);
          q.weights.push_back(scale * gw.second[i]);
        }
        return q;
      }
      case Kind::uniform: {
        // Legendre recurrence on [-1,1]; mu0 = 2, normalized to mass 1.
        auto gw = golub_welsch(n, [](int k) {
          return static_cast<double>(k) / std::sqrt(4.0 * k * k - 1.0);
        });
        for (int i = 0; i < n; ++i) {
          q.nodes.push_back(0.5 * (p1_ + p2_) + 0.5 * (p2_ - p1_) * gw.first[i]);
          q.weights.push_back(intensity_ * gw.second[i]);
        }
        return q;
      }
    }
    return q;
  }

  std::string describe() const {
    switch (kind_) {
      case Kind::point: return "point:" + std::to_string(p1_);
      case Kind::gauss: return "gauss:" + std::to_string(p1_);
      case Kind::uniform: return "uniform:" + std::to_string(p1_) + "," + std::to_string(p2_);
    }
    return "?";
  }

 private:
  MarkMeasure(Kind k, double intensity) : kind_(k), intensity_(intensity) {
    require(intensity >= 0.0 && std::isfinite(intensity), errc::invalid_intensity,
            "jump intensity must be finite and nonnegative");
  }

  // Nodes and weights for the law with off-diagonal recurrence beta(k);
  // weights are returned normalized to sum 1.
  template <class Beta>
  static std::pair<std::vector<double>, std::vector<double>> golub_welsch(int n, Beta beta) {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
      const double b = beta(k);
      jac(k - 1, k) = b;
      jac(k, k - 1) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
    std::vector<double> nodes(n), weights(n);
    for (int i = 0; i < n; ++i) {
      nodes[i] = es.eigenvalues()(i);
      const double v0 = es.eigenvectors()(0, i);
      weights[i] = v0 * v0;
    }
    return {nodes, weights};
  }

  Kind kind_;
  double intensity_;
  double p1_ = 0.0;
  double p2_ = 0.0;
};

}  // namespace nsdde
