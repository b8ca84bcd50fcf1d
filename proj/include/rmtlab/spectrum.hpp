#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rmtlab/errors.hpp"

namespace rmtlab {

// Ascending, finite eigenvalues with provenance.
class Spectrum {
 public:
  Spectrum() = default;

  Spectrum(std::vector<double> values, double beta, std::uint64_t seed, std::string ensemble_tag)
      : values_(std::move(values)), beta_(beta), seed_(seed), tag_(std::move(ensemble_tag)) {
    if (!(beta_ > 0.0)) throw DomainError("Spectrum: beta must be positive");
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i])) throw DomainError("Spectrum: non-finite eigenvalue");
      if (i > 0 && values_[i - 1] > values_[i]) throw DomainError("Spectrum: values not ascending");
    }
  }

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double beta() const noexcept { return beta_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::string& ensemble_tag() const noexcept { return tag_; }

 private:
  std::vector<double> values_;
  double beta_ = 1.0;
  std::uint64_t seed_ = 0;
  std::string tag_;
};

}  // namespace rmtlab
