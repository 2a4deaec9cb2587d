#pragma once

#include "idexp/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace idexp {

/// Ground-truth model description. With prescribed angles the identity and
/// expression subspaces are built in canonical pair form, so their principal
/// angles are known exactly.
struct SyntheticSpec {
  Index n = 0;
  Index m = 0;
  Index k = 0;
  /// min(m, k) values in (0, pi/2]; pair i couples identity column i with
  /// expression column i.
  std::optional<std::vector<double>> prescribed_angles;
  /// Per-component stddevs in mm, positive and non-increasing. Empty means
  /// geometric_spectrum(m or k).
  std::vector<double> id_spectrum;
  std::vector<double> exp_spectrum;
  std::uint64_t seed = 0;
  std::string name = "synthetic";
  /// Stddev of the random mean shape entries, mm.
  double mean_scale = 50.0;
};

/// `count` values decaying geometrically from `first` to `last`.
std::vector<double> geometric_spectrum(Index count, double first = 10.0, double last = 0.1);

/// Throws DimensionError for n < m + k (or n % 3 != 0), RangeError/InvalidValue
/// for any other spec violation.
void validate(const SyntheticSpec& spec);

/// Build a model from `spec`; bit-identical for identical specs.
///
/// Prescribed angles: with F an n x (m+k) Haar-random orthonormal frame,
/// identity column i is F_i and expression column i is
/// cos(t_i) F_i + sin(t_i) F_{m+i} (just F_{m+i} for i >= min(m, k)).
/// Otherwise both bases are independently orthonormalized Gaussian matrices.
ShapeModel generate(const SyntheticSpec& spec);

/// `count` latents with independent standard-normal coefficients in the
/// active block(s); inactive blocks are exactly zero.
std::vector<LatentVector> sample_latents(const ShapeModel& model, Block which, Index count,
                                         std::uint64_t seed);

/// Standard-normal values in the first `n_active` coefficients of the chosen
/// block(s), zero elsewhere. Throws RangeError if n_active exceeds a block.
LatentVector first_pc_latents(const ShapeModel& model, Block which, Index n_active,
                              std::uint64_t seed);

}  // namespace idexp
