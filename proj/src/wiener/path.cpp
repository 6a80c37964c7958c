#include "wiener/path.hpp"

#include <cmath>

#include "core/errors.hpp"
#include "core/philox.hpp"

namespace errcal::wiener {

PathBundle::PathBundle(const TimeGrid& grid, std::size_t n_paths,
                       std::uint64_t seed)
    : grid_(grid), n_paths_(n_paths), seed_(seed) {
  if (n_paths_ == 0) throw ConfigError("PathBundle: need at least one path");
}

void PathBundle::fill(std::size_t path, PathIncrements& out) const {
  if (path >= n_paths_) throw ConfigError("PathBundle: path index out of range");
  const std::size_t n = grid_.steps();
  out.db.resize(n);
  out.db_hat.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const rng::GaussianBlock block(seed_, rng::Stream::kPathIncrement, path,
                                   static_cast<std::uint32_t>(k));
    const double scale = std::sqrt(grid_.dt(k));
    const double raw = scale * block.z(0);
    const double raw_hat = scale * block.z(1);
    out.db[k] = coeff_orig_ * raw + coeff_comp_ * raw_hat;
    out.db_hat[k] = raw_hat;
  }
}

std::vector<double> PathBundle::brownian(std::size_t path) const {
  PathIncrements inc;
  fill(path, inc);
  return cumulate(inc.db);
}

PathBundle sample_paths(const TimeGrid& grid, std::size_t n_paths,
                        std::uint64_t seed) {
  return PathBundle(grid, n_paths, seed);
}

PathBundle ou_perturb(const PathBundle& bundle, double theta,
                      int companion_sign) {
  if (!(theta >= 0.0) || !std::isfinite(theta)) {
    throw ConfigError("ou_perturb: theta must be nonnegative and finite");
  }
  if (companion_sign != 1 && companion_sign != -1) {
    throw ConfigError("ou_perturb: companion_sign must be +1 or -1");
  }
  const double keep = std::sqrt(std::exp(-theta));
  const double mix = companion_sign * std::sqrt(1.0 - std::exp(-theta));
  PathBundle out = bundle;
  out.coeff_orig_ = keep * bundle.coeff_orig_;
  out.coeff_comp_ = keep * bundle.coeff_comp_ + mix;
  return out;
}

std::vector<double> cumulate(const std::vector<double>& inc) {
  std::vector<double> values(inc.size() + 1);
  values[0] = 0.0;
  for (std::size_t k = 0; k < inc.size(); ++k) {
    values[k + 1] = values[k] + inc[k];
  }
  return values;
}

}  // namespace errcal::wiener
