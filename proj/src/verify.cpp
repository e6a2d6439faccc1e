#include "robusthedge/superhedge.hpp"

#include "robusthedge/random.hpp"

#include <algorithm>
#include <stdexcept>

namespace robusthedge {

PathVerification verify_superhedge(const std::vector<Path>& paths, double x, const BsbSurface& surface,
                                   const Claim& claim, double epsilon) {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("verify_superhedge: epsilon must be nonnegative");
  PathVerification r;
  r.paths = paths.size();
  r.epsilon = epsilon;
  constexpr std::size_t kBlock = 256;
  const std::size_t blocks = (paths.size() + kBlock - 1) / kBlock;
  std::vector<double> slack(paths.size());
  parallel_blocks(blocks, [&](std::size_t b) {
    for (std::size_t i = b * kBlock; i < std::min(paths.size(), (b + 1) * kBlock); ++i) {
      const Path& p = paths[i];
      if (p.dimension() != 1) throw std::invalid_argument("verify_superhedge: paths must be one-dimensional");
      double wealth = x;
      std::size_t k = 0;
      for (; k + 1 < p.size() && p.alive_at(k + 1); ++k) {
        const double s = p.value(k)(0);
        wealth += surface.delta_at(p.grid()[k], s) * (p.value(k + 1)(0) - s);
      }
      slack[i] = wealth - claim.of_scalar(p.value(k)(0));
    }
  });
  double sum = 0.0;
  for (double s : slack) {
    r.min_slack = std::min(r.min_slack, s);
    sum += s;
    if (s < -epsilon) ++r.violations;
  }
  r.mean_slack = paths.empty() ? 0.0 : sum / static_cast<double>(paths.size());
  return r;
}

}  // namespace robusthedge
