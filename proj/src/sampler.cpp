#include "bornlab/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "bornlab/born_density.hpp"
#include "bornlab/csv.hpp"
#include "bornlab/errors.hpp"

namespace bornlab {

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

InverseCdf::InverseCdf(DensityModel d, Interval iv, QuadratureConfig cfg, int cells)
    : density_(std::move(d)), iv_(iv), cfg_(cfg) {
  iv_.validate();
  cfg_.validate();
  if (cells < 1) throw std::invalid_argument("InverseCdf needs at least one cell");

  const auto n = static_cast<std::size_t>(cells);
  edges_.resize(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    edges_[k] = iv_.lo + iv_.width() * static_cast<double>(k) / static_cast<double>(n);
  }
  edges_.back() = iv_.hi;

  const auto cuts = density_.breakpoints_in(iv_);
  cell_cuts_.resize(n);
  for (double c : cuts) {
    const auto it = std::upper_bound(edges_.begin(), edges_.end(), c);
    const auto cell = static_cast<std::size_t>(std::distance(edges_.begin(), it)) - 1;
    if (cell < n && c > edges_[cell]) cell_cuts_[cell].push_back(c);
  }

  cumulative_.assign(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    cumulative_[k + 1] = cumulative_[k] + partial(k, edges_[k + 1]);
  }
  mass_ = cumulative_.back();
  if (!(mass_ > std::numeric_limits<double>::min())) {
    throw ZeroMass("cannot invert a CDF with no mass");
  }
  for (double& c : cumulative_) c /= mass_;
  cumulative_.back() = 1.0;
}

double InverseCdf::partial(std::size_t cell, double x) const {
  const double lo = edges_[cell];
  if (!(x > lo)) return 0.0;
  const auto& cuts = cell_cuts_[cell];
  const auto end = std::lower_bound(cuts.begin(), cuts.end(), x);
  return integrate([this](double t) { return density_(t); }, Interval{lo, x}, cfg_,
                   std::span<const double>(cuts.data(), static_cast<std::size_t>(end - cuts.begin())));
}

double InverseCdf::cdf(double x) const {
  if (!iv_.contains(x)) throw OutOfSupport("x = " + std::to_string(x) + " outside the interval");
  if (x == iv_.hi) return 1.0;
  const auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
  const auto cell = static_cast<std::size_t>(std::distance(edges_.begin(), it)) - 1;
  return std::clamp(cumulative_[cell] + partial(cell, x) / mass_, 0.0, 1.0);
}

double InverseCdf::operator()(double u) const {
  if (!(u >= 0.0 && u < 1.0)) {
    throw RootBracketFailure("u = " + std::to_string(u) + " is outside [0, 1)");
  }
  if (u == 0.0) return iv_.lo;

  // First cell whose upper cumulative value exceeds u; it has positive mass.
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.begin() || it == cumulative_.end()) {
    throw RootBracketFailure("no CDF cell brackets u = " + std::to_string(u));
  }
  const auto cell = static_cast<std::size_t>(std::distance(cumulative_.begin(), it)) - 1;

  double lo = edges_[cell];
  double hi = edges_[cell + 1];
  const double target = (u - cumulative_[cell]) * mass_;
  const double cell_mass = (cumulative_[cell + 1] - cumulative_[cell]) * mass_;
  const double tolerance = 1e-12 * mass_;

  double x = lo + (hi - lo) * std::clamp(target / cell_mass, 0.0, 1.0);
  for (int iter = 0; iter < 100; ++iter) {
    const double g = partial(cell, x) - target;
    if (std::abs(g) <= tolerance) return x;
    if (g > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    const double slope = density_(x);
    double next = slope > 0.0 ? x - g / slope : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x || hi - lo <= 4 * std::numeric_limits<double>::epsilon() * std::abs(x)) break;
    x = next;
  }
  // Plateau or exhausted iterations: settle on the bracket midpoint.
  return 0.5 * (lo + hi);
}

double inverse_cdf_sample(const DensityModel& d, const Interval& iv, double u,
                          const QuadratureConfig& cfg) {
  return InverseCdf(d, iv, cfg)(u);
}

std::vector<EventRecord> sample_events(const InverseCdf& inverse, std::int64_t N, RngSeed seed) {
  if (N < 0) throw std::invalid_argument("event count must be non-negative");
  std::vector<EventRecord> events;
  events.reserve(static_cast<std::size_t>(N));
  UniformStream stream(seed);
  for (std::int64_t i = 0; i < N; ++i) events.push_back({inverse(stream.next()), i});
  return events;
}

std::vector<EventRecord> sample_events(const DensityModel& d, const Interval& iv, std::int64_t N,
                                       RngSeed seed, const QuadratureConfig& cfg) {
  if (N < 0) throw std::invalid_argument("event count must be non-negative");
  if (N == 0) return {};
  return sample_events(InverseCdf(d, iv, cfg), N, seed);
}

EmpiricalHistogram bin_events(std::span<const EventRecord> events, const BinningScheme& scheme) {
  scheme.validate();
  const int n = scheme.bin_count;
  const Interval& iv = scheme.interval;
  std::vector<std::int64_t> physical(static_cast<std::size_t>(n), 0);
  std::vector<std::size_t> outside;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const double x = events[i].position;
    if (!iv.contains(x)) {
      outside.push_back(i);
      continue;
    }
    int k = std::clamp(static_cast<int>((x - iv.lo) / iv.width() * n), 0, n - 1);
    while (k < n - 1 && x >= scheme.edge(k + 1)) ++k;
    while (k > 0 && x < scheme.edge(k)) --k;
    ++physical[static_cast<std::size_t>(k)];
  }
  if (!outside.empty()) {
    std::ostringstream msg;
    msg << outside.size() << " event(s) outside [" << iv.lo << ", " << iv.hi << "], indices:";
    for (std::size_t i = 0; i < std::min<std::size_t>(outside.size(), 20); ++i) {
      msg << ' ' << outside[i];
    }
    throw OutOfInterval(msg.str(), std::move(outside));
  }
  if (scheme.origin == BinOrigin::from_b) std::reverse(physical.begin(), physical.end());
  return {scheme, std::move(physical), static_cast<std::int64_t>(events.size())};
}

std::vector<OutcomeFrequency> discrete_frequencies(std::span<const std::complex<double>> amplitudes,
                                                   std::int64_t N, RngSeed seed) {
  if (N < 1) throw std::invalid_argument("discrete_frequencies needs N >= 1");
  if (amplitudes.empty()) throw DegenerateState("state has no components");
  std::vector<double> cumulative(amplitudes.size());
  double total = 0.0;
  for (std::size_t i = 0; i < amplitudes.size(); ++i) {
    total += std::norm(amplitudes[i]);
    cumulative[i] = total;
  }
  if (!(total > 0.0) || !std::isfinite(total)) throw DegenerateState("all amplitudes are zero");

  // Rounding can push u * total onto the last cumulative value.
  std::size_t last = amplitudes.size() - 1;
  while (std::norm(amplitudes[last]) == 0.0) --last;

  std::vector<OutcomeFrequency> out(amplitudes.size());
  UniformStream stream(seed);
  for (std::int64_t i = 0; i < N; ++i) {
    const double u = stream.next() * total;
    // upper_bound skips zero-weight outcomes, which repeat the previous value.
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const auto k = it == cumulative.end() ? last : static_cast<std::size_t>(it - cumulative.begin());
    ++out[k].count;
  }
  for (auto& o : out) o.frequency = static_cast<double>(o.count) / static_cast<double>(N);
  return out;
}

std::vector<OutcomeFrequency> discrete_frequencies(std::span<const double> amplitudes,
                                                   std::int64_t N, RngSeed seed) {
  std::vector<std::complex<double>> complex_amplitudes(amplitudes.begin(), amplitudes.end());
  return discrete_frequencies(complex_amplitudes, N, seed);
}

void write_events_csv(const std::filesystem::path& path, std::span<const EventRecord> events) {
  std::string out = "index,t_mm\n";
  for (const auto& e : events) {
    out += std::to_string(e.index);
    out += ',';
    out += csv::format_double(e.position);
    out += '\n';
  }
  csv::write_atomically(path, out);
}

std::vector<EventRecord> read_events_csv(const std::filesystem::path& path) {
  std::vector<EventRecord> events;
  for (const auto& row : csv::read(path, "index,t_mm")) {
    events.push_back({csv::parse_double(row.fields[1], row.line),
                      csv::parse_integer(row.fields[0], row.line)});
  }
  return events;
}

}  // namespace bornlab
