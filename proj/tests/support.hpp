#ifndef BORNLAB_TESTS_SUPPORT_HPP
#define BORNLAB_TESTS_SUPPORT_HPP

#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <unistd.h>

namespace testing {

/// Small hand-rolled generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return integer(0, 1) == 1; }
  std::uint64_t bits() { return rng_(); }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

template <typename Fn>
void for_all(int cases, std::uint64_t seed, Fn&& fn) {
  Gen gen(seed);
  for (int i = 0; i < cases; ++i) {
    CAPTURE(i);
    fn(gen);
  }
}

/// Composite midpoint rule on a fixed grid; the independent integration oracle.
template <typename Fn>
double midpoint_rule(Fn&& f, double lo, double hi, long n) {
  const double h = (hi - lo) / static_cast<double>(n);
  double sum = 0.0, c = 0.0;
  for (long i = 0; i < n; ++i) {
    const double y = f(lo + (static_cast<double>(i) + 0.5) * h) - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
  return sum * h;
}

/// Composite Simpson rule with n (even) panels.
template <typename Fn>
double simpson_rule(Fn&& f, double lo, double hi, long n) {
  const double h = (hi - lo) / static_cast<double>(n);
  double sum = f(lo) + f(hi);
  for (long i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(lo + h * static_cast<double>(i));
  return sum * h / 3.0;
}

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

/// A scratch directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("bornlab_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace testing

#endif  // BORNLAB_TESTS_SUPPORT_HPP
