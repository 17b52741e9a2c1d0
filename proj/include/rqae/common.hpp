#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace rqae {

// Error categories; the CLI maps them to exit codes (config 2, data 3,
// divergence 4).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& msg, int line)
      : DataError(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class ShapeError : public DataError {
 public:
  using DataError::DataError;
};

class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when a model is asked to run inference before trained weights exist.
class NotReadyError : public std::runtime_error {
 public:
  explicit NotReadyError(const std::string& msg) : std::runtime_error(msg) {}
};

// Diagnostic classes. Order fixed; reports list rows in this order.
enum class ClassLabel : int { HC = 0, MI = 1, BBB = 2, CM = 3, DR = 4 };

inline constexpr int kNumClasses = 5;

inline const char* to_string(ClassLabel c) {
  switch (c) {
    case ClassLabel::HC: return "HC";
    case ClassLabel::MI: return "MI";
    case ClassLabel::BBB: return "BBB";
    case ClassLabel::CM: return "CM";
    case ClassLabel::DR: return "DR";
  }
  return "?";
}

inline ClassLabel label_from_string(const std::string& s) {
  if (s == "HC") return ClassLabel::HC;
  if (s == "MI") return ClassLabel::MI;
  if (s == "BBB") return ClassLabel::BBB;
  if (s == "CM") return ClassLabel::CM;
  if (s == "DR") return ClassLabel::DR;
  throw DataError("unknown class label '" + s + "' (expected HC, MI, BBB, CM or DR)");
}

// Dense row-major matrix of doubles. Used for state matrices, distance
// matrices and latent surfaces.
struct Mat {
  long long rows = 0;
  long long cols = 0;
  std::vector<double> v;

  Mat() = default;
  Mat(long long r, long long c, double fill = 0.0)
      : rows(r), cols(c), v(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {}

  double& operator()(long long i, long long j) {
    return v[static_cast<std::size_t>(i * cols + j)];
  }
  double operator()(long long i, long long j) const {
    return v[static_cast<std::size_t>(i * cols + j)];
  }
  std::size_t size() const { return v.size(); }
};

// Runs fn(i) for i in [0, n) on up to `threads` workers. Writes must be
// disjoint per index; the first exception thrown is rethrown after join.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  unsigned t = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  std::mutex err_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (unsigned w = 0; w < t; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += t) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

inline unsigned default_threads() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

}  // namespace rqae
