#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace csem {

// Exit-code mapping: ValidationError -> 1, IoError -> 2 (see tools/csem.cpp).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NetworkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline uint64_t fnv1a64(std::string_view s, uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Per-stage sub-seed derivation: one master seed governs every stochastic
// stage; the stage name keeps the streams independent.
inline uint64_t sub_seed(uint64_t master, std::string_view stage) {
  uint64_t s = master ^ fnv1a64(stage);
  return splitmix64(s);
}

struct IdHash128 {
  uint64_t lo = 0;
  uint64_t hi = 0;
  bool operator==(const IdHash128&) const = default;
};

// 16-byte id hash used by embeddings.bin records: two FNV-1a passes with
// distinct offset bases.
inline IdHash128 id_hash128(std::string_view id) {
  return IdHash128{fnv1a64(id), fnv1a64(id, 0x6a09e667f3bcc909ull)};
}

// Deterministic generator independent of the standard library's
// distribution implementations, so identical seeds give identical corpora
// on any platform.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() { return splitmix64(state_); }

  // [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // inclusive bounds
  int64_t uniform_int(int64_t lo, int64_t hi) {
    if (hi <= lo) return lo;
    uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int64_t>(next_u64() % span);
  }

  double normal(double mean = 0.0, double stddev = 1.0) {
    if (have_spare_) {
      have_spare_ = false;
      return mean + stddev * spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 1e-300);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return mean + stddev * r * std::cos(a);
  }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<size_t>(uniform_int(0, static_cast<int64_t>(v.size()) - 1))];
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_int(0, static_cast<int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Renders a value with four significant digits, keeping trailing zeros
// (120 -> "120.0", 0.4444 -> "0.4444"). Magnitudes >= 1e4 keep all integer
// digits rather than switching to scientific notation.
inline std::string format_sig4(double v) {
  if (!std::isfinite(v)) return "nan";
  if (v == 0.0) return "0.000";
  double a = std::fabs(v);
  int exp10 = static_cast<int>(std::floor(std::log10(a)));
  int decimals = 3 - exp10;
  if (decimals < 0) decimals = 0;
  if (decimals > 12) decimals = 12;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

// metric fraction -> percent with two decimals ("0.4444..." -> "44.44")
inline std::string format_pct(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
  return buf;
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

// Splits on whitespace after mapping non-alphanumerics to spaces.
std::vector<std::string> tokenize_words(std::string_view text);

inline size_t word_count(std::string_view text) {
  size_t n = 0;
  bool in_word = false;
  for (char c : text) {
    bool ws = (c == ' ' || c == '\t' || c == '\n' || c == '\r');
    if (!ws && !in_word) ++n;
    in_word = !ws;
  }
  return n;
}

// Numeric reading of an x label: plain numbers parse directly, "YYYY-MM"
// maps to year + (month-1)/12. Anything else has no numeric position.
std::optional<double> parse_x_value(const std::string& s);

}  // namespace csem
