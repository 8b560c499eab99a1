#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace stgan {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Error taxonomy; the CLI maps these onto process exit codes.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

// SplitMix64 step; used to derive independent child seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic seed derivation: child k of a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_id) {
  std::uint64_t s = master ^ (0x6a09e667f3bcc909ULL + stream_id * 0x9e3779b97f4a7c15ULL);
  splitmix64(s);
  return splitmix64(s);
}

// Deterministic random stream. Wraps mt19937_64 but maps words to doubles
// explicitly so sequences are identical across standard libraries.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {
    // warm up so near-zero seeds decorrelate
    for (int i = 0; i < 4; ++i) next_u64();
  }

  std::uint64_t next_u64() {
    // xoshiro-free choice: SplitMix64 core, fast and full-period over the state walk
    return splitmix64(state_);
  }

  // uniform on [0, 1)
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // integer in [0, n)
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n == 0) throw ContractError("uniform_index: n must be positive");
    // rejection sampling to kill modulo bias
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
  }

  // standard normal via Box-Muller (pair cached)
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mu, double sigma) { return mu + sigma * normal(); }

  // Fisher-Yates shuffle of an index vector
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Little-endian binary encoding helpers (checkpoint format).
inline void put_u16_le(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}
inline void put_u32_le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_f64_le(std::string& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, sizeof(bits));
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

class ByteReader {
 public:
  ByteReader(const char* data, std::size_t size) : data_(data), size_(size) {}
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint8_t>(data_[pos_]) |
                      (static_cast<std::uint16_t>(static_cast<std::uint8_t>(data_[pos_ + 1])) << 8);
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(data_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i)
      bits |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(data_[pos_ + i])) << (8 * i);
    pos_ += 8;
    double d;
    std::memcpy(&d, &bits, sizeof(d));
    return d;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s(data_ + pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return size_ - pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > size_) throw FormatError("checkpoint data truncated");
  }
  const char* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

// Shortest-round-trip-ish decimal rendering used by every CSV/JSON writer so
// reruns with equal seeds produce byte-identical files.
std::string format_double(double v);

// FNV-1a 64-bit over a byte string; config hashing for manifests.
inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Fixed-partition parallel map: calls fn(i) for i in [0, n). Results must be
// written to per-index slots by the caller; the partition is static so the
// outcome is identical for any worker count.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
std::string read_binary_file(const std::string& path);
void write_binary_file(const std::string& path, const std::string& content);

}  // namespace stgan
