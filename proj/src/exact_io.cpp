#include "dpt/exact_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "dpt/errors.hpp"

namespace dpt::exact {

namespace {

constexpr std::array<char, 8> kMagic{'D', 'P', 'T', 'E', 'X', 'A', 'C', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  os.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  std::array<unsigned char, sizeof(T)> bytes;
  if (!is.read(reinterpret_cast<char*>(bytes.data()), sizeof(T))) throw Error("exact dump: truncated file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

void fnv1a(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t k = 0; k < n; ++k) {
    h ^= p[k];
    h *= 0x100000001b3ULL;
  }
}

}  // namespace

std::uint64_t parameter_hash(const LindbladRates& r, int n_max) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : {r.omega, r.lambda, r.kappa1, r.kappa2}) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    std::array<unsigned char, 8> le;
    for (int k = 0; k < 8; ++k) le[k] = static_cast<unsigned char>(bits >> (8 * k));
    fnv1a(h, le.data(), le.size());
  }
  const auto n = static_cast<std::uint32_t>(n_max);
  std::array<unsigned char, 4> le;
  for (int k = 0; k < 4; ++k) le[k] = static_cast<unsigned char>(n >> (8 * k));
  fnv1a(h, le.data(), le.size());
  return h;
}

void write_dump(const std::filesystem::path& path, const Dump& d) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  const int dim = d.n_max + 1;
  os.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(os, kVersion);
  put<std::uint64_t>(os, parameter_hash(d.rates, d.n_max));
  for (double v : {d.rates.omega, d.rates.lambda, d.rates.kappa1, d.rates.kappa2}) put<double>(os, v);
  put<std::int32_t>(os, d.n_max);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(d.states.size()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(d.eigenvalues.size()));
  for (const auto& rho : d.states) {
    if (rho.rows() != dim || rho.cols() != dim) throw Error("exact dump: state dimension does not match n_max");
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) {
        put<double>(os, rho(i, j).real());
        put<double>(os, rho(i, j).imag());
      }
  }
  for (const auto& e : d.eigenvalues) {
    put<double>(os, e.real());
    put<double>(os, e.imag());
  }
  if (!os) throw Error("write failed for " + path.string());
}

Dump read_dump(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  std::array<char, 8> magic;
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) throw Error("exact dump: bad magic");
  if (get<std::uint32_t>(is) != kVersion) throw Error("exact dump: unsupported version");
  Dump d;
  d.hash = get<std::uint64_t>(is);
  d.rates.omega = get<double>(is);
  d.rates.lambda = get<double>(is);
  d.rates.kappa1 = get<double>(is);
  d.rates.kappa2 = get<double>(is);
  d.n_max = get<std::int32_t>(is);
  if (d.hash != parameter_hash(d.rates, d.n_max)) throw Error("exact dump: parameter hash mismatch");
  const auto n_states = get<std::uint32_t>(is);
  const auto n_eigs = get<std::uint32_t>(is);
  const int dim = d.n_max + 1;
  for (std::uint32_t s = 0; s < n_states; ++s) {
    Eigen::MatrixXcd rho(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) {
        const double re = get<double>(is);
        const double im = get<double>(is);
        rho(i, j) = {re, im};
      }
    d.states.push_back(std::move(rho));
  }
  for (std::uint32_t k = 0; k < n_eigs; ++k) {
    const double re = get<double>(is);
    const double im = get<double>(is);
    d.eigenvalues.emplace_back(re, im);
  }
  return d;
}

}  // namespace dpt::exact
