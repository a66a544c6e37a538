#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "dpt/exact.hpp"

namespace dpt::exact {

/// Golden-data dump. Layout, all little-endian:
///   char[8]  magic "DPTEXACT"
///   u32      format version (1)
///   u64      parameter hash (FNV-1a 64 over the IEEE-754 bytes of omega, lambda, kappa1, kappa2, then n_max as i32)
///   f64 x4   omega, lambda, kappa1, kappa2
///   i32      n_max
///   u32      number of states S, u32 number of eigenvalues E
///   S blocks of dim*dim complex entries in row-major order, each as (re f64, im f64)
///   E complex eigenvalues as (re f64, im f64)
struct Dump {
  LindbladRates rates;
  int n_max = 0;
  std::uint64_t hash = 0;
  std::vector<Eigen::MatrixXcd> states;
  std::vector<std::complex<double>> eigenvalues;
};

std::uint64_t parameter_hash(const LindbladRates& r, int n_max);

void write_dump(const std::filesystem::path& path, const Dump& d);
/// Throws Error on malformed files or hash mismatch.
Dump read_dump(const std::filesystem::path& path);

}  // namespace dpt::exact
