#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <doctest.h>

#include "dpt/errors.hpp"
#include "dpt/exact.hpp"
#include "dpt/exact_io.hpp"

using namespace dpt;
using namespace dpt::exact;

namespace {

void check_physical(const Eigen::MatrixXcd& rho) {
  CHECK((rho - rho.adjoint()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(std::abs(rho.trace() - 1.0) <= 1e-10);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (rho + rho.adjoint()));
  CHECK(es.eigenvalues().minCoeff() >= -1e-8);
}

Eigen::MatrixXcd vacuum(int dim) {
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(dim, dim);
  v(0, 0) = 1.0;
  return v;
}

}  // namespace

TEST_CASE("vectorization is column stacking") {
  Eigen::MatrixXcd rho(2, 2);
  rho << 1.0, 2.0, 3.0, 4.0;
  const auto v = vectorize(rho);
  CHECK(v[1] == std::complex<double>(3.0));
  CHECK(v[2] == std::complex<double>(2.0));
  CHECK((unvectorize(v, 2) - rho).norm() == 0.0);
}

TEST_CASE("vacuum is a kernel vector at lambda = 0") {
  const auto l = build_liouvillian({1.0, 0.0, 0.3, 0.2}, FockCutoff(12));
  CHECK(exact::apply(l, vacuum(l.dim)).cwiseAbs().maxCoeff() <= 1e-14);
  const auto ss = steady_states(l);
  REQUIRE(ss.kernel_dim == 1);
  const auto obs = observables(ss.states[0]);
  CHECK(std::abs(obs.n) <= 1e-10);
  CHECK(std::abs(obs.m) <= 1e-10);
  CHECK(obs.purity == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("property: trace preservation and spectral stability") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int draw = 0; draw < 10; ++draw) {
    const LindbladRates r{0.5 + u(rng), u(rng), draw % 2 ? 0.0 : u(rng), 0.05 + u(rng)};
    const auto l = build_liouvillian(r, FockCutoff(10));
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(l.dim, l.dim);
    CHECK(apply_adjoint(l, id).cwiseAbs().maxCoeff() <= 1e-12 * r.rate_scale() * l.dim);
    const auto spec = spectrum_and_adr(l);
    CHECK(spec.max_real <= 1e-10 * r.rate_scale());
    CHECK(spec.adr >= 0.0);
  }
}

TEST_CASE("damped oscillator decay rate") {
  const LindbladRates r{1.0, 0.0, 0.3, 0.0};
  const auto spec = spectrum_and_adr(build_liouvillian(r, FockCutoff(15)));
  CHECK(spec.adr == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(spec.kernel_dim == 1);
}

TEST_CASE("weak class: unique parity-symmetric steady state") {
  const auto l = build_liouvillian({1.0, 0.6, 0.1, 0.1}, FockCutoff(60));
  const auto ss = steady_states(l);
  CHECK(ss.kernel_dim == 1);
  REQUIRE(ss.states.size() == 1);
  check_physical(ss.states[0]);
  const auto obs = observables(ss.states[0]);
  CHECK(std::abs(obs.a_mean) <= 1e-8);
  CHECK(obs.delta_n == doctest::Approx(obs.n));
  CHECK(obs.purity > 0.0);
  CHECK(obs.purity <= 1.0 + 1e-12);
}

TEST_CASE("strong class: degenerate kernel with sector-supported states") {
  const auto l = build_liouvillian({1.0, 0.3, 0.0, 0.1}, FockCutoff(30));
  const auto ss = steady_states(l);
  CHECK(ss.kernel_dim >= 2);
  REQUIRE(ss.states.size() == 2);
  for (const auto& rho : ss.states) check_physical(rho);
  double odd_weight = 0.0;
  for (int k = 1; k < l.dim; k += 2) odd_weight += ss.states[0](k, k).real();
  CHECK(odd_weight <= 1e-12);
  CHECK(spectrum_and_adr(l).kernel_dim >= 2);
}

TEST_CASE("parity blocks: exact iff kappa1 = 0, weak covariance always") {
  const auto strong = parity_block_check(build_liouvillian({1.0, 0.3, 0.0, 0.1}, FockCutoff(12)));
  CHECK(strong.off_block_norm <= 1e-12);
  CHECK(strong.block_diagonal);
  const auto weak = parity_block_check(build_liouvillian({1.0, 0.3, 0.1, 0.1}, FockCutoff(12)));
  CHECK(weak.off_block_norm > 0.0);
  CHECK_FALSE(weak.block_diagonal);
  CHECK(weak.weak_residual <= 1e-12);
  CHECK(weak.samples == 20);
  const auto linear = parity_block_check(build_liouvillian({1.0, 0.3, 0.1, 0.0}, FockCutoff(12)));
  CHECK(linear.weak_residual <= 1e-12);
  CHECK(linear.weak_covariant);
}

TEST_CASE("dimension budget") {
  BuildOptions tight;
  tight.max_superdim = 100;
  CHECK_THROWS_AS(build_liouvillian({1.0, 0.3, 0.1, 0.1}, FockCutoff(10), tight), DimensionOverflow);
}

TEST_CASE("golden oracle point after cutoff convergence") {
  const LindbladRates r{1.0, 0.3, 0.2, 0.1};
  ConvergenceOptions opt;
  opt.initial_n_max = 40;
  const auto cs = converged_steady_state(r, opt);
  CHECK(cs.n_max == 40);
  CHECK_FALSE(cs.cutoff_flagged);
  CHECK(cs.tail_population < 1e-8);
  CHECK(cs.obs.n == doctest::Approx(0.2183568038).epsilon(1e-9));
  CHECK(cs.obs.m.real() == doctest::Approx(-0.3639280063).epsilon(1e-9));
  CHECK(cs.obs.m.imag() == doctest::Approx(-0.1460761285).epsilon(1e-9));
  CHECK(std::abs(cs.obs.a_mean) <= 1e-8);

  const auto study = convergence_study(r, {30, 40, 60});
  REQUIRE(study.size() == 3);
  for (const auto& pt : study) CHECK(pt.obs.n == doctest::Approx(cs.obs.n).epsilon(1e-10));
}

TEST_CASE("kernel steady state agrees with explicit time propagation") {
  const LindbladRates r{1.0, 0.3, 0.2, 0.1};
  const auto l = build_liouvillian(r, FockCutoff(20));
  const auto ss = steady_states(l);
  const auto prop = propagate(l, vacuum(l.dim), 2000.0, 1e-11, 1e-11);
  CHECK(prop.stationarity < 1e-10);
  CHECK(observables(prop.rho).n == doctest::Approx(observables(ss.states[0]).n).epsilon(1e-8));
}

TEST_CASE("golden dump round trip and hash check") {
  const LindbladRates r{1.0, 0.3, 0.2, 0.1};
  const auto l = build_liouvillian(r, FockCutoff(20));
  Dump d;
  d.rates = r;
  d.n_max = 20;
  d.hash = parameter_hash(r, 20);
  d.states = steady_states(l).states;
  d.eigenvalues = spectrum_and_adr(l).eigenvalues;
  const auto path = std::filesystem::temp_directory_path() / "dpt_test_dump.bin";
  write_dump(path, d);
  const auto back = read_dump(path);
  CHECK(back.hash == d.hash);
  CHECK(back.n_max == 20);
  REQUIRE(back.states.size() == d.states.size());
  CHECK((back.states[0] - d.states[0]).norm() == 0.0);
  CHECK(back.eigenvalues == d.eigenvalues);
  CHECK(parameter_hash(r, 21) != d.hash);

  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(20);
    const char junk = 0x7f;
    f.write(&junk, 1);
  }
  CHECK_THROWS_AS(read_dump(path), Error);
  std::filesystem::remove(path);
}
