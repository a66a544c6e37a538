#include <cmath>
#include <random>

#include <doctest.h>

#include "dpt/cumulant.hpp"
#include "dpt/gaussian.hpp"

using namespace dpt;
using namespace dpt::cumulant;

namespace {

MomentState random_state(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MomentState s;
  s.a_mean = {u(rng), u(rng)};
  s.n = std::norm(s.a_mean) + 0.5 + 0.5 * u(rng);
  s.m = s.a_mean * s.a_mean + std::complex<double>(0.3 * u(rng), 0.3 * u(rng));
  return s;
}

ModelParams random_params(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {0.3 + u(rng), u(rng), u(rng) < 0.3 ? 0.0 : u(rng), 0.01 + u(rng)};
}

}  // namespace

TEST_CASE("vacuum at lambda = 0 is a fixed point") {
  for (auto c : {Closure::Expanded, Closure::Printed}) {
    const auto d = cumulant_rhs(MomentState{}, {1.0, 0.0, 0.1, 0.1}, c);
    CHECK(std::abs(d.a_mean) == 0.0);
    CHECK(d.n == 0.0);
    CHECK(std::abs(d.m) == 0.0);
  }
}

TEST_CASE("the a_mean = 0 sector is closed") {
  std::mt19937 rng(3);
  for (int k = 0; k < 20; ++k) {
    auto s = random_state(rng);
    s.a_mean = 0.0;
    const auto d = cumulant_rhs(s, random_params(rng));
    CHECK(std::abs(d.a_mean) == 0.0);
  }
  const ModelParams p{1.0, 0.3, 0.1, 0.1};
  MomentState s;
  s.n = 0.2;
  s.m = {0.1, -0.05};
  const auto traj = time_evolve(s, p, 50.0);
  for (const auto& pt : traj.points) CHECK(std::abs(pt.state.a_mean) == 0.0);
}

TEST_CASE("fluctuation coordinates round trip") {
  std::mt19937 rng(5);
  for (int k = 0; k < 10; ++k) {
    const auto s = random_state(rng);
    const auto back = from_fluctuation(to_fluctuation(s));
    CHECK(std::abs(back.a_mean - s.a_mean) < 1e-14);
    CHECK(back.n == doctest::Approx(s.n).epsilon(1e-14));
    CHECK(std::abs(back.m - s.m) < 1e-14);
  }
}

TEST_CASE("property: Jacobian matches central finite differences") {
  std::mt19937 rng(99);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int draw = 0; draw < 50; ++draw) {
    const auto p = random_params(rng);
    const auto c = draw % 2 ? Closure::Printed : Closure::Expanded;
    const Vector5 y = to_fluctuation(random_state(rng));
    Vector5 dir;
    for (int k = 0; k < 5; ++k) dir[k] = g(rng);
    dir.normalize();
    const double h = 1e-5;
    const Vector5 fd = (fluctuation_rhs(y + h * dir, p, c) - fluctuation_rhs(y - h * dir, p, c)) / (2 * h);
    const Vector5 jd = fluctuation_jacobian(y, p, c) * dir;
    CHECK((fd - jd).norm() <= 1e-6 * std::max(1.0, jd.norm()));
  }
}

TEST_CASE("weak class below threshold: unique stable symmetric branch") {
  const auto set = steady_state_branches({1.0, 0.4, 0.1, 1e-3});
  REQUIRE(set.branches.size() == 1);
  const auto& b = set.branches[0];
  CHECK(b.tag == BranchTag::Symmetric);
  CHECK(b.stable);
  CHECK(std::abs(b.state.a_mean) == 0.0);
  CHECK(b.residual <= 1e-11);
}

TEST_CASE("broken branches are parity images") {
  for (double kappa1 : {0.1, 0.0}) {
    const auto set = steady_state_branches({1.0, 0.7, kappa1, 0.05});
    const Branch* plus = nullptr;
    const Branch* minus = nullptr;
    for (const auto& b : set.branches) {
      CHECK(b.residual <= 1e-11);
      if (b.tag == BranchTag::BrokenPlus) plus = &b;
      if (b.tag == BranchTag::BrokenMinus) minus = &b;
    }
    REQUIRE(plus != nullptr);
    REQUIRE(minus != nullptr);
    CHECK(std::abs(plus->state.a_mean + minus->state.a_mean) <= 1e-12 * std::abs(plus->state.a_mean));
    CHECK(plus->state.n == doctest::Approx(minus->state.n).epsilon(1e-12));
    CHECK(std::abs(plus->state.m - minus->state.m) <= 1e-12 * std::abs(plus->state.m));
    CHECK(plus->metastable);
  }
}

TEST_CASE("long-time limit equals the Newton root") {
  const ModelParams p{1.0, 0.4, 0.1, 1e-6};
  const auto set = steady_state_branches(p);
  REQUIRE_FALSE(set.branches.empty());
  const auto& root = set.branches[0].state;
  const auto traj = time_evolve(MomentState{}, p, 500.0, {}, Closure::Expanded, 1000);
  const auto& s = traj.final_state;
  CHECK(s.n == doctest::Approx(root.n).epsilon(1e-8));
  CHECK(std::abs(s.m - root.m) <= 1e-8 * std::abs(root.m));
}

TEST_CASE("perturbations decay on stable branches and grow on unstable ones") {
  int sampled = 0;
  std::mt19937 rng(17);
  std::normal_distribution<double> g(0.0, 1.0);
  for (double kappa1 : {0.1, 0.3})
    for (double kappa2 : {0.05, 0.2})
      for (double lambda : {0.3, 0.6, 0.9}) {
        const ModelParams p{1.0, lambda, kappa1, kappa2};
        for (const auto& b : steady_state_branches(p).branches) {
          const double rate = b.max_real_eigenvalue;
          if (std::abs(rate) < 1e-3) continue;
          Vector5 dir;
          for (int k = 0; k < 5; ++k) dir[k] = g(rng);
          const Vector5 y0 = to_fluctuation(b.state);
          const double d0 = 1e-6;
          const Vector5 y1 = y0 + d0 * dir.normalized();
          const double t = 3.0 / std::abs(rate);
          const auto traj = time_evolve(from_fluctuation(y1), p, t, {}, Closure::Expanded, 1'000'000);
          const double d1 = (to_fluctuation(traj.final_state) - y0).norm();
          CAPTURE(lambda);
          CAPTURE(rate);
          if (b.stable)
            CHECK(d1 < d0);
          else
            CHECK(d1 > d0);
          ++sampled;
        }
      }
  CHECK(sampled >= 20);
}

TEST_CASE("kappa2 -> 0: symmetric branch approaches the Gaussian fluctuations") {
  const ModelParams base{1.0, 0.4, 0.1, 1.0};
  const auto gauss = gaussian::gaussian_report(base.with_kappa2(1e-9), 0.0);
  double previous = 1.0;
  for (double k2 : {1e-6, 1e-7, 1e-8}) {
    const auto set = steady_state_branches(base.with_kappa2(k2));
    REQUIRE_FALSE(set.branches.empty());
    const double rel = std::abs(set.branches[0].state.delta_n() / gauss.delta_n - 1.0);
    CHECK(rel < previous);
    previous = rel;
  }
  CHECK(previous < 1e-6);
}

TEST_CASE("frozen root at the oracle point") {
  const ModelParams p{1.0, 0.3, 0.2, 0.1};
  const auto set = steady_state_branches(p);
  REQUIRE(set.branches.size() == 1);
  const auto& s = set.branches[0].state;
  CHECK(s.n == doctest::Approx(0.2180231019).epsilon(1e-9));
  CHECK(s.m.real() == doctest::Approx(-0.3633718365).epsilon(1e-9));
  CHECK(s.m.imag() == doctest::Approx(-0.1565456239).epsilon(1e-9));
  CHECK(set.branches[0].stable);
  CHECK(s.purity() > 0.0);
  CHECK(s.purity() <= 1.0);
}

TEST_CASE("closures differ only through the mean field") {
  std::mt19937 rng(8);
  for (int k = 0; k < 10; ++k) {
    auto s = random_state(rng);
    const auto p = random_params(rng);
    s.a_mean = 0.0;
    const auto e = cumulant_rhs(s, p, Closure::Expanded);
    const auto q = cumulant_rhs(s, p, Closure::Printed);
    CHECK(e.n == doctest::Approx(q.n));
    CHECK(std::abs(e.m - q.m) <= 1e-14 * std::max(1.0, std::abs(e.m)));
  }
  CHECK(closure_from_string("printed") == Closure::Printed);
  CHECK(to_string(Closure::Expanded) == "expanded");
}
