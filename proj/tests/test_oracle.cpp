#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>

#include "nibvp/error.hpp"
#include "nibvp/oracle.hpp"

using namespace nibvp;
constexpr double pi = std::numbers::pi;

TEST(Dalembert, InitialTimeReturnsDataExactly) {
  const Profile f = [](double x) { return std::sin(pi * x) * std::exp(-100 * (x - 0.5) * (x - 0.5)); };
  for (double x : {0.0, 0.13, 0.5, 0.77, 1.0}) EXPECT_EQ(dalembert(f, {}, x, 0.0, 1.0, {0, 1}), f(x));
}

TEST(Dalembert, StandingModes) {
  const Profile s = [](double x) { return std::sin(2 * pi * x); };
  const double c = 1.3;
  for (double t : {0.1, 0.45, 1.7})
    for (double x : {0.05, 0.3, 0.71}) {
      EXPECT_NEAR(dalembert(s, {}, x, t, c, {0, 1}), std::sin(2 * pi * x) * std::cos(2 * pi * c * t), 1e-14);
      EXPECT_NEAR(dalembert({}, s, x, t, c, {0, 1}), std::sin(2 * pi * x) * std::sin(2 * pi * c * t) / (2 * pi * c),
                  1e-12);
    }
}

TEST(Dalembert, ShiftedDomain) {
  const Profile s = [](double x) { return std::sin(pi * (x + 1) / 2); };
  EXPECT_NEAR(dalembert(s, {}, 0.0, 0.4, 1.0, {-1, 1}), std::cos(pi * 0.4 / 2), 1e-14);
}

TEST(Dalembert, PeriodTwoLengthsOverC) {
  const Profile f = [](double x) { return x * x * (1 - x) * std::exp(-x); };
  const Profile g = [](double x) { return std::sin(pi * x) * x; };
  const double c = 0.8, period = 2.0 / c;
  for (double t : {0.2, 0.9})
    for (double x : {0.1, 0.5, 0.85})
      EXPECT_NEAR(dalembert(f, g, x, t + period, c, {0, 1}), dalembert(f, g, x, t, c, {0, 1}), 1e-12);
}

TEST(Dalembert, EnergyIsConserved) {
  const Profile f = [](double x) { return std::sin(pi * x) * std::exp(-40 * (x - 0.4) * (x - 0.4)); };
  const Profile g = [](double x) { return 0.3 * std::sin(pi * x); };
  const double c = 1.0, h = 1e-5;
  auto energy = [&](double t) {
    const int n = 800;
    double e = 0;
    for (int k = 0; k < n; ++k) {
      const double x = (k + 0.5) / n;
      const double xm = std::max(0.0, x - h), xp = std::min(1.0, x + h);
      const double ut = (dalembert(f, g, x, t + h, c, {0, 1}) - dalembert(f, g, x, t - h, c, {0, 1})) / (2 * h);
      const double ux = (dalembert(f, g, xp, t, c, {0, 1}) - dalembert(f, g, xm, t, c, {0, 1})) / (xp - xm);
      e += 0.5 * (ut * ut + c * c * ux * ux) / n;
    }
    return e;
  };
  const double e0 = energy(0.3);
  for (double t : {0.71, 1.37}) EXPECT_NEAR(energy(t), e0, 1e-5 * e0);
}

TEST(Dalembert, RejectsBadArguments) {
  const Profile f = [](double x) { return std::sin(pi * x); };
  const Profile bad = [](double x) { return 1.0 + x; };
  EXPECT_THROW(dalembert(bad, {}, 0.5, 0.1, 1.0, {0, 1}), Error);
  EXPECT_THROW(dalembert(f, {}, 1.5, 0.1, 1.0, {0, 1}), Error);
  EXPECT_THROW(dalembert(f, {}, 0.5, -0.1, 1.0, {0, 1}), Error);
}

namespace {

ProblemSpec mol_spec(double tension, int nt = 21, int ns = 16) {
  return make_problem(GridSpec::make(nt, ns, {0, 0.5}, {0, 1}), SbpOrder::SBP121, tension, 1.0, bump_profiles(2.5));
}

}  // namespace

TEST(Mol, TrivialMapConvergesToDalembertAtEighthOrder) {
  const ProblemSpec spec = mol_spec(1e4);
  MolOptions o;
  o.trivial_time_map = true;
  const MolReference coarse = mol_reference(spec, o);
  o.refinement = 8;
  const MolReference fine = mol_reference(spec, o);
  const GridSpec& g = spec.grid;
  for (int i = 0; i < g.n_tau; ++i)
    for (int j = 0; j < g.n_sigma; ++j) EXPECT_NEAR(fine.t[g.index(i, j)], 2.5 * g.tau(i), 1e-13);
  const Vec exact = dalembert_on_map(spec, fine.t);
  const double e4 = (coarse.phi - exact).cwiseAbs().maxCoeff(), e8 = (fine.phi - exact).cwiseAbs().maxCoeff();
  EXPECT_LT(e8, 1e-6);
  EXPECT_GT(e4 / e8, 100.0);
}

TEST(Mol, InfiniteTensionKeepsPlanarTimeMap) {
  const ProblemSpec spec = mol_spec(std::numeric_limits<double>::infinity());
  MolOptions o;
  o.refinement = 8;
  const MolReference ref = mol_reference(spec, o);
  const GridSpec& g = spec.grid;
  for (int i = 0; i < g.n_tau; ++i)
    for (int j = 0; j < g.n_sigma; ++j) EXPECT_NEAR(ref.t[g.index(i, j)], 2.5 * g.tau(i), 1e-12);
  EXPECT_LT((ref.phi - dalembert_on_map(spec, ref.t)).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_EQ(ref.fine_n_sigma, 8 * 15 + 1);
}

TEST(Mol, CoupledTimeMapConvergesUnderRefinement) {
  const ProblemSpec spec = mol_spec(1e4);
  MolOptions o;
  const MolReference r4 = mol_reference(spec, o);
  o.refinement = 8;
  const MolReference r8 = mol_reference(spec, o);
  o.refinement = 16;
  const MolReference r16 = mol_reference(spec, o);
  const double d48 = (r4.t - r16.t).cwiseAbs().maxCoeff(), d816 = (r8.t - r16.t).cwiseAbs().maxCoeff();
  EXPECT_LT(d816, 1e-8);
  EXPECT_GT(d48 / d816, 50.0);
  EXPECT_NE(r4.key, r8.key);
  // The coupling leaves a visible imprint on t at T = 1e4.
  const GridSpec& g = spec.grid;
  double bend = 0;
  for (int i = 0; i < g.n_tau; ++i)
    for (int j = 0; j < g.n_sigma; ++j) bend = std::max(bend, std::abs(r16.t[g.index(i, j)] - 2.5 * g.tau(i)));
  EXPECT_GT(bend, 1e-4);
}

TEST(Mol, CacheRoundTripIsBitwise) {
  const auto dir = std::filesystem::temp_directory_path() / "nibvp-mol-cache-test";
  std::filesystem::remove_all(dir);
  const ProblemSpec spec = mol_spec(1e4, 11, 9);
  MolOptions o;
  o.cache_dir = dir.string();
  const MolReference a = mol_reference(spec, o);
  const MolReference b = mol_reference(spec, o);
  EXPECT_FALSE(a.from_cache);
  EXPECT_TRUE(b.from_cache);
  EXPECT_TRUE((a.t.array() == b.t.array()).all());
  EXPECT_TRUE((a.phi.array() == b.phi.array()).all());
  std::filesystem::remove_all(dir);
}

TEST(Mol, RejectsBadOptions) {
  const ProblemSpec spec = mol_spec(1e4, 11, 9);
  MolOptions o;
  o.refinement = 2;
  EXPECT_THROW(mol_reference(spec, o), Error);
  o = MolOptions{};
  o.cfl = 0;
  EXPECT_THROW(mol_reference(spec, o), Error);
}

TEST(Errors, L2NormAgainstHandValue) {
  Vec a(3), b(3), w(3);
  a << 1, 2, 3;
  b << 1, 0, 0;
  w << 0.5, 0.25, 1.0;
  EXPECT_DOUBLE_EQ(l2_error(a, b, w), std::sqrt(0.25 * 4 + 9.0));
  EXPECT_THROW(l2_error(a, Vec(2), w), DimensionError);
}

TEST(Errors, PowerLawFitIsExactOnPowerLaws) {
  for (double beta : {1.0, 2.0, 2.5})
    for (double alpha : {0.3, 7.0}) {
      std::vector<std::pair<double, double>> pts;
      for (double h : {0.1, 0.05, 0.03, 0.01}) pts.emplace_back(h, alpha * std::pow(h, beta));
      const PowerLawFit f = fit_convergence(pts);
      EXPECT_NEAR(f.beta, beta, 1e-12);
      EXPECT_NEAR(f.alpha, alpha, 1e-10 * alpha);
    }
  EXPECT_THROW(fit_convergence({{0.1, 1.0}, {0.2, 2.0}}), Error);
  EXPECT_THROW(fit_convergence({{0.1, 1.0}, {0.2, 0.0}, {0.3, 1.0}}), Error);
}

TEST(Hash, FnvKnownVectors) {
  EXPECT_EQ(fnv1a("", 0), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a", 1), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(hex64(0xaf63dc4c8601ec8cULL), "af63dc4c8601ec8c");
}
