#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qqsphere/rankone.hpp"

using namespace qqs;

namespace {

Vec cvec(std::initializer_list<Complex> xs) {
  Vec v(static_cast<int>(xs.size()));
  int i = 0;
  for (Complex x : xs) v(i++) = x;
  return v;
}

Vec random_a(int n, Rng& rng) {
  Vec a(n);
  for (int i = 0; i < n; ++i) a(i) = Complex(rng.normal(), rng.normal());
  return a;
}

}  // namespace

TEST_CASE("rankone_problem builds aa*") {
  RankOneVector a(cvec({{1, 1}, {0, -2}}));
  CHECK(a.norm1 == doctest::Approx(std::sqrt(2.0) + 2.0).epsilon(1e-15));
  CHECK(a.norm2 == doctest::Approx(std::sqrt(6.0)).epsilon(1e-15));
  CHECK(a.norm_inf == doctest::Approx(2.0).epsilon(1e-15));
  Problem p = rankone_problem(a, 1.0, Field::Complex);
  CHECK_NOTHROW(validate_problem(p));
  CHECK(p.A(0, 0).real() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(p.A(1, 1).real() == doctest::Approx(4.0).epsilon(1e-15));
  // rank one: the only nonzero eigenvalue is ||a||^2
  Spectrum s = spectrum(p);
  CHECK(s.eigenvalues(1) == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(std::abs(s.eigenvalues(0)) <= 1e-12);
}

TEST_CASE("orthogonal_minimum_exists: balanced condition") {
  CHECK(orthogonal_minimum_exists(RankOneVector(cvec({1.0, 1.0})), 1.0, 2).verdict ==
        OrthogonalVerdict::BalancedPhases);
  CHECK(orthogonal_minimum_exists(RankOneVector(cvec({2.0, 1.0, 1.0})), 1.0, 3).verdict ==
        OrthogonalVerdict::BalancedPhases);  // equality case
  CHECK(orthogonal_minimum_exists(RankOneVector(cvec({3.0, 1.0, 1.0})), 1e6, 3).verdict ==
        OrthogonalVerdict::None);  // dominant entry, several nonzeros
}

TEST_CASE("orthogonal_minimum_exists: spike condition") {
  // a = (2, 0, 0): ||a||^2 = 4 >= 2 beta / (n-1) = beta
  OrthogonalExistence ex =
      orthogonal_minimum_exists(RankOneVector(cvec({2.0, 0.0, 0.0})), 1.0, 3);
  CHECK(ex.verdict == OrthogonalVerdict::SingleSpike);
  CHECK(ex.spike_index == 0);
  CHECK(orthogonal_minimum_exists(RankOneVector(cvec({2.0, 0.0, 0.0})), 100.0, 3).verdict ==
        OrthogonalVerdict::None);
  CHECK_THROWS_AS(orthogonal_minimum_exists(RankOneVector(cvec({2.0})), 1.0, 1), Error);
}

TEST_CASE("zero_sum_phases cancels the weighted phase sum") {
  Rng rng(3, 0);
  int accepted = 0;
  for (int trial = 0; trial < 400; ++trial) {
    int n = 2 + static_cast<int>(rng.next_u64() % 7);
    Vec a = random_a(n, rng);
    RankOneVector av(a);
    if (av.norm_inf > 0.5 * av.norm1) continue;
    ++accepted;
    RealVec theta = zero_sum_phases(av);
    Complex s = 0.0;
    for (int k = 0; k < n; ++k) s += std::polar(1.0, theta(k)) * a(k);
    CHECK(std::abs(s) <= 1e-10 * av.norm1);
  }
  CHECK(accepted >= 100);
}

TEST_CASE("zero_sum_phases handles flat and structured inputs") {
  for (int n : {3, 4, 5, 9}) {
    RankOneVector a(Vec::Constant(n, Complex(1.0, 0.0)));
    RealVec theta = zero_sum_phases(a);
    Complex s = 0.0;
    for (int k = 0; k < n; ++k) s += std::polar(1.0, theta(k));
    CHECK(std::abs(s) <= 1e-12);
  }
  // exactly two nonzeros of equal modulus cancel antipodally
  RealVec theta = zero_sum_phases(RankOneVector(cvec({{0, 1.5}, 0.0, -1.5})));
  Complex s = std::polar(1.5, theta(0) + M_PI / 2.0) - std::polar(1.5, theta(2));
  CHECK(std::abs(s) <= 1e-12);
  // two nonzeros of distinct modulus cannot cancel
  CHECK_THROWS_AS(zero_sum_phases(RankOneVector(cvec({1.0, 0.0, 0.5}))), Error);
  CHECK_THROWS_AS(zero_sum_phases(RankOneVector(cvec({5.0, 1.0, 1.0}))), Error);
}

TEST_CASE("build_orthogonal_minimizer: balanced value and certificate") {
  Rng rng(17, 0);
  for (int trial = 0; trial < 30; ++trial) {
    int n = 3 + static_cast<int>(rng.next_u64() % 4);
    Vec a = random_a(n, rng);
    RankOneVector av(a);
    if (av.norm_inf > 0.5 * av.norm1) continue;
    double beta = rng.uniform(0.3, 3.0);
    Vec z = build_orthogonal_minimizer(av, beta, n);
    Problem p = rankone_problem(av, beta, Field::Complex);
    CHECK(std::abs(a.dot(z)) <= 1e-10 * av.norm2);          // a* z = 0
    CHECK((z.cwiseAbs2().array() - 1.0 / n).abs().maxCoeff() <= 1e-12);
    CHECK(objective(p, z) == doctest::Approx(beta / (2.0 * n)).epsilon(1e-12));
    CHECK(riemannian_grad(p, z).norm <= 1e-10);
  }
}

TEST_CASE("build_orthogonal_minimizer: spike value and certificate") {
  RankOneVector a(cvec({0.0, 3.0, 0.0, 0.0}));
  double beta = 2.0;
  Vec z = build_orthogonal_minimizer(a, beta, 4);
  Problem p = rankone_problem(a, beta, Field::Complex);
  CHECK(std::abs(z(1)) == 0.0);
  CHECK(objective(p, z) == doctest::Approx(beta / (2.0 * 3.0)).epsilon(1e-12));
  CHECK(riemannian_grad(p, z).norm <= 1e-10);
  CHECK(brute_force_local_check(p, z, 1e-3, 5000, 1));
  CHECK_THROWS_AS(build_orthogonal_minimizer(RankOneVector(cvec({9.0, 1.0, 0.0})), 1e6, 3),
                  Error);
}

TEST_CASE("orthogonal minimizers achieve the global value") {
  // when the orthogonal construction exists its value must match the best of a
  // well-seeded multistart on the full complex problem
  Rng rng(29, 0);
  int done = 0;
  for (int trial = 0; trial < 20 && done < 4; ++trial) {
    Vec a = random_a(3, rng);
    RankOneVector av(a);
    if (av.norm_inf > 0.5 * av.norm1) continue;
    ++done;
    double beta = 1.0;
    Problem p = rankone_problem(av, beta, Field::Complex);
    SolverConfig cfg;
    cfg.seed = 900 + trial;
    CriticalCatalog cat = multistart(p, 40, cfg);
    REQUIRE(!cat.points.empty());
    CHECK(cat.points.front().f == doctest::Approx(beta / 6.0).epsilon(1e-8));
  }
  CHECK(done == 4);
}

TEST_CASE("make_consistent aligns phases") {
  Rng rng(37, 0);
  // take a stationary point of a rank-one problem found numerically, then
  // check the aligned representative: conj(a_k) z_k real where a_k != 0 and
  // z_k real where a_k = 0, same objective, same equivalence class
  Vec a = cvec({{1.0, 0.5}, {-0.3, 0.8}, 0.0});
  RankOneVector av(a);
  Problem p = rankone_problem(av, 1.0, Field::Complex);
  SolverConfig cfg;
  cfg.seed = 5;
  CriticalCatalog cat = multistart(p, 20, cfg);
  REQUIRE(!cat.points.empty());
  int checked = 0;
  for (const CatalogEntry& e : cat.points) {
    if (e.grad_norm > 1e-10) continue;
    Vec zc = make_consistent(av, 1.0, e.z);
    ++checked;
    Complex overlap = a.dot(zc);
    CHECK(std::abs(overlap.imag()) <= 1e-9);
    CHECK(zc(2).imag() == 0.0);
    CHECK(zc(2).real() >= 0.0);
    CHECK(objective(p, zc) == doctest::Approx(e.f).epsilon(1e-12));
    CHECK(equivalence_distance(zc, e.z) <= 1e-8);
  }
  CHECK(checked >= 1);
  // non-stationary input is rejected
  Vec bad = cvec({1.0, 0.0, 0.0});
  CHECK_THROWS_AS(make_consistent(av, 1.0, bad), Error);
}

TEST_CASE("solve_rankone: orthogonal regime") {
  RankOneVector a(cvec({1.0, 1.0, 1.0, 1.0}));
  RankOneSolution sol = solve_rankone(a, 0.8, 4);
  CHECK(sol.mode == RankOneMode::Orthogonal);
  CHECK(sol.f_star == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("solve_rankone: numeric regime matches full complex multistart") {
  Rng rng(43, 0);
  int done = 0;
  for (int trial = 0; trial < 30 && done < 3; ++trial) {
    Vec a = random_a(4, rng);
    a(0) *= 4.0;  // force a dominant entry so no orthogonal minimum exists
    RankOneVector av(a);
    if (av.norm_inf <= 0.5 * av.norm1) continue;
    double beta = 6.0 * av.norm2 * av.norm2;  // also defeats the spike route
    if (orthogonal_minimum_exists(av, beta, 4).verdict != OrthogonalVerdict::None) continue;
    ++done;
    RankOneSolution sol = solve_rankone(av, beta, 4, {}, 128);
    CHECK(sol.mode == RankOneMode::ConsistentNumeric);
    Problem p = rankone_problem(av, beta, Field::Complex);
    CHECK(riemannian_grad(p, sol.z).norm <= 1e-8);
    SolverConfig cfg;
    cfg.seed = 1000 + trial;
    CriticalCatalog cat = multistart(p, 60, cfg);
    REQUIRE(!cat.points.empty());
    CHECK(sol.f_star == doctest::Approx(cat.points.front().f).epsilon(1e-7));
  }
  CHECK(done == 3);
}
