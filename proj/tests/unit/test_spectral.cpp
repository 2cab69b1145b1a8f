#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "helpers.hpp"
#include "topswap/spectral.hpp"

using namespace topswap;
using topswap::testing::as_vector;
using topswap::testing::random_function;

namespace {

struct FormPair {
  KernelId kernel;
  FormId form;
  int k_lo, k_hi;
};

// kernel whose Laplacian is the form
const FormPair kPairs[] = {
    {KernelId::TopSwap2Line, FormId::E2, 2, 2},
    {KernelId::ModifiedTransposition, FormId::D2, 2, 2},
    {KernelId::PureTransposition2, FormId::E2RT, 2, 2},
    {KernelId::BalancedSwap, FormId::FDelta, 2, 2},
    {KernelId::BalancedSwapT, FormId::FDeltaT, 2, 2},
    {KernelId::DeckAvgUnweighted, FormId::DBar, 2, 3},
    {KernelId::DeckAvgWeighted, FormId::DWeighted, 2, 3},
    {KernelId::TopSwapK, FormId::EK, 2, 3},
    {KernelId::ConstrainedTranspositionK, FormId::EKT, 2, 3},
};

double quad(const OperatorMatrix& op, const std::vector<double>& f) {
  const Eigen::VectorXd v = as_vector(f);
  return v.dot(op.apply_laplacian(v)) / static_cast<double>(v.size());
}

// indicator of deck 0 being empty
std::vector<Rational> empty_indicator(const StateSpace& space) {
  std::vector<Rational> f(space.size());
  for (StateIndex x = 0; x < space.size(); ++x) f[x] = space.unrank(x).deck_size(0) == 0 ? 1 : 0;
  return f;
}

std::vector<double> to_double(const std::vector<Rational>& f) {
  std::vector<double> out;
  for (const auto& v : f) out.push_back(static_cast<double>(v));
  return out;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("structured assembly matches the transition laws") {
  for (KernelId id : kAllKernels) {
    const bool line = is_line_kernel(id) || id == KernelId::BalancedSwap || id == KernelId::BalancedSwapT;
    for (int n = 1; n <= 4; ++n)
      for (int k = 2; k <= (line ? 2 : 3); ++k) {
        const Kernel kernel{id};
        const Eigen::MatrixXd a = build_matrix(kernel, n, k).to_dense();
        const Eigen::MatrixXd b = build_matrix_explicit(kernel, n, k).to_dense();
        INFO(kernel_name(id), " n=", n, " k=", k);
        CHECK((a - b).cwiseAbs().maxCoeff() < 1e-13);
        const OperatorMatrix m = build_matrix(kernel, n, k);
        CHECK(m.symmetry_defect() < 1e-13);
        CHECK(m.row_sum_defect() < 1e-13);
      }
  }
}

TEST_CASE("two-deck k-kernels coincide with the line kernels") {
  for (int n = 1; n <= 5; ++n) {
    const Eigen::MatrixXd top = build_matrix(Kernel{KernelId::TopSwapK}, n, 2).to_dense();
    const Eigen::MatrixXd line = build_matrix(Kernel{KernelId::TopSwap2Line}, n, 2).to_dense();
    CHECK((top - line).cwiseAbs().maxCoeff() < 1e-14);
    const Eigen::MatrixXd tk = build_matrix(Kernel{KernelId::ConstrainedTranspositionK}, n, 2).to_dense();
    const Eigen::MatrixXd t2 = build_matrix(Kernel{KernelId::ConstrainedTransposition2}, n, 2).to_dense();
    CHECK((tk - t2).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("card relabeling commutes with the kernel") {
  const int n = 4, k = 3;
  const StateSpace space(n, k);
  const std::vector<Card> sigma{0, 3, 1, 4, 2};
  for (KernelId id : {KernelId::TopSwapK, KernelId::TopSwapInversion, KernelId::ConstrainedTranspositionK}) {
    const Eigen::MatrixXd P = build_matrix(Kernel{id}, n, k).to_dense();
    std::vector<StateIndex> perm(space.size());
    for (StateIndex x = 0; x < space.size(); ++x) {
      auto d = space.unrank(x).decks();
      for (auto& deck : d)
        for (auto& c : deck) c = sigma[c];
      perm[x] = space.rank(Configuration(d));
    }
    double worst = 0;
    for (StateIndex x = 0; x < space.size(); ++x)
      for (StateIndex y = 0; y < space.size(); ++y)
        worst = std::max(worst, std::abs(P(perm[x], perm[y]) - P(x, y)));
    CHECK(worst < 1e-15);
  }
}

TEST_CASE("forms agree with operators and kernel Laplacians") {
  for (const auto& pair : kPairs)
    for (int n = 1; n <= 4; ++n)
      for (int k = pair.k_lo; k <= pair.k_hi; ++k) {
        const StateSpace space(n, k);
        const auto f = random_function(space.size(), 100 + n * 10 + k);
        const Form form{pair.form};
        const double direct = dirichlet_form(form, space, f);
        const double via_form = quad(form_operator(form, n, k), f);
        const double via_kernel = quad(build_matrix(Kernel{pair.kernel}, n, k), f);
        INFO(form_name(pair.form), " n=", n, " k=", k);
        CHECK(via_form == doctest::Approx(direct).epsilon(1e-11));
        CHECK(via_kernel == doctest::Approx(direct).epsilon(1e-11));
        const std::vector<Rational> fr(f.begin(), f.end());
        CHECK(static_cast<double>(dirichlet_form(form, space, fr)) == doctest::Approx(direct).epsilon(1e-12));
      }
  // the line form and the k-deck form coincide at k = 2
  for (int n = 1; n <= 5; ++n) {
    const StateSpace space(n, 2);
    const auto f = random_function(space.size(), n);
    CHECK(dirichlet_form(Form{FormId::E2}, space, f) ==
          doctest::Approx(dirichlet_form(Form{FormId::EK}, space, f)).epsilon(1e-12));
  }
}

TEST_CASE("balanced form from its two parts") {
  for (int n = 2; n <= 5; ++n) {
    const StateSpace space(n, 2);
    const auto f = random_function(space.size(), 7 * n);
    const auto cv = conditional_variance(space, f, Conditioning::star());
    const StarRange r = balanced_star_range(n, 0.25);
    double moves = 0, resample = 0;
    for (StateIndex x = 0; x < space.size(); ++x) {
      const TwoDeckLine eta = to_line(space.unrank(x));
      const int star = eta.star_position();
      for (int i = 1; i <= n + 1; ++i) {
        const double d = f[space.rank(from_line(apply_T(eta, i, star)))] - f[x];
        moves += d * d;
      }
      if (star >= r.lo && star <= r.hi) resample += cv[x];
    }
    const double N = static_cast<double>(space.size());
    const double want = moves / (2.0 * (n + 1) * N) + resample / N;
    CHECK(dirichlet_form(Form{FormId::FDelta}, space, f) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("conditional variances") {
  const StateSpace space(4, 3);
  const auto f = random_function(space.size(), 9);
  for (const Conditioning c : {Conditioning::frozen_pair(0, 1), Conditioning::frozen_pair(1, 2),
                               Conditioning::deck_content(0), Conditioning::deck_content(2)}) {
    const auto cv = conditional_variance(space, f, c);
    const auto cm = conditional_mean(space, f, c);
    // total variance splits into the mean conditional variance and the variance of the conditional mean
    CHECK(mean(cv) + variance(cm) == doctest::Approx(variance(f)).epsilon(1e-12));
    const ProjectorTerm classes = conditioning_classes(space, c);
    for (StateIndex x = 0; x < space.size(); ++x)
      for (StateIndex y = x + 1; y < std::min<StateIndex>(space.size(), x + 40); ++y)
        if (classes.class_of[x] == classes.class_of[y]) CHECK(cm[x] == doctest::Approx(cm[y]));
  }
  // a function of the star position has no conditional variance given it
  const StateSpace two(5, 2);
  std::vector<double> g(two.size());
  for (StateIndex x = 0; x < two.size(); ++x) g[x] = std::sin(to_line(two.unrank(x)).star_position());
  for (double v : conditional_variance(two, g, Conditioning::star())) CHECK(std::abs(v) < 1e-13);
  // frozen pair classes: other decks fixed, the pair's cards free
  const ProjectorTerm pc = conditioning_classes(space, Conditioning::frozen_pair(0, 1));
  std::map<std::uint32_t, int> sizes;
  for (auto c : pc.class_of) sizes[c]++;
  for (StateIndex x = 0; x < space.size(); ++x) {
    const int m = 4 - space.unrank(x).deck_size(2);
    int arrangements = 1;
    for (int t = 2; t <= m + 1; ++t) arrangements *= t;
    CHECK(sizes[pc.class_of[x]] == arrangements);
  }
}

TEST_CASE("deck-empty indicator, exact") {
  for (int n = 1; n <= 4; ++n)
    for (int k = 2; k <= 4; ++k) {
      if (state_count(n, k) > 20000) continue;
      const StateSpace space(n, k);
      const auto f = empty_indicator(space);
      const Rational mu(k - 1, n + k - 1);
      CHECK(mean(f) == mu);
      CHECK(variance(f) == mu * (1 - mu));
      const Rational e = dirichlet_form(Form{FormId::EK}, space, f);
      CHECK(e == Rational(2 * n * (k - 1), (n + k - 1) * (n + k) * (n + k)));
      auto g = [](const std::vector<int>& sizes) { return Rational(sizes[0] == 0 ? 1 : 0); };
      CHECK(lumped_size_form_ek(n, k, g) == e);
      CHECK(lumped_size_mean(n, k, g) == mu);
      CHECK(lumped_size_variance(n, k, g) == mu * (1 - mu));
    }
}

TEST_CASE("lumped evaluation of size functions") {
  for (int n = 1; n <= 4; ++n)
    for (int k = 2; k <= 3; ++k) {
      const StateSpace space(n, k);
      auto g = [](const std::vector<int>& s) { return Rational(s[0] * s[0] + 3 * s.back()); };
      std::vector<Rational> f(space.size());
      for (StateIndex x = 0; x < space.size(); ++x) {
        const Configuration c = space.unrank(x);
        std::vector<int> sizes;
        for (int d = 0; d < k; ++d) sizes.push_back(c.deck_size(d));
        f[x] = g(sizes);
      }
      CHECK(lumped_size_form_ek(n, k, g) == dirichlet_form(Form{FormId::EK}, space, f));
      CHECK(lumped_size_mean(n, k, g) == mean(f));
      CHECK(lumped_size_variance(n, k, g) == variance(f));
    }
}

TEST_CASE("Lanczos agrees with dense eigensolves") {
  const std::pair<Kernel, std::pair<int, int>> cases[] = {
      {Kernel{KernelId::TopSwapK}, {4, 3}},          {Kernel{KernelId::TopSwapInversion}, {3, 4}},
      {Kernel{KernelId::BalancedSwap}, {5, 2}},      {Kernel{KernelId::DeckAvgUnweighted}, {3, 3}},
      {Kernel{KernelId::DeckAvgWeighted}, {4, 3}},   {Kernel{KernelId::ModifiedTransposition}, {5, 2}},
      {Kernel{KernelId::ConstrainedTranspositionK}, {3, 3}}};
  for (const auto& [kernel, nk] : cases) {
    const OperatorMatrix m = build_matrix(kernel, nk.first, nk.second);
    const GapReport r = spectral_gap(m);
    INFO(kernel_name(kernel.id));
    CHECK(r.converged);
    CHECK(r.gap == doctest::Approx(dense_smallest_on_mean_zero(m.dense_laplacian())).epsilon(1e-9));
    // independent: all eigenvalues of the symmetric Laplacian, skipping the constant vector's zero
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.dense_laplacian());
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(ev.begin(), ev.end());
    CHECK(r.gap == doctest::Approx(ev[1]).epsilon(1e-9));
  }
}

TEST_CASE("golden exact gaps") {
  for (const auto& row : read_csv(std::string(TOPSWAP_GOLDEN_DIR) + "/scaling_exact.csv")) {
    const int n = std::stoi(row[0]), k = std::stoi(row[1]);
    if (std::stoull(row[2]) > 7000) continue;
    const GapReport r = kernel_gap(Kernel{KernelId::TopSwapK}, n, k);
    CHECK(r.state_count == std::stoull(row[2]));
    CHECK(r.gap == doctest::Approx(std::stod(row[3])).epsilon(1e-9));
  }
}

TEST_CASE("relaxation times of forms") {
  for (int n = 2; n <= 4; ++n)
    for (int k = 2; k <= 3; ++k)
      CHECK(rayleigh_relaxation(Form{FormId::EK}, n, k) ==
            doctest::Approx(kernel_gap(Kernel{KernelId::TopSwapK}, n, k).relaxation_time).epsilon(1e-9));
  CHECK(rayleigh_relaxation(Form{FormId::Var}, 3, 3) == doctest::Approx(1.0).epsilon(1e-12));
  // the unweighted deck average relaxes in 9/8, not 1
  CHECK(rayleigh_relaxation(Form{FormId::DBar}, 3, 3) == doctest::Approx(9.0 / 8.0).epsilon(1e-10));
  CHECK(kernel_gap(Kernel{KernelId::DeckAvgUnweighted}, 3, 4).gap == doctest::Approx(5.0 / 6.0).epsilon(1e-10));
  // top-swap with one deck never moves
  CHECK(std::isinf(rayleigh_relaxation(Form{FormId::EK}, 3, 1)));
}

TEST_CASE("single-deck transfer operator") {
  for (int k = 2; k <= 4; ++k)
    for (int m = 0; m <= 3; ++m) {
      const KMatrix km = build_K_matrix(m, k);
      const auto size = km.K.rows();
      CHECK((km.K.rowwise().sum() - Eigen::VectorXd::Ones(size)).cwiseAbs().maxCoeff() < 1e-14);
      CHECK(km.marginal.sum() == doctest::Approx(1.0));
      // reversible with respect to the one-deck marginal
      for (Eigen::Index a = 0; a < size; ++a)
        for (Eigen::Index b = 0; b < size; ++b)
          CHECK(km.marginal(a) * km.K(a, b) == doctest::Approx(km.marginal(b) * km.K(b, a)).epsilon(1e-12));
      // brute force from the state space: P(deck 0 = beta | deck 1 = alpha)
      const StateSpace space(m, k);
      std::map<std::pair<std::vector<Card>, std::vector<Card>>, double> joint;
      std::map<std::vector<Card>, double> given;
      for (const auto& s : space.enumerate()) {
        std::vector<Card> a(s.deck(1).begin(), s.deck(1).end()), b(s.deck(0).begin(), s.deck(0).end());
        joint[{a, b}] += 1;
        given[a] += 1;
      }
      for (Eigen::Index a = 0; a < size; ++a)
        for (Eigen::Index b = 0; b < size; ++b) {
          auto it = joint.find({km.contents[a], km.contents[b]});
          const double want = it == joint.end() ? 0.0 : it->second / given[km.contents[a]];
          CHECK(km.K(a, b) == doctest::Approx(want).epsilon(1e-13));
        }
    }
}

TEST_CASE("transfer operator spectra") {
  auto expect = [](int m, int k, std::vector<std::pair<double, int>> want) {
    const auto got = K_spectrum(m, k);
    INFO("m=", m, " k=", k);
    REQUIRE(got.size() == want.size());
    for (std::size_t t = 0; t < want.size(); ++t) {
      CHECK(got[t].value == doctest::Approx(want[t].first).epsilon(1e-10).scale(1.0));
      CHECK(got[t].multiplicity == want[t].second);
    }
  };
  expect(0, 3, {{1, 1}});
  expect(1, 3, {{1, 1}, {-0.5, 1}});
  expect(2, 3, {{1, 1}, {1.0 / 3, 1}, {0, 1}, {-0.5, 2}});
  expect(3, 3, {{1, 1}, {1.0 / 3, 3}, {0, 8}, {-0.25, 1}, {-0.5, 3}});
  expect(2, 4, {{1, 1}, {1.0 / 6, 1}, {0, 1}, {-1.0 / 3, 2}});
  CHECK_FALSE(projector_average_bound(0).has_value());
  CHECK(*projector_average_bound(1) == doctest::Approx(0.5).epsilon(1e-9));
  for (int m = 2; m <= 4; ++m) CHECK(*projector_average_bound(m) == doctest::Approx(5.0 / 9).epsilon(1e-9));
}

TEST_CASE("triplet export") {
  const OperatorMatrix m = build_matrix(Kernel{KernelId::BalancedSwap}, 3, 2);
  std::ostringstream os;
  m.write_triplets(os);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "row,col,value");
  Eigen::MatrixXd back = Eigen::MatrixXd::Zero(m.size(), m.size());
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string r, c, v;
    std::getline(ss, r, ',');
    std::getline(ss, c, ',');
    std::getline(ss, v, ',');
    back(std::stoll(r), std::stoll(c)) = std::stod(v);
  }
  CHECK((back - m.to_dense()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("caps and degenerate spaces") {
  MatrixCaps small;
  small.sparse = 100;
  try {
    build_matrix(Kernel{KernelId::TopSwapK}, 5, 2, small);
    FAIL("expected a cap error");
  } catch (const CapExceeded& e) {
    CHECK(e.flag() == "--sparse-cap");
  }
  MatrixCaps tiny_dense;
  tiny_dense.dense = 10;
  CHECK_THROWS_AS(build_matrix_explicit(Kernel{KernelId::TopSwapK}, 3, 2, tiny_dense), CapExceeded);
  CHECK_THROWS_AS(kernel_gap(Kernel{KernelId::TopSwapK}, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(form_operator(Form{FormId::E2}, 3, 3), std::invalid_argument);
  CHECK(parse_form_name("EK_T") == FormId::EKT);
  CHECK_FALSE(parse_form_name("EK_X").has_value());
}

TEST_CASE("deck-empty indicator in floating point") {
  const StateSpace space(5, 3);
  const auto f = to_double(empty_indicator(space));
  CHECK(dirichlet_form(Form{FormId::EK}, space, f) == doctest::Approx(2.0 * 5 * 2 / (7.0 * 64)).epsilon(1e-12));
}
