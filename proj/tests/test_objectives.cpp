#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "fuseopt/dataset.hpp"
#include "fuseopt/gradient_check.hpp"
#include "fuseopt/logistic.hpp"
#include "fuseopt/rng.hpp"
#include "fuseopt/sgd.hpp"
#include "fuseopt/test_functions.hpp"

using namespace fuseopt;
using Catch::Approx;

namespace {

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("rosenbrock2d values and gradient") {
  const Eval at_min = rosenbrock2d(Point({1.0, 1.0}));
  CHECK(at_min.loss == 0.0);
  CHECK(at_min.gradient[0] == 0.0);
  CHECK(at_min.gradient[1] == 0.0);

  CHECK(rosenbrock2d(Point({-1.2, 1.0})).loss == Approx(24.2).epsilon(1e-12));

  const Eval at_zero = rosenbrock2d(Point({0.0, 0.0}));
  CHECK(at_zero.loss == 1.0);
  CHECK(at_zero.gradient[0] == -2.0);
  CHECK(at_zero.gradient[1] == 0.0);

  CHECK_THROWS_AS(rosenbrock2d(Point({1.0, 2.0, 3.0})), invalid_dimension_error);
}

TEST_CASE("rastrigin2d values and gradient") {
  const Eval at_min = rastrigin2d(Point({0.0, 0.0}));
  CHECK(at_min.loss == 0.0);
  CHECK(norm(at_min.gradient) == 0.0);

  CHECK(rastrigin2d(Point({1.0, 1.0})).loss == Approx(2.0).margin(1e-12));
  CHECK(rastrigin2d(Point({0.5, 0.0})).loss == Approx(20.25).margin(1e-12));
  CHECK_THROWS_AS(rastrigin2d(Point({0.0})), invalid_dimension_error);
}

TEST_CASE("ackley2d values and gradient") {
  const Eval at_min = ackley2d(Point({0.0, 0.0}));
  CHECK(std::abs(at_min.loss) <= 1e-12);
  CHECK(at_min.gradient[0] == 0.0);
  CHECK(at_min.gradient[1] == 0.0);

  // independently computed closed-form value
  CHECK(ackley2d(Point({1.0, 1.0})).loss == Approx(3.6253849384403627).epsilon(1e-13));

  const AnalyticObjective obj(2, &ackley2d);
  CHECK(check_gradient(obj, Point({0.3, -0.7}), 1e-6) <= 1e-6);
  CHECK_THROWS_AS(ackley2d(Point({0.0, 0.0, 0.0})), invalid_dimension_error);
}

TEST_CASE("himmelblau values and gradient") {
  const Eval at_min = himmelblau(Point({3.0, 2.0}));
  CHECK(at_min.loss == 0.0);
  CHECK(norm(at_min.gradient) == 0.0);
  CHECK(himmelblau(Point({0.0, 0.0})).loss == 170.0);
  CHECK(himmelblau(Point({1.0, 1.0})).loss == 106.0);
}

TEST_CASE("quadratic form and minimizer") {
  const Matrix eye = Matrix::identity(2);
  const Eval e1 = quadratic(Point({1.0, 1.0}), eye, Point::zeros(2));
  CHECK(e1.loss == 1.0);
  CHECK(e1.gradient[0] == 1.0);
  CHECK(e1.gradient[1] == 1.0);

  Matrix diag(2, 2);
  diag(0, 0) = 2.0;
  diag(1, 1) = 8.0;
  const Eval e2 = quadratic(Point({1.0, 1.0}), diag, Point::zeros(2));
  CHECK(e2.loss == 5.0);
  CHECK(e2.gradient[0] == 2.0);
  CHECK(e2.gradient[1] == 8.0);

  // minimizer is A^{-1} b: with diagonal A just divide
  const Point b({3.0, 4.0});
  const Point x_star({3.0 / 2.0, 4.0 / 8.0});
  CHECK(norm(quadratic(x_star, diag, b).gradient) <= 1e-15);

  Matrix skew(2, 2);
  skew(0, 1) = 1.0;
  CHECK_THROWS_AS(quadratic(Point({1.0, 1.0}), skew, Point::zeros(2)), invalid_input_error);
}

TEST_CASE("erm_logistic basics") {
  const Dataset data = make_synthetic_classification(10, 3, 2.0, 5);
  const LogisticObjective obj(data);

  SECTION("zero weights cost ln 2 regardless of data") {
    const Eval e = obj.eval_full(Point::zeros(4));
    CHECK(e.loss == Approx(std::log(2.0)).epsilon(1e-15));
  }

  SECTION("full loss is the mean of single-sample losses") {
    const Point x({0.3, -0.2, 0.1, 0.05});
    double acc = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      acc += erm_logistic(x, BatchSelector{{i}}, data).loss;
    }
    CHECK(obj.eval_full(x).loss == Approx(acc / 10.0).epsilon(1e-12));
  }

  SECTION("gradient matches central differences") {
    CHECK(check_gradient(obj, Point({0.3, -0.2, 0.1, 0.05}), 1e-5) <= 1e-5);
  }

  SECTION("empty batch is rejected") {
    CHECK_THROWS_AS(erm_logistic(Point::zeros(4), BatchSelector{}, data), invalid_input_error);
  }

  SECTION("duplicate indices are rejected") {
    CHECK_THROWS_AS(erm_logistic(Point::zeros(4), BatchSelector{{1, 1}}, data),
                    invalid_input_error);
  }
}

TEST_CASE("batch evaluations recombine to the full loss") {
  const Dataset data = make_synthetic_classification(37, 4, 1.0, 11);
  const LogisticObjective obj(data);
  const Point x({0.1, 0.2, -0.3, 0.4, -0.1});
  const Eval full = obj.eval_full(x);

  // random partition of [0, n)
  Xoshiro256StarStar rng(3);
  auto order = identity_permutation(data.size());
  fisher_yates(order, rng);
  double weighted = 0.0;
  std::size_t at = 0;
  while (at < order.size()) {
    const std::size_t len = 1 + rng.below(7);
    BatchSelector b;
    for (std::size_t i = at; i < std::min(order.size(), at + len); ++i) {
      b.indices.push_back(order[i]);
    }
    at += b.indices.size();
    weighted += obj.eval_batch(x, b).loss * static_cast<double>(b.indices.size());
  }
  CHECK(weighted / static_cast<double>(data.size()) == Approx(full.loss).epsilon(1e-12));
}

TEST_CASE("objective evaluations are bit-reproducible") {
  const Dataset data = make_synthetic_classification(50, 5, 3.0, 21);
  const LogisticObjective obj(data);
  const Point x({0.5, -0.5, 0.25, 0.125, -1.0, 0.75});
  const Eval a = obj.eval_full(x);
  const Eval b = obj.eval_full(x);
  CHECK(a.loss == b.loss);
  CHECK(a.gradient == b.gradient);

  const Eval r1 = rosenbrock2d(Point({0.77, -0.33}));
  const Eval r2 = rosenbrock2d(Point({0.77, -0.33}));
  CHECK(r1.loss == r2.loss);
  CHECK(r1.gradient == r2.gradient);
}

TEST_CASE("check_gradient behaviour") {
  SECTION("linear function is exact to rounding") {
    class Linear : public Objective {
     public:
      std::size_t dimension() const override { return 3; }
      Eval eval_full(const Point& x) const override {
        const Point c({0.25, -1.5, 2.0});
        return {dot(c, x), c};
      }
    };
    CHECK(check_gradient(Linear{}, Point({0.3, 0.1, -0.2}), 1e-5) <= 1e-10);
  }

  SECTION("analytic functions pass at seeded points") {
    const AnalyticObjective obj(2, &rosenbrock2d);
    Xoshiro256StarStar rng(17);
    for (int i = 0; i < 100; ++i) {
      const Point x({rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)});
      CHECK(check_gradient(obj, x, 1e-5) <= 1e-5);
    }
  }

  SECTION("a corrupted gradient is flagged") {
    class Corrupted : public Objective {
     public:
      std::size_t dimension() const override { return 2; }
      Eval eval_full(const Point& x) const override {
        Eval e = rosenbrock2d(x);
        return {e.loss, Point({2.0 * e.gradient[0], e.gradient[1]})};
      }
    };
    CHECK(check_gradient(Corrupted{}, Point({0.0, 0.0}), 1e-5) >= 0.5);
  }
}

TEST_CASE("synthetic dataset determinism and geometry") {
  const Dataset a = make_synthetic_classification(100, 6, 2.5, 77);
  const Dataset b = make_synthetic_classification(100, 6, 2.5, 77);
  CHECK(a == b);
  const Dataset c = make_synthetic_classification(100, 6, 2.5, 78);
  CHECK_FALSE(a == c);

  SECTION("labels split half and half") {
    std::size_t ones = 0;
    for (double l : a.labels()) ones += l == 1.0;
    CHECK(ones == 50);
  }

  SECTION("separation 0 gives identically distributed classes") {
    // both class means are the origin; with plenty of samples the
    // empirical means are near zero
    const Dataset d = make_synthetic_classification(4000, 3, 0.0, 9);
    std::vector<double> mean0(3, 0.0), mean1(3, 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) {
      auto& m = d.label(i) == 0.0 ? mean0 : mean1;
      for (std::size_t j = 0; j < 3; ++j) m[j] += d.feature(i, j);
    }
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(std::abs(mean0[j] / 2000.0) < 0.1);
      CHECK(std::abs(mean1[j] / 2000.0) < 0.1);
    }
  }

  SECTION("separated data is learnable to >= 0.95 train accuracy") {
    // reference full-batch gradient descent, independent of the optimizers
    const Dataset d = make_synthetic_classification(2000, 20, 4.0, 123);
    const LogisticObjective obj(d);
    Point x = Point::zeros(21);
    const SgdState gd{0.5};
    for (int it = 0; it < 400; ++it) {
      x = sgd_step(gd, x, obj.eval_full(x).gradient);
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      double z = x[20];
      for (std::size_t j = 0; j < 20; ++j) z += x[j] * d.feature(i, j);
      if ((z >= 0.0 ? 1.0 : 0.0) == d.label(i)) ++hits;
    }
    CHECK(static_cast<double>(hits) / 2000.0 >= 0.95);
  }
}

TEST_CASE("csv dataset loading") {
  const auto path = temp_file("fuseopt_test_data.csv");

  SECTION("3-row file loads with the named label column") {
    std::ofstream out(path);
    out << "f1,f2,label\n1.5,2.5,0\n-1,0.25,1\n3,4,1\n";
    out.close();
    const Dataset d = load_csv_dataset(path.string(), "label");
    CHECK(d.size() == 3);
    CHECK(d.feature_dim() == 2);
    CHECK(d.feature(0, 0) == 1.5);
    CHECK(d.feature(1, 1) == 0.25);
    CHECK(d.label(2) == 1.0);
  }

  SECTION("missing file is an io error") {
    CHECK_THROWS_AS(load_csv_dataset("/nonexistent/nope.csv", "label"), io_error);
  }

  SECTION("empty data section is a schema error") {
    std::ofstream out(path);
    out << "f1,f2,label\n";
    out.close();
    CHECK_THROWS_AS(load_csv_dataset(path.string(), "label"), schema_error);
  }

  SECTION("missing label column is a schema error") {
    std::ofstream out(path);
    out << "f1,f2,target\n1,2,0\n";
    out.close();
    CHECK_THROWS_AS(load_csv_dataset(path.string(), "label"), schema_error);
  }

  SECTION("non-numeric cell is a parse error naming row and column") {
    std::ofstream out(path);
    out << "f1,f2,label\n1,2,0\n1,oops,1\n";
    out.close();
    try {
      load_csv_dataset(path.string(), "label");
      FAIL("expected parse_error");
    } catch (const parse_error& e) {
      const std::string msg = e.what();
      CHECK(msg.find("row 1") != std::string::npos);
      CHECK(msg.find("column 1") != std::string::npos);
    }
  }

  SECTION("save then load round-trips exactly") {
    const Dataset d = make_synthetic_classification(25, 4, 1.7, 31);
    save_csv_dataset(d, path.string());
    const Dataset back = load_csv_dataset(path.string(), "label");
    CHECK(d == back);
  }

  std::filesystem::remove(path);
}
