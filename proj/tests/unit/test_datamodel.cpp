#include "robl1/datamodel.hpp"
#include "robl1/errors.hpp"
#include "robl1/io.hpp"
#include "robl1/linalg.hpp"
#include "robl1/rng.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <filesystem>
#include <set>
#include <sstream>

using namespace robl1;
using namespace robl1::io;

namespace {

Dataset scalar_data(std::initializer_list<double> ys) {
  Dataset d;
  d.outputs = Vector(static_cast<Index>(ys.size()));
  Index i = 0;
  for (double v : ys) d.outputs(i++) = v;
  d.regressors = Matrix::Ones(1, d.outputs.size());
  return d;
}

}  // namespace

TEST(Partition, HandExample) {
  const Dataset d = scalar_data({1, 2, 9});
  const IndexPartition p = partition_indices(d, Vector::Constant(1, 2.0), 0.0);
  EXPECT_EQ(p.plus, (IndexSet{0}));
  EXPECT_EQ(p.minus, (IndexSet{2}));
  EXPECT_EQ(p.zero, (IndexSet{1}));
}

TEST(Partition, LargeToleranceAbsorbsEverything) {
  const Dataset d = scalar_data({1, 2, 9});
  const IndexPartition p = partition_indices(d, Vector::Constant(1, 2.0), 10.0);
  EXPECT_EQ(p.zero.size(), 3u);
}

TEST(Partition, DimensionMismatchThrows) {
  const Dataset d = scalar_data({1, 2});
  EXPECT_THROW(partition_indices(d, Vector::Zero(2)), InvalidArgument);
}

TEST(Partition, CleanDataIsAllZero) {
  GenSpec s;
  s.n = 3;
  s.samples = 40;
  s.seed = 5;
  const Dataset d = generate(s);
  const IndexPartition p = partition_indices(d, d.truth->theta0, 1e-9);
  EXPECT_EQ(p.zero.size(), 40u);
}

TEST(Regressors, HandLayout) {
  Vector y(3);
  y << 1, 2, 3;
  Matrix u(1, 3);
  u << 10, 20, 30;
  const Matrix x = build_regressor_matrix(y, u, 1, 0);
  ASSERT_EQ(x.rows(), 2);
  ASSERT_EQ(x.cols(), 2);
  EXPECT_DOUBLE_EQ(x(0, 0), 1);
  EXPECT_DOUBLE_EQ(x(1, 0), 20);
  EXPECT_DOUBLE_EQ(x(0, 1), 2);
  EXPECT_DOUBLE_EQ(x(1, 1), 30);
}

TEST(Regressors, NoLagsIsInputOnly) {
  Vector y = Vector::LinSpaced(5, 0, 4);
  Matrix u(1, 5);
  u << 3, 1, 4, 1, 5;
  const Matrix x = build_regressor_matrix(y, u, 0, 0);
  ASSERT_EQ(x.rows(), 1);
  EXPECT_TRUE(x.row(0).isApprox(u.row(0)));
}

TEST(Regressors, DimensionCount) {
  Vector y = Vector::Ones(10);
  Matrix u = Matrix::Ones(1, 10);
  EXPECT_EQ(build_regressor_matrix(y, u, 2, 1).rows(), 4);
  Matrix u2 = Matrix::Ones(2, 10);
  EXPECT_EQ(build_regressor_matrix(y, u2, 2, 1).rows(), 6);
}

TEST(Regressors, InconsistentLengthsThrow) {
  EXPECT_THROW(build_regressor_matrix(Vector::Ones(4), Matrix::Ones(1, 5), 1, 1), InvalidArgument);
}

TEST(SensorFault, HandRecursion) {
  Vector w(3);
  w << 0, 5, 0;
  Vector th(2);
  th << 0.5, 1.0;
  const Vector f = sensor_fault_to_equation_error(w, th, 1);
  EXPECT_DOUBLE_EQ(f(0), 0);
  EXPECT_DOUBLE_EQ(f(1), 5);
  EXPECT_DOUBLE_EQ(f(2), -2.5);
}

TEST(SensorFault, SupportSpreadsAtMostNaPlusOne) {
  Vector w = Vector::Zero(12);
  w(4) = 3.0;
  Vector th(3);
  th << 0.3, -0.2, 0.7;
  const Vector f = sensor_fault_to_equation_error(w, th, 2);
  Index nonzero = 0;
  for (Index t = 0; t < f.size(); ++t) nonzero += f(t) != 0.0;
  EXPECT_LE(nonzero, 3);
  EXPECT_TRUE(sensor_fault_to_equation_error(Vector::Zero(5), th, 2).isZero());
  EXPECT_THROW(sensor_fault_to_equation_error(w, th, 4), InvalidArgument);
}

TEST(StateEstimation, StaticReduction) {
  const Matrix a = Matrix::Identity(2, 2);
  const Matrix b = Matrix::Zero(2, 1);
  Vector c(2);
  c << 1, 0;
  Matrix u = Matrix::Ones(1, 4);
  Vector obs(4);
  obs << 1, 2, 3, 4;
  const Dataset d = build_state_estimation_problem(a, b, c, u, obs);
  for (Index t = 0; t < 4; ++t) EXPECT_TRUE(d.regressors.col(t).isApprox(c));
  EXPECT_TRUE(d.outputs.isApprox(obs));
}

TEST(StateEstimation, ZeroInputsLeaveOutputs) {
  Matrix a(2, 2);
  a << 0.5, 0.1, 0.0, 0.3;
  Matrix b(2, 1);
  b << 1, 1;
  Vector c(2);
  c << 1, 2;
  Vector obs(5);
  obs << 1, -1, 2, 0.5, 3;
  const Dataset d = build_state_estimation_problem(a, b, c, Matrix::Zero(1, 5), obs);
  EXPECT_TRUE(d.outputs.isApprox(obs));
}

TEST(StateEstimation, NilpotentColumnsVanish) {
  Matrix a(2, 2);
  a << 0, 1, 0, 0;
  Vector c(2);
  c << 1, 0;
  const Dataset d = build_state_estimation_problem(a, Matrix::Zero(2, 1), c, Matrix::Zero(1, 4),
                                                   Vector::Zero(4));
  EXPECT_FALSE(d.regressors.col(0).isZero());
  EXPECT_TRUE(d.regressors.col(2).isZero());
  EXPECT_TRUE(d.regressors.col(3).isZero());
}

TEST(StateEstimation, DimensionMismatchThrows) {
  EXPECT_THROW(build_state_estimation_problem(Matrix::Identity(2, 2), Matrix::Zero(3, 1),
                                              Vector::Ones(2), Matrix::Zero(1, 3), Vector::Zero(3)),
               InvalidArgument);
}

TEST(Generate, CleanIsExact) {
  GenSpec s;
  s.n = 4;
  s.samples = 50;
  s.seed = 1;
  const Dataset d = generate(s);
  EXPECT_TRUE(d.truth->gross.isZero());
  EXPECT_TRUE(d.truth->noise.isZero());
  EXPECT_EQ((d.outputs - d.regressors.transpose() * d.truth->theta0).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Generate, OutlierCountAndSigns) {
  GenSpec s;
  s.n = 3;
  s.samples = 101;
  s.outlier_fraction = 0.35;
  s.sign_mode = SignMode::positive_only;
  s.seed = 9;
  const Dataset d = generate(s);
  Index nonzero = 0;
  for (Index t = 0; t < d.samples(); ++t) {
    if (d.truth->gross(t) != 0.0) {
      ++nonzero;
      EXPECT_GT(d.truth->gross(t), 0.0);
    }
  }
  EXPECT_EQ(nonzero, 35);  // 35.35 rounds to 35
  EXPECT_EQ(s.outlier_count(), 35);
  s.samples = 10;
  s.outlier_fraction = 0.25;
  EXPECT_EQ(s.outlier_count(), 3);  // 2.5 rounds away from zero
}

TEST(Generate, BitwiseReproducible) {
  GenSpec s;
  s.regressor_kind = RegressorKind::affine_gaussian;
  s.n = 3;
  s.samples = 60;
  s.outlier_fraction = 0.3;
  s.noise_snr_db = 15.0;
  s.seed = 42;
  const Dataset a = generate(s);
  const Dataset b = generate(s);
  EXPECT_EQ(a.regressors, b.regressors);
  EXPECT_EQ(a.outputs, b.outputs);
  s.seed = 43;
  EXPECT_NE(generate(s).outputs, a.outputs);
}

TEST(Generate, AffineAppendsOnesRow) {
  GenSpec s;
  s.regressor_kind = RegressorKind::affine_gaussian;
  s.n = 3;
  s.samples = 20;
  const Dataset d = generate(s);
  ASSERT_EQ(d.dim(), 3);
  EXPECT_TRUE(d.regressors.row(2).isOnes());
}

TEST(Generate, SnrMatchesRealizedNoise) {
  GenSpec s;
  s.n = 4;
  s.samples = 400;
  s.noise_snr_db = 20.0;
  s.seed = 3;
  const Dataset d = generate(s);
  const Vector clean = d.regressors.transpose() * d.truth->theta0;
  const double snr = 10.0 * std::log10(clean.squaredNorm() / d.truth->noise.squaredNorm());
  EXPECT_NEAR(snr, 20.0, 1.0);
  EXPECT_NO_THROW(d.validate());
}

TEST(Generate, ArxIdentityHolds) {
  GenSpec s;
  s.regressor_kind = RegressorKind::arx;
  s.arx_params = ArxParams{2, 1, 1, Vector(2), Vector(2)};
  s.arx_params->a << -0.4, 0.25;
  s.arx_params->b << 0.0, -0.15;
  s.n = 4;
  s.samples = 80;
  s.outlier_fraction = 0.2;
  s.seed = 11;
  const Dataset d = generate(s);
  EXPECT_EQ(d.dim(), 4);
  EXPECT_EQ(d.samples(), 80);
  const Vector lhs = d.outputs - d.regressors.transpose() * d.truth->theta0 - d.truth->gross;
  EXPECT_LT(lhs.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Generate, InvalidSpecsThrow) {
  GenSpec s;
  s.outlier_fraction = 1.5;
  EXPECT_THROW(generate(s), InvalidArgument);
  s = GenSpec{};
  s.regressor_kind = RegressorKind::arx;
  EXPECT_THROW(generate(s), InvalidArgument);
  s = GenSpec{};
  s.regressor_kind = RegressorKind::arx;
  s.arx_params = ArxParams{2, 2, 1, Vector::Zero(2), Vector::Zero(3)};
  s.n = 4;
  EXPECT_THROW(generate(s), InvalidArgument);
  s = GenSpec{};
  s.outlier_fraction = 0.2;
  s.outlier_std = 0.0;
  EXPECT_THROW(generate(s), InvalidArgument);
}

TEST(Generate, UnstableArxIsNumericalError) {
  GenSpec s;
  s.regressor_kind = RegressorKind::arx;
  s.arx_params = ArxParams{1, 0, 1, Vector::Constant(1, 50.0), Vector::Ones(1)};
  s.n = 2;
  s.samples = 400;
  EXPECT_THROW(generate(s), NumericalError);
}

TEST(Generate, StableArxSampler) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ArxParams p = sample_stable_arx(2, 2, seed);
    Matrix companion = Matrix::Zero(2, 2);
    companion.row(0) = p.a.transpose();
    companion(1, 0) = 1.0;
    EXPECT_LT(companion.eigenvalues().cwiseAbs().maxCoeff(), 0.95 + 1e-12);
    EXPECT_EQ(p.b.size(), 3);
  }
}

TEST(Generate, MultiIdentity) {
  GenSpec s;
  s.n = 3;
  s.samples = 40;
  s.outlier_fraction = 0.25;
  s.seed = 2;
  const MultiDataset d = generate_multi(2, s);
  EXPECT_EQ(d.outputs_dim(), 2);
  const Matrix lhs = d.outputs - d.truth->a0 * d.regressors - d.truth->gross;
  EXPECT_LT(lhs.cwiseAbs().maxCoeff(), 1e-12);
  Index corrupted = 0;
  for (Index t = 0; t < 40; ++t) corrupted += !d.truth->gross.col(t).isZero();
  EXPECT_EQ(corrupted, 10);
}

TEST(DatasetValidate, RejectsBrokenTruth) {
  GenSpec s;
  s.n = 2;
  s.samples = 10;
  Dataset d = generate(s);
  EXPECT_NO_THROW(d.validate());
  d.outputs(0) += 1.0;
  EXPECT_THROW(d.validate(), InvalidArgument);
  Dataset e;
  e.regressors = Matrix::Ones(2, 3);
  e.outputs = Vector::Ones(4);
  EXPECT_THROW(e.validate(), InvalidArgument);
}

TEST(Csv, RoundTrip) {
  GenSpec s;
  s.n = 3;
  s.samples = 12;
  s.outlier_fraction = 0.25;
  s.seed = 4;
  const Dataset d = generate(s);
  std::stringstream ss;
  write_dataset_csv(ss, d, "made by a test");
  const std::string text = ss.str();
  EXPECT_EQ(text.rfind("# made by a test", 0), 0u);
  EXPECT_NE(text.find("y,x1,x2,x3"), std::string::npos);
  const Dataset back = read_dataset_csv(ss);
  EXPECT_EQ(back.regressors, d.regressors);
  EXPECT_EQ(back.outputs, d.outputs);
}

TEST(Csv, MalformedThrows) {
  std::stringstream a("y,x1\n1,2\n3\n");
  EXPECT_THROW(read_dataset_csv(a), InvalidArgument);
  std::stringstream b("y,x1\n1,abc\n");
  EXPECT_THROW(read_dataset_csv(b), InvalidArgument);
  std::stringstream c("");
  EXPECT_THROW(read_dataset_csv(c), InvalidArgument);
}

TEST(Csv, TruthSidecars) {
  const auto dir = std::filesystem::temp_directory_path() / "robl1_sidecar_test";
  std::filesystem::create_directories(dir);
  GenSpec s;
  s.n = 2;
  s.samples = 8;
  s.outlier_fraction = 0.25;
  const Dataset d = generate(s);
  const auto path = dir / "data.csv";
  write_dataset(path, d);
  write_truth_sidecars(path, *d.truth);
  EXPECT_TRUE(std::filesystem::exists(dir / "theta0.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "f.csv"));
  EXPECT_TRUE(read_vector(dir / "theta0.csv").isApprox(d.truth->theta0));
  EXPECT_EQ(read_vector(dir / "f.csv"), d.truth->gross);
  std::filesystem::remove_all(dir);
}

TEST(Rng, CounterStreamsAreIndependentAndStable) {
  CounterRng a(7, "regressors"), b(7, "regressors"), c(7, "noise");
  for (int i = 0; i < 10; ++i) {
    const auto va = a(), vb = b();
    EXPECT_EQ(va, vb);
    EXPECT_NE(va, c());
  }
  CounterRng u(1, "u");
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double z = u.normal();
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.05);
  EXPECT_NEAR(sq / n, 1.0, 0.05);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto v = u.below(10);
    EXPECT_LT(v, 10u);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 10u);
}

TEST(Linalg, ProjectorIdentities) {
  Matrix x(2, 5);
  x << 1, 0, 2, -1, 3, 0, 1, 1, 4, -2;
  const Matrix p = hat_matrix(x);
  const Matrix psi = residual_projector(x);
  EXPECT_LT((psi * psi - psi).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((psi - psi.transpose()).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((psi * x.transpose()).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NEAR(p.trace(), 2.0, 1e-12);
  EXPECT_EQ(numerical_rank(x), 2);
  Matrix deficient(2, 3);
  deficient << 1, 2, 3, 2, 4, 6;
  EXPECT_FALSE(has_full_row_rank(deficient));
  EXPECT_DOUBLE_EQ(median({3.0, 1.0, 2.0}), 2.0);
}
