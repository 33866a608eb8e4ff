#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "gflm/io.hpp"
#include "gflm/simulation.hpp"
#include "expect_error.hpp"

using namespace gflm;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("gflm_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                         "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(DatasetCsv, RoundTrip) {
  TempDir dir;
  SimDesign d;
  d.n = 25;
  const FunctionalDataset ds = generate_sample(d, 1);
  write_dataset_csv(ds, dir.file("a.csv"));
  const FunctionalDataset back = read_dataset_csv(dir.file("a.csv"));
  EXPECT_EQ(back.n(), 25u);
  EXPECT_TRUE(back.grid() == ds.grid());
  EXPECT_EQ(back.curves(), ds.curves());
  EXPECT_EQ(back.responses(), ds.responses());
  EXPECT_EQ(back.ids(), ds.ids());
  EXPECT_EQ(back.response_kind(), ResponseKind::kBinary);
}

TEST(DatasetCsv, GridFileWithoutHeader) {
  TempDir dir;
  write(dir.file("g.txt"), "0 0.5\n1\n");
  write(dir.file("d.csv"), "s1,2,1,2,3\ns2,0,4,5,6\n");
  const FunctionalDataset ds = read_dataset_csv(dir.file("d.csv"), dir.file("g.txt"));
  EXPECT_EQ(ds.m(), 3u);
  EXPECT_EQ(ds.response_kind(), ResponseKind::kCount);
  EXPECT_EQ(ds.curves()(1, 2), 6.0);
  EXPECT_EQ(ds.ids()[0], "s1");
}

TEST(DatasetCsv, KindInference) {
  TempDir dir;
  write(dir.file("d.csv"), "id,y,0,1\na,0.5,1,2\nb,1,3,4\n");
  EXPECT_EQ(read_dataset_csv(dir.file("d.csv")).response_kind(), ResponseKind::kContinuous);
  EXPECT_EQ(read_dataset_csv(dir.file("d.csv"), {}, ResponseKind::kContinuous).n(), 2u);
}

TEST(DatasetCsv, ErrorsNameTheLine) {
  TempDir dir;
  write(dir.file("d.csv"), "id,y,0,1\na,0,1,2\nb,1,3\n");
  const std::string msg = message_of([&] { read_dataset_csv(dir.file("d.csv")); });
  EXPECT_NE(msg.find("d.csv:3:"), std::string::npos) << msg;
  EXPECT_EQ(kind_of([&] { read_dataset_csv(dir.file("d.csv")); }), ErrorKind::kParse);

  write(dir.file("e.csv"), "id,y,0,1\na,0,1,x\n");
  EXPECT_NE(message_of([&] { read_dataset_csv(dir.file("e.csv")); }).find("e.csv:2:"), std::string::npos);
  write(dir.file("f.csv"), "a,0,1,2\n");
  EXPECT_EQ(kind_of([&] { read_dataset_csv(dir.file("f.csv")); }), ErrorKind::kParse);
  write(dir.file("h.csv"), "id,y,0,1\n");
  EXPECT_EQ(kind_of([&] { read_dataset_csv(dir.file("h.csv")); }), ErrorKind::kParse);
  EXPECT_EQ(kind_of([&] { read_dataset_csv(dir.file("missing.csv")); }), ErrorKind::kParse);
  write(dir.file("u.csv"), "id,y,0,0\na,0,1,2\n");
  EXPECT_EQ(kind_of([&] { read_dataset_csv(dir.file("u.csv")); }), ErrorKind::kInvalidInput);
}

TEST(BasisCsv, RoundTripWithEigenvalues) {
  TempDir dir;
  SimDesign d;
  d.n = 80;
  const auto [ds, mean] = center_dataset(generate_sample(d, 0));
  const Basis b = eigenbasis(estimate_covariance(ds), ds.grid(), ds.weight(), 4);
  write_basis_csv(b, dir.file("b.csv"));
  ASSERT_TRUE(fs::exists(dir.file("b.csv.eigenvalues")));
  const Basis back = read_basis_csv(dir.file("b.csv"));
  EXPECT_LT((back.functions() - b.functions()).cwiseAbs().maxCoeff(), 1e-15);
  ASSERT_TRUE(back.eigenvalues().has_value());
  EXPECT_LT((*back.eigenvalues() - *b.eigenvalues()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(BasisCsv, FourierHasNoSidecar) {
  TempDir dir;
  write_basis_csv(fourier_basis(3, TimeGrid::uniform(0, 1, 101)), dir.file("f.csv"));
  EXPECT_FALSE(fs::exists(dir.file("f.csv.eigenvalues")));
  EXPECT_EQ(read_basis_csv(dir.file("f.csv"), BasisKind::kFourier).size(), 3u);
}

TEST(Config, KeyValueFile) {
  TempDir dir;
  write(dir.file("c.cfg"), "# fit settings\nlink = logit\n  p=6  # order\n\nalpha = 0.05\n");
  const auto kv = read_config(dir.file("c.cfg"));
  EXPECT_EQ(kv.size(), 3u);
  EXPECT_EQ(kv.at("p"), "6");
  EXPECT_EQ(kv.at("link"), "logit");
}

TEST(Config, DuplicatesAndMalformedLines) {
  TempDir dir;
  write(dir.file("dup.cfg"), "p = 3\nlink = logit\np = 4\n");
  EXPECT_EQ(kind_of([&] { read_config(dir.file("dup.cfg")); }), ErrorKind::kConfig);
  EXPECT_NE(message_of([&] { read_config(dir.file("dup.cfg")); }).find("dup.cfg:3:"), std::string::npos);
  write(dir.file("bad.cfg"), "p 3\n");
  EXPECT_EQ(kind_of([&] { read_config(dir.file("bad.cfg")); }), ErrorKind::kConfig);
}

TEST(SplitFields, TrimsWhitespace) {
  const auto f = split_fields(" a , 1.5,\t2 ,");
  ASSERT_EQ(f.size(), 4u);
  EXPECT_EQ(f[0], "a");
  EXPECT_EQ(f[2], "2");
  EXPECT_EQ(f[3], "");
}
