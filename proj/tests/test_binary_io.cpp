#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "pem/binary_io.hpp"
#include "test_support.hpp"

using namespace pem;
using pem::test::gaussian;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("pem_test_" + name)).string();
}

}  // namespace

TEST_CASE("data container round trip") {
  std::mt19937_64 gen(1);
  DataDump d;
  d.domain = SourceDomain::NonnegSparse;
  d.S = gaussian(gen, 3, 17);
  d.A = gaussian(gen, 5, 3);
  d.X = d.A * d.S;
  const std::string p = temp_path("data.pemb");
  write_data(p, d);
  const DataDump back = read_data(p);
  CHECK(back.domain == d.domain);
  CHECK(back.S == d.S);
  CHECK(back.A == d.A);
  CHECK(back.X == d.X);

  std::ifstream in(p, std::ios::binary);
  char magic[4];
  in.read(magic, 4);
  CHECK(std::string(magic, 4) == "PEMB");
  std::filesystem::remove(p);
}

TEST_CASE("state checkpoint round trip") {
  std::mt19937_64 gen(2);
  PemState s;
  s.W = gaussian(gen, 3, 4);
  s.mu_hat = gaussian(gen, 3, 1);
  s.v_hat = gaussian(gen, 3, 1).cwiseAbs();
  s.c_hat = SymmetricMatrix<double>(3);
  s.c_hat.set(0, 1, 0.25);
  s.c_hat.set(2, 0, -0.5);
  s.t = 123456789012ull;
  s.lambda_L = 0.125;
  const std::string p = temp_path("state.pems");
  save_state(p, s);
  const PemState back = load_state(p);
  CHECK(back.W == s.W);
  CHECK(back.mu_hat == s.mu_hat);
  CHECK(back.v_hat == s.v_hat);
  CHECK(back.c_hat.dense() == s.c_hat.dense());
  CHECK(back.t == s.t);
  CHECK(back.lambda_L == s.lambda_L);
  std::filesystem::remove(p);
}

TEST_CASE("corrupt containers are rejected") {
  const std::string p = temp_path("bad.bin");
  {
    std::ofstream out(p, std::ios::binary);
    out << "NOPE and some more bytes";
  }
  CHECK_THROWS_AS(read_data(p), Error);
  CHECK_THROWS_AS(load_state(p), Error);

  std::mt19937_64 gen(3);
  DataDump d;
  d.S = gaussian(gen, 2, 8);
  d.A = gaussian(gen, 2, 2);
  d.X = d.A * d.S;
  write_data(p, d);
  std::filesystem::resize_file(p, std::filesystem::file_size(p) - 8);
  CHECK_THROWS_AS(read_data(p), Error);
  std::filesystem::remove(p);
  CHECK_THROWS_AS(read_data(p), Error);
}
