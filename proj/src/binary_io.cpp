#include "pem/binary_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace pem {

namespace {

constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, T v) {
  static_assert(std::endian::native == std::endian::little, "little-endian host required");
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  os.write(buf, sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  char buf[sizeof(T)];
  if (!is.read(buf, sizeof(T))) throw InvalidInput("truncated binary file");
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

void put_rows(std::ostream& os, const Matrix& M) {
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) put<double>(os, M(i, j));
}

Matrix get_rows(std::istream& is, Eigen::Index rows, Eigen::Index cols) {
  Matrix M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = get<double>(is);
  return M;
}

void expect_magic(std::istream& is, const char* magic) {
  char buf[4];
  if (!is.read(buf, 4) || std::memcmp(buf, magic, 4) != 0)
    throw InvalidInput(std::string("not a ") + magic + " file");
  if (get<std::uint32_t>(is) != kVersion) throw InvalidInput("unsupported file version");
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidInput("cannot open '" + path + "'");
  return is;
}

}  // namespace

void write_data(const std::string& path, const DataDump& d) {
  const Eigen::Index n = d.S.rows();
  const Eigen::Index T = d.S.cols();
  const Eigen::Index m = d.X.rows();
  if (d.A.rows() != m || d.A.cols() != n || d.X.cols() != T)
    throw InvalidInput("inconsistent shapes in data dump");
  std::ofstream os = open_out(path);
  os.write("PEMB", 4);
  put<std::uint32_t>(os, kVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(n));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(m));
  put<std::uint64_t>(os, static_cast<std::uint64_t>(T));
  const std::string_view name = to_string(d.domain);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(name.size()));
  os.write(name.data(), static_cast<std::streamsize>(name.size()));
  put_rows(os, d.S);
  put_rows(os, d.A);
  put_rows(os, d.X);
  if (!os) throw Error("write failed for '" + path + "'");
}

DataDump read_data(const std::string& path) {
  std::ifstream is = open_in(path);
  expect_magic(is, "PEMB");
  const auto n = get<std::uint32_t>(is);
  const auto m = get<std::uint32_t>(is);
  const auto T = static_cast<Eigen::Index>(get<std::uint64_t>(is));
  const auto len = get<std::uint32_t>(is);
  if (len > 64) throw InvalidInput("corrupt domain name");
  std::string name(len, '\0');
  if (!is.read(name.data(), len)) throw InvalidInput("truncated binary file");
  DataDump d;
  d.domain = parse_domain(name);
  d.S = get_rows(is, n, T);
  d.A = get_rows(is, m, n);
  d.X = get_rows(is, m, T);
  return d;
}

void save_state(const std::string& path, const PemState& s) {
  const Eigen::Index n = s.W.rows();
  std::ofstream os = open_out(path);
  os.write("PEMS", 4);
  put<std::uint32_t>(os, kVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(n));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(s.W.cols()));
  put<std::uint64_t>(os, s.t);
  put_rows(os, s.W);
  for (Eigen::Index i = 0; i < n; ++i) put<double>(os, s.mu_hat(i));
  for (Eigen::Index i = 0; i < n; ++i) put<double>(os, s.v_hat(i));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) put<double>(os, s.c_hat(i, j));
  put<double>(os, s.lambda_L);
  if (!os) throw Error("write failed for '" + path + "'");
}

PemState load_state(const std::string& path) {
  std::ifstream is = open_in(path);
  expect_magic(is, "PEMS");
  const auto n = static_cast<Eigen::Index>(get<std::uint32_t>(is));
  const auto m = static_cast<Eigen::Index>(get<std::uint32_t>(is));
  if (n < 1) throw InvalidInput("corrupt state dimension");
  PemState s;
  s.t = get<std::uint64_t>(is);
  s.W = get_rows(is, n, m);
  s.mu_hat.resize(n);
  s.v_hat.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) s.mu_hat(i) = get<double>(is);
  for (Eigen::Index i = 0; i < n; ++i) s.v_hat(i) = get<double>(is);
  s.c_hat = SymmetricMatrix<double>(n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) s.c_hat.set(i, j, get<double>(is));
  s.lambda_L = get<double>(is);
  return s;
}

}  // namespace pem
