#ifndef PEM_BINARY_IO_HPP
#define PEM_BINARY_IO_HPP

#include <string>

#include "pem/datagen.hpp"
#include "pem/online.hpp"

namespace pem {

/// Generated data as stored in a "PEMB" container.
struct DataDump {
  SourceDomain domain = SourceDomain::Antisparse;
  Matrix S;  // n x T
  Matrix A;  // m x n
  Matrix X;  // m x T
};

/// Layout: "PEMB", u32 version, u32 n, u32 m, u64 T, u32 length + bytes of
/// the domain name, then S, A, X as row-major little-endian f64.
void write_data(const std::string& path, const DataDump& d);
DataDump read_data(const std::string& path);

/// Layout: "PEMS", u32 version, u32 n, u32 m, u64 t, then W (row-major),
/// mu_hat, v_hat, the strict upper triangle of c_hat row by row, lambda_L.
void save_state(const std::string& path, const PemState& s);
PemState load_state(const std::string& path);

}  // namespace pem

#endif  // PEM_BINARY_IO_HPP
