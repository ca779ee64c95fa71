#include "pem/domains.hpp"

namespace pem {

std::string_view to_string(SourceDomain d) noexcept {
  switch (d) {
    case SourceDomain::Antisparse: return "antisparse";
    case SourceDomain::NonnegAntisparse: return "nn_antisparse";
    case SourceDomain::Sparse: return "sparse";
    case SourceDomain::NonnegSparse: return "nn_sparse";
    case SourceDomain::Simplex: return "simplex";
  }
  return "unknown";
}

SourceDomain parse_domain(std::string_view name) {
  for (auto d : {SourceDomain::Antisparse, SourceDomain::NonnegAntisparse, SourceDomain::Sparse,
                 SourceDomain::NonnegSparse, SourceDomain::Simplex})
    if (to_string(d) == name) return d;
  throw InvalidInput("unknown source domain '" + std::string(name) + "'");
}

}  // namespace pem
