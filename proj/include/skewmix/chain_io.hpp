#pragma once

// Binary chain files.
//
// Layout (all integers and doubles little-endian):
//   magic     8 bytes  "SKMCHAIN"
//   version   u32      (1)
//   nfields   u32
//   n, p, J, K, records   5 x i64
//   field table, nfields entries:
//     name    16 bytes, NUL padded
//     dtype   u32      0 = f64, 1 = i32
//     count   u64      values per record
//   records, each the fields in table order.
//
// Fields of version 1: iteration (i32, 1), log_weights (f64, J*K, row j
// major), T (i32, n, 0-based), xi (f64, K*J*p), xi0 (f64, K*p), G (f64,
// K*p*p), psi (f64, K*p), E (f64, K*p*p), eta (f64, 1), z (f64, n). Matrices
// are stored row-major. A reader skips fields it does not know.

#include "skewmix/model_state.hpp"

#include <string>
#include <vector>

namespace skewmix {

inline constexpr std::uint32_t kChainFormatVersion = 1;

struct ChainFile {
  int n = 0;
  int p = 0;
  int J = 0;
  int K = 0;
  std::vector<ChainState> snapshots;
  std::vector<int> iterations;
};

void write_chain(const std::string& path, const std::vector<ChainState>& snapshots,
                 const std::vector<int>& iterations);
ChainFile read_chain(const std::string& path);

}  // namespace skewmix
