#include "skewmix/chain_io.hpp"

#include "skewmix/error.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>

namespace skewmix {

namespace {

constexpr char kMagic[8] = {'S', 'K', 'M', 'C', 'H', 'A', 'I', 'N'};
constexpr std::size_t kNameBytes = 16;

enum DType : std::uint32_t { kF64 = 0, kI32 = 1 };

struct Field {
  std::string name;
  DType dtype;
  std::uint64_t count;
};

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::array<unsigned char, sizeof(T)> b;
    std::memcpy(b.data(), &v, sizeof(T));
    std::reverse(b.begin(), b.end());
    std::memcpy(&v, b.data(), sizeof(T));
    return v;
  }
}

class Writer {
 public:
  explicit Writer(const std::string& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot open '" + path + "' for writing");
  }
  template <typename T>
  void put(T v) {
    v = to_little(v);
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void bytes(const char* p, std::size_t n) { out_.write(p, static_cast<std::streamsize>(n)); }
  void finish() {
    out_.flush();
    if (!out_) throw IoError("write to '" + path_ + "' failed");
  }

 private:
  std::string path_;
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open '" + path + "'");
  }
  template <typename T>
  T get() {
    T v;
    bytes(reinterpret_cast<char*>(&v), sizeof(T));
    return to_little(v);
  }
  void bytes(char* p, std::size_t n) {
    in_.read(p, static_cast<std::streamsize>(n));
    if (!in_) throw ParseError("'" + path_ + "': truncated chain file");
  }
  void skip(std::size_t n) {
    in_.seekg(static_cast<std::streamoff>(n), std::ios::cur);
    if (!in_) throw ParseError("'" + path_ + "': truncated chain file");
  }

 private:
  std::string path_;
  std::ifstream in_;
};

std::vector<Field> fields_for(int n, int p, int J, int K) {
  const auto u = [](long long v) { return static_cast<std::uint64_t>(v); };
  return {
      {"iteration", kI32, 1},
      {"log_weights", kF64, u(1LL * J * K)},
      {"T", kI32, u(n)},
      {"xi", kF64, u(1LL * K * J * p)},
      {"xi0", kF64, u(1LL * K * p)},
      {"G", kF64, u(1LL * K * p * p)},
      {"psi", kF64, u(1LL * K * p)},
      {"E", kF64, u(1LL * K * p * p)},
      {"eta", kF64, 1},
      {"z", kF64, u(n)},
  };
}

void put_matrix(Writer& w, const Mat& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) w.put(m(r, c));
  }
}

void get_matrix(Reader& r, Mat& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(i, c) = r.get<double>();
  }
}

}  // namespace

void write_chain(const std::string& path, const std::vector<ChainState>& snapshots,
                 const std::vector<int>& iterations) {
  if (snapshots.size() != iterations.size()) {
    throw InvalidParameter("write_chain: snapshots and iterations differ in length");
  }
  int n = 0, p = 0, J = 0, K = 0;
  if (!snapshots.empty()) {
    n = snapshots[0].n();
    p = snapshots[0].p();
    J = snapshots[0].J();
    K = snapshots[0].K();
  }
  for (const auto& s : snapshots) {
    if (s.n() != n || s.p() != p || s.J() != J || s.K() != K) {
      throw InvalidParameter("write_chain: snapshots have inconsistent dimensions");
    }
  }
  const auto fields = fields_for(n, p, J, K);
  Writer w(path);
  w.bytes(kMagic, sizeof(kMagic));
  w.put(kChainFormatVersion);
  w.put(static_cast<std::uint32_t>(fields.size()));
  for (long long d : {n, p, J, K, static_cast<int>(snapshots.size())}) w.put(static_cast<std::int64_t>(d));
  for (const auto& f : fields) {
    char name[kNameBytes] = {};
    std::memcpy(name, f.name.data(), std::min(f.name.size(), kNameBytes - 1));
    w.bytes(name, kNameBytes);
    w.put(static_cast<std::uint32_t>(f.dtype));
    w.put(f.count);
  }
  for (std::size_t s = 0; s < snapshots.size(); ++s) {
    const ChainState& st = snapshots[s];
    w.put(static_cast<std::int32_t>(iterations[s]));
    put_matrix(w, st.log_weights);
    for (int t : st.T) w.put(static_cast<std::int32_t>(t));
    for (int k = 0; k < K; ++k) put_matrix(w, st.xi[static_cast<std::size_t>(k)]);
    put_matrix(w, st.xi0);
    for (int k = 0; k < K; ++k) put_matrix(w, st.G[static_cast<std::size_t>(k)]);
    put_matrix(w, st.psi);
    for (int k = 0; k < K; ++k) put_matrix(w, st.E[static_cast<std::size_t>(k)]);
    w.put(st.eta);
    for (Eigen::Index i = 0; i < st.z.size(); ++i) w.put(st.z[i]);
  }
  w.finish();
}

ChainFile read_chain(const std::string& path) {
  Reader r(path);
  char magic[8];
  r.bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError("'" + path + "' is not a chain file");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kChainFormatVersion) {
    throw ParseError("'" + path + "': unsupported chain format version " + std::to_string(version));
  }
  const auto nfields = r.get<std::uint32_t>();
  std::int64_t dims[5];
  for (auto& d : dims) d = r.get<std::int64_t>();
  for (auto d : dims) {
    if (d < 0 || d > (1LL << 31)) throw ParseError("'" + path + "': bad dimension block");
  }
  ChainFile cf;
  cf.n = static_cast<int>(dims[0]);
  cf.p = static_cast<int>(dims[1]);
  cf.J = static_cast<int>(dims[2]);
  cf.K = static_cast<int>(dims[3]);
  const auto records = static_cast<std::size_t>(dims[4]);

  std::vector<Field> table(nfields);
  for (auto& f : table) {
    char name[kNameBytes + 1] = {};
    r.bytes(name, kNameBytes);
    f.name = name;
    f.dtype = static_cast<DType>(r.get<std::uint32_t>());
    f.count = r.get<std::uint64_t>();
    if (f.dtype != kF64 && f.dtype != kI32) {
      throw ParseError("'" + path + "': field '" + f.name + "' has unknown type");
    }
  }
  const auto expected = fields_for(cf.n, cf.p, cf.J, cf.K);
  for (const auto& e : expected) {
    const auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return f.name == e.name; });
    if (it == table.end()) throw ParseError("'" + path + "': missing field '" + e.name + "'");
    if (it->dtype != e.dtype || it->count != e.count) {
      throw ParseError("'" + path + "': field '" + e.name + "' has the wrong shape");
    }
  }

  const int n = cf.n, p = cf.p, J = cf.J, K = cf.K;
  cf.snapshots.reserve(records);
  for (std::size_t s = 0; s < records; ++s) {
    ChainState st;
    st.log_weights.resize(J, K);
    st.T.resize(static_cast<std::size_t>(n));
    st.xi.assign(static_cast<std::size_t>(K), Mat(J, p));
    st.xi0.resize(K, p);
    st.G.assign(static_cast<std::size_t>(K), Mat(p, p));
    st.psi.resize(K, p);
    st.E.assign(static_cast<std::size_t>(K), Mat(p, p));
    st.z.resize(n);
    int iteration = 0;
    for (const auto& f : table) {
      const std::string& nm = f.name;
      if (nm == "iteration") {
        iteration = r.get<std::int32_t>();
      } else if (nm == "log_weights") {
        get_matrix(r, st.log_weights);
      } else if (nm == "T") {
        for (auto& t : st.T) {
          t = r.get<std::int32_t>();
          if (t < 0 || t >= K) throw ParseError("'" + path + "': label out of range");
        }
      } else if (nm == "xi") {
        for (auto& m : st.xi) get_matrix(r, m);
      } else if (nm == "xi0") {
        get_matrix(r, st.xi0);
      } else if (nm == "G") {
        for (auto& m : st.G) get_matrix(r, m);
      } else if (nm == "psi") {
        get_matrix(r, st.psi);
      } else if (nm == "E") {
        for (auto& m : st.E) get_matrix(r, m);
      } else if (nm == "eta") {
        st.eta = r.get<double>();
      } else if (nm == "z") {
        for (Eigen::Index i = 0; i < n; ++i) st.z[i] = r.get<double>();
      } else {
        r.skip(f.count * (f.dtype == kF64 ? 8 : 4));
      }
    }
    cf.iterations.push_back(iteration);
    cf.snapshots.push_back(std::move(st));
  }
  return cf;
}

}  // namespace skewmix
