#include "patchbound/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace patchbound {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

using nlohmann::json;

json matrix_to_json(const CMatrix& m) {
  json re = json::array(), im = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json rr = json::array(), ir = json::array();
    for (Index j = 0; j < m.cols(); ++j) {
      rr.push_back(m(i, j).real());
      ir.push_back(m(i, j).imag());
    }
    re.push_back(rr);
    im.push_back(ir);
  }
  return json{{"re", re}, {"im", im}};
}

CMatrix matrix_from_json(const json& j) {
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  const Index rows = static_cast<Index>(re.size());
  const Index cols = rows ? static_cast<Index>(re[0].size()) : 0;
  if (static_cast<Index>(im.size()) != rows) throw std::invalid_argument("matrix_from_json: re/im shape mismatch");
  CMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    if (static_cast<Index>(re[i].size()) != cols || static_cast<Index>(im[i].size()) != cols)
      throw std::invalid_argument("matrix_from_json: ragged rows");
    for (Index k = 0; k < cols; ++k) m(i, k) = cplx(re[i][k].get<double>(), im[i][k].get<double>());
  }
  return m;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

template <class T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T take(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) throw std::runtime_error("read_mps: truncated file");
  return value;
}

void put_slice(std::string& out, const CMatrix& m) {
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) {
      put(out, m(i, j).real());
      put(out, m(i, j).imag());
    }
}

CMatrix take_slice(std::istream& in, Index rows, Index cols) {
  CMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) {
      const double re = take<double>(in);
      m(i, j) = cplx(re, take<double>(in));
    }
  return m;
}

void write_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write to " + path + " failed");
}

constexpr char kMpsMagic[8] = {'P', 'B', 'M', 'P', 'S', '0', '0', '1'};

}  // namespace

std::uint64_t model_hash(const SpinChainModel& model) {
  std::string bytes = model.name();
  put(bytes, static_cast<std::int32_t>(model.n_sites));
  put(bytes, static_cast<std::int32_t>(model.local_dim));
  put(bytes, model.params.h);
  put(bytes, model.params.alpha);
  put(bytes, model.params.field_seed);
  put(bytes, model.params.field_min);
  put(bytes, model.params.field_max);
  for (const double f : model.fields) put(bytes, f);
  return fnv1a64(bytes);
}

json model_to_json(const SpinChainModel& model) {
  std::ostringstream hash;
  hash << std::hex << std::setw(16) << std::setfill('0') << model_hash(model);
  return json{{"name", model.name()},
              {"n_sites", model.n_sites},
              {"local_dim", model.local_dim},
              {"params",
               {{"h", model.params.h},
                {"alpha", model.params.alpha},
                {"field_seed", model.params.field_seed},
                {"field_min", model.params.field_min},
                {"field_max", model.params.field_max}}},
              {"fields", model.fields},
              {"hash", hash.str()}};
}

SpinChainModel model_from_json(const json& j) {
  ModelParams params;
  const auto& p = j.at("params");
  params.h = p.at("h").get<double>();
  params.alpha = p.at("alpha").get<double>();
  params.field_seed = p.at("field_seed").get<std::uint64_t>();
  params.field_min = p.at("field_min").get<double>();
  params.field_max = p.at("field_max").get<double>();
  SpinChainModel model =
      build_model(parse_model_kind(j.at("name").get<std::string>()), j.at("n_sites").get<int>(), params);
  if (j.contains("fields") && j.at("fields").get<std::vector<double>>() != model.fields)
    throw std::invalid_argument("model_from_json: stored fields differ from the rebuilt model");
  return model;
}

json observable_to_json(const ObservableSpec& observable) {
  return json{{"kind", to_string(observable.kind)},
              {"first_site", observable.first_site},
              {"local_dim", observable.local_dim},
              {"rank", observable.rank},
              {"seed", observable.seed},
              {"matrix", matrix_to_json(observable.matrix)}};
}

ObservableSpec observable_from_json(const json& j) {
  ObservableSpec o;
  o.kind = parse_observable_kind(j.at("kind").get<std::string>());
  o.first_site = j.at("first_site").get<int>();
  o.local_dim = j.at("local_dim").get<int>();
  o.rank = j.at("rank").get<int>();
  o.seed = j.at("seed").get<std::uint64_t>();
  o.matrix = matrix_from_json(j.at("matrix"));
  const Index dim = o.local_dim * o.local_dim;
  if (o.matrix.rows() != dim || o.matrix.cols() != dim)
    throw std::invalid_argument("observable_from_json: matrix is not d^2 x d^2");
  return o;
}

json bound_result_to_json(const BoundResult& r, const json& model) {
  return json{{"method", to_string(r.method)},
              {"l", r.l},
              {"q", r.q},
              {"k_min", r.k_min},
              {"k_max", r.k_max},
              {"half_width", r.half_width()},
              {"oracle", r.oracle ? json(*r.oracle) : json(nullptr)},
              {"seeds", {{"upper", r.seed_upper}, {"lower", r.seed_lower}}},
              {"generators", {{"upper", r.generators_upper}, {"lower", r.generators_lower}, {"count", r.generator_count}}},
              {"notes", r.notes},
              {"model", model}};
}

void write_mps(const std::string& path, const MpsState& mps) {
  std::string out(kMpsMagic, sizeof(kMpsMagic));
  put(out, static_cast<std::uint32_t>(mps.n_sites));
  put(out, static_cast<std::uint32_t>(mps.local_dim));
  put(out, static_cast<std::int32_t>(mps.center));
  put(out, mps.model_hash);
  for (const int b : mps.bond_dims()) put(out, static_cast<std::uint32_t>(b));
  for (const auto& site : mps.tensors)
    for (const auto& slice : site) put_slice(out, slice);
  write_bytes(path, out);
}

MpsState read_mps(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_mps: cannot open " + path);
  char magic[sizeof(kMpsMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMpsMagic, sizeof(magic)) != 0)
    throw std::runtime_error("read_mps: " + path + " is not a PBMPS001 file");
  MpsState mps;
  mps.n_sites = static_cast<int>(take<std::uint32_t>(in));
  mps.local_dim = static_cast<int>(take<std::uint32_t>(in));
  mps.center = take<std::int32_t>(in);
  mps.model_hash = take<std::uint64_t>(in);
  if (mps.n_sites < 1 || mps.local_dim < 1 || mps.center < -1 || mps.center >= mps.n_sites)
    throw std::runtime_error("read_mps: invalid header");
  std::vector<Index> dims(mps.n_sites + 1);
  for (auto& d : dims) {
    d = take<std::uint32_t>(in);
    if (d < 1 || d > (1 << 20)) throw std::runtime_error("read_mps: invalid bond dimension");
  }
  mps.tensors.resize(mps.n_sites);
  for (int s = 0; s < mps.n_sites; ++s) {
    mps.tensors[s].resize(mps.local_dim);
    for (auto& slice : mps.tensors[s]) slice = take_slice(in, dims[s], dims[s + 1]);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw std::runtime_error("read_mps: trailing bytes");
  return mps;
}

void write_subspace(const std::string& stem, const PatchSubspace& sub) {
  if (!sub.basis) throw std::length_error("write_subspace: basis not materialized");
  const auto weights = [](const RVector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  const json header{{"window", {sub.window.first, sub.window.last}},
                    {"interior", {sub.interior.first, sub.interior.last}},
                    {"local_dim", sub.local_dim},
                    {"q", sub.q},
                    {"rows", sub.basis->rows()},
                    {"keep_left", sub.keep_left},
                    {"keep_right", sub.keep_right},
                    {"left_weights", weights(sub.left_weights)},
                    {"right_weights", weights(sub.right_weights)}};
  std::ostringstream text;
  text << std::setprecision(std::numeric_limits<double>::max_digits10) << header.dump(2) << '\n';
  write_bytes(stem + ".json", text.str());
  std::string bin;
  put_slice(bin, *sub.basis);
  write_bytes(stem + ".bin", bin);
}

CMatrix read_subspace_basis(const std::string& stem) {
  std::ifstream hin(stem + ".json");
  if (!hin) throw std::runtime_error("read_subspace_basis: cannot open " + stem + ".json");
  const json header = json::parse(hin);
  std::ifstream in(stem + ".bin", std::ios::binary);
  if (!in) throw std::runtime_error("read_subspace_basis: cannot open " + stem + ".bin");
  return take_slice(in, header.at("rows").get<Index>(), header.at("q").get<Index>());
}

std::string two_column_csv(const std::string& x_name, const std::string& y_name, const std::vector<double>& x,
                           const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("two_column_csv: column lengths differ");
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << x_name << ',' << y_name << '\n';
  for (std::size_t i = 0; i < x.size(); ++i) os << x[i] << ',' << y[i] << '\n';
  return os.str();
}

}  // namespace patchbound
