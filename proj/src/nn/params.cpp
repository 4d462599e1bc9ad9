#include "influence/nn/params.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "influence/util/bytes.hpp"

namespace influence::nn {

namespace {

constexpr char kMagic[8] = {'I', 'N', 'F', 'L', 'C', 'K', 'P', 'T'};

std::uint32_t crc_of(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

Mat& ParamBundle::add(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
  if (contains(name)) throw std::invalid_argument("duplicate parameter '" + name + "'");
  index_[name] = tensors_.size();
  names_.push_back(name);
  tensors_.push_back(Mat::Zero(rows, cols));
  return tensors_.back();
}

Mat& ParamBundle::operator[](const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter '" + name + "'");
  return tensors_[it->second];
}

const Mat& ParamBundle::operator[](const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter '" + name + "'");
  return tensors_[it->second];
}

std::size_t ParamBundle::size() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += static_cast<std::size_t>(t.size());
  return n;
}

double& ParamBundle::flat(std::size_t i) {
  for (auto& t : tensors_) {
    const auto n = static_cast<std::size_t>(t.size());
    if (i < n) return t.data()[i];
    i -= n;
  }
  throw std::out_of_range("flat parameter index out of range");
}

double ParamBundle::flat(std::size_t i) const { return const_cast<ParamBundle*>(this)->flat(i); }

ParamBundle ParamBundle::zeros_like() const {
  ParamBundle out;
  for (std::size_t i = 0; i < tensors_.size(); ++i) out.add(names_[i], tensors_[i].rows(), tensors_[i].cols());
  return out;
}

void ParamBundle::set_zero() {
  for (auto& t : tensors_) t.setZero();
}

bool ParamBundle::all_finite() const {
  for (const auto& t : tensors_)
    if (!t.allFinite()) return false;
  return true;
}

bool ParamBundle::same_shapes(const ParamBundle& other) const {
  if (names_ != other.names_) return false;
  for (std::size_t i = 0; i < tensors_.size(); ++i)
    if (tensors_[i].rows() != other.tensors_[i].rows() || tensors_[i].cols() != other.tensors_[i].cols())
      return false;
  return true;
}

void ParamBundle::copy_from(const ParamBundle& src, const std::string& prefix) {
  for (std::size_t i = 0; i < src.tensors_.size(); ++i) {
    if (src.names_[i].rfind(prefix, 0) != 0) continue;
    Mat& dst = (*this)[src.names_[i]];
    if (dst.rows() != src.tensors_[i].rows() || dst.cols() != src.tensors_[i].cols())
      throw std::invalid_argument("shape mismatch copying '" + src.names_[i] + "'");
    dst = src.tensors_[i];
  }
}

ParamBundle ParamBundle::subset(const std::string& prefix) const {
  ParamBundle out;
  for (std::size_t i = 0; i < tensors_.size(); ++i)
    if (names_[i].rfind(prefix, 0) == 0) out.add(names_[i], 0, 0) = tensors_[i];
  return out;
}

void ParamBundle::merge(const ParamBundle& other) {
  for (std::size_t i = 0; i < other.tensors_.size(); ++i) add(other.names_[i], 0, 0) = other.tensors_[i];
}

void ParamBundle::axpy(double scale, const ParamBundle& other) {
  if (!same_shapes(other)) throw std::invalid_argument("axpy: bundles differ in shape");
  for (std::size_t i = 0; i < tensors_.size(); ++i) tensors_[i] += scale * other.tensors_[i];
}

bool operator==(const ParamBundle& a, const ParamBundle& b) {
  if (!a.same_shapes(b)) return false;
  for (std::size_t i = 0; i < a.tensors_.size(); ++i)
    if (a.tensors_[i] != b.tensors_[i]) return false;
  return true;
}

void init_uniform_fan_in(Mat& m, Eigen::Index fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<Eigen::Index>(fan_in, 1)));
  std::uniform_real_distribution<double> u(-bound, bound);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
}

void init_orthogonal_blocks(Mat& m, Rng& rng) {
  const Eigen::Index n = m.rows();
  if (n == 0 || m.cols() % n != 0) throw std::invalid_argument("orthogonal init needs rows dividing cols");
  std::normal_distribution<double> g(0.0, 1.0);
  for (Eigen::Index b = 0; b < m.cols() / n; ++b) {
    Mat x(n, n);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
    Eigen::HouseholderQR<Mat> qr(x);
    Mat q = qr.householderQ() * Mat::Identity(n, n);
    const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < n; ++j)
      if (r(j, j) < 0) q.col(j) *= -1.0;
    m.middleCols(b * n, n) = q;
  }
}

std::string serialize_checkpoint(const Checkpoint& ck) {
  ByteWriter w;
  w.put_bytes(kMagic, sizeof kMagic);
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put_string(ck.meta.dump());
  w.put<std::uint64_t>(ck.params.tensor_count());
  for (std::size_t i = 0; i < ck.params.tensor_count(); ++i) {
    const Mat& t = ck.params.tensor(i);
    w.put_string(ck.params.name(i));
    w.put<std::int64_t>(t.rows());
    w.put<std::int64_t>(t.cols());
    w.put_bytes(t.data(), sizeof(double) * static_cast<std::size_t>(t.size()));
  }
  std::string bytes = w.take();
  const std::uint32_t crc = crc_of(bytes);
  bytes.append(reinterpret_cast<const char*>(&crc), sizeof crc);
  return bytes;
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof kMagic + 8 || bytes.compare(0, sizeof kMagic, kMagic, sizeof kMagic) != 0)
    throw CheckpointError("not a checkpoint file");
  std::uint32_t version;
  std::memcpy(&version, bytes.data() + sizeof kMagic, sizeof version);
  if (version != kCheckpointVersion) throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  const std::string_view body(bytes.data(), bytes.size() - sizeof(std::uint32_t));
  std::uint32_t stored;
  std::memcpy(&stored, bytes.data() + body.size(), sizeof stored);
  if (crc_of(body) != stored) throw CheckpointError("checkpoint checksum mismatch");
  try {
    ByteReader r(body);
    r.view(sizeof kMagic + sizeof(std::uint32_t));
    Checkpoint ck;
    ck.meta = nlohmann::json::parse(r.get_string());
    const auto n = r.get<std::uint64_t>();
    for (std::uint64_t i = 0; i < n; ++i) {
      const std::string name = r.get_string();
      const auto rows = r.get<std::int64_t>();
      const auto cols = r.get<std::int64_t>();
      if (rows < 0 || cols < 0) throw CheckpointError("negative tensor shape");
      Mat& t = ck.params.add(name, rows, cols);
      r.get_bytes(t.data(), sizeof(double) * static_cast<std::size_t>(t.size()));
    }
    if (r.remaining() != 0) throw CheckpointError("trailing bytes in checkpoint");
    return ck;
  } catch (const TruncatedInput&) {
    throw CheckpointError("checkpoint is truncated");
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("checkpoint metadata is malformed: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(ck);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_checkpoint(ss.str());
}

}  // namespace influence::nn
