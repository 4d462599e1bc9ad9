#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "influence/nn/kernels.hpp"

namespace influence::nn {

// Ordered collection of named tensors with shapes fixed at creation.
class ParamBundle {
 public:
  Mat& add(const std::string& name, Eigen::Index rows, Eigen::Index cols);
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  Mat& operator[](const std::string& name);
  const Mat& operator[](const std::string& name) const;

  std::size_t tensor_count() const { return tensors_.size(); }
  const std::string& name(std::size_t i) const { return names_[i]; }
  Mat& tensor(std::size_t i) { return tensors_[i]; }
  const Mat& tensor(std::size_t i) const { return tensors_[i]; }
  const std::vector<std::string>& names() const { return names_; }

  // Total scalar count and flat addressing across tensors in order.
  std::size_t size() const;
  double& flat(std::size_t i);
  double flat(std::size_t i) const;

  ParamBundle zeros_like() const;
  void set_zero();
  bool all_finite() const;
  bool same_shapes(const ParamBundle& other) const;

  // Copies every tensor of `src` whose name starts with `prefix`.
  void copy_from(const ParamBundle& src, const std::string& prefix = "");
  // The tensors whose names start with `prefix`.
  ParamBundle subset(const std::string& prefix) const;
  void merge(const ParamBundle& other);

  // this += scale * other (same shapes)
  void axpy(double scale, const ParamBundle& other);

  friend bool operator==(const ParamBundle& a, const ParamBundle& b);

 private:
  std::vector<std::string> names_;
  std::vector<Mat> tensors_;
  std::unordered_map<std::string, std::size_t> index_;
};

using Rng = std::mt19937_64;

// W ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in))
void init_uniform_fan_in(Mat& m, Eigen::Index fan_in, Rng& rng);
// Orthogonal square blocks stacked along columns (rows x k*rows).
void init_orthogonal_blocks(Mat& m, Rng& rng);

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Versioned binary checkpoint:
//   "INFLCKPT" | u32 version | u64 len + metadata JSON
//   | u64 tensor count | per tensor: u64 len + name, i64 rows, i64 cols, rows*cols f64 (column-major)
//   | u32 crc32
inline constexpr std::uint32_t kCheckpointVersion = 1;
struct Checkpoint {
  nlohmann::json meta = nlohmann::json::object();
  ParamBundle params;
};
void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);
std::string serialize_checkpoint(const Checkpoint& ck);
Checkpoint deserialize_checkpoint(const std::string& bytes);

}  // namespace influence::nn
