#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace semtask {

/// Precomputed feature vectors keyed by instance id. Vectors are stored as
/// f32, the on-disk precision; classifiers widen to double.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  explicit EmbeddingStore(std::size_t dim);

  /// Throws DimensionMismatch, DuplicateInstance or NonFiniteVector.
  void add(std::string instance_id, std::string class_id, std::span<const float> vector);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ids_.size(); }
  std::optional<std::size_t> find(std::string_view instance_id) const;
  const std::string& instance_id(std::size_t i) const { return ids_.at(i); }
  const std::string& class_id(std::size_t i) const { return classes_.at(i); }
  std::span<const float> vector(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }

  bool operator==(const EmbeddingStore& other) const {
    return dim_ == other.dim_ && ids_ == other.ids_ && classes_ == other.classes_ && data_ == other.data_;
  }

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<std::string> classes_;
  std::vector<float> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// `instance_id,class_id,v0,v1,...`; an optional header row starting with
/// `instance_id` is skipped. The dimension is taken from the first record.
EmbeddingStore read_embeddings_csv(std::istream& in);
void write_embeddings_csv(std::ostream& out, const EmbeddingStore& store);

/// "EMB1" binary: magic, u32 dim, u64 count, then per record u16 id length,
/// id bytes, u16 class length, class bytes, dim x f32. All little-endian.
EmbeddingStore read_embeddings_binary(std::istream& in);
void write_embeddings_binary(std::ostream& out, const EmbeddingStore& store);

/// Picks the binary reader when the file starts with "EMB1", CSV otherwise.
EmbeddingStore load_embeddings(const std::filesystem::path& path);

}  // namespace semtask
