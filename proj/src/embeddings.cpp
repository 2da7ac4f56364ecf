#include "semtask/embeddings.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "semtask/csv.hpp"
#include "semtask/error.hpp"

namespace semtask {

namespace {

constexpr std::array<char, 4> kMagic = {'E', 'M', 'B', '1'};

template <typename T>
void put_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw Error(ErrorCode::MalformedInput, "truncated EMB1 stream");
  }
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[i]) << (8 * i);
  return value;
}

std::string get_string(std::istream& in) {
  const auto length = get_le<std::uint16_t>(in);
  std::string s(length, '\0');
  if (length && !in.read(s.data(), length)) throw Error(ErrorCode::MalformedInput, "truncated EMB1 stream");
  return s;
}

void put_string(std::ostream& out, const std::string& s) {
  if (s.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw Error(ErrorCode::MalformedInput, "id longer than 65535 bytes", {s.substr(0, 32)});
  }
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

}  // namespace

EmbeddingStore::EmbeddingStore(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw Error(ErrorCode::DimensionMismatch, "embedding dimension must be positive");
}

void EmbeddingStore::add(std::string instance_id, std::string class_id, std::span<const float> vector) {
  if (vector.size() != dim_) {
    throw Error(ErrorCode::DimensionMismatch,
                "instance '" + instance_id + "' has dimension " + std::to_string(vector.size()) + ", store has " +
                    std::to_string(dim_),
                {instance_id});
  }
  for (float v : vector) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteVector, "instance '" + instance_id + "' has a non-finite component", {instance_id});
  }
  if (!index_.emplace(instance_id, ids_.size()).second) {
    throw Error(ErrorCode::DuplicateInstance, "instance '" + instance_id + "' appears twice", {instance_id});
  }
  ids_.push_back(std::move(instance_id));
  classes_.push_back(std::move(class_id));
  data_.insert(data_.end(), vector.begin(), vector.end());
}

std::optional<std::size_t> EmbeddingStore::find(std::string_view instance_id) const {
  auto it = index_.find(std::string(instance_id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

EmbeddingStore read_embeddings_csv(std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::string> row;
  std::optional<EmbeddingStore> store;
  std::vector<float> values;
  bool first = true;
  while (reader.next(row)) {
    if (first && !row.empty() && row[0] == "instance_id") {
      first = false;
      continue;
    }
    first = false;
    if (row.size() < 3) {
      throw Error(ErrorCode::MalformedInput, "embedding line " + std::to_string(reader.line()) + " has no vector");
    }
    if (!store) store.emplace(row.size() - 2);
    values.clear();
    for (std::size_t i = 2; i < row.size(); ++i) {
      values.push_back(static_cast<float>(csv::parse_double(row[i], reader.line())));
    }
    store->add(std::move(row[0]), std::move(row[1]), values);
  }
  if (!store) throw Error(ErrorCode::MalformedInput, "embedding CSV has no records");
  return std::move(*store);
}

void write_embeddings_csv(std::ostream& out, const EmbeddingStore& store) {
  out << "instance_id,class_id";
  for (std::size_t d = 0; d < store.dim(); ++d) out << ",v" << d;
  out << '\n';
  char buffer[32];
  for (std::size_t i = 0; i < store.size(); ++i) {
    out << csv::escape(store.instance_id(i)) << ',' << csv::escape(store.class_id(i));
    for (float v : store.vector(i)) {
      std::snprintf(buffer, sizeof buffer, "%.9g", static_cast<double>(v));
      out << ',' << buffer;
    }
    out << '\n';
  }
}

EmbeddingStore read_embeddings_binary(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw Error(ErrorCode::MalformedInput, "missing EMB1 magic");
  }
  const auto dim = get_le<std::uint32_t>(in);
  const auto count = get_le<std::uint64_t>(in);
  EmbeddingStore store(dim);
  std::vector<float> values(dim);
  for (std::uint64_t r = 0; r < count; ++r) {
    std::string id = get_string(in);
    std::string cls = get_string(in);
    for (auto& v : values) v = std::bit_cast<float>(get_le<std::uint32_t>(in));
    store.add(std::move(id), std::move(cls), values);
  }
  return store;
}

void write_embeddings_binary(std::ostream& out, const EmbeddingStore& store) {
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(store.dim()));
  put_le<std::uint64_t>(out, store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    put_string(out, store.instance_id(i));
    put_string(out, store.class_id(i));
    for (float v : store.vector(i)) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  }
}

EmbeddingStore load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string(), {path.string()});
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  const bool binary = in.gcount() == 4 && magic == kMagic;
  in.clear();
  in.seekg(0);
  return binary ? read_embeddings_binary(in) : read_embeddings_csv(in);
}

}  // namespace semtask
