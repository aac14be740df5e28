#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "request/random.hpp"

namespace request {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  double squared_norm() const;
  bool all_finite() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Embeddings of relation mentions (Z), QA pairs (P), features (C, one row
/// per union-vocabulary entry shared by both spaces) and relation types (R).
struct EmbeddingStore {
  std::size_t dim = 0;
  Matrix Z;
  Matrix P;
  Matrix C;
  Matrix R;

  EmbeddingStore() = default;
  EmbeddingStore(std::size_t d, std::size_t mentions, std::size_t pairs, std::size_t features,
                 std::size_t types)
      : dim(d), Z(mentions, d), P(pairs, d), C(features, d), R(types, d) {}

  /// Fills every row uniformly in [-0.5/d, 0.5/d].
  void init_uniform(Rng& rng);
  bool all_finite() const;

  bool operator==(const EmbeddingStore&) const = default;
};

/// Text model format: header "REQUEST-EMB 1 d N_Z N_P M K_r", then sections
/// #Z #P #C #R with rows "id v1 .. vd" in shortest round-trip decimal.
void save_model(const EmbeddingStore& store, const std::filesystem::path& path);
std::string serialize_model(const EmbeddingStore& store);
EmbeddingStore load_model(const std::filesystem::path& path);
EmbeddingStore parse_model(const std::string& text, const std::string& source = "<memory>");

}  // namespace request
