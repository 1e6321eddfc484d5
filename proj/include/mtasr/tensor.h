// Copyright 2026 The mtasr Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mtasr {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape or rank violations in numeric code.
struct ShapeError : Error {
  using Error::Error;
};

// Invalid user-facing configuration (CLI exit code 1).
struct ConfigError : Error {
  using Error::Error;
};

// File format or I/O failures (CLI exit code 2).
struct IoError : Error {
  using Error::Error;
};

std::string shape_str(const std::vector<std::size_t>& shape);

/// Dense row-major array of doubles. Values are immutable once placed on a
/// Tape; mutation is only meaningful for free-standing tensors (parameter
/// stores, test fixtures).
class Tensor {
 public:
  Tensor() = default;  // empty sentinel, numel() == 0

  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor scalar(double v) { return Tensor({1, 1}, {v}); }
  static Tensor row(std::vector<double> v);
  static Tensor vec(std::vector<double> v);
  static Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<std::size_t> shape, double v);

  std::size_t rank() const { return shape_.size(); }
  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t numel() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  // Rank-1 and rank-2 accessors.
  std::size_t rows() const;
  std::size_t cols() const;
  double& at(std::size_t i) { return data_[i]; }
  double at(std::size_t i) const { return data_[i]; }
  double& at(std::size_t i, std::size_t j) { return data_[i * cols() + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * cols() + j]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool all_finite() const;
  double scalar_value() const;

  std::string shape_str() const { return mtasr::shape_str(shape_); }

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

}  // namespace mtasr
