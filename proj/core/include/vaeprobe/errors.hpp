/*
 * Copyright 2026 The vaeprobe Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef VAEPROBE_ERRORS_HPP
#define VAEPROBE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace vaeprobe {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shapes that do not conform to an operation's signature.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf produced or consumed by a numeric primitive.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Malformed or out-of-range input data (files, labels, pixel values).
class DataError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace vaeprobe

#endif  // VAEPROBE_ERRORS_HPP
