/*
 * Copyright (c) 2026 The xsl Authors
 *
 * Licensed under the Apache License, Version 2.0;
 * You may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an 'AS IS' BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#pragma once

#include <stdexcept>
#include <string>

namespace xsl {

/// Base of every error raised by the library. Each subclass names the
/// failure category so callers can branch without string matching.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define XSL_DEFINE_ERROR(Name)          \
  class Name : public Error {           \
   public:                              \
    using Error::Error;                 \
  };

XSL_DEFINE_ERROR(DimensionError)
XSL_DEFINE_ERROR(IndexError)
XSL_DEFINE_ERROR(ParameterError)
XSL_DEFINE_ERROR(ShapeError)
XSL_DEFINE_ERROR(VerificationError)
XSL_DEFINE_ERROR(FormatError)
XSL_DEFINE_ERROR(LengthError)
XSL_DEFINE_ERROR(ValueError)
XSL_DEFINE_ERROR(ConsistencyError)
XSL_DEFINE_ERROR(DataError)
XSL_DEFINE_ERROR(UsageError)
XSL_DEFINE_ERROR(SpecError)
XSL_DEFINE_ERROR(ConfigError)
XSL_DEFINE_ERROR(GenerationError)
XSL_DEFINE_ERROR(ProtocolError)
XSL_DEFINE_ERROR(IoError)

#undef XSL_DEFINE_ERROR

}  // namespace xsl
