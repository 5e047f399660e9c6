// Copyright 2026 The capauct Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace capauct {

// Base class of every error raised by the library. Each subclass names one
// failure condition so callers can catch precisely what they can handle.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CAPAUCT_DEFINE_ERROR(Name)            \
  class Name : public Error {                 \
   public:                                    \
    explicit Name(const std::string& what)    \
        : Error(std::string(#Name ": ") + what) {} \
  }

CAPAUCT_DEFINE_ERROR(InvalidArgument);
CAPAUCT_DEFINE_ERROR(ZeroDensity);
CAPAUCT_DEFINE_ERROR(OutOfSupport);
CAPAUCT_DEFINE_ERROR(NotRegular);
CAPAUCT_DEFINE_ERROR(ReportNotOnGrid);
CAPAUCT_DEFINE_ERROR(LengthMismatch);
CAPAUCT_DEFINE_ERROR(NonMonotoneAllocation);
CAPAUCT_DEFINE_ERROR(ZeroAllocation);
CAPAUCT_DEFINE_ERROR(AtomicDistribution);
CAPAUCT_DEFINE_ERROR(UnboundedCapacity);
CAPAUCT_DEFINE_ERROR(EmptyProfile);
CAPAUCT_DEFINE_ERROR(TooLarge);
CAPAUCT_DEFINE_ERROR(NumericalBreakdown);

#undef CAPAUCT_DEFINE_ERROR

}  // namespace capauct
