// Copyright 2026 The depd Authors
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

#include "depd/common.hpp"

namespace depd {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSelfLoop: return "SelfLoop";
    case ErrorCode::kNodeOutOfRange: return "NodeOutOfRange";
    case ErrorCode::kDisconnected: return "Disconnected";
    case ErrorCode::kInfeasibleEdgeCount: return "InfeasibleEdgeCount";
    case ErrorCode::kTooFewNodes: return "TooFewNodes";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kInconsistentDimension: return "InconsistentDimension";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInvalidProbability: return "InvalidProbability";
    case ErrorCode::kEnumerationTooLarge: return "EnumerationTooLarge";
    case ErrorCode::kMissingNeighborMessage: return "MissingNeighborMessage";
    case ErrorCode::kConfigMismatch: return "ConfigMismatch";
    case ErrorCode::kMissingSigma: return "MissingSigma";
    case ErrorCode::kNotConverged: return "NotConverged";
    case ErrorCode::kMissingDualCertificate: return "MissingDualCertificate";
    case ErrorCode::kNegativeGap: return "NegativeGap";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace depd
