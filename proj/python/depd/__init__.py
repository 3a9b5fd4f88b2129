# Copyright 2026 The depd Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


"""Decentralized stochastic primal-dual simulator."""

from ._core import (
    DepdError,
    compute_reference,
    estimators,
    load_reference,
    next_beta,
    read_trace,
    reference,
    run,
    simulate,
    sweep,
)

__all__ = [
    "DepdError",
    "compute_reference",
    "estimators",
    "load_reference",
    "next_beta",
    "read_trace",
    "reference",
    "run",
    "simulate",
    "sweep",
]
