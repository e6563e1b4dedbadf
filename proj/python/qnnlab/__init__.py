# Copyright 2026 The qnnlab Authors
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
"""Python interface to the qnnlab simulator, kernels, bounds and experiments."""

import json

from ._qnnlab import (
    Architecture,
    AssumptionFailure,
    ConfigError,
    Model,
    UnknownInput,
    analytic_ntk,
    architecture_from_json,
    command_names,
    covariance_init,
    empirical_ntk,
    limit_gaussian,
    make_architecture,
    stein_constant,
    stein_modulus,
    w1_exact,
    w1_truncated,
)
from ._qnnlab import _run_command, lightcones_json

__all__ = [
    "Architecture",
    "AssumptionFailure",
    "ConfigError",
    "Model",
    "UnknownInput",
    "analytic_ntk",
    "architecture_from_json",
    "command_names",
    "covariance_init",
    "empirical_ntk",
    "lightcones",
    "limit_gaussian",
    "make_architecture",
    "run",
    "stein_constant",
    "stein_modulus",
    "w1_exact",
    "w1_truncated",
]


def lightcones(architecture):
    """Light-cone table of an architecture as a dict."""
    return json.loads(lightcones_json(architecture))


def run(command, config, out=""):
    """Runs an experiment command on a config dict.

    Returns a dict with keys ``summary``, ``report`` and ``exit_code``. When
    ``out`` is set, the run directory is written there as well.
    """
    return json.loads(_run_command(command, json.dumps(config), str(out)))
