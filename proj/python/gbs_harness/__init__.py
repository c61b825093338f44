# Copyright 2026 The GBS Harness Authors.
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
"""Python access to the Group Binary Search harness."""

import json as _json
import os as _os

from ._core import (
    GbsError,
    bootstrap_mean_ci,
    compute_feedback,
    fit_line,
    render_feedback,
    validate_manifest,
)
from . import _core

__all__ = [
    "GbsError",
    "analyze",
    "bootstrap_mean_ci",
    "compute_feedback",
    "fit_line",
    "import_trace",
    "read_log",
    "render_feedback",
    "run",
    "validate_manifest",
    "verify",
]


def run(manifest, out_dir, seed=None, replications=None, clock="logical", jobs=1):
    """Runs a scripted manifest; logs go to out_dir/<session_id>/log.jsonl."""
    return _json.loads(_core._run(_os.fspath(manifest), _os.fspath(out_dir), seed,
                                  replications, clock, jobs))


def analyze(inputs, out_dir=None, bootstrap_seed=0, iterations=10000,
            ci_method="expanded_percentile"):
    """Computes the metrics report for log files or directories."""
    if isinstance(inputs, (str, _os.PathLike)):
        inputs = [inputs]
    out = None if out_dir is None else _os.fspath(out_dir)
    return _json.loads(_core._analyze([_os.fspath(p) for p in inputs], out,
                                      bootstrap_seed, iterations, ci_method))


def verify(path):
    """Replays a log and checks that every round's feedback is reproduced."""
    return _json.loads(_core._verify(_os.fspath(path)))


def import_trace(csv_path, out_dir, condition="Humans"):
    """Converts an external trace CSV into session logs; returns their paths."""
    return _json.loads(_core._import_trace(_os.fspath(csv_path), _os.fspath(out_dir),
                                           condition))


def read_log(path):
    """Reads and validates a log; returns its events as a list of dicts."""
    text = _core._read_log(_os.fspath(path))
    return [_json.loads(line) for line in text.splitlines() if line]
