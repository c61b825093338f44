#!/usr/bin/env python3
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
"""Regenerates the bundled manifests under manifests/."""

import pathlib

SIZES = [2, 2, 2, 2, 2, 2, 3, 3, 3, 4, 4, 4, 6, 7, 10, 16, 17, 17]
OUT = pathlib.Path(__file__).resolve().parent.parent / "manifests"

GEMINI = "gemini-2.0-flash"
LLAMA = "llama3.3:70b-instruct-fp16"
DEEPSEEK = "deepseek-chat"
REASONER = "deepseek-reasoner"

# (label, model, zero-shot temperature, CoT temperature); None = provider
# default, "-" = not used in that condition.
MODELS = [
    ("Deepseek-V3", DEEPSEEK, 0.6, 0.6),
    ("Deepseek-V3.1-T", REASONER, "-", None),
    ("Gemini 2.0 Flash", GEMINI, 0.2, 1.0),
    ("Llama 3.3", LLAMA, 0.4, 0.6),
]
ZS_TEMP = {DEEPSEEK: 0.6, GEMINI: 0.2, LLAMA: 0.4}

HEADER = """\
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
#
# Generated by tools/gen_manifests.py.
"""


def agent(model, temperature, variant):
    parts = ["kind: llm", f"model: {model}"]
    if temperature is not None:
        parts.append(f"temperature: {temperature}")
    parts.append(f"prompt_variant: {variant}")
    return "{" + ", ".join(parts) + "}"


def write(name, body):
    (OUT / name).write_text(HEADER + body)


def scripted_oracle():
    lines = [
        "",
        "# Proportional correctors (alpha = 1/n with the remainder rule): every",
        "# numerical game is solved in round 2. Directional games fall back to",
        "# bisection because no magnitude is shown.",
        "experiment: scripted-oracle",
        "base_seed: 20260101",
        "defaults:",
        "  condition: proportional-oracle",
        "  agent: {kind: scripted, policy: proportional, params: {on_directional: bisection}}",
        "sessions:",
    ]
    for i, n in enumerate(SIZES, 1):
        lines.append(f"  - {{id: s{i:02d}, players: {n}}}")
    write("scripted-oracle.manifest", "\n".join(lines) + "\n")


def reference_llm():
    lines = [
        "",
        "# Every model and prompting condition over the 18 reference sessions.",
        "# Requires provider access (or recorded cassettes).",
        "experiment: llm-18-sessions",
        "base_seed: 20260102",
        "sessions:",
    ]
    for label, model, zs, cot in MODELS:
        for variant, temp, tag in (("zero_shot", zs, "zs"), ("zero_shot_cot", cot, "cot")):
            if temp == "-":
                continue
            condition = f"{label} ({'ZS' if tag == 'zs' else 'ZS-CoT'})"
            slug = label.lower().replace(" ", "-").replace(".", "")
            for i, n in enumerate(SIZES, 1):
                lines.append(f"  - id: {slug}-{tag}-s{i:02d}")
                lines.append(f"    condition: \"{condition}\"")
                lines.append(f"    players: {n}")
                lines.append(f"    agent: {agent(model, temp, variant)}")
    write("llm-18-sessions.manifest", "\n".join(lines) + "\n")


# Mixed compositions per group size (Gemini, Llama, Deepseek-V3 counts).
MIXED = [
    (2, (1, 0, 1)), (2, (1, 0, 1)),
    (2, (0, 1, 1)), (2, (0, 1, 1)),
    (2, (1, 1, 0)), (2, (1, 1, 0)),
    (3, (1, 1, 1)), (3, (1, 1, 1)), (3, (1, 1, 1)),
    (4, (2, 1, 1)), (4, (2, 1, 1)), (4, (2, 1, 1)),
    (6, (2, 2, 2)),
    (7, (3, 2, 2)),
    (10, (4, 3, 3)),
    (16, (6, 5, 5)),
    (17, (7, 5, 5)), (17, (7, 5, 5)),
]


def mixed_models():
    lines = [
        "",
        "# Mixed-model groups, zero-shot, each model at its zero-shot temperature.",
        "experiment: mixed-models",
        "base_seed: 20260103",
        "defaults:",
        "  condition: Mixed LLMs",
        "sessions:",
    ]
    for i, (n, (g, l, d)) in enumerate(MIXED, 1):
        assert g + l + d == n
        lines.append(f"  - id: mixed-s{i:02d}")
        lines.append(f"    players: {n}")
        lines.append("    agents:")
        for model, count in ((GEMINI, g), (LLAMA, l), (DEEPSEEK, d)):
            if count:
                spec = agent(model, ZS_TEMP[model], "zero_shot")[:-1]
                lines.append(f"      - {spec}, count: {count}}}")
    write("mixed-models.manifest", "\n".join(lines) + "\n")


def temperature_sweep():
    small = [n for n in SIZES if n <= 3]
    lines = [
        "",
        "# Small-group zero-shot temperature sweep, with and without the",
        "# strategy prompt (which also shows the group sum), plus mixed",
        "# temperatures within a group.",
        "experiment: temperature-sweep",
        "base_seed: 20260104",
        "sessions:",
    ]
    models = [("Deepseek-V3", DEEPSEEK), ("Gemini 2.0 Flash", GEMINI), ("Llama 3.3", LLAMA)]
    for label, model in models:
        slug = label.lower().replace(" ", "-").replace(".", "")
        for variant, vtag in (("zero_shot", "zs"), ("zero_shot_strategy_sum", "strategy")):
            for temp in (0.2, 0.4, 0.6, 0.8, 1.0):
                for i, n in enumerate(small, 1):
                    lines.append(f"  - id: {slug}-{vtag}-t{int(temp * 10):02d}-s{i:02d}")
                    lines.append(f"    condition: \"{label} {vtag} T={temp}\"")
                    lines.append(f"    players: {n}")
                    lines.append(f"    agent: {agent(model, temp, variant)}")
        for i, n in enumerate(small, 1):
            temps = [0.2, 1.0] if n == 2 else [0.2, 0.6, 1.0]
            lines.append(f"  - id: {slug}-zs-mixedtemp-s{i:02d}")
            lines.append(f"    condition: \"{label} zs mixed temperature\"")
            lines.append("    agents:")
            for t in temps:
                lines.append(f"      - {agent(model, t, 'zero_shot')}")
    write("temperature-sweep.manifest", "\n".join(lines) + "\n")


if __name__ == "__main__":
    OUT.mkdir(exist_ok=True)
    scripted_oracle()
    reference_llm()
    mixed_models()
    temperature_sweep()
