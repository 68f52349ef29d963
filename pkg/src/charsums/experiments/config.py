"""Scenario configuration read from INI files.

Each scenario has its own section; ``[calibration]`` holds the frozen
constants every ``C * shape`` tolerance uses. Values missing from a user
file fall back to ``DEFAULT_CONFIG``.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from pathlib import Path

SCENARIOS = (
    "theorem1",
    "theorem2",
    "theorem3",
    "theorem4",
    "polya_check",
    "rmf_oracle",
    "bias_search",
)

DEFAULT_CONFIG = """\
[calibration]
version = 1
window_constant = 20
tail_constant = 10
replacement_constant = 1
gmean_constant = 5
envelope_constant = 4
dyadic_constant = 3

[theorem1]
qlo = 10000
qhi = 1000000
x = 10
delta = 0.5
delta_sweep = 0.01, 0.05, 0.1, 0.5, 1.0
tau = 0.95
min_alpha = 0.6
max_primes = 3
deficit_max = 0.95
gmean_max = 0.1
moment_cap = 4
histogram_bins = 40

[theorem2]
q = 10007
x = 10
thresh = 0.5
delta = 0.5
delta_sweep = 0.05, 0.1, 0.5, 1.0
tau = 0.95
max_characters = 3
deficit_max = 0.95
gmean_max = 0.1
moment_cap = 4

[theorem3]
q = 100003
h_rule = ratio:20
moment_cap = 8
sliding_h = 50
histogram_bins = 40
second_moment_tol = 0.15
odd_moment_tol = 0.1
density_q = 0
density_tol = 0.25

[theorem4]
q = 1009
h_rule = ratio:5
pairs = 0:0, 1:0, 1:1, 2:1, 2:2
tol = 1e-9

[polya_check]
q = 1009
h = 100
x = 50
replacement_q = 10007
replacement_h = 1000
tail_h = 50, 200, 1000
tail_q = 10007

[rmf_oracle]
kind = extended_rademacher
flavor = cosine
n = 8
j = 2
k = 2
samples = 100000
set_n = 20
set_orders = 2, 2, 2, 2
dyadic_q = 10000
dyadic_n = 30
dyadic_trials = 10

[bias_search]
qlo = 10000
qhi = 1000000
x = 10
top = 20
"""


class ConfigError(ValueError):
    """A configuration value is missing, malformed or outside its legal range."""


@dataclass(frozen=True)
class HRule:
    """How ``H`` follows from ``q``: ``abs:H``, ``ratio:r`` (``H = q/r``) or ``log:A`` (``H = q/log(q)^A``)."""

    kind: str
    value: float

    @classmethod
    def parse(cls, text: str) -> HRule:
        kind, _, raw = text.partition(":")
        kind = kind.strip()
        if kind not in ("abs", "ratio", "log"):
            raise ConfigError(f"unknown H rule {text!r}")
        try:
            value = float(raw)
        except ValueError:
            raise ConfigError(f"bad H rule value in {text!r}") from None
        if value <= 0:
            raise ConfigError(f"H rule value must be positive: {text!r}")
        return cls(kind, value)

    def __call__(self, q: int) -> float:
        if self.kind == "abs":
            return self.value
        if self.kind == "ratio":
            return q / self.value
        return q / math.log(q) ** self.value

    def __str__(self) -> str:
        return f"{self.kind}:{self.value!r}"


@dataclass(frozen=True)
class ScenarioConfig:
    """Resolved settings for one scenario run plus the calibration table."""

    scenario: str
    params: dict = field(default_factory=dict)
    calibration: dict = field(default_factory=dict)
    seed: int = 0
    out_dir: Path = Path("out")
    source: str = "<defaults>"

    def get(self, key: str, kind=str):
        if key not in self.params:
            raise ConfigError(f"[{self.scenario}] missing key {key!r}")
        raw = self.params[key]
        try:
            if kind is str:
                return raw
            if kind is bool:
                return raw.strip().lower() in ("1", "true", "yes", "on")
            if kind is list:
                return [float(v) for v in raw.split(",") if v.strip()]
            if kind is HRule:
                return HRule.parse(raw)
            return kind(float(raw)) if kind is int else kind(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[{self.scenario}] {key} = {raw!r}: {exc}") from None

    def constant(self, name: str) -> float:
        try:
            return float(self.calibration[name])
        except KeyError:
            raise ConfigError(f"calibration constant {name!r} missing") from None


def _parser() -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.read_string(DEFAULT_CONFIG)
    return parser


def load_config(scenario: str, path: str | Path | None = None, seed: int = 0, out_dir="out") -> ScenarioConfig:
    """Merge ``path`` over the defaults and pick out ``scenario``'s section."""
    scenario = scenario.replace("-", "_")
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}")
    parser = _parser()
    source = "<defaults>"
    if path is not None:
        path = Path(path)
        try:
            with path.open(encoding="utf-8") as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except configparser.Error as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from None
        source = str(path)
    if not 0 <= int(seed) < 2**64:
        raise ConfigError(f"seed {seed} is not an unsigned 64-bit integer")
    return ScenarioConfig(
        scenario=scenario,
        params=dict(parser[scenario]),
        calibration=dict(parser["calibration"]),
        seed=int(seed),
        out_dir=Path(out_dir),
        source=source,
    )
