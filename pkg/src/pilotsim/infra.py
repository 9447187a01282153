"""Site and storage-element models: latency sampling and failure injection.

The storage element (SE) is characterized by a dimensionless delay factor d
(a proxy for load) and a per-access failure probability f. Access times are
Gaussian around a mean that scales linearly with d:

    mu    = (bytes / base_throughput) * (1 + delay_gain * d)
    sigma = sigma_fraction * mu

Draws are clamped from below at mu/10 so durations stay positive. Named
(d, f) presets follow the dXfY convention, e.g. d1f1 / d2f2 / d3f3 for
low / moderate / high load, and mixed forms like d3f1 are accepted.
"""

from __future__ import annotations

import hashlib
import random
import re
from dataclasses import dataclass, field, replace

MB = 1_000_000

DELAY_LEVELS = {"d1": 0.01, "d2": 0.15, "d3": 0.50}
FAILURE_LEVELS = {"f1": 0.0, "f2": 0.03, "f3": 0.1}

_PRESET_RE = re.compile(r"^(d[123])(f[123])$")


class ConfigError(ValueError):
    """Invalid infrastructure or scenario configuration."""


def substream(seed: int, label: str) -> random.Random:
    """Independent deterministic RNG for one named concern of a run.

    Streams are derived from (seed, label) via SHA-256 so that changing one
    knob never perturbs the draws of another concern.
    """
    digest = hashlib.sha256(f"{seed}:{label}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


@dataclass(frozen=True)
class DelayDist:
    """Gaussian delay (seconds), clamped at zero."""

    mean: float
    sigma: float = 0.0

    def __post_init__(self) -> None:
        if self.mean < 0 or self.sigma < 0:
            raise ConfigError("delay mean and sigma must be >= 0")

    def draw(self, rng: random.Random) -> float:
        if self.sigma == 0:
            return self.mean
        return max(0.0, rng.gauss(self.mean, self.sigma))


@dataclass(frozen=True)
class SEModel:
    """Storage element with load-dependent latency and failure probability."""

    delay_factor: float = 0.01
    failure_rate: float = 0.0
    base_throughput: float = 100 * MB  # bytes/second
    sigma_fraction: float = 0.1
    delay_gain: float = 10.0
    n_chunks: int = 1  # sequential chunks per read, each with its own failure draw

    def __post_init__(self) -> None:
        if not 0.0 <= self.failure_rate <= 1.0:
            raise ConfigError("failure_rate must be in [0, 1]")
        if self.base_throughput <= 0:
            raise ConfigError("base_throughput must be positive")
        if self.sigma_fraction < 0 or self.delay_factor < 0 or self.delay_gain < 0:
            raise ConfigError("delay parameters must be >= 0")
        if self.n_chunks < 1:
            raise ConfigError("n_chunks must be >= 1")

    def mean_access_time(self, nbytes: float) -> float:
        """Closed-form mean duration of one access."""
        return (nbytes / self.base_throughput) * (1.0 + self.delay_gain * self.delay_factor)

    def zero_load_time(self, nbytes: float) -> float:
        """Access time with no load at all (d = 0, no noise)."""
        return nbytes / self.base_throughput


@dataclass(frozen=True)
class AccessOutcome:
    """Result of one SE read or write; failures still consume time."""

    failed: bool
    duration: float

    @property
    def kind(self) -> str:
        return "failed" if self.failed else "ok"


def sample_access_time(rng: random.Random, nbytes: float, se: SEModel) -> float:
    """One Gaussian access-time draw, clamped from below at mu/10."""
    if nbytes <= 0:
        raise ConfigError("access size must be positive")
    mu = se.mean_access_time(nbytes)
    if se.sigma_fraction == 0:
        return mu
    return max(rng.gauss(mu, se.sigma_fraction * mu), mu / 10.0)


def sample_failure(rng: random.Random, se: SEModel) -> bool:
    """True with probability ``se.failure_rate``."""
    return rng.random() < se.failure_rate


def se_read(rng_duration: random.Random, rng_failure: random.Random,
            nbytes: float, se: SEModel) -> AccessOutcome:
    """One stage-in read, split into ``n_chunks`` sequential chunk transfers.

    Each chunk has an independent failure draw; on the first failed chunk the
    read aborts having consumed the time of the chunks attempted so far.
    """
    if se.n_chunks == 1:
        return AccessOutcome(failed=sample_failure(rng_failure, se),
                             duration=sample_access_time(rng_duration, nbytes, se))
    chunk = nbytes / se.n_chunks
    total = 0.0
    for _ in range(se.n_chunks):
        total += sample_access_time(rng_duration, chunk, se)
        if sample_failure(rng_failure, se):
            return AccessOutcome(failed=True, duration=total)
    return AccessOutcome(failed=False, duration=total)


def se_write(rng_duration: random.Random, rng_failure: random.Random,
             nbytes: float, se: SEModel) -> AccessOutcome:
    """One stage-out write."""
    return AccessOutcome(failed=sample_failure(rng_failure, se),
                         duration=sample_access_time(rng_duration, nbytes, se))


def se_preset(name: str, **overrides) -> SEModel:
    """Build an SEModel from a dXfY label (d1/d2/d3 x f1/f2/f3)."""
    m = _PRESET_RE.match(name)
    if not m:
        raise ConfigError(f"unknown SE condition {name!r} (expected dXfY)")
    return SEModel(delay_factor=DELAY_LEVELS[m.group(1)],
                   failure_rate=FAILURE_LEVELS[m.group(2)], **overrides)


def build_se(spec) -> SEModel:
    """SEModel from a preset label or a field mapping."""
    if isinstance(spec, str):
        return se_preset(spec)
    if isinstance(spec, SEModel):
        return spec
    return SEModel(**dict(spec))


@dataclass(frozen=True)
class SiteConfig:
    """One execution site: worker nodes, slots, SE, and delay distributions."""

    site_name: str = "site0"
    n_workers: int = 10
    slots_per_worker: int = 4
    se: SEModel = field(default_factory=SEModel)
    pilot_queue_delay: DelayDist = DelayDist(120.0, 24.0)
    direct_submit_delay: DelayDist = DelayDist(300.0, 60.0)
    completion_notify_delay: DelayDist = DelayDist(300.0, 60.0)

    def __post_init__(self) -> None:
        if self.n_workers < 1 or self.slots_per_worker < 1:
            raise ConfigError("site needs at least one worker and one slot")

    @property
    def total_slots(self) -> int:
        return self.n_workers * self.slots_per_worker

    def worker_names(self) -> list[str]:
        return [f"wn{i:02d}" for i in range(self.n_workers)]

    def with_se(self, se: SEModel) -> "SiteConfig":
        return replace(self, se=se)
