"""Monte Carlo model of the prepare-and-measure time-bin link.

Per round Alice sends one of three preparations: signal ``|alpha 0>``
(pulse early) or ``|0 alpha>`` (pulse late), each with probability
``(1 - f)/2``, or the two-pulse decoy ``|alpha alpha>`` with probability
``f``.  Bob's beamsplitter routes a fraction ``t_b`` to the timed data
line and ``1 - t_b`` to the interferometric monitoring line, and every
detector has efficiency ``eta_det`` folded into its mean photon number
plus an independent dark-click probability ``p_dark`` per slot.

A threshold detector seeing mean photon number ``m`` clicks with
probability ``1 - (1 - p_dark) exp(-m)``.  The monitoring interferometer
turns the decoy's adjacent-pulse coherence into port intensities
``mu_mon (1 +/- V)`` for a lumped visibility ``V``, which is either
fixed or follows the decay model ``V(loss) = v0 exp(-loss_db / l_c)``.

Sampling is deterministic and worker-count-independent: rounds are cut
into fixed 65536-round chunks, chunk ``i`` draws all its tallies from
``np.random.default_rng(SeedSequence([seed, i]))`` as exact multinomials,
and integer sums of per-chunk tallies do not care about completion order.
"""

from __future__ import annotations

import dataclasses
import math
import operator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .stats import (
    DataLineCounts,
    MonitorCounts,
    RawCounts,
    WitnessEvaluation,
    renormalize,
    witness_expectation,
)
from .operators import WitnessParams

ROUNDS_PER_CHUNK = 1 << 16

_UINT64_MASK = 0xFFFF_FFFF_FFFF_FFFF


class ConfigError(ValueError):
    """A link-configuration field is out of range; ``.field`` names it."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


def _require(condition: bool, field: str, message: str) -> None:
    if not condition:
        raise ConfigError(field, message)


def _as_float(value, field: str) -> float:
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ConfigError(field, f"must be a number, got {value!r}") from None
    if math.isnan(out):
        raise ConfigError(field, "must not be NaN")
    return out


@dataclass(frozen=True)
class SourceConfig:
    """Alice's side: pulse intensity, decoy fraction, round budget."""

    mu: float = 0.05
    f: float = 0.1
    n_rounds: int = 1_000_000

    def __post_init__(self):
        mu = _as_float(self.mu, "source.mu")
        _require(
            math.isfinite(mu) and mu >= 0.0,
            "source.mu",
            f"mean photon number must be finite and non-negative, got {self.mu!r}",
        )
        object.__setattr__(self, "mu", mu)
        f = _as_float(self.f, "source.f")
        _require(
            0.0 <= f <= 1.0,
            "source.f",
            f"decoy fraction must lie in [0, 1], got {self.f!r}",
        )
        object.__setattr__(self, "f", f)
        try:
            n = int(operator.index(self.n_rounds))
        except TypeError:
            raise ConfigError(
                "source.n_rounds", f"must be an integer, got {self.n_rounds!r}"
            ) from None
        _require(n >= 1, "source.n_rounds", f"must be at least 1, got {n}")
        object.__setattr__(self, "n_rounds", n)


@dataclass(frozen=True)
class ChannelConfig:
    """Fiber loss and monitoring visibility.

    ``visibility`` fixes V outright; when None, V follows the decay model
    ``v0 exp(-loss_db / l_c)`` (``l_c`` may be ``inf`` for no decay).
    """

    loss_db: float = 0.0
    v0: float = 0.98
    l_c: float = 30.0
    visibility: float | None = None

    def __post_init__(self):
        loss_db = _as_float(self.loss_db, "channel.loss_db")
        _require(
            math.isfinite(loss_db) and loss_db >= 0.0,
            "channel.loss_db",
            f"loss must be finite and non-negative, got {self.loss_db!r}",
        )
        object.__setattr__(self, "loss_db", loss_db)
        v0 = _as_float(self.v0, "channel.v0")
        _require(
            0.0 <= v0 <= 1.0,
            "channel.v0",
            f"zero-loss visibility must lie in [0, 1], got {self.v0!r}",
        )
        object.__setattr__(self, "v0", v0)
        l_c = _as_float(self.l_c, "channel.l_c")
        _require(
            l_c > 0.0,
            "channel.l_c",
            f"visibility decay constant must be positive (inf allowed), got {self.l_c!r}",
        )
        object.__setattr__(self, "l_c", l_c)
        if self.visibility is not None:
            vis = _as_float(self.visibility, "channel.visibility")
            _require(
                0.0 <= vis <= 1.0,
                "channel.visibility",
                f"fixed visibility must lie in [0, 1], got {self.visibility!r}",
            )
            object.__setattr__(self, "visibility", vis)

    def effective_visibility(self) -> float:
        """The V actually applied at this channel's loss."""
        if self.visibility is not None:
            return float(self.visibility)
        return self.v0 * math.exp(-self.loss_db / self.l_c)


@dataclass(frozen=True)
class ReceiverConfig:
    """Bob's side: beamsplitter ratio, detector efficiency, dark clicks."""

    t_b: float = 0.9
    eta_det: float = 0.2
    p_dark: float = 1e-5

    def __post_init__(self):
        t_b = _as_float(self.t_b, "receiver.t_b")
        _require(
            0.0 <= t_b <= 1.0,
            "receiver.t_b",
            f"beamsplitter transmission must lie in [0, 1], got {self.t_b!r}",
        )
        object.__setattr__(self, "t_b", t_b)
        eta_det = _as_float(self.eta_det, "receiver.eta_det")
        _require(
            0.0 <= eta_det <= 1.0,
            "receiver.eta_det",
            f"detector efficiency must lie in [0, 1], got {self.eta_det!r}",
        )
        object.__setattr__(self, "eta_det", eta_det)
        p_dark = _as_float(self.p_dark, "receiver.p_dark")
        _require(
            0.0 <= p_dark < 1.0,
            "receiver.p_dark",
            f"dark-click probability must lie in [0, 1), got {self.p_dark!r}",
        )
        object.__setattr__(self, "p_dark", p_dark)


@dataclass(frozen=True)
class LinkConfig:
    """One complete link: source, channel, receiver."""

    source: SourceConfig = SourceConfig()
    channel: ChannelConfig = ChannelConfig()
    receiver: ReceiverConfig = ReceiverConfig()


@dataclass(frozen=True)
class PatternDistribution:
    """Distribution over the four click patterns of a two-detector line.

    first/second mean early/late on the data line and m1/m2 on the
    monitoring line.  Entries are probabilities summing to 1.
    """

    only_first: float
    only_second: float
    both: float
    none: float

    def __post_init__(self):
        values = self.as_tuple()
        for name, value in zip(("only_first", "only_second", "both", "none"), values):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
        if abs(sum(values) - 1.0) > 1e-9:
            raise ValueError(f"pattern probabilities must sum to 1, got {sum(values)!r}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.only_first, self.only_second, self.both, self.none)


@dataclass(frozen=True)
class ClickProbabilities:
    """Per-preparation click-pattern distributions for one configuration."""

    sent_alpha0: PatternDistribution  # first = early detector, second = late
    sent_0alpha: PatternDistribution  # first = early detector, second = late
    sent_alphaalpha: PatternDistribution  # first = port m1, second = port m2


def _click_prob(mean_photons: float, p_dark: float) -> float:
    # expm1 keeps precision at small intensities; exact d at mu = 0
    return p_dark + (1.0 - p_dark) * (-math.expm1(-mean_photons))


def _two_detector(p_first: float, p_second: float) -> PatternDistribution:
    return PatternDistribution(
        only_first=p_first * (1.0 - p_second),
        only_second=(1.0 - p_first) * p_second,
        both=p_first * p_second,
        none=(1.0 - p_first) * (1.0 - p_second),
    )


def click_probabilities(
    source: SourceConfig, channel: ChannelConfig, receiver: ReceiverConfig
) -> ClickProbabilities:
    """Exact per-round click-pattern distributions for each preparation.

    Detectors on one line are independent given the preparation, so each
    group's four-pattern distribution is the product of two Bernoulli
    click events.  The data line times an occupied slot with mean photon
    number ``mu eta_ch t_b eta_det`` against an empty slot that can only
    dark-click; the monitoring ports see ``mu_mon (1 +/- V)`` under the
    decoy.
    """
    eta_ch = 10.0 ** (-channel.loss_db / 10.0)
    mu_data = source.mu * eta_ch * receiver.t_b * receiver.eta_det
    mu_mon = source.mu * eta_ch * (1.0 - receiver.t_b) * receiver.eta_det
    d = receiver.p_dark
    vis = channel.effective_visibility()

    q_occupied = _click_prob(mu_data, d)
    q_empty = _click_prob(0.0, d)  # = p_dark
    q_m1 = _click_prob(mu_mon * (1.0 + vis), d)
    q_m2 = _click_prob(mu_mon * (1.0 - vis), d)

    return ClickProbabilities(
        sent_alpha0=_two_detector(q_occupied, q_empty),
        sent_0alpha=_two_detector(q_empty, q_occupied),
        sent_alphaalpha=_two_detector(q_m1, q_m2),
    )


def _chunk_tallies(prep_probs, pattern_probs, seed: int, chunk_index: int, chunk_rounds: int):
    rng = np.random.default_rng(np.random.SeedSequence([seed, chunk_index]))
    group_sizes = rng.multinomial(chunk_rounds, prep_probs)
    return [
        rng.multinomial(int(size), dist)
        for size, dist in zip(group_sizes, pattern_probs)
    ]


def simulate(
    source: SourceConfig,
    channel: ChannelConfig,
    receiver: ReceiverConfig,
    seed: int,
    *,
    workers: int = 1,
) -> RawCounts:
    """Run ``source.n_rounds`` rounds and tally click patterns per group.

    Parameters
    ----------
    source, channel, receiver
        Validated link configuration.
    seed : int
        Stream key; taken modulo 2**64.  Equal seeds give byte-identical
        counts for any ``workers`` value, different seeds give
        independent streams.
    workers : int
        Thread count for chunk dispatch; affects wall time only, never
        the counts.

    Returns
    -------
    RawCounts
        Integer tallies; all twelve cells sum to ``source.n_rounds``.
    """
    try:
        seed_word = int(operator.index(seed)) & _UINT64_MASK
    except TypeError:
        raise ValueError(f"seed must be an integer, got {seed!r}") from None
    if not isinstance(workers, int) or workers < 1:
        raise ValueError(f"workers must be a positive integer, got {workers!r}")

    probs = click_probabilities(source, channel, receiver)
    signal_half = 0.5 * (1.0 - source.f)
    prep = np.array([signal_half, signal_half, source.f])
    pattern = [
        np.array(probs.sent_alpha0.as_tuple()),
        np.array(probs.sent_0alpha.as_tuple()),
        np.array(probs.sent_alphaalpha.as_tuple()),
    ]

    n = source.n_rounds
    n_chunks = (n + ROUNDS_PER_CHUNK - 1) // ROUNDS_PER_CHUNK
    sizes = [ROUNDS_PER_CHUNK] * (n_chunks - 1)
    sizes.append(n - ROUNDS_PER_CHUNK * (n_chunks - 1))

    totals = [[0, 0, 0, 0] for _ in range(3)]

    def run(task):
        index, rounds = task
        return _chunk_tallies(prep, pattern, seed_word, index, rounds)

    if workers == 1:
        results = map(run, enumerate(sizes))
        for tallies in results:
            for group, counts in zip(totals, tallies):
                for k in range(4):
                    group[k] += int(counts[k])
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for tallies in pool.map(run, enumerate(sizes)):
                for group, counts in zip(totals, tallies):
                    for k in range(4):
                        group[k] += int(counts[k])

    return RawCounts(
        sent_alpha0=DataLineCounts(*totals[0]),
        sent_0alpha=DataLineCounts(*totals[1]),
        sent_alphaalpha=MonitorCounts(*totals[2]),
    )


def loss_sweep(
    losses,
    params: WitnessParams,
    source: SourceConfig,
    channel: ChannelConfig,
    receiver: ReceiverConfig,
    seed: int,
    *,
    workers: int = 1,
) -> list[tuple[float, WitnessEvaluation]]:
    """Simulate, renormalize, and evaluate the witness at each loss value.

    Every point reuses the same seed (common random numbers keep
    point-to-point jitter down, so the expectation-versus-loss curve is
    smooth); the channel's visibility model is re-evaluated per point
    unless a fixed visibility overrides it.

    Parameters
    ----------
    losses : iterable of float
        Channel losses in dB, non-empty; output preserves this order.

    Raises
    ------
    InsufficientDataError
        If some group records no conclusive event at a loss point.
    """
    loss_list = [float(x) for x in losses]
    if not loss_list:
        raise ValueError("losses must be a non-empty sequence")
    out = []
    for loss in loss_list:
        point_channel = dataclasses.replace(channel, loss_db=loss)
        counts = simulate(source, point_channel, receiver, seed, workers=workers)
        out.append((loss, witness_expectation(params, renormalize(counts))))
    return out
