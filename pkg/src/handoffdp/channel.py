"""Per-channel occupancy and quality Markov chains.

Each channel m carries two independent two-state chains: occupancy
(0=busy, 1=idle) with matrix ``alpha[m]`` and quality (0=bad, 1=good) with
matrix ``beta[m]``. Rows are indexed by the current state and columns by the
next state, so ``alpha[m][o][o_next]`` is a transition probability.

Joint channel states are addressed by an integer code
``k = occupancy_code * 2**M + quality_code`` where both codes read channel 1 as
the most significant bit. Code 0 is "all busy, all bad".
"""

from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property
import math

import numpy as np
import numpy.typing as npt

from .error import ChannelIndexError, ConfigError, Issue, ShapeMismatchError
from .result import Err, Ok, Result

STOCHASTIC_TOLERANCE = 1e-12

Matrix2 = tuple[tuple[float, float], tuple[float, float]]


def _as_matrix(rows: Sequence[Sequence[float]]) -> Matrix2:
    (a, b), (c, d) = rows
    return ((float(a), float(b)), (float(c), float(d)))


@dataclass(frozen=True, slots=True)
class ChannelParams:
    """Occupancy and quality transition matrices of one channel."""

    occupancy: Matrix2
    quality: Matrix2

    @classmethod
    def of(
        cls,
        occupancy: Sequence[Sequence[float]],
        quality: Sequence[Sequence[float]],
    ) -> "ChannelParams":
        return cls(_as_matrix(occupancy), _as_matrix(quality))

    @classmethod
    def frozen(cls) -> "ChannelParams":
        """A channel whose occupancy and quality never change."""
        return cls.of([[1.0, 0.0], [0.0, 1.0]], [[1.0, 0.0], [0.0, 1.0]])


@dataclass(frozen=True, slots=True)
class RateParams:
    """Integer data units delivered per slot on an idle good / idle bad channel."""

    good: int
    bad: int

    @classmethod
    def from_physical(
        cls,
        rate_good_bps: float,
        rate_bad_bps: float,
        slot_seconds: float,
        unit_bits: float,
    ) -> "RateParams":
        """Converts bit rates and slot length into whole units per slot.

        Example:
            >>> RateParams.from_physical(2e6, 1e6, 1.0, 1e6)
            RateParams(good=2, bad=1)
        """
        return cls(
            good=round(rate_good_bps * slot_seconds / unit_bits),
            bad=round(rate_bad_bps * slot_seconds / unit_bits),
        )

    def validate(self) -> Result["RateParams", list[Issue]]:
        issues: list[Issue] = []
        for name, value in (("good", self.good), ("bad", self.bad)):
            if not isinstance(value, int) or isinstance(value, bool):
                issues.append(Issue(f"rates.{name}", f"must be an integer, got {value!r}"))
        if not issues:
            if self.bad < 0:
                issues.append(Issue("rates.bad", "must be >= 0"))
            if self.good < self.bad:
                issues.append(Issue("rates.good", "must be >= rates.bad"))
        return Err(issues) if issues else Ok(self)


@dataclass(frozen=True, slots=True)
class ChannelStateVector:
    """Sensed occupancy and quality bits of all M channels."""

    occupancy: tuple[int, ...]
    quality: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.occupancy) != len(self.quality):
            raise ShapeMismatchError(
                f"occupancy has {len(self.occupancy)} entries, quality {len(self.quality)}"
            )

    @property
    def channels(self) -> int:
        return len(self.occupancy)

    @property
    def code(self) -> int:
        return encode(self.occupancy, self.quality)

    @classmethod
    def from_code(cls, code: int, channels: int) -> "ChannelStateVector":
        occupancy, quality = decode(code, channels)
        return cls(occupancy, quality)

    @property
    def idle_set(self) -> tuple[int, ...]:
        """1-based indices of idle channels."""
        return tuple(m + 1 for m, o in enumerate(self.occupancy) if o == 1)


def _bits_to_int(bits: Sequence[int]) -> int:
    value = 0
    for bit in bits:
        value = (value << 1) | int(bit)
    return value


def _int_to_bits(value: int, width: int) -> tuple[int, ...]:
    return tuple((value >> (width - 1 - m)) & 1 for m in range(width))


def encode(occupancy: Sequence[int], quality: Sequence[int]) -> int:
    channels = len(occupancy)
    return (_bits_to_int(occupancy) << channels) | _bits_to_int(quality)


def decode(code: int, channels: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    mask = (1 << channels) - 1
    return (
        _int_to_bits(code >> channels, channels),
        _int_to_bits(code & mask, channels),
    )


def validate_channel_params(
    params: Sequence[ChannelParams],
) -> Result[tuple[ChannelParams, ...], list[Issue]]:
    """Checks that every matrix is row-stochastic with entries in [0, 1].

    Returns:
        Ok with the parameters, or Err listing one issue per offending row,
        located as ``channels[i].occupancy[r]`` (0-based channel index i).

    Example:
        >>> even = [[0.5, 0.5], [0.5, 0.5]]
        >>> validate_channel_params([ChannelParams.of([[0.5, 0.6], [0.5, 0.5]], even)])
        Err([Issue(path='channels[0].occupancy[0]', message='row sums to 1.1')])
    """
    if len(params) == 0:
        return Err([Issue("channels", "at least one channel is required")])

    issues: list[Issue] = []
    for index, channel in enumerate(params):
        for name, matrix in (("occupancy", channel.occupancy), ("quality", channel.quality)):
            for row_index, row in enumerate(matrix):
                path = f"channels[{index}].{name}[{row_index}]"
                if any(not 0.0 <= p <= 1.0 for p in row):
                    issues.append(Issue(path, f"entries must lie in [0, 1], got {list(row)}"))
                    continue
                total = math.fsum(row)
                if abs(total - 1.0) > STOCHASTIC_TOLERANCE:
                    issues.append(Issue(path, f"row sums to {total:.12g}"))
    return Err(issues) if issues else Ok(tuple(params))


class ChannelModel:
    """Joint evolution of M independent occupancy/quality chains.

    Immutable after construction. Sampling methods take the random stream
    from the caller.
    """

    def __init__(self, params: Sequence[ChannelParams]) -> None:
        checked = validate_channel_params(params)
        if checked.is_err():
            raise ConfigError("invalid channel parameters", checked.unwrap_err())
        self._params = checked.unwrap()
        self._alpha = np.array([p.occupancy for p in self._params], dtype=float)
        self._beta = np.array([p.quality for p in self._params], dtype=float)

    @property
    def params(self) -> tuple[ChannelParams, ...]:
        return self._params

    @property
    def channels(self) -> int:
        return len(self._params)

    @property
    def joint_states(self) -> int:
        return 1 << (2 * self.channels)

    def _check_channel(self, m: int) -> None:
        if not 1 <= m <= self.channels:
            raise ChannelIndexError(m, self.channels)

    def occupancy_step_prob(self, m: int, o: int, o_next: int) -> float:
        self._check_channel(m)
        return float(self._alpha[m - 1, o, o_next])

    def quality_step_prob(self, m: int, q: int, q_next: int) -> float:
        self._check_channel(m)
        return float(self._beta[m - 1, q, q_next])

    def joint_step_prob(self, state: ChannelStateVector, nxt: ChannelStateVector) -> float:
        """Probability of moving between two joint channel states in one slot."""
        if state.channels != self.channels or nxt.channels != self.channels:
            raise ShapeMismatchError(
                f"expected {self.channels} channels, got {state.channels} and {nxt.channels}"
            )
        prob = 1.0
        for m in range(1, self.channels + 1):
            prob *= self.occupancy_step_prob(m, state.occupancy[m - 1], nxt.occupancy[m - 1])
            prob *= self.quality_step_prob(m, state.quality[m - 1], nxt.quality[m - 1])
        return prob

    @cached_property
    def transition_matrix(self) -> npt.NDArray[np.float64]:
        """Dense (4**M, 4**M) matrix over joint codes; rows sum to one."""
        occupancy = np.ones((1, 1))
        quality = np.ones((1, 1))
        for m in range(self.channels):
            occupancy = np.kron(occupancy, self._alpha[m])
            quality = np.kron(quality, self._beta[m])
        matrix = np.kron(occupancy, quality)
        matrix.setflags(write=False)
        return matrix

    def advance(
        self, state: ChannelStateVector, uniforms: npt.NDArray[np.float64]
    ) -> ChannelStateVector:
        """Next state driven by an (M, 2) block of uniforms (occupancy, quality)."""
        occupancy, quality = self.advance_bits(
            np.asarray(state.occupancy, dtype=np.int8)[None, :],
            np.asarray(state.quality, dtype=np.int8)[None, :],
            uniforms[None, ...],
        )
        return ChannelStateVector(
            tuple(int(x) for x in occupancy[0]), tuple(int(x) for x in quality[0])
        )

    def advance_bits(
        self,
        occupancy: npt.NDArray[np.int8],
        quality: npt.NDArray[np.int8],
        uniforms: npt.NDArray[np.float64],
    ) -> tuple[npt.NDArray[np.int8], npt.NDArray[np.int8]]:
        """Vectorised step for a batch: bits (n, M), uniforms (n, M, 2)."""
        channel = np.arange(self.channels)[None, :]
        p_idle = self._alpha[channel, occupancy, 1]
        p_good = self._beta[channel, quality, 1]
        return (
            (uniforms[..., 0] < p_idle).astype(np.int8),
            (uniforms[..., 1] < p_good).astype(np.int8),
        )

    def sample_joint_step(
        self, state: ChannelStateVector, rng: np.random.Generator
    ) -> ChannelStateVector:
        return self.advance(state, rng.random((self.channels, 2)))

    def stationary_idle_probability(self, m: int) -> float | None:
        """Long-run idle fraction of channel m; None for a frozen chain."""
        self._check_channel(m)
        return _stationary(self._alpha[m - 1])

    def stationary_good_probability(self, m: int) -> float | None:
        self._check_channel(m)
        return _stationary(self._beta[m - 1])


def _stationary(matrix: npt.NDArray[np.float64]) -> float | None:
    up, down = float(matrix[0, 1]), float(matrix[1, 0])
    if up + down == 0.0:
        return None
    return up / (up + down)
