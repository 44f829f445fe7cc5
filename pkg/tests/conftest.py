from collections.abc import Callable

import numpy as np
import pytest

from handoffdp import (
    ChannelParams,
    CostParams,
    PenaltySpec,
    RateParams,
    ScenarioConfig,
    State,
    parse_config,
)

COSTS = CostParams(silent=0.01, transmit=40.0, switch=5.0)
RATES = RateParams(good=2, bad=1)


def frozen_config(
    data_size: int = 1,
    horizon: int = 1,
    penalty: float = 5.0,
    occupancy: int = 1,
    quality: int = 1,
) -> ScenarioConfig:
    """One channel that never changes, starting full on channel 1."""
    return ScenarioConfig(
        channels=(ChannelParams.frozen(),),
        rates=RATES,
        costs=COSTS,
        penalty=PenaltySpec.quadratic(penalty),
        horizon=horizon,
        data_size=data_size,
        initial_state=State.of(data_size, [occupancy], [quality], 1),
        name="frozen",
    )


def homogeneous_config(
    occupancy: list[list[float]],
    channels: int = 2,
    data_size: int = 6,
    horizon: int = 3,
    penalty: float = 5.0,
) -> ScenarioConfig:
    """Identical channels with i.i.d. fair quality."""
    params = ChannelParams.of(occupancy, [[0.5, 0.5], [0.5, 0.5]])
    return ScenarioConfig(
        channels=(params,) * channels,
        rates=RATES,
        costs=COSTS,
        penalty=PenaltySpec.quadratic(penalty),
        horizon=horizon,
        data_size=data_size,
        initial_state=State.of(data_size, [1] * channels, [0] * channels, 1),
        name="homogeneous",
    )


def random_config(seed: int, channels: int, data_size: int, horizon: int) -> ScenarioConfig:
    """Heterogeneous channels, random costs and a random convex integer penalty table."""
    rng = np.random.default_rng(seed)

    def two_state() -> list[list[float]]:
        leave_first, leave_second = (float(x) for x in rng.random(2))
        return [[1.0 - leave_first, leave_first], [leave_second, 1.0 - leave_second]]

    bad = int(rng.integers(0, 3))
    increments = np.sort(rng.integers(0, 40, size=data_size))
    table = [0.0, *(float(x) for x in np.cumsum(increments))]
    c = int(rng.integers(1, channels + 1))
    return ScenarioConfig(
        channels=tuple(ChannelParams.of(two_state(), two_state()) for _ in range(channels)),
        rates=RateParams(good=bad + int(rng.integers(1, 3)), bad=bad),
        costs=CostParams(
            silent=float(rng.uniform(0.0, 1.0)),
            transmit=float(rng.uniform(0.0, 50.0)),
            switch=float(rng.uniform(0.0, 10.0)),
        ),
        penalty=PenaltySpec.from_table(table),
        horizon=horizon,
        data_size=data_size,
        initial_state=State.of(
            data_size,
            rng.integers(0, 2, size=channels).tolist(),
            rng.integers(0, 2, size=channels).tolist(),
            c,
        ),
        name=f"random-{seed}",
    )


@pytest.fixture
def frozen() -> Callable[..., ScenarioConfig]:
    return frozen_config


@pytest.fixture
def homogeneous() -> Callable[..., ScenarioConfig]:
    return homogeneous_config


@pytest.fixture
def random_scenario() -> Callable[..., ScenarioConfig]:
    return random_config


@pytest.fixture(scope="session")
def three_channel() -> ScenarioConfig:
    return parse_config("three_channel").unwrap()


@pytest.fixture(scope="session")
def small_three_channel(three_channel: ScenarioConfig) -> ScenarioConfig:
    """The bundled scenario cut down to V=8, D=4."""
    return three_channel.with_data_size(8).with_horizon(4)
