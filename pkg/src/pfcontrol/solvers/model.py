"""Reaction terms of the Allen-Cahn equation and the physicality monitor.

Every function accepts scalars or numpy arrays and broadcasts.
"""
import math
from abc import ABC, abstractmethod
from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np

from pfcontrol.config import ModelParams, ReactionKind

PHYSICALITY_BOUND = math.sqrt(3.0) / 36.0


def physicality_bound() -> float:
    return PHYSICALITY_BOUND


def _cubic(ytilde):
    return ytilde * (1.0 - ytilde) * (ytilde - 0.5)


def _cubic_prime(ytilde):
    return -3.0 * ytilde**2 + 3.0 * ytilde - 0.5


def reaction_linear(y, ytilde, params: ModelParams):
    return _cubic(ytilde) - params.beta_xi * (y - params.y_mt)


def _ramp(ytilde, eps0: float, eps1: float):
    return np.clip((np.asarray(ytilde) - eps0) / (eps1 - eps0), 0.0, 1.0)


def sigma(ytilde, eps0: float, eps1: float):
    s = _ramp(ytilde, eps0, eps1)
    return s * s * (3.0 - 2.0 * s)


def sigma_prime(ytilde, eps0: float, eps1: float):
    s = _ramp(ytilde, eps0, eps1)
    return 6.0 * s * (1.0 - s) / (eps1 - eps0)


def reaction_limiter(y, ytilde, params: ModelParams):
    forcing = (
        0.5
        * params.beta_xi
        * sigma(ytilde, params.eps0, params.eps1)
        * (params.y_mt - y)
    )
    return 2.0 * ytilde * (1.0 - ytilde) * (ytilde - 0.5 + forcing)


def h_term(ztilde, z, params: ModelParams):
    s = sigma(ztilde, params.eps0, params.eps1)
    ds = sigma_prime(ztilde, params.eps0, params.eps1)
    return (
        params.beta
        * (z - params.y_mt)
        * (s + ztilde * ds - 2.0 * ztilde * s - ztilde**2 * ds)
    )


class ReactionTerm(ABC):
    """Reaction term f(y, ỹ) together with the derivatives the adjoint uses.

    ``coupling`` is -df/dy and ``d_ytilde`` is df/dỹ, both evaluated on
    the time-reversed forward state (z̃, z).
    """

    def __init__(self, params: ModelParams):
        self.params = params

    @property
    @abstractmethod
    def kind(self) -> ReactionKind:
        pass

    @abstractmethod
    def value(self, y, ytilde):
        pass

    @abstractmethod
    def coupling(self, ztilde, z):
        pass

    @abstractmethod
    def d_ytilde(self, ztilde, z):
        pass

    @abstractmethod
    def realistic(self, max_excess: float) -> bool:
        pass


class LinearReaction(ReactionTerm):
    @property
    def kind(self) -> ReactionKind:
        return ReactionKind.LINEAR

    def value(self, y, ytilde):
        return reaction_linear(y, ytilde, self.params)

    def coupling(self, ztilde, z):
        return self.params.beta_xi + 0.0 * np.asarray(ztilde)

    def d_ytilde(self, ztilde, z):
        return _cubic_prime(ztilde)

    def realistic(self, max_excess: float) -> bool:
        return max_excess < PHYSICALITY_BOUND


class LimiterReaction(ReactionTerm):
    @property
    def kind(self) -> ReactionKind:
        return ReactionKind.LIMITER

    def value(self, y, ytilde):
        return reaction_limiter(y, ytilde, self.params)

    def coupling(self, ztilde, z):
        s = sigma(ztilde, self.params.eps0, self.params.eps1)
        return self.params.beta_xi * (ztilde * s - ztilde**2 * s)

    def d_ytilde(self, ztilde, z):
        return 2.0 * _cubic_prime(ztilde) - self.params.xi * h_term(
            ztilde, z, self.params
        )

    def realistic(self, max_excess: float) -> bool:
        # the limiter keeps three roots for any undercooling
        return True


_REACTIONS: dict[ReactionKind, type[ReactionTerm]] = {
    ReactionKind.LINEAR: LinearReaction,
    ReactionKind.LIMITER: LimiterReaction,
}


def reaction_term(params: ModelParams) -> ReactionTerm:
    return _REACTIONS[params.reaction](params)


def adjoint_coupling(ztilde, z, params: ModelParams):
    return reaction_term(params).coupling(ztilde, z)


@dataclass(frozen=True)
class PhysicalityReport:
    max_excess: float
    level: int
    point: tuple[int, ...]
    realistic: bool
    bound: float = PHYSICALITY_BOUND


class PhysicalityMonitor:
    """Running maximum of |βξ(y - y_mt)| over the frames it is shown."""

    def __init__(self, params: ModelParams):
        self.params = params
        self._reaction = reaction_term(params)
        self._best = -1.0
        self._level = 0
        self._point: tuple[int, ...] = ()

    def update(self, level: int, y: np.ndarray) -> None:
        excess = np.abs(self.params.beta_xi * (y - self.params.y_mt))
        flat = int(np.argmax(excess))
        value = float(excess.flat[flat])
        if value > self._best:
            self._best = value
            self._level = level
            self._point = tuple(
                int(i) for i in np.unravel_index(flat, excess.shape)
            )

    def report(self) -> PhysicalityReport:
        best = max(self._best, 0.0)
        return PhysicalityReport(
            max_excess=best,
            level=self._level,
            point=self._point,
            realistic=self._reaction.realistic(best),
        )


def physicality_violation(
    y_traj: Iterable[np.ndarray], params: ModelParams
) -> PhysicalityReport:
    monitor = PhysicalityMonitor(params)
    for level, frame in enumerate(y_traj):
        monitor.update(level, np.asarray(frame))
    return monitor.report()
