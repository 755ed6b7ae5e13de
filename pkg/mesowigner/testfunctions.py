"""Test functions for mesoscopic linear statistics and the built-in corpus."""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

__all__ = ["TestFunction", "TestFunctionRegistry", "corpus"]

_SQRT_HALF_PI = math.sqrt(math.pi / 2)


@dataclass(frozen=True)
class TestFunction:
    """A real function on the line together with what the numerics need of it.

    ``f`` and ``df`` must accept numpy arrays. ``alpha`` is the Hölder
    exponent of ``df``, ``beta`` the decay exponent (``|f(x)| <= C |x|^-beta``,
    ``inf`` for compact support or faster than any power). ``fourier`` is the
    closed-form transform ``(2 pi)^-1/2 int f(x) exp(-ikx) dx`` when known.
    """

    __test__ = False  # not a pytest class

    name: str
    f: Callable[[np.ndarray], np.ndarray]
    df: Callable[[np.ndarray], np.ndarray]
    alpha: float = 1.0
    beta: float = math.inf
    fourier: Callable[[np.ndarray], np.ndarray] | None = None
    support: tuple[float, float] | None = None
    description: str = field(default="", compare=False)

    def __call__(self, x):
        return self.f(np.asarray(x, dtype=float))

    @property
    def is_compact(self) -> bool:
        return self.support is not None

    def rescaled(self, a: float) -> TestFunction:
        """The function ``x -> f(a x)``."""
        if a <= 0:
            raise ValueError(f"Scale factor must be positive, got {a}")
        f, df, fourier = self.f, self.df, self.fourier
        return TestFunction(
            name=f"{self.name}*{a:g}",
            f=lambda x: f(a * np.asarray(x, dtype=float)),
            df=lambda x: a * df(a * np.asarray(x, dtype=float)),
            alpha=self.alpha,
            beta=self.beta,
            fourier=None if fourier is None else (lambda k: fourier(np.asarray(k, dtype=float) / a) / a),
            support=None if self.support is None else (self.support[0] / a, self.support[1] / a),
            description=self.description,
        )

    def reflected(self) -> TestFunction:
        """The function ``x -> f(-x)``."""
        f, df, fourier = self.f, self.df, self.fourier
        return TestFunction(
            name=f"{self.name}~",
            f=lambda x: f(-np.asarray(x, dtype=float)),
            df=lambda x: -df(-np.asarray(x, dtype=float)),
            alpha=self.alpha,
            beta=self.beta,
            fourier=None if fourier is None else (lambda k: fourier(-np.asarray(k, dtype=float))),
            support=None if self.support is None else (-self.support[1], -self.support[0]),
            description=self.description,
        )

    def __add__(self, other: TestFunction) -> TestFunction:
        if self.support is None or other.support is None:
            support = None
        else:
            support = (min(self.support[0], other.support[0]), max(self.support[1], other.support[1]))
        fourier = None
        if self.fourier is not None and other.fourier is not None:
            fourier = lambda k, a=self.fourier, b=other.fourier: a(k) + b(k)  # noqa: E731
        return TestFunction(
            name=f"{self.name}+{other.name}",
            f=lambda x, a=self.f, b=other.f: a(x) + b(x),
            df=lambda x, a=self.df, b=other.df: a(x) + b(x),
            alpha=min(self.alpha, other.alpha),
            beta=min(self.beta, other.beta),
            fourier=fourier,
            support=support,
        )


class TestFunctionRegistry:
    """Registry of named test functions."""

    __test__ = False

    def __init__(self):
        self._functions: dict[str, TestFunction] = {}

    def register(self, function: TestFunction):
        self._functions[function.name] = function

    def unregister(self, name: str):
        self._functions.pop(name, None)

    def get(self, name: str) -> TestFunction | None:
        return self._functions.get(name)

    def all(self) -> list[TestFunction]:
        return list(self._functions.values())

    def names(self) -> list[str]:
        return list(self._functions)

    def compact(self) -> list[TestFunction]:
        return [function for function in self._functions.values() if function.is_compact]


def _inside(x):
    return np.abs(x) < 1


def _bump(x):
    x = np.asarray(x, dtype=float)
    return np.where(_inside(x), np.clip(1 - x * x, 0, None) ** 3, 0.0)


def _bump_df(x):
    x = np.asarray(x, dtype=float)
    return np.where(_inside(x), -6 * x * np.clip(1 - x * x, 0, None) ** 2, 0.0)


def _holder_bump(x):
    x = np.asarray(x, dtype=float)
    return np.where(_inside(x), np.clip(1 - x * x, 0, None) ** 1.5, 0.0)


def _holder_bump_df(x):
    x = np.asarray(x, dtype=float)
    return np.where(_inside(x), -3 * x * np.sqrt(np.clip(1 - x * x, 0, None)), 0.0)


def _narrow_bump(x):
    return _bump(2 * np.asarray(x, dtype=float) - 0.5)


def _narrow_bump_df(x):
    return 2 * _bump_df(2 * np.asarray(x, dtype=float) - 0.5)


corpus = TestFunctionRegistry()

corpus.register(
    TestFunction(
        name="gaussian",
        f=lambda x: np.exp(-np.asarray(x, dtype=float) ** 2 / 2),
        df=lambda x: -np.asarray(x, dtype=float) * np.exp(-np.asarray(x, dtype=float) ** 2 / 2),
        fourier=lambda k: np.exp(-np.asarray(k, dtype=float) ** 2 / 2),
        description="exp(-x^2/2)",
    )
)
corpus.register(
    TestFunction(
        name="bump",
        f=_bump,
        df=_bump_df,
        support=(-1.0, 1.0),
        description="(1 - x^2)^3 on [-1, 1], C^2",
    )
)
corpus.register(
    TestFunction(
        name="holder_bump",
        f=_holder_bump,
        df=_holder_bump_df,
        alpha=0.5,
        support=(-1.0, 1.0),
        description="(1 - x^2)^(3/2) on [-1, 1], derivative Hölder-1/2",
    )
)
corpus.register(
    TestFunction(
        name="narrow_bump",
        f=_narrow_bump,
        df=_narrow_bump_df,
        support=(-0.25, 0.75),
        description="(1 - (2x - 1/2)^2)^3, off-centre C^2 bump",
    )
)
corpus.register(
    TestFunction(
        name="cauchy_re",
        f=lambda x: np.asarray(x, dtype=float) / (np.asarray(x, dtype=float) ** 2 + 1),
        df=lambda x: (1 - np.asarray(x, dtype=float) ** 2) / (np.asarray(x, dtype=float) ** 2 + 1) ** 2,
        beta=1.0,
        fourier=lambda k: -1j * _SQRT_HALF_PI * np.sign(k) * np.exp(-np.abs(k)),
        description="Re (x - i)^-1 = x / (x^2 + 1)",
    )
)
corpus.register(
    TestFunction(
        name="cauchy_im",
        f=lambda x: 1 / (np.asarray(x, dtype=float) ** 2 + 1),
        df=lambda x: -2 * np.asarray(x, dtype=float) / (np.asarray(x, dtype=float) ** 2 + 1) ** 2,
        beta=2.0,
        fourier=lambda k: _SQRT_HALF_PI * np.exp(-np.abs(np.asarray(k, dtype=float))) + 0j,
        description="Im (x - i)^-1 = 1 / (x^2 + 1)",
    )
)
corpus.register(
    TestFunction(
        name="zero",
        f=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        df=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        fourier=lambda k: np.zeros_like(np.asarray(k, dtype=float)) + 0j,
        support=(-1.0, 1.0),
        description="f = 0",
    )
)
