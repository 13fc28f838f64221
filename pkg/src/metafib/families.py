"""Named recurrence families and their parameterizations."""

from __future__ import annotations

from dataclasses import dataclass

from . import dsl
from .dsl import ValidatedSpec
from .surd import Surd

KINDS = ("q", "qdl", "conway", "aij", "hk", "vc", "qrs")
_ARITY = {"q": 0, "qdl": 2, "conway": 1, "aij": 2, "hk": 1, "vc": 0, "qrs": 2}


@dataclass(frozen=True)
class Family:
    kind: str
    params: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in _ARITY:
            raise ValueError(f"unknown family {self.kind!r}; choose from {', '.join(KINDS)}")
        if len(self.params) != _ARITY[self.kind]:
            raise ValueError(f"{self.kind} takes {_ARITY[self.kind]} parameter(s), got {len(self.params)}")
        _check_params(self.kind, self.params)

    @classmethod
    def parse(cls, text: str) -> "Family":
        """Parse a preset name such as ``q``, ``hk:114`` or ``qdl:4,2``."""
        kind, _, rest = text.strip().lower().partition(":")
        try:
            params = tuple(int(p) for p in rest.split(",")) if rest else ()
        except ValueError:
            raise ValueError(f"bad preset parameters in {text!r}") from None
        return cls(kind, params)

    def __str__(self) -> str:
        if not self.params:
            return self.kind
        return f"{self.kind}:{','.join(map(str, self.params))}"


def _check_params(kind: str, p: tuple[int, ...]) -> None:
    if kind == "qdl":
        d, l = p
        if l < 2 or d < 1:
            raise ValueError(f"qdl needs d >= 1 and l >= 2, got d={d}, l={l}")
    elif kind == "conway":
        if p[0] < 1:
            raise ValueError(f"conway needs i >= 1, got {p[0]}")
    elif kind == "aij":
        i, j = p
        if i < 1 or j not in (1, 2):
            raise ValueError(f"aij needs i >= 1 and j in {{1, 2}}, got i={i}, j={j}")
    elif kind == "hk":
        if p[0] < 3:
            raise ValueError(f"hk needs k >= 3, got {p[0]}")
    elif kind == "qrs":
        r, s = p
        if r < 1 or s < 1 or r == s:
            raise ValueError(f"qrs needs distinct r, s >= 1, got r={r}, s={s}")


def aij_threshold(i: int) -> int:
    """Last index covered by the initial conditions of a_{i,j}: 2(i-1) + 3*floor(phi*i)."""
    return 2 * (i - 1) + 3 * (Surd.phi() * i).__floor__()


def source(family: Family) -> tuple[str, str]:
    """DSL text and display name for ``family``."""
    k, p = family.kind, family.params
    if k == "q":
        return "A(n)=A(n-A(n-1))+A(n-A(n-2)); init list 1,1; start 2", "Q"
    if k == "qdl":
        d, l = p
        rule = "+".join(f"A(n-A(n-{i}))" for i in range(1, l + 1))
        return f"A(n)={rule}; init ceil(n*{l - 1}/{l}); start {d * l}", f"Q_{{{d},{l}}}"
    if k == "conway":
        (i,) = p
        return f"A(n)=A(A(n-1))+A(n-A(n-1)); init ceil(n/2); start {4 * i}", f"c_{i}"
    if k == "aij":
        i, j = p
        return (
            f"A(n)=A(A(n-{j}))+A(n-A(n-1)); init floor((n+2)/(1+phi)); start {aij_threshold(i)}",
            f"a_{{{i},{j}}}",
        )
    if k == "hk":
        (kk,) = p
        return f"A(n)=A(n-A(n-2))+A(n-A(n-3)); init ceil(n/2); start {kk}", f"H_{kk}"
    if k == "vc":
        return "A(n)=A(n-A(n-1))+A(n-A(n-4)); init list 3,4,5,4,5,6; start 6", "V_c"
    r, s = p
    m = max(r, s)
    ones = ",".join(["1"] * m)
    return f"A(n)=A(n-A(n-{r}))+A(n-A(n-{s})); init list {ones}; start {m}", f"Q_{{{r},{s}}}"


def make_spec(family: Family | str) -> ValidatedSpec:
    if isinstance(family, str):
        family = Family.parse(family)
    text, name = source(family)
    return dsl.load(text, label=name)


def fibonacci(m: int) -> int:
    if not 1 <= m <= 90:
        raise ValueError(f"fibonacci index must be in 1..90, got {m}")
    a, b = 1, 1
    for _ in range(m - 1):
        a, b = b, a + b
    return a
