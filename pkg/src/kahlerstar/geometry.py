"""Kähler charts: potentials of a formal deformation, metric jets, Poisson bracket."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .expr import ScalarField, as_field, parse_expression
from .jets import Jet, JetError, JetMatrix, jet_matrix_inverse

BUILTIN_CHARTS = ("flat", "fubini-study", "hyperbolic-disc")


class ChartError(ValueError):
    pass


@dataclass(frozen=True)
class KahlerChart:
    """Dimension plus the potentials ``Phi_w`` (w = -1, 0, 1, ...) on one chart.

    The formal potential is ``Phi = Phi_{-1}/h + Phi_0 + Phi_1 h + ...``; absent
    weights are zero. Potentials of weight above ``truncation`` never reach a
    coefficient up to ``h^truncation`` and are ignored.
    """

    m: int
    potentials: dict[int, ScalarField]
    truncation: int = 4
    name: str = "custom"

    def __post_init__(self):
        if self.m < 1:
            raise ChartError(f"dimension must be positive, got {self.m}")
        if -1 not in self.potentials:
            raise ChartError("the chart needs a Kähler potential of weight -1")
        for w, f in self.potentials.items():
            if w < -1:
                raise ChartError(f"potential weight {w} below -1")
            if f.dimension > self.m:
                raise ChartError(f"potential of weight {w} uses z{f.dimension} but m={self.m}")

    def __hash__(self):
        return hash((self.m, self.name, self.truncation,
                     tuple(sorted((w, f) for w, f in self.potentials.items()))))

    def potential(self, w: int) -> ScalarField | None:
        f = self.potentials.get(w)
        if f is None or f.is_zero() or w > self.truncation:
            return None
        return f

    def active_weights(self) -> list[int]:
        return sorted(w for w in self.potentials if self.potential(w) is not None)

    def with_potential(self, w: int, f) -> "KahlerChart":
        pots = dict(self.potentials)
        f = as_field(f)
        pots[w] = pots[w] + f if w in pots else f
        return KahlerChart(self.m, pots, self.truncation, self.name)

    def with_truncation(self, n: int) -> "KahlerChart":
        return KahlerChart(self.m, dict(self.potentials), n, self.name)

    def describe(self) -> str:
        pots = ", ".join(f"Phi_{w} = {self.potentials[w]}" for w in sorted(self.potentials))
        return f"{self.name} (m={self.m}): {pots}"

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "truncation": self.truncation,
            "potentials": {str(w): str(f) for w, f in sorted(self.potentials.items())},
        }


def chart_from_json(data: dict, name: str = "custom") -> KahlerChart:
    m = int(data["m"])
    pots = {int(w): parse_expression(text, m) for w, text in data["potentials"].items()}
    return KahlerChart(m, pots, int(data.get("truncation", 4)), name)


def load_chart(path: str | Path) -> KahlerChart:
    path = Path(path)
    return chart_from_json(json.loads(path.read_text()), name=path.stem)


def builtin_chart(name: str, m: int = 1, truncation: int = 4) -> KahlerChart:
    """Built-in geometries with the trivial deformation ``omega_{-1}/h``.

    ``flat``: ``sum z_k zb_k``; ``fubini-study``: ``log(1 + sum z_k zb_k)`` (the
    affine chart of projective space); ``hyperbolic-disc``:
    ``-log(1 - sum z_k zb_k)`` (the unit ball).
    """
    if m < 1:
        raise ChartError(f"unsupported dimension m={m}")
    norm = " + ".join(f"z{k}*zb{k}" for k in range(1, m + 1))
    if name == "flat":
        text = norm
    elif name == "fubini-study":
        text = f"log(1 + {norm})"
    elif name == "hyperbolic-disc":
        text = f"-log(1 - ({norm}))"
    else:
        raise ChartError(f"unknown chart {name!r}; choose from {', '.join(BUILTIN_CHARTS)}")
    return KahlerChart(m, {-1: parse_expression(text, m)}, truncation, name)


def _as_point(point, m: int) -> tuple[complex, ...]:
    if isinstance(point, (int, float, complex)):
        point = [point]
    point = tuple(complex(x) for x in point)
    if len(point) == 1 and m > 1:
        point = point * m
    if len(point) != m:
        raise ChartError(f"point has {len(point)} coordinates, chart has m={m}")
    return point


def metric_jet(chart: KahlerChart, point, depth: int) -> JetMatrix:
    """``g[p][q] = d^2 Phi_{-1} / dz_p dzb_q`` as jets of the given depth."""
    point = _as_point(point, chart.m)
    phi = chart.potentials[-1].jet(point, depth + 2, chart.m)
    m = chart.m
    entries = []
    for p in range(m):
        row = []
        for q in range(m):
            hol = tuple(1 if k == p else 0 for k in range(m))
            anti = tuple(1 if k == q else 0 for k in range(m))
            row.append(phi.derive(hol, anti))
        entries.append(row)
    return JetMatrix(entries)


def inverse_metric_jet(chart: KahlerChart, point, depth: int) -> JetMatrix:
    """``H[q][p] = g^{qbar p}``, the inverse of :func:`metric_jet`."""
    point = _as_point(point, chart.m)
    try:
        return jet_matrix_inverse(metric_jet(chart, point, depth), where=str(point))
    except JetError as exc:
        raise ChartError(str(exc)) from exc


def poisson_bracket(chart: KahlerChart, f1, f2, point, depth: int) -> Jet:
    """``{f1, f2} = i sum g^{qbar p} (d_qbar f1 d_p f2 - d_p f1 d_qbar f2)``."""
    point = _as_point(point, chart.m)
    m = chart.m
    a = as_field(f1).jet(point, depth + 1, m) if not isinstance(f1, Jet) else f1
    b = as_field(f2).jet(point, depth + 1, m) if not isinstance(f2, Jet) else f2
    a, b = a.truncate(depth + 1), b.truncate(depth + 1)
    H = inverse_metric_jet(chart, point, depth)
    total = Jet(m, depth)
    for q in range(m):
        for p in range(m):
            term = a.d(q, False) * b.d(p, True) - a.d(p, True) * b.d(q, False)
            total = total + H[q, p] * term
    return total * 1j

