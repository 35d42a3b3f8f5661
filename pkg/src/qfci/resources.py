"""Elementary-gate counts for Trotterized controlled evolution.

Standard template per string exponential e^{i theta P}: conjugate each X
factor with Hadamards, each Y factor with R_x(-pi/2) pairs, chain the
support with a CNOT ladder, rotate the parity qubit with one R_z
(controlled-R_z when the evolution itself is controlled).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyString
from .hamiltonian import PauliOperator, PauliString


@dataclass(frozen=True)
class GateCounts:
    hadamard: int = 0
    cnot: int = 0
    rx: int = 0
    rz: int = 0
    controlled_rz: int = 0

    @property
    def total(self) -> int:
        return self.hadamard + self.cnot + self.rx + self.rz + self.controlled_rz

    def __add__(self, other: "GateCounts") -> "GateCounts":
        return GateCounts(
            self.hadamard + other.hadamard,
            self.cnot + other.cnot,
            self.rx + other.rx,
            self.rz + other.rz,
            self.controlled_rz + other.controlled_rz,
        )

    def __mul__(self, factor: int) -> "GateCounts":
        return GateCounts(
            self.hadamard * factor,
            self.cnot * factor,
            self.rx * factor,
            self.rz * factor,
            self.controlled_rz * factor,
        )

    __rmul__ = __mul__

    def as_dict(self) -> dict[str, int]:
        return {
            "hadamard": self.hadamard,
            "cnot": self.cnot,
            "rx": self.rx,
            "rz": self.rz,
            "controlled_rz": self.controlled_rz,
            "total": self.total,
        }


def count_string_exponential(s: PauliString, controlled: bool = False) -> GateCounts:
    """Gate cost of one e^{i theta s} under the ladder template."""
    weight = len(s.factors)
    if weight == 0:
        raise EmptyString("cannot exponentiate the identity string as a circuit")
    n_x = sum(1 for _, letter in s.factors if letter == "X")
    n_y = sum(1 for _, letter in s.factors if letter == "Y")
    return GateCounts(
        hadamard=2 * n_x,
        cnot=2 * (weight - 1),
        rx=2 * n_y,
        rz=0 if controlled else 1,
        controlled_rz=1 if controlled else 0,
    )


def count_controlled_u(op: PauliOperator) -> GateCounts:
    """Gates for one controlled Trotter slice of op.

    Identity strings are skipped: their controlled action is a phase on
    the control qubit that merges with the feedback rotation already in
    the circuit, so they cost nothing extra.
    """
    counts = GateCounts()
    for s in op.terms:
        if len(s.factors) == 0:
            continue
        counts = counts + count_string_exponential(s, controlled=True)
    return counts


def count_u(op: PauliOperator) -> GateCounts:
    """Gates for one uncontrolled Trotter slice (identity = global phase)."""
    counts = GateCounts()
    for s in op.terms:
        if len(s.factors) == 0:
            continue
        counts = counts + count_string_exponential(s, controlled=False)
    return counts


def fci_dimension(n_orb: int, n_alpha: int, n_beta: int) -> int:
    """Determinant count of the (n_alpha, n_beta) sector."""
    return math.comb(n_orb, n_alpha) * math.comb(n_orb, n_beta)


def fitted_exponent(sizes, totals) -> float:
    """Least-squares slope of log(total) against log(size)."""
    xs = np.log(np.asarray(sizes, dtype=float))
    ys = np.log(np.asarray(totals, dtype=float))
    if xs.size < 2:
        raise ValueError("need at least two points to fit a slope")
    slope, _ = np.polyfit(xs, ys, 1)
    return float(slope)
