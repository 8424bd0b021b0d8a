"""Product states in the x/y/z single-site bases and their text labels.

A label is one letter per site from ``x y z`` with a trailing ``'`` for the
-1 eigenstate, e.g. ``"z'xx"`` or ``"x'x'x'"``. Vectors live in the sigma^z
computational basis with site 1 as the most significant factor.
"""

from __future__ import annotations

import re

import numpy as np

_S = 1 / np.sqrt(2)
SITE_STATES = {
    "z": np.array([1, 0], dtype=complex),
    "z'": np.array([0, 1], dtype=complex),
    "x": np.array([_S, _S], dtype=complex),
    "x'": np.array([_S, -_S], dtype=complex),
    "y": np.array([_S, 1j * _S], dtype=complex),
    "y'": np.array([_S, -1j * _S], dtype=complex),
}
_TOKEN = re.compile(r"[xyz]'?")


def parse_label(label: str) -> list[str]:
    tokens = _TOKEN.findall(label)
    if "".join(tokens) != label:
        raise ValueError(f"bad product-state label {label!r}")
    return tokens


def product_state(label: str) -> np.ndarray:
    out = np.array([1.0 + 0j])
    for tok in parse_label(label):
        out = np.kron(out, SITE_STATES[tok])
    return out


def product_label(vec: np.ndarray, tol: float = 1e-9) -> str | None:
    """Label of ``vec`` if it is (up to phase) a product of x/y/z eigenstates, else None."""
    vec = np.asarray(vec, dtype=complex)
    n = vec.size.bit_length() - 1
    if vec.size != 1 << n:
        return None
    norm = np.linalg.norm(vec)
    if norm == 0:
        return None
    psi = (vec / norm).reshape([2] * n)
    tokens = []
    for site in range(n):
        moved = np.moveaxis(psi, site, 0).reshape(2, -1)
        rho = moved @ moved.conj().T
        best = max(SITE_STATES, key=lambda k: np.vdot(SITE_STATES[k], rho @ SITE_STATES[k]).real)
        tokens.append(best)
    label = "".join(tokens)
    if abs(abs(np.vdot(product_state(label), vec / norm)) - 1) > tol:
        return None
    return label


# mode order of the eight H0 eigenstates as listed for the state-preparation pane
H0_MODE_LABELS = ("xxx", "xx'x", "xxx'", "xx'x'", "x'x'x'", "x'xx'", "x'x'x", "x'xx")
