"""Shared oracles and solved-state cache for the test suite.

The quadrature oracles are independent evaluation routes: tensor
Gauss-Legendre on smooth mapped domains (the integrands are analytic inside
the ordered simplex, so convergence is spectral).
"""
import numpy as np
import pytest

from bethe3 import QuantumLabel, solve_state
from bethe3.wavefunction import PERMUTATIONS, amplitudes


def gl_nodes(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def quad_simplex_exp(a1, a2, a3, n=48):
    """int over 0<=x1<=x2<=x3<=1 of exp(i(a1 x1 + a2 x2 + a3 x3)).

    Maps the simplex to the cube via x3 = t3, x2 = t3 t2, x1 = t3 t2 t1
    (Jacobian t3^2 t2); the integrand is entire, so GL converges spectrally.
    """
    x, w = gl_nodes(n)
    t3, t2, t1 = np.meshgrid(x, x, x, indexing="ij")
    w3, w2, w1 = np.meshgrid(w, w, w, indexing="ij")
    x3 = t3
    x2 = t3 * t2
    x1 = t3 * t2 * t1
    val = np.exp(1j * (a1 * x1 + a2 * x2 + a3 * x3)) * t3 ** 2 * t2
    return np.sum(val * w1 * w2 * w3)


def psi_on_grid(state, x1, x2, x3):
    k = np.array(state.momenta.as_tuple())
    a = amplitudes(state.momenta, state.c)
    val = np.zeros_like(np.asarray(x1, dtype=complex))
    for perm in PERMUTATIONS:
        val = val + a[perm] * np.exp(
            1j * (k[perm[0]] * x1 + k[perm[1]] * x2 + k[perm[2]] * x3)
        )
    return val


def quad_norm(state, n=48):
    """6 * simplex integral of |psi|^2 by mapped Gauss-Legendre."""
    x, w = gl_nodes(n)
    t3, t2, t1 = np.meshgrid(x, x, x, indexing="ij")
    w3, w2, w1 = np.meshgrid(w, w, w, indexing="ij")
    x3 = t3
    x2 = t3 * t2
    x1 = t3 * t2 * t1
    val = psi_on_grid(state, x1, x2, x3)
    return 6.0 * np.sum(np.abs(val) ** 2 * t3 ** 2 * t2 * w1 * w2 * w3)


def quad_potential(state, n=160, norm=None):
    """(6c/norm) * int_0^1 dx3 int_0^x3 dx1 |psi(x1,x1,x3)|^2 by mapped GL."""
    x, w = gl_nodes(n)
    x3, u = np.meshgrid(x, x, indexing="ij")
    w3, wu = np.meshgrid(w, w, indexing="ij")
    x1 = x3 * u
    val = psi_on_grid(state, x1, x1, x3)
    integral = np.sum(np.abs(val) ** 2 * x3 * w3 * wu)
    n2 = quad_norm(state) if norm is None else norm
    return 6.0 * state.c * integral / n2


_STATE_CACHE = {}


def solved(n1, n2, c):
    key = (n1, n2, float(c))
    if key not in _STATE_CACHE:
        _STATE_CACHE[key] = solve_state(QuantumLabel(n1, n2), float(c))
    return _STATE_CACHE[key]


@pytest.fixture(scope="session")
def solve_cached():
    return solved
