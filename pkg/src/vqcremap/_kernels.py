"""Numba kernels for batched statevector updates.

All kernels operate in place on C-contiguous complex128 arrays of shape
(rows, 2**n_qubits), one register per row. Qubit 0 is the most significant
bit of the amplitude index, so a qubit index q maps to bit position
m = n_qubits - 1 - q counted from the least significant bit. The bit-pair
enumeration follows the usual compact-index trick: g runs over 2**(n-1)
values and is expanded around bit m to address the (target=0, target=1)
amplitude pair.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def apply_1q(amps, m, u00, u01, u10, u11):
    """Apply a 2x2 unitary to bit position m of every row."""
    rows, dim = amps.shape
    tk = 1 << m
    half = dim >> 1
    for r in range(rows):
        row = amps[r]
        for g in range(half):
            i1 = ((g >> m) << (m + 1)) + (g & (tk - 1))
            i2 = i1 + tk
            a0 = row[i1]
            a1 = row[i2]
            row[i1] = u00 * a0 + u01 * a1
            row[i2] = u10 * a0 + u11 * a1


@njit(cache=True)
def apply_1q_per_row(amps, m, u00, u01, u10, u11):
    """Like apply_1q but with one 2x2 unitary per row (arrays of length rows)."""
    rows, dim = amps.shape
    tk = 1 << m
    half = dim >> 1
    for r in range(rows):
        row = amps[r]
        v00 = u00[r]
        v01 = u01[r]
        v10 = u10[r]
        v11 = u11[r]
        for g in range(half):
            i1 = ((g >> m) << (m + 1)) + (g & (tk - 1))
            i2 = i1 + tk
            a0 = row[i1]
            a1 = row[i2]
            row[i1] = v00 * a0 + v01 * a1
            row[i2] = v10 * a0 + v11 * a1


@njit(cache=True)
def apply_diag(amps, m, p0, p1):
    """Apply diag(p0, p1) to bit position m of every row (RZ fast path)."""
    rows, dim = amps.shape
    tk = 1 << m
    half = dim >> 1
    for r in range(rows):
        row = amps[r]
        for g in range(half):
            i1 = ((g >> m) << (m + 1)) + (g & (tk - 1))
            i2 = i1 + tk
            row[i1] = p0 * row[i1]
            row[i2] = p1 * row[i2]


@njit(cache=True)
def apply_cnot(amps, mc, mt):
    """Swap target-bit pairs on every index whose control bit is set."""
    rows, dim = amps.shape
    quarter = dim >> 2
    ml = mt if mt < mc else mc
    mh = mc if mt < mc else mt
    for r in range(rows):
        row = amps[r]
        for g in range(quarter):
            i = ((g >> ml) << (ml + 1)) + (g & ((1 << ml) - 1))
            i = ((i >> mh) << (mh + 1)) + (i & ((1 << mh) - 1))
            i1 = i | (1 << mc)
            i2 = i1 | (1 << mt)
            tmp = row[i1]
            row[i1] = row[i2]
            row[i2] = tmp


@njit(cache=True)
def exp_z(amps, m, out):
    """Per-row <Z> at bit position m: sum |a|^2 over bit=0 minus bit=1."""
    rows, dim = amps.shape
    tk = 1 << m
    half = dim >> 1
    for r in range(rows):
        row = amps[r]
        acc = 0.0
        for g in range(half):
            i1 = ((g >> m) << (m + 1)) + (g & (tk - 1))
            i2 = i1 + tk
            a0 = row[i1]
            a1 = row[i2]
            acc += (a0.real * a0.real + a0.imag * a0.imag) - (
                a1.real * a1.real + a1.imag * a1.imag
            )
        out[r] = acc


@njit(cache=True)
def grad_zyz(bra, ket, m, g0x, g0y, g0z, g1x, g1y):
    """Accumulate <bra|G_j|ket> for the three ZYZ-rotation tangent observables.

    G0 = g0x*X + g0y*Y + g0z*Z, G1 = g1x*X + g1y*Y, G2 = Z, all on bit m.
    Returns the three complex overlaps summed over every row; the caller
    takes imaginary parts. Fixed accumulation order keeps results bitwise
    reproducible.
    """
    rows, dim = bra.shape
    tk = 1 << m
    half = dim >> 1
    c0m = complex(g0x, -g0y)
    c0p = complex(g0x, g0y)
    c1m = complex(g1x, -g1y)
    c1p = complex(g1x, g1y)
    z0 = 0.0j
    z1 = 0.0j
    z2 = 0.0j
    for r in range(rows):
        rb = bra[r]
        rk = ket[r]
        for g in range(half):
            i1 = ((g >> m) << (m + 1)) + (g & (tk - 1))
            i2 = i1 + tk
            b0 = np.conj(rb[i1])
            b1 = np.conj(rb[i2])
            k0 = rk[i1]
            k1 = rk[i2]
            z0 += b0 * (g0z * k0 + c0m * k1) + b1 * (c0p * k0 - g0z * k1)
            z1 += b0 * (c1m * k1) + b1 * (c1p * k0)
            z2 += b0 * k0 - b1 * k1
    return z0, z1, z2
