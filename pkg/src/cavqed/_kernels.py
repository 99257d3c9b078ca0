"""In-place statevector kernels (numba). Index ``k`` enumerates the half space
with the target bit removed; inserting a 0 bit gives the paired ``i0``."""
import numpy as np
from numba import njit


@njit(cache=True)
def _insert(k, q):
    low = k & ((1 << q) - 1)
    return ((k >> q) << (q + 1)) | low


@njit(cache=True)
def mat1(psi, q, u00, u01, u10, u11):
    bit = 1 << q
    for k in range(psi.size >> 1):
        i0 = _insert(k, q)
        i1 = i0 | bit
        a = psi[i0]
        b = psi[i1]
        psi[i0] = u00 * a + u01 * b
        psi[i1] = u10 * a + u11 * b


@njit(cache=True)
def had1(psi, q, s):
    bit = 1 << q
    for k in range(psi.size >> 1):
        i0 = _insert(k, q)
        i1 = i0 | bit
        a = psi[i0]
        b = psi[i1]
        psi[i0] = s * (a + b)
        psi[i1] = s * (a - b)


@njit(cache=True)
def diag1(psi, q, d0, d1):
    bit = 1 << q
    for k in range(psi.size >> 1):
        i0 = _insert(k, q)
        psi[i0] *= d0
        psi[i0 | bit] *= d1


@njit(cache=True)
def flip1(psi, q):
    bit = 1 << q
    for k in range(psi.size >> 1):
        i0 = _insert(k, q)
        a = psi[i0]
        psi[i0] = psi[i0 | bit]
        psi[i0 | bit] = a


@njit(cache=True)
def cx(psi, c, t):
    lo, hi = min(c, t), max(c, t)
    cbit, tbit = 1 << c, 1 << t
    for k in range(psi.size >> 2):
        base = _insert(_insert(k, lo), hi) | cbit
        a = psi[base]
        psi[base] = psi[base | tbit]
        psi[base | tbit] = a


@njit(cache=True)
def swap(psi, p, q):
    lo, hi = min(p, q), max(p, q)
    lbit, hbit = 1 << lo, 1 << hi
    for k in range(psi.size >> 2):
        base = _insert(_insert(k, lo), hi)
        a = psi[base | lbit]
        psi[base | lbit] = psi[base | hbit]
        psi[base | hbit] = a


@njit(cache=True)
def weight1(psi, q):
    """Squared norm of the component with qubit ``q`` in ``|1>``."""
    bit = 1 << q
    total = 0.0
    for k in range(psi.size >> 1):
        a = psi[_insert(k, q) | bit]
        total += a.real * a.real + a.imag * a.imag
    return total


@njit(cache=True)
def decay1(psi, q, scale):
    """Multiply the ``|1>`` component of qubit ``q`` by ``scale``; return its prior squared norm."""
    bit = 1 << q
    total = 0.0
    for k in range(psi.size >> 1):
        i1 = _insert(k, q) | bit
        a = psi[i1]
        total += a.real * a.real + a.imag * a.imag
        psi[i1] = scale * a
    return total


@njit(cache=True)
def jump1(psi, q, scale):
    """``scale * |0><1|`` on qubit ``q``."""
    bit = 1 << q
    for k in range(psi.size >> 1):
        i0 = _insert(k, q)
        psi[i0] = scale * psi[i0 | bit]
        psi[i0 | bit] = 0.0


@njit(cache=True)
def z_expectation(psi, zmask):
    total = 0.0
    for i in range(psi.size):
        a = psi[i]
        p = a.real * a.real + a.imag * a.imag
        parity = 0
        m = i & zmask
        while m:
            parity ^= 1
            m &= m - 1
        total += -p if parity else p
    return total


def warmup():
    psi = np.zeros(4, dtype=np.complex128)
    psi[0] = 1
    mat1(psi, 0, 1 + 0j, 0j, 0j, 1 + 0j)
    diag1(psi, 0, 1 + 0j, 1 + 0j)
    flip1(psi, 0)
    cx(psi, 0, 1)
    swap(psi, 0, 1)
    weight1(psi, 0)
    decay1(psi, 0, 1.0)
    had1(psi, 0, 1.0)
    jump1(psi, 0, 1.0)
    z_expectation(psi, 1)
