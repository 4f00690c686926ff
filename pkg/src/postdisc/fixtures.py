"""Small worked examples used in tests, demos and the CLI docs."""
import numpy as np

from .core import EnsemblePair, MeasurementTable, ket, projector

_r2 = np.sqrt(2)


def plus_minus_pair():
    """``A = (|0+1>, |0-1>)``, ``B = (|0+2>, |0-2>)`` in dimension 3.

    Every cross overlap is 1/4, the largest value that still allows perfect
    identification of 2+2 states.
    """
    return EnsemblePair.from_states(
        [ket(1, 1, 0), ket(1, -1, 0)],
        [ket(1, 0, 1), ket(1, 0, -1)],
    )


def plus_minus_table():
    """Rank-one table ``M_ab = (3/4) [|0 +-1 +-2>]`` identifying :func:`plus_minus_pair`."""
    ops = np.zeros((2, 2, 3, 3), dtype=complex)
    for a, sa in enumerate((1, -1)):
        for b, sb in enumerate((1, -1)):
            ops[a, b] = projector(np.array([1, sa, sb]) / 2)
    return MeasurementTable(ops)


def plus_minus_embedding_rows():
    """Unnormalized ``psi_ab`` with ``V = sum |ab><psi_ab|``."""
    return np.array([[1, 1, 1], [1, 1, -1], [1, -1, 1], [1, -1, -1]], dtype=complex) / 2


def five_level_pair():
    """``A = (|1+2>, |3+4>)``, ``B = (|0+3>, |2+4>)`` in dimension 5; one overlap vanishes."""
    e = np.eye(5)
    return EnsemblePair.from_states(
        [(e[1] + e[2]) / _r2, (e[3] + e[4]) / _r2],
        [(e[0] + e[3]) / _r2, (e[2] + e[4]) / _r2],
    )


def five_level_table():
    """Table with a rank-two corner ``M_00 = [0] + [1]``."""
    e = np.eye(5)
    ops = np.zeros((2, 2, 5, 5), dtype=complex)
    ops[0, 0] = projector(e[0]) + projector(e[1])
    ops[0, 1] = projector(e[2])
    ops[1, 0] = projector(e[3])
    ops[1, 1] = projector(e[4])
    return MeasurementTable(ops)


def five_level_embedding_rows():
    """``psi_ab`` rows of the embedding for :func:`five_level_pair`."""
    return np.array(
        [
            np.array([-1, 4, 1, 1, -1]) / (2 * np.sqrt(5)),
            np.array([1, 0, 3, -1, 1]) / (2 * np.sqrt(3)),
            np.array([1, 0, 0, 1, 0]) / _r2,
            np.array([-1, 0, 0, 1, 2]) / np.sqrt(6),
        ],
        dtype=complex,
    )


def five_level_factors():
    """A known factorization of the five-level overlap matrix."""
    A = np.array([[5 / 8, 3 / 8], [1 / 4, 3 / 4]])
    B = np.array([[0, 2 / 3], [1, 1 / 3]])
    return A, B


def bb84_pair():
    """Computational basis against the Hadamard basis of a qubit."""
    return EnsemblePair.from_states([ket(1, 0), ket(0, 1)], [ket(1, 1), ket(1, -1)])


def computational_basis_pair(d=2):
    e = np.eye(d, dtype=complex)
    return EnsemblePair.from_states(e, e)
