import numpy as np
import pytest


def spin_matrices(j):
    """(Jx, Jy, Jz, J+) for spin j, m = j, j-1, ..., -j."""
    m = np.arange(j, -j - 1, -1)
    jp = np.zeros((len(m), len(m)), dtype=complex)
    for k in range(1, len(m)):
        jp[k - 1, k] = np.sqrt(j * (j + 1) - m[k] * (m[k] + 1))
    jx = (jp + jp.conj().T) / 2
    jy = (jp - jp.conj().T) / 2j
    return jx, jy, np.diag(m).astype(complex), jp


class ProductSpace:
    """Two collective spins in the full product basis with the zero-polarization ladder."""

    def __init__(self, I1, I2):
        x1, y1, z1, p1 = spin_matrices(I1)
        x2, y2, z2, p2 = spin_matrices(I2)
        e1, e2 = np.eye(len(z1)), np.eye(len(z2))
        k = np.kron
        self.z1, self.z2 = k(z1, e2), k(e1, z2)
        self.p1, self.p2 = k(p1, e2), k(e1, p2)
        self.m1, self.m2 = self.p1.conj().T, self.p2.conj().T
        self.x = k(x1, e2) + k(e1, x2)
        self.y = k(y1, e2) + k(e1, y2)
        self.z = self.z1 + self.z2
        self.isq = self.x @ self.x + self.y @ self.y + self.z @ self.z
        M = min(I1, I2)
        mz1 = np.real(np.diag(self.z1))
        mz2 = np.real(np.diag(self.z2))
        cols = []
        for n in range(int(round(2 * M)) + 1):
            idx = np.nonzero(np.isclose(mz1, -M + n) & np.isclose(mz2, M - n))[0]
            assert len(idx) == 1
            v = np.zeros(len(mz1))
            v[idx[0]] = 1
            cols.append(v)
        self.P = np.array(cols).T

    def project(self, op):
        return self.P.T @ op @ self.P


@pytest.fixture
def product_space():
    return ProductSpace


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_log():
    """Collects one status line per acceptance check for the terminal summary."""
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
