"""Dense matrix realizations of the two-channel operator quintuple.

On the grid the single-space Hamiltonian is H = -Delta + v with the
3-point Dirichlet Laplacian, and the auxiliary channel operator
H0 = (-Delta + v_minus) (+) (-Delta + v_plus) acts on two stacked
copies of the grid.  The identification J glues the channels with the
smooth cutoffs, and the conjugate operators are built from the dilation
generator D = (XP + PX)/2.

Every Hermitian matrix here is either real symmetric or of the form
i*K with K real antisymmetric (momentum, dilation); commutators of the
two families are real symmetric again, which keeps the heavy products
in real arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grid import CutoffPair, Grid, PotentialField

__all__ = [
    "HermitianOperator",
    "RectOperator",
    "OperatorSet",
    "build_laplacian",
    "build_momentum_core",
    "build_dilation",
    "build_pair",
    "build_commutator_longrange",
    "build_B",
    "build_B_pm",
    "save_matrix",
    "load_matrix",
]

HERMITICITY_RTOL = 1e-12


@dataclass(frozen=True)
class HermitianOperator:
    """Dense Hermitian matrix with a recorded hermiticity defect."""

    entries: np.ndarray
    hermiticity_defect: float

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.entries)


@dataclass(frozen=True)
class RectOperator:
    """Dense rectangular matrix between the two state spaces."""

    entries: np.ndarray

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]


def hermitian(matrix: np.ndarray, symmetrize: bool = False) -> HermitianOperator:
    """Wrap a matrix as HermitianOperator, checking (or enforcing) M = M*."""
    m = np.asarray(matrix)
    if symmetrize:
        m = 0.5 * (m + m.conj().T)
    scale = np.max(np.abs(m)) or 1.0
    defect = float(np.max(np.abs(m - m.conj().T)))
    if defect > HERMITICITY_RTOL * scale:
        raise ValueError(
            f"hermiticity defect {defect:.3e} exceeds {HERMITICITY_RTOL:.0e} * {scale:.3e}"
        )
    return HermitianOperator(entries=m, hermiticity_defect=defect)


@dataclass(frozen=True)
class OperatorSet:
    """All operators of the discretized two-channel model on one grid."""

    grid: Grid
    cutoffs: CutoffPair
    potential: PotentialField
    H: HermitianOperator                 # n x n
    neglap: HermitianOperator            # -Delta, shared by all channels
    D: HermitianOperator                 # dilation generator, n x n
    A: HermitianOperator                 # jDj, n x n
    J: RectOperator                      # n x 2n
    dilation_core: np.ndarray            # real antisymmetric K with D = iK
    conjugate_core: np.ndarray           # real antisymmetric K' with A = iK'
    commutator_iHA: HermitianOperator    # i[H, A], real symmetric
    commutator_iH0A0_channel: tuple[HermitianOperator, HermitianOperator]

    @property
    def n(self) -> int:
        return self.grid.n

    def channel_hamiltonian(self, side: str) -> np.ndarray:
        """-Delta + v_pm as a dense real matrix."""
        v = self.potential.v_minus if side == "-" else self.potential.v_plus
        return self.neglap.entries + v * np.eye(self.n)

    def H0_matrix(self) -> np.ndarray:
        """Block-diagonal 2n x 2n matrix of the channel pair."""
        n = self.n
        out = np.zeros((2 * n, 2 * n))
        out[:n, :n] = self.channel_hamiltonian("-")
        out[n:, n:] = self.channel_hamiltonian("+")
        return out

    def A0_matrix(self) -> np.ndarray:
        """Block-diagonal 2n x 2n dilation pair (D, D)."""
        n = self.n
        out = np.zeros((2 * n, 2 * n), dtype=complex)
        out[:n, :n] = self.D.entries
        out[n:, n:] = self.D.entries
        return out

    def commutator_iH0A0(self) -> HermitianOperator:
        """i[H0, A0] as a block-diagonal 2n x 2n real symmetric matrix."""
        n = self.n
        cm, cp = self.commutator_iH0A0_channel
        out = np.zeros((2 * n, 2 * n))
        out[:n, :n] = cm.entries
        out[n:, n:] = cp.entries
        return hermitian(out)

    def apply_J(self, phi_minus: np.ndarray, phi_plus: np.ndarray) -> np.ndarray:
        cut = self.cutoffs
        return cut.j_minus * phi_minus + cut.j_plus * phi_plus

    def apply_J_star(self, psi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        cut = self.cutoffs
        return cut.j_minus * psi, cut.j_plus * psi


def build_laplacian(grid: Grid) -> HermitianOperator:
    """-Delta as the 3-point stencil with Dirichlet ends (real symmetric)."""
    n, dx = grid.n, grid.dx
    m = np.zeros((n, n))
    idx = np.arange(n)
    m[idx, idx] = 2.0 / dx**2
    m[idx[:-1], idx[:-1] + 1] = -1.0 / dx**2
    m[idx[:-1] + 1, idx[:-1]] = -1.0 / dx**2
    return hermitian(m)


def build_momentum_core(grid: Grid) -> np.ndarray:
    """Real antisymmetric core K of the momentum P = iK (centered difference)."""
    n, dx = grid.n, grid.dx
    k = np.zeros((n, n))
    idx = np.arange(n - 1)
    # P = -i (S - S^T) / (2 dx) = i K  with  K = -(S - S^T)/(2 dx)
    k[idx, idx + 1] = -1.0 / (2 * dx)
    k[idx + 1, idx] = 1.0 / (2 * dx)
    return k


def build_dilation(grid: Grid) -> HermitianOperator:
    """D = (XP + PX)/2 with Dirichlet-truncated centered-difference P."""
    core = dilation_core(grid)
    return hermitian(1j * core)


def dilation_core(grid: Grid) -> np.ndarray:
    """Real antisymmetric K' with D = iK'."""
    k = build_momentum_core(grid)
    x = grid.nodes
    core = 0.5 * (x[:, None] * k + k * x[None, :])
    return 0.5 * (core - core.T)


def commutator_i_sym_antisym(sym: np.ndarray, core: np.ndarray) -> np.ndarray:
    """i[S, iK] = KS - SK for S real symmetric and K real antisymmetric."""
    m = core @ sym - sym @ core
    return 0.5 * (m + m.T)


def build_pair(grid: Grid, pot: PotentialField, cut: CutoffPair) -> OperatorSet:
    """Assemble the full operator set (H, H0, D, A0, A, J, commutators)."""
    if pot.grid is not grid or cut.grid is not grid:
        raise ValueError("potential and cutoffs must live on the given grid")
    neglap = build_laplacian(grid)
    H = hermitian(neglap.entries + np.diag(pot.v))
    dcore = dilation_core(grid)
    D = hermitian(1j * dcore)
    acore = cut.j[:, None] * dcore * cut.j[None, :]
    acore = 0.5 * (acore - acore.T)
    A = hermitian(1j * acore)

    n = grid.n
    Jmat = np.zeros((n, 2 * n))
    Jmat[:, :n] = np.diag(cut.j_minus)
    Jmat[:, n:] = np.diag(cut.j_plus)

    c_iHA = hermitian(commutator_i_sym_antisym(H.entries, acore))
    h_minus = neglap.entries + pot.v_minus * np.eye(n)
    h_plus = neglap.entries + pot.v_plus * np.eye(n)
    c0 = (
        hermitian(commutator_i_sym_antisym(h_minus, dcore)),
        hermitian(commutator_i_sym_antisym(h_plus, dcore)),
    )
    return OperatorSet(
        grid=grid,
        cutoffs=cut,
        potential=pot,
        H=H,
        neglap=neglap,
        D=D,
        A=A,
        J=RectOperator(Jmat),
        dilation_core=dcore,
        conjugate_core=acore,
        commutator_iHA=c_iHA,
        commutator_iH0A0_channel=c0,
    )


def build_commutator_longrange(opset: OperatorSet) -> HermitianOperator:
    """i[H, A] assembled term by term from the closed-form commutator.

    Uses [A, H] = [j P X j, -Delta] - i j^2 x v' + (i/2)[j^2, -Delta]
    (with P the momentum), then returns i[H, A] = -i [A, H] so the
    degenerate case j == 1, v' == 0 reduces to +2(-Delta) on interior
    states.  Requires a differentiable potential.
    """
    pot = opset.potential
    if pot.v_prime is None:
        raise ValueError("long-range commutator needs a differentiable potential (v_prime)")
    j = opset.cutoffs.j
    x = opset.grid.nodes
    neglap = opset.neglap.entries
    kcore = build_momentum_core(opset.grid)   # P = iK
    # j P X j = i * (diag(j) K diag(x) diag(j))
    t_core = j[:, None] * (kcore * x[None, :]) * j[None, :]
    # [jPXj, -Delta] = i*(T_core @ neglap - neglap @ T_core), antisym core commutator
    comm1 = 1j * (t_core @ neglap - neglap @ t_core)
    mult = np.diag(j**2 * x * pot.v_prime)
    j2 = np.diag(j**2)
    comm3 = 0.5j * (j2 @ neglap - neglap @ j2)
    a_h = comm1 - 1j * mult + comm3           # [A, H]
    i_h_a = -1j * a_h                          # i[H, A]
    i_h_a = 0.5 * (i_h_a + i_h_a.conj().T)
    return hermitian(np.real(i_h_a))


def build_B(
    opset: OperatorSet,
    z: complex,
    resolvent_H: Callable[[complex], np.ndarray],
    resolvent_channel: Callable[[str, complex], np.ndarray],
) -> RectOperator:
    """B(z) = J R0(z) - R(z) J as an n x 2n matrix (Im z != 0)."""
    if z.imag == 0:
        raise ValueError("B(z) requires a non-real z")
    n = opset.n
    R = resolvent_H(z)
    Rm = resolvent_channel("-", z)
    Rp = resolvent_channel("+", z)
    jm = opset.cutoffs.j_minus
    jp = opset.cutoffs.j_plus
    out = np.zeros((n, 2 * n), dtype=complex)
    out[:, :n] = jm[:, None] * Rm - R * jm[None, :]
    out[:, n:] = jp[:, None] * Rp - R * jp[None, :]
    return RectOperator(out)


def build_B_pm(
    opset: OperatorSet,
    z: complex,
    side: str,
    resolvent_H: Callable[[complex], np.ndarray],
    resolvent_channel: Callable[[str, complex], np.ndarray],
) -> np.ndarray:
    """B_pm(z) = R(z) { [-Delta, j_pm] + j_pm (V - v_pm) } R0_pm(z)."""
    if z.imag == 0:
        raise ValueError("B_pm(z) requires a non-real z")
    if side not in ("+", "-"):
        raise ValueError("side must be '+' or '-'")
    cut = opset.cutoffs
    pot = opset.potential
    jpm = cut.j_plus if side == "+" else cut.j_minus
    vpm = pot.v_plus if side == "+" else pot.v_minus
    neglap = opset.neglap.entries
    bracket = neglap * jpm[None, :] - jpm[:, None] * neglap  # [-Delta, j_pm]
    middle = bracket + np.diag(jpm * (pot.v - vpm))
    return resolvent_H(z) @ middle @ resolvent_channel(side, z)


def save_matrix(matrix: np.ndarray, path) -> None:
    """Text export: one row per line, entries as 're,im' pairs, row-major."""
    m = np.atleast_2d(np.asarray(matrix, dtype=complex))
    with open(path, "w") as fh:
        fh.write(f"# rows={m.shape[0]} cols={m.shape[1]} format=re,im\n")
        for row in m:
            fh.write(" ".join(f"{c.real:.17g},{c.imag:.17g}" for c in row))
            fh.write("\n")


def load_matrix(path) -> np.ndarray:
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise ValueError("missing matrix header line")
        rows = []
        for line in fh:
            pairs = [tuple(map(float, c.split(","))) for c in line.split()]
            rows.append([complex(re, im) for re, im in pairs])
    return np.array(rows)
