"""Transverse-field Ising chain: Hamiltonian terms, Trotter gate schedules,
product states and bond-dimension-1 starting operator networks.

Conventions: H = -cos(gamma) sum_i sz_i sz_{i+1} - sin(gamma) sum_i sx_i
             - hz sum_i sz_i, open boundaries, sites numbered 1..L.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
ID2 = np.eye(2, dtype=complex)

PAULI = {"x": SX, "y": SY, "z": SZ}

DEFAULT_DT = 0.05
MAX_TROTTER_STEP = 0.1


@dataclass(frozen=True)
class ModelParams:
    """Coupling/field angle gamma, longitudinal field hz, chain length L."""

    gamma: float
    hz: float = 0.0
    length: int = 64

    def __post_init__(self):
        if not 0.0 <= self.gamma <= np.pi / 2:
            raise ValueError(f"gamma must lie in [0, pi/2], got {self.gamma}")
        if self.hz < 0.0:
            raise ValueError(f"hz must be non-negative, got {self.hz}")
        if self.length < 2 or self.length % 2 != 0:
            raise ValueError(f"length must be even and >= 2, got {self.length}")


@dataclass(frozen=True)
class GateSchedule:
    """Second-order symmetric Trotter layering for one step of e^{-+ iH dt}.

    ``layers`` is an ordered list of gate layers; each layer is a list of
    ((site, site+1), 4x4 unitary) entries acting on disjoint bonds.
    Single-site field terms are folded into the bond terms, split
    half-and-half between the two bonds adjacent to each site (boundary
    sites put their full weight on their only bond).
    """

    trotter_step: float
    direction: str  # "forward" (e^{-iH dt}) or "backward" (e^{+iH dt})
    order: int = 2
    layers: list = field(repr=False, default_factory=list)


@dataclass(frozen=True)
class ProductState:
    """Unentangled initial state: one normalized 2-vector per site."""

    kind: str
    length: int
    vectors: np.ndarray  # shape (L, 2)

    def expectation(self, alpha: str) -> np.ndarray:
        op = PAULI[alpha]
        return np.real(np.einsum("ia,ab,ib->i", self.vectors.conj(), op, self.vectors))


class OperatorMps:
    """Matrix-product representation of a local operator under evolution.

    Cores are rank-4 arrays (left bond, physical-out, physical-in, right
    bond); boundary bonds have extent 1.  ``accumulated_discard`` tracks the
    running sum of relative discarded truncation weights.
    """

    def __init__(self, cores, time_stamp=0.0, accumulated_discard=0.0):
        self.cores = list(cores)
        self.time_stamp = float(time_stamp)
        self.accumulated_discard = float(accumulated_discard)

    @property
    def length(self):
        return len(self.cores)

    def bond_dims(self):
        return [c.shape[0] for c in self.cores] + [self.cores[-1].shape[3]]

    def max_bond(self):
        return max(self.bond_dims())

    def copy(self):
        return OperatorMps(
            [c.copy() for c in self.cores], self.time_stamp, self.accumulated_discard
        )

    def to_dense(self):
        """Full 2^L x 2^L matrix; small L only."""
        l = self.length
        acc = self.cores[0]  # (1, o, i, r)
        out = acc[0]
        for core in self.cores[1:]:
            # out: (O, I, r) ; core: (r, o, i, r')
            out = np.einsum("OIr,roip->OoIip", out, core)
            o1, o2, i1, i2, r = out.shape
            out = out.reshape(o1 * o2, i1 * i2, r)
        assert out.shape[2] == 1
        return out[:, :, 0]


def hamiltonian_terms(params: ModelParams):
    """Local Hamiltonian terms: L-1 bond couplings and L single-site fields.

    Returns a list of ((sites...), hermitian matrix) entries whose sum (as
    Kronecker products) is the full Hamiltonian.
    """
    terms = []
    bond = -np.cos(params.gamma) * np.kron(SZ, SZ)
    for i in range(1, params.length):
        terms.append(((i, i + 1), bond.copy()))
    site_term = -np.sin(params.gamma) * SX - params.hz * SZ
    for i in range(1, params.length + 1):
        terms.append(((i,), site_term.copy()))
    return terms


def dense_hamiltonian(params: ModelParams) -> np.ndarray:
    """Assemble the full 2^L Hamiltonian from its local terms (L <= 14)."""
    if params.length > 14:
        raise ValueError("dense Hamiltonian limited to L <= 14")
    dim = 2**params.length
    h = np.zeros((dim, dim), dtype=complex)
    for sites, mat in hamiltonian_terms(params):
        h += _embed(mat, sites, params.length)
    return h


def _embed(mat, sites, length):
    """Kronecker-embed a 1- or 2-site operator acting on contiguous sites."""
    first = sites[0]
    n_op = len(sites)
    left = np.eye(2 ** (first - 1))
    right = np.eye(2 ** (length - first - n_op + 1))
    return np.kron(np.kron(left, mat), right)


def _bond_hamiltonians(params: ModelParams):
    """Per-bond 4x4 Hamiltonian pieces with fields split onto adjacent bonds."""
    l = params.length
    coupling = -np.cos(params.gamma) * np.kron(SZ, SZ)
    site_term = -np.sin(params.gamma) * SX - params.hz * SZ
    h_bonds = {}
    for i in range(1, l):
        # weight of site i on bond (i, i+1): full if i is the left edge,
        # half otherwise; mirrored for site i+1.
        w_left = 1.0 if i == 1 else 0.5
        w_right = 1.0 if i + 1 == l else 0.5
        h = (
            coupling
            + w_left * np.kron(site_term, ID2)
            + w_right * np.kron(ID2, site_term)
        )
        h_bonds[i] = h
    return h_bonds


def trotter_gates(params: ModelParams, dt: float, direction: str = "forward",
                  order: int = 2, max_step: float = MAX_TROTTER_STEP) -> GateSchedule:
    """Symmetric Trotter schedule for one step of size ``dt``.

    ``order=2``: half-step on odd bonds, full step on even bonds, half-step
    on odd bonds.  ``order=4``: Forest-Ruth composition of three such
    sandwiches with adjacent odd half-layers merged (7 layers).  ``direction``
    "forward" realizes e^{-iH dt}, "backward" e^{+iH dt}.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if dt > max_step:
        raise ValueError(f"dt={dt} exceeds the Trotter step bound {max_step}")
    if direction not in ("forward", "backward"):
        raise ValueError(f"unknown direction {direction!r}")
    if order not in (2, 4):
        raise ValueError(f"order must be 2 or 4, got {order}")
    sign = -1.0 if direction == "forward" else 1.0
    h_bonds = _bond_hamiltonians(params)
    odd = sorted(i for i in h_bonds if i % 2 == 1)
    even = sorted(i for i in h_bonds if i % 2 == 0)

    def layer(bonds, step):
        return [((i, i + 1), scipy.linalg.expm(sign * 1j * step * h_bonds[i]))
                for i in bonds]

    if order == 2:
        weights = [(odd, 0.5), (even, 1.0), (odd, 0.5)]
    else:
        th = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
        weights = [
            (odd, th / 2), (even, th), (odd, (1.0 - th) / 2),
            (even, 1.0 - 2.0 * th), (odd, (1.0 - th) / 2),
            (even, th), (odd, th / 2),
        ]
    layers = [layer(bonds, w * dt) for bonds, w in weights]
    layers = [lay for lay in layers if lay]
    return GateSchedule(trotter_step=dt, direction=direction, order=order,
                        layers=layers)


def product_state(kind: str, length: int) -> ProductState:
    """FMZ (all up), FMX (all along +x) or NEEL (alternating up/down)."""
    kind = kind.upper()
    if length % 2 != 0 or length < 2:
        raise ValueError(f"length must be even and >= 2, got {length}")
    up = np.array([1.0, 0.0], dtype=complex)
    down = np.array([0.0, 1.0], dtype=complex)
    plus = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2)
    if kind == "FMZ":
        vecs = np.tile(up, (length, 1))
    elif kind == "FMX":
        vecs = np.tile(plus, (length, 1))
    elif kind == "NEEL":
        vecs = np.array([up if i % 2 == 0 else down for i in range(length)])
    else:
        raise ValueError(f"unknown product state kind {kind!r}")
    return ProductState(kind=kind, length=length, vectors=vecs)


def state_vector(state: ProductState) -> np.ndarray:
    """Dense 2^L amplitude vector of a product state (small L only)."""
    vec = np.array([1.0], dtype=complex)
    for v in state.vectors:
        vec = np.kron(vec, v)
    return vec


def local_operator_mps(alpha: str, site: int, length: int) -> OperatorMps:
    """sigma^alpha on one site, identity elsewhere, as a D=1 operator MPS."""
    if alpha not in PAULI:
        raise ValueError(f"unknown Pauli label {alpha!r}")
    if not 1 <= site <= length:
        raise ValueError(f"site {site} out of range 1..{length}")
    cores = []
    for i in range(1, length + 1):
        mat = PAULI[alpha] if i == site else ID2
        cores.append(mat.reshape(1, 2, 2, 1).astype(complex))
    return OperatorMps(cores)
