"""Heisenberg-picture TEBD on folded operator networks.

A local operator A evolves as A(t) = e^{iHt} A e^{-iHt}.  Both propagator
legs are folded onto one chain with a 4-dimensional physical index per site
(out x in), so a two-site bond unitary U acts as the single folded gate
U (x) conj(U).  Correlators against a product state are read off in one
linear sweep per snapshot.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, TruncationOverflowError
from .model import (
    PAULI,
    ModelParams,
    OperatorMps,
    ProductState,
    local_operator_mps,
    product_state,
    trotter_gates,
)
from .tensor import TruncationSpec, truncated_svd

DEFAULT_ABORT_DISCARD = 1e-3


@dataclass(frozen=True)
class EvolutionConfig:
    truncation: TruncationSpec = TruncationSpec()
    dt: float = 0.05
    t_max: float = 12.0
    sample_stride: int = 1
    picture: str = "heisenberg"
    abort_discard: float = DEFAULT_ABORT_DISCARD
    trotter_order: int = 2

    def __post_init__(self):
        steps = self.t_max / self.dt
        if abs(steps - round(steps)) > 1e-9:
            raise ValueError(f"t_max={self.t_max} is not a multiple of dt={self.dt}")
        if self.sample_stride < 1:
            raise ValueError("sample_stride must be >= 1")
        if self.picture not in ("heisenberg", "schrodinger"):
            raise ValueError(f"unknown picture {self.picture!r}")

    @property
    def n_steps(self):
        return int(round(self.t_max / self.dt))


@dataclass
class CorrelationSet:
    """S^{alpha beta}(i, j, t) on a uniform time grid, symmetry-completed.

    ``values[i-1, j-1, n]`` holds S(i, j, t_grid[n]); ``completed[i-1, j-1]``
    is True where the entry was filled by the bond-inversion mirror rather
    than computed.
    """

    params: ModelParams
    state_kind: str
    alpha: str
    beta: str
    t_grid: np.ndarray
    values: np.ndarray
    completed: np.ndarray
    max_bond_reached: int = 0
    accumulated_discard: float = 0.0
    overflow: str | None = None  # set when evolution stopped early


@dataclass
class EntanglementProfile:
    """Per-bond operator-entanglement entropies and normalized spectra."""

    entropies: np.ndarray  # length L-1
    spectra: list = field(repr=False, default_factory=list)  # per bond, sums to 1


def folded_gate(u: np.ndarray) -> np.ndarray:
    """Fold a two-site unitary acting by conjugation, A -> U A U^dag.

    Returns the 16x16 matrix acting on the doubled physical indices
    (out1*2+in1, out2*2+in2) of two folded sites.
    """
    u4 = u.reshape(2, 2, 2, 2)
    w = np.einsum("aceg,bdfh->abcdefgh", u4, u4.conj())
    return w.reshape(16, 16)


class FoldedChain:
    """Folded operator chain with a tracked orthogonality center.

    Cores have shape (left bond, 4, right bond); index p = 2*out + in.
    """

    def __init__(self, cores, center=0):
        self.cores = cores
        self.center = center
        self.discard = 0.0

    @classmethod
    def from_operator(cls, op: OperatorMps):
        cores = [c.reshape(c.shape[0], 4, c.shape[3]).astype(complex) for c in op.cores]
        chain = cls(cores)
        chain.discard = op.accumulated_discard
        return chain

    def to_operator(self, time_stamp):
        cores = [c.reshape(c.shape[0], 2, 2, c.shape[2]) for c in self.cores]
        return OperatorMps(cores, time_stamp=time_stamp, accumulated_discard=self.discard)

    @property
    def length(self):
        return len(self.cores)

    def bond_dims(self):
        return [c.shape[0] for c in self.cores] + [self.cores[-1].shape[2]]

    def move_center(self, target):
        while self.center < target:
            c = self.cores[self.center]
            dl, p, dr = c.shape
            q, r = np.linalg.qr(c.reshape(dl * p, dr))
            self.cores[self.center] = q.reshape(dl, p, -1)
            nxt = self.cores[self.center + 1]
            self.cores[self.center + 1] = np.tensordot(r, nxt, axes=(1, 0))
            self.center += 1
        while self.center > target:
            c = self.cores[self.center]
            dl, p, dr = c.shape
            q, r = np.linalg.qr(c.reshape(dl, p * dr).conj().T)
            self.cores[self.center] = q.conj().T.reshape(-1, p, dr)
            prv = self.cores[self.center - 1]
            self.cores[self.center - 1] = np.tensordot(prv, r.conj().T, axes=(2, 0))
            self.center -= 1

    def apply_bond_gate(self, bond, w16, spec: TruncationSpec, move_right=True):
        """Apply a folded 16x16 gate on sites (bond, bond+1), 0-based left site."""
        self.move_center(bond if move_right else bond + 1)
        a, b = self.cores[bond], self.cores[bond + 1]
        theta = np.tensordot(a, b, axes=(2, 0))  # (dl, 4, 4, dr)
        dl, _, _, dr = theta.shape
        theta = theta.reshape(dl, 16, dr)
        theta = np.tensordot(w16, theta, axes=(1, 1)).transpose(1, 0, 2)
        res = truncated_svd(theta.reshape(dl * 4, 4 * dr), spec)
        keep = len(res.singular_values)
        self.discard += res.discarded_weight
        if move_right:
            self.cores[bond] = res.left_isometry.reshape(dl, 4, keep)
            self.cores[bond + 1] = (
                res.singular_values[:, None] * res.right_isometry
            ).reshape(keep, 4, dr)
            self.center = bond + 1
        else:
            self.cores[bond] = (
                res.left_isometry * res.singular_values[None, :]
            ).reshape(dl, 4, keep)
            self.cores[bond + 1] = res.right_isometry.reshape(keep, 4, dr)
            self.center = bond

    def apply_layer(self, layer, spec: TruncationSpec):
        """Apply one layer of gates on disjoint bonds, sweeping toward the
        nearer end first to minimize center movement."""
        bonds = [sites[0] - 1 for sites, _ in layer]  # 0-based left sites
        gates = [folded_gate(u) for _, u in layer]
        if self.center > bonds[len(bonds) // 2]:
            for b, w in zip(reversed(bonds), reversed(gates)):
                self.apply_bond_gate(b, w, spec, move_right=False)
        else:
            for b, w in zip(bonds, gates):
                self.apply_bond_gate(b, w, spec, move_right=True)

    def frobenius_norm(self):
        """sqrt(Tr A^dag A) via the transfer network (gauge independent)."""
        env = np.ones((1, 1), dtype=complex)
        for c in self.cores:
            env = np.einsum("ab,apr,bps->rs", env, c.conj(), c)
        return float(np.sqrt(abs(env[0, 0])))

    def bond_spectra(self):
        """Normalized squared Schmidt spectra at every internal bond.

        Gauges the chain fully left-canonical, then sweeps back right-to-left
        collecting singular values; restores the center to site 0.
        """
        self.move_center(self.length - 1)
        spectra = [None] * (self.length - 1)
        for bond in range(self.length - 2, -1, -1):
            c = self.cores[bond + 1]
            dl, p, dr = c.shape
            u, s, vh = np.linalg.svd(c.reshape(dl, p * dr), full_matrices=False)
            self.cores[bond + 1] = vh.reshape(-1, p, dr)
            self.cores[bond] = np.tensordot(
                self.cores[bond], u * s[None, :], axes=(2, 0)
            )
            self.center = bond
            p2 = s**2
            total = p2.sum()
            spectra[bond] = p2 / total if total > 0 else p2
        return spectra


def evolve_operator(op: OperatorMps, scheds, cfg: EvolutionConfig, on_sample=None):
    """TEBD-evolve a folded operator network to cfg.t_max.

    ``scheds`` is the (forward, backward) GateSchedule pair built from the
    same model.  The Heisenberg picture conjugates by the backward propagator
    (A -> e^{iH dt} A e^{-iH dt}); the Schrodinger picture by the forward one.
    ``on_sample(op_snapshot)`` fires at t=0 and then every ``sample_stride``
    steps.  Raises TruncationOverflowError once the accumulated discarded
    weight exceeds cfg.abort_discard.
    """
    fwd, bwd = scheds
    sched = bwd if cfg.picture == "heisenberg" else fwd
    if abs(sched.trotter_step - cfg.dt) > 1e-12:
        raise ConfigError("gate schedule step does not match cfg.dt")
    chain = FoldedChain.from_operator(op)
    t = op.time_stamp
    if on_sample is not None:
        on_sample(chain.to_operator(t))
    last_valid = t
    for step in range(1, cfg.n_steps + 1):
        for layer in sched.layers:
            chain.apply_layer(layer, cfg.truncation)
        t = op.time_stamp + step * cfg.dt
        if chain.discard > cfg.abort_discard:
            raise TruncationOverflowError(
                f"accumulated discarded weight {chain.discard:.3e} exceeded "
                f"{cfg.abort_discard:.3e} at t={t:.3f}",
                last_valid_time=last_valid,
            )
        last_valid = t
        if on_sample is not None and step % cfg.sample_stride == 0:
            on_sample(chain.to_operator(t))
    return chain.to_operator(t)


def operator_state_row(op: OperatorMps, state: ProductState, beta: str):
    """<Phi| A sigma^beta_j |Phi> for every j, in one linear sweep."""
    l = op.length
    sb = PAULI[beta]
    plain = []
    inserted = []
    for s in range(l):
        phi = state.vectors[s]
        m = op.cores[s]
        plain.append(np.einsum("o,loir,i->lr", phi.conj(), m, phi, optimize=True))
        inserted.append(
            np.einsum("o,loir,i->lr", phi.conj(), m, sb @ phi, optimize=True)
        )
    left = [np.ones((1, 1), dtype=complex)]
    for s in range(l - 1):
        left.append(left[-1] @ plain[s])
    right = [np.ones((1, 1), dtype=complex)] * (l + 1)
    for s in range(l - 1, 0, -1):
        right[s] = plain[s] @ right[s + 1]
    row = np.empty(l, dtype=complex)
    for j in range(l):
        row[j] = (left[j] @ inserted[j] @ right[j + 1])[0, 0]
    return row


def density_trace_row(op: OperatorMps, alpha: str):
    """Tr[rho sigma^alpha_i] for every i, for a folded density operator."""
    l = op.length
    sa = PAULI[alpha]
    plain = [np.einsum("loor->lr", m) for m in op.cores]
    inserted = [np.einsum("loir,io->lr", m, sa) for m in op.cores]
    left = [np.ones((1, 1), dtype=complex)]
    for s in range(l - 1):
        left.append(left[-1] @ plain[s])
    right = [np.ones((1, 1), dtype=complex)] * (l + 1)
    for s in range(l - 1, 0, -1):
        right[s] = plain[s] @ right[s + 1]
    row = np.empty(l, dtype=complex)
    for i in range(l):
        row[i] = (left[i] @ inserted[i] @ right[i + 1])[0, 0]
    return row


def mirror_completion_allowed(state_kind: str, hz: float, alpha: str, beta: str):
    """Whether S(L-i+1, L-j+1, t) = S(i, j, t) may be used to halve the work.

    FMZ/FMX are bond-inversion invariant for any hz.  The Neel state needs
    the spin-flip-composed inversion, which requires hz = 0 and equal
    operator labels (the sigma^z sign flips square away only for alpha=beta).
    """
    kind = state_kind.upper()
    if kind in ("FMZ", "FMX"):
        return True
    if kind == "NEEL":
        return hz == 0.0 and alpha == beta
    return False


def correlation_series(params: ModelParams, state_kind: str, alpha: str, beta: str,
                       cfg: EvolutionConfig, n_jobs: int = 1) -> CorrelationSet:
    """Compute S^{alpha beta}(i, j, t) for all sites and sampled t >= 0.

    One Heisenberg evolution per source site i; when the bond-inversion
    mirror applies, only sources 1..L/2 are evolved and the rest is filled
    by symmetry.  Negative times are left to consumers via the conjugation
    relation S(i, j, -t) = conj(S(i, j, t)).
    """
    l = params.length
    state = product_state(state_kind, l)
    mirror = mirror_completion_allowed(state_kind, params.hz, alpha, beta)
    sources = range(1, l // 2 + 1) if mirror else range(1, l + 1)
    n_samples = cfg.n_steps // cfg.sample_stride + 1
    t_grid = np.arange(n_samples) * cfg.dt * cfg.sample_stride
    values = np.zeros((l, l, n_samples), dtype=complex)
    completed = np.zeros((l, l), dtype=bool)
    max_bond = 1
    total_discard = 0.0

    args = [(params, state_kind, alpha, beta, cfg, i) for i in sources]
    if n_jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_source_rows, args))
    else:
        results = [_source_rows(a) for a in args]

    overflow = None
    n_valid = n_samples
    for i, (rows, mb, disc, err) in zip(sources, results):
        values[i - 1, :, : rows.shape[1]] = rows
        n_valid = min(n_valid, rows.shape[1])
        max_bond = max(max_bond, mb)
        total_discard = max(total_discard, disc)
        if err is not None and overflow is None:
            overflow = f"source site {i}: {err}"
    if overflow is not None:
        t_grid = t_grid[:n_valid]
        values = values[:, :, :n_valid]
    if mirror:
        for i in sources:
            mi = l - i + 1
            if mi != i:
                values[mi - 1] = values[i - 1, ::-1, :]
                completed[mi - 1, :] = True
    return CorrelationSet(
        params=params, state_kind=state.kind, alpha=alpha, beta=beta,
        t_grid=t_grid, values=values, completed=completed,
        max_bond_reached=max_bond, accumulated_discard=total_discard,
        overflow=overflow,
    )


def _source_rows(arg):
    """Evolve sigma^alpha_i and sample correlator rows; worker-safe."""
    params, state_kind, alpha, beta, cfg, i = arg
    state = product_state(state_kind, params.length)
    fwd = trotter_gates(params, cfg.dt, "forward", order=cfg.trotter_order)
    bwd = trotter_gates(params, cfg.dt, "backward", order=cfg.trotter_order)
    op = local_operator_mps(alpha, i, params.length)
    rows = []
    max_bond = [1]

    def sample(snapshot):
        rows.append(operator_state_row(snapshot, state, beta))
        max_bond[0] = max(max_bond[0], snapshot.max_bond())

    try:
        final = evolve_operator(op, (fwd, bwd), cfg, on_sample=sample)
    except TruncationOverflowError as exc:
        return np.array(rows).T, max_bond[0], cfg.abort_discard, str(exc)
    return np.array(rows).T, max_bond[0], final.accumulated_discard, None


def evolve_density_schrodinger(state: ProductState, b_op, scheds,
                               cfg: EvolutionConfig):
    """Schrodinger-picture cross-check: evolve rho_B = sigma^beta_j |Phi><Phi|.

    Returns (t_grid, rows) with rows[:, n] = S(i=1..L, j, t_n) computed as
    Tr[e^{-iHt} rho_B e^{iHt} sigma^alpha_i] for the requested alpha.
    """
    beta, j, alpha = b_op
    l = state.length
    sb = PAULI[beta]
    cores = []
    for s in range(l):
        ket = sb @ state.vectors[s] if s == j - 1 else state.vectors[s]
        cores.append(np.outer(ket, state.vectors[s].conj()).reshape(1, 2, 2, 1))
    rho = OperatorMps(cores)
    scfg = EvolutionConfig(
        truncation=cfg.truncation, dt=cfg.dt, t_max=cfg.t_max,
        sample_stride=cfg.sample_stride, picture="schrodinger",
        abort_discard=cfg.abort_discard,
    )
    rows = []

    def sample(snapshot):
        rows.append(density_trace_row(snapshot, alpha))

    evolve_operator(rho, scheds, scfg, on_sample=sample)
    n_samples = scfg.n_steps // scfg.sample_stride + 1
    t_grid = np.arange(n_samples) * scfg.dt * scfg.sample_stride
    return t_grid, np.array(rows).T


def entanglement_profile(op: OperatorMps) -> EntanglementProfile:
    """Operator-entanglement entropies -sum p ln p at every internal bond."""
    chain = FoldedChain.from_operator(op)
    spectra = chain.bond_spectra()
    entropies = np.array(
        [-np.sum(p[p > 0] * np.log(p[p > 0])) for p in spectra]
    )
    return EntanglementProfile(entropies=entropies, spectra=spectra)
