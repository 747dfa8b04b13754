"""Approximate projective implementation (API) of a mixed binary POVM.

The measurement runs on an enlarged space H_R (x) H, where H_R holds a
uniform superposition |1_R> over the coin register of the mixture.  Two
binary measurements alternate:

    CProj:  sum_r |r><r| (x) Pi_{D(r)}   vs. its complement
    IsU:    |1_R><1_R| (x) I             vs. its complement

Starting from |1_R>|psi>, T = ceil(ln(4/delta)/eps^2) rounds of
(CProj, IsU) are performed; with b_0 = 1 prepended, the outcome estimate is

    p~ = #{i in 1..2T : b_{i-1} = b_i} / 2T.

If the final IsU outcome is 0 the loop continues (pairs of measurements)
until an IsU outcome of 1 re-anchors the register in |1_R>, which is then
discarded exactly.  Two successive runs agree within eps except with
probability <= delta (almost projectivity); reversing the projector roles
on the second run gives estimates summing to ~1 (reverse almost
projectivity).

Two engines:

* api_exact simulates the alternating measurements literally on H_R (x) H.
* api_fast uses the Jordan structure: range(IsU) compresses CProj to the
  accept operator P_D on H, so sampling an eigenvalue cluster p_j of P_D with
  the Born weights and drawing t ~ Binomial(2T, p_j) (or 1-p_j reversed)
  reproduces the estimate law, and the post state is the cluster projection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateStateError,
    DimensionCapError,
    DimensionError,
    FlushLimitError,
    InvariantError,
)
from .qcore import BinaryProjector, QuantumProgram, StateVector, dimension_cap, program_projector
from .spectral import (
    DEFAULT_CLUSTER_TOL,
    MixedBinaryPOVM,
    spectral_measurement,
)

FLUSH_ROUNDS_PER_T = 64


@dataclass(frozen=True)
class ApiParams:
    """Accuracy/confidence pair; the round count T is derived, never set.

    T = ceil(ln(4/delta) / eps^2).
    """

    eps: float
    delta: float
    max_flush_rounds: int = 0  # 0 means the default cap of 64*T
    T: int = field(init=False)

    def __post_init__(self):
        if not (0.0 < self.eps < 1.0):
            raise InvariantError(f"eps must lie in (0,1), got {self.eps}")
        if not (0.0 < self.delta < 1.0):
            raise InvariantError(f"delta must lie in (0,1), got {self.delta}")
        object.__setattr__(self, "T", math.ceil(math.log(4.0 / self.delta) / self.eps**2))
        if self.max_flush_rounds == 0:
            object.__setattr__(self, "max_flush_rounds", FLUSH_ROUNDS_PER_T * self.T)
        if self.max_flush_rounds < 1:
            raise InvariantError("max_flush_rounds must be positive")


@dataclass(frozen=True)
class ApiTranscript:
    """Outcome record of one exact API run.

    bits: the 2T main-loop outcomes (CProj, IsU alternating).
    flush_bits: outcomes of the re-anchoring pairs, empty if b_2T = 1.
    t: agreement count in (1, b_1, ..., b_2T); estimate = t / 2T.
    """

    bits: tuple[int, ...]
    flush_bits: tuple[int, ...]
    t: int
    estimate: float

    def __post_init__(self):
        if len(self.bits) % 2:
            raise InvariantError("transcript must hold an even number of main-loop bits")
        if self.flush_bits and self.flush_bits[-1] != 1:
            raise InvariantError("flush must end on an IsU outcome of 1")

    @property
    def flush_rounds(self) -> int:
        return len(self.flush_bits) // 2


def agreement_count(bits: tuple[int, ...]) -> int:
    """Number of adjacent agreements in (1, b_1, ..., b_2T).

    The leading 1 reflects the initial state lying in range(IsU), i.e. the
    run starts as if the previous uniformity test had accepted.
    """
    prev, count = 1, 0
    for b in bits:
        if b == prev:
            count += 1
        prev = b
    return count


@dataclass(frozen=True)
class ControlledProjection:
    """The coin-controlled projector pair on H_R (x) H, stored blockwise."""

    blocks: tuple[np.ndarray, ...]  # per-coin accept projectors on H

    def __post_init__(self):
        dims = {b.shape for b in self.blocks}
        if len(dims) != 1:
            raise DimensionError("controlled-projection blocks must share a dimension")

    @property
    def s(self) -> int:
        return len(self.blocks)

    @property
    def block_dim(self) -> int:
        return self.blocks[0].shape[0]

    def apply_accept(self, vec: np.ndarray, reverse: bool) -> np.ndarray:
        """Apply the accept operator (complemented blocks when reverse)."""
        mat = vec.reshape(self.s, self.block_dim)
        out = np.empty_like(mat)
        for r, block in enumerate(self.blocks):
            branch = block @ mat[r]
            out[r] = (mat[r] - branch) if reverse else branch
        return out.reshape(-1)

    def dense_cproj(self) -> BinaryProjector:
        """Materialize CProj^1 as a block-diagonal projector (test/inspection use)."""
        s, d = self.s, self.block_dim
        mat = np.zeros((s * d, s * d), dtype=complex)
        for r, block in enumerate(self.blocks):
            mat[r * d : (r + 1) * d, r * d : (r + 1) * d] = block
        return BinaryProjector(mat)

    def dense_isu(self) -> BinaryProjector:
        s, d = self.s, self.block_dim
        ones = np.full((s, s), 1.0 / s, dtype=complex)
        return BinaryProjector(np.kron(ones, np.eye(d)))


def distribution_povm(prog: QuantumProgram, dist) -> MixedBinaryPOVM:
    """Binary POVM mixture induced by a program on a finite triple distribution.

    The r-th member accepts when the program answers the triple's first
    component on query (x_r, y_r).
    """
    return MixedBinaryPOVM(
        tuple(program_projector(prog, gamma, x, y) for gamma, x, y in dist.triples)
    )


def controlled_projection(prog: QuantumProgram, dist) -> ControlledProjection:
    return ControlledProjection(
        tuple(program_projector(prog, gamma, x, y).matrix for gamma, x, y in dist.triples)
    )


def _apply_isu(vec: np.ndarray, s: int, d: int) -> np.ndarray:
    mat = vec.reshape(s, d)
    mean = mat.mean(axis=0)
    return np.broadcast_to(mean, (s, d)).reshape(-1).copy()


def api_exact(
    dist,
    prog: QuantumProgram,
    params: ApiParams,
    rng,
    *,
    reverse: bool = False,
) -> tuple[float, StateVector, ApiTranscript]:
    """Run the alternating-measurement algorithm literally on H_R (x) H.

    Returns (estimate, post state on H, transcript).  With reverse=True the
    projector roles of the controlled measurement swap, estimating 1 - p.
    """
    cproj = controlled_projection(prog, dist)
    s, d = cproj.s, cproj.block_dim
    if prog.dim != d:
        raise DimensionError("program dimension changed under projector construction")
    if s * d > dimension_cap():
        raise DimensionCapError(f"composite dimension {s * d} exceeds cap {dimension_cap()}")
    vec = (np.full(s, 1.0 / np.sqrt(s), dtype=complex)[:, None] * prog.state.amplitudes[None, :]).reshape(-1)

    def sample_branch(v: np.ndarray, accept: np.ndarray) -> tuple[int, np.ndarray]:
        p1 = min(1.0, max(0.0, float(np.real(np.vdot(v, accept)))))
        branch = accept if rng.random() < p1 else v - accept
        norm = np.linalg.norm(branch)
        if norm < 1e-12:
            raise DegenerateStateError("measurement branch vanished during API run")
        return (1 if branch is accept else 0), branch / norm

    def measure_cproj(v: np.ndarray) -> tuple[int, np.ndarray]:
        return sample_branch(v, cproj.apply_accept(v, reverse))

    def measure_isu(v: np.ndarray) -> tuple[int, np.ndarray]:
        return sample_branch(v, _apply_isu(v, s, d))

    bits: list[int] = []
    for _ in range(params.T):
        b, vec = measure_cproj(vec)
        bits.append(b)
        b, vec = measure_isu(vec)
        bits.append(b)
    flush: list[int] = []
    rounds = 0
    while (flush[-1] if flush else bits[-1]) != 1:
        if rounds >= params.max_flush_rounds:
            raise FlushLimitError(f"no register re-anchor after {rounds} flush rounds")
        b, vec = measure_cproj(vec)
        flush.append(b)
        b, vec = measure_isu(vec)
        flush.append(b)
        rounds += 1
    t = agreement_count(tuple(bits))
    # after an IsU accept the register factors as |1_R> (x) phi exactly
    phi = vec.reshape(s, d).sum(axis=0) / np.sqrt(s)
    residual = vec - (np.full(s, 1.0 / np.sqrt(s))[:, None] * phi[None, :]).reshape(-1)
    if np.linalg.norm(residual) > 1e-8:
        raise InvariantError("post state failed to factor out the uniform register")
    transcript = ApiTranscript(tuple(bits), tuple(flush), t, t / (2 * params.T))
    return transcript.estimate, StateVector.from_unnormalized(phi), transcript


def api_fast(
    dist,
    prog: QuantumProgram,
    params: ApiParams,
    rng,
    *,
    reverse: bool = False,
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
) -> tuple[float, StateVector, int]:
    """Jordan-compressed API: identical estimate law and cluster post states.

    Compressing CProj^1 by the range of IsU gives exactly P_D, so the Jordan
    angles of (IsU, CProj^1) are the eigenvalues of P_D and the invariant
    vectors are |1_R> (x) phi_j with phi_j the eigenvectors.  The run samples
    a cluster j with Born weight, then t ~ Binomial(2T, p_j) forward or
    Binomial(2T, 1 - p_j) reversed.  Returns (estimate, post state, j).
    """
    povm = distribution_povm(prog, dist)
    if povm.dim != prog.dim:
        raise DimensionError("POVM/program dimension mismatch")
    spec = spectral_measurement(povm.average(), cluster_tol)
    probs = spec.probabilities(prog.state)
    idx = int(rng.choice(len(probs), p=probs))
    post = StateVector.from_unnormalized(spec.eigenprojectors[idx] @ prog.state.amplitudes)
    q = spec.eigenvalues[idx]
    if reverse:
        q = 1.0 - q
    t = int(rng.binomial(2 * params.T, min(1.0, max(0.0, q))))
    return t / (2 * params.T), post, idx


def run_api(
    dist,
    prog: QuantumProgram,
    params: ApiParams,
    rng,
    *,
    engine: str = "fast",
    reverse: bool = False,
) -> tuple[float, StateVector, dict]:
    """Engine dispatch; returns (estimate, post state, summary dict)."""
    if engine == "fast":
        est, post, idx = api_fast(dist, prog, params, rng, reverse=reverse)
        return est, post, {"engine": "fast", "estimate": est, "subspace": idx}
    if engine == "exact":
        est, post, transcript = api_exact(dist, prog, params, rng, reverse=reverse)
        return est, post, {
            "engine": "exact",
            "estimate": est,
            "t": transcript.t,
            "flush_rounds": transcript.flush_rounds,
        }
    raise InvariantError(f"unknown API engine {engine!r}")
