"""QUBO reductions of CFN problems and a classical annealing sampler.

Three encodings are supported:

* one-hot: one bit per (node, choice); a penalty ``lam * (sum(x) - 1)**2``
  per node keeps exactly one bit hot.
* domain-wall: ``D - 1`` bits per node; valid strings look like ``1..10..0``
  and the choice is the number of leading ones.  Broken walls (a ``01``
  step) pay ``lam`` each.
* approximate binary: ``ceil(log2 D)`` bits per node read as an integer
  (most significant bit first) and decoded modulo ``D``.  Every cost table is
  replaced by its least-squares fit among quadratic functions of the bits,
  so energies are only approximate.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Literal, Mapping, Optional, Protocol, Sequence

import numpy as np

from . import _kernels
from .cfn import Assignment, CfnProblem, SolutionRecord, evaluate

Encoding = Literal["one_hot", "domain_wall", "approx_binary"]
ENCODINGS: tuple[Encoding, ...] = ("one_hot", "domain_wall", "approx_binary")
ENCODING_TAGS = {"one_hot": "OH", "domain_wall": "DW", "approx_binary": "AB"}


@dataclass(frozen=True, eq=False)
class QuboProblem:
    bit_count: int
    linear: np.ndarray
    quadratic: Mapping[tuple[int, int], float]
    constant_offset: float = 0.0

    def __post_init__(self):
        lin = np.asarray(self.linear, dtype=float)
        if lin.shape != (self.bit_count,):
            raise ValueError("linear must have one coefficient per bit")
        quad = {}
        for (a, b), v in self.quadratic.items():
            if a == b:
                raise ValueError(f"self pair ({a}, {b}) in quadratic terms")
            if not (0 <= a < self.bit_count and 0 <= b < self.bit_count):
                raise ValueError(f"bit pair ({a}, {b}) out of range")
            key = (a, b) if a < b else (b, a)
            quad[key] = quad.get(key, 0.0) + float(v)
        if not np.all(np.isfinite(lin)) or not all(math.isfinite(v) for v in quad.values()):
            raise ValueError("non-finite QUBO coefficient")
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "quadratic", {k: v for k, v in sorted(quad.items()) if v != 0.0})
        object.__setattr__(self, "constant_offset", float(self.constant_offset))

    @classmethod
    def from_upper(cls, linear: np.ndarray, upper: np.ndarray, offset: float) -> "QuboProblem":
        rows, cols = np.nonzero(np.triu(upper, 1))
        quad = {(int(a), int(b)): float(upper[a, b]) for a, b in zip(rows, cols)}
        return cls(len(linear), linear, quad, offset)

    def csr(self):
        """Symmetric adjacency (each pair twice) for the sampler kernel."""
        nb = self.bit_count
        adj: list[list[tuple[int, float]]] = [[] for _ in range(nb)]
        for (a, b), v in self.quadratic.items():
            adj[a].append((b, v))
            adj[b].append((a, v))
        ptr = np.zeros(nb + 1, dtype=np.int64)
        for k in range(nb):
            ptr[k + 1] = ptr[k] + len(adj[k])
        idx = np.array([j for row in adj for j, _ in row], dtype=np.int64)
        val = np.array([v for row in adj for _, v in row], dtype=float)
        return ptr, idx, val

    def energies(self, bits: np.ndarray) -> np.ndarray:
        """Vectorised energies for a (samples, bit_count) 0/1 array."""
        x = np.atleast_2d(np.asarray(bits, dtype=float))
        e = self.constant_offset + x @ self.linear
        for (a, b), v in self.quadratic.items():
            e = e + v * x[:, a] * x[:, b]
        return e


def qubo_energy(q: QuboProblem, bits: Sequence[int]) -> float:
    if len(bits) != q.bit_count:
        raise ValueError(f"expected {q.bit_count} bits, got {len(bits)}")
    e = q.constant_offset
    for k, b in enumerate(bits):
        if b:
            e += q.linear[k]
    for (a, c), v in q.quadratic.items():
        if bits[a] and bits[c]:
            e += v
    return float(e)


@dataclass(frozen=True)
class EncodingMap:
    encoding: Encoding
    starts: tuple[int, ...]
    lengths: tuple[int, ...]
    choice_counts: tuple[int, ...]
    strength: Optional[float] = None

    @property
    def bit_count(self) -> int:
        return sum(self.lengths)

    def node_bits(self, bits, i):
        return bits[self.starts[i]: self.starts[i] + self.lengths[i]]


def bits_per_node(encoding: Encoding, d: int) -> int:
    if encoding == "one_hot":
        return d
    if encoding == "domain_wall":
        return d - 1
    if encoding == "approx_binary":
        return (d - 1).bit_length()  # ceil(log2 d), 0 when d == 1
    raise ValueError(f"unknown encoding {encoding!r}")


def qubit_count(problem: CfnProblem, encoding: Encoding) -> int:
    return sum(bits_per_node(encoding, d) for d in problem.choice_counts)


def _make_map(problem: CfnProblem, encoding: Encoding, strength=None) -> EncodingMap:
    lengths = [bits_per_node(encoding, d) for d in problem.choice_counts]
    starts = list(itertools.accumulate([0] + lengths[:-1])) if lengths else []
    return EncodingMap(encoding, tuple(starts), tuple(lengths), tuple(problem.choice_counts), strength)


def default_strength(problem: CfnProblem) -> float:
    """Largest per-node bound ``2 * (sum |beta| over the node's pairs + sum |alpha|) + 1``."""
    n = problem.node_count
    incident = np.zeros(n)
    for i, j in problem.interacting_pairs():
        s = float(np.abs(problem.pair_block(i, j)).sum())
        incident[i] += s
        incident[j] += s
    for i in range(n):
        incident[i] += float(np.abs(problem.one_node[i]).sum())
    return float(2.0 * incident.max() + 1.0) if n else 1.0


# --- exact encodings -------------------------------------------------------

def _indicator(encoding: Encoding, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Affine map ``I = c + A x`` from a node's bits to its choice indicators."""
    if encoding == "one_hot":
        return np.zeros(d), np.eye(d)
    m = d - 1
    c = np.zeros(d)
    A = np.zeros((d, m))
    c[0] = 1.0
    for k in range(1, d):
        # indicator_d = w_d - w_{d+1}; bit k-1 holds w_k
        A[k, k - 1] += 1.0
        A[k - 1, k - 1] -= 1.0
    return c, A


def _encode_exact(problem: CfnProblem, encoding: Encoding, lam: Optional[float]):
    if lam is None:
        lam = default_strength(problem)
    if not lam > 0:
        raise ValueError("constraint strength must be positive")
    emap = _make_map(problem, encoding, lam)
    nb = emap.bit_count
    lin = np.zeros(nb)
    upper = np.zeros((nb, nb))
    offset = problem.constant_offset
    ind = [_indicator(encoding, d) for d in problem.choice_counts]

    def sl(i):
        return slice(emap.starts[i], emap.starts[i] + emap.lengths[i])

    for i, alpha in enumerate(problem.one_node):
        c, A = ind[i]
        offset += float(alpha @ c)
        lin[sl(i)] += A.T @ alpha
    for i, j in problem.interacting_pairs():
        beta = problem.pair_block(i, j)
        ci, Ai = ind[i]
        cj, Aj = ind[j]
        offset += float(ci @ beta @ cj)
        lin[sl(i)] += Ai.T @ (beta @ cj)
        lin[sl(j)] += Aj.T @ (beta.T @ ci)
        upper[sl(i), sl(j)] += Ai.T @ beta @ Aj

    for i in range(problem.node_count):
        s, m = emap.starts[i], emap.lengths[i]
        if encoding == "one_hot":
            offset += lam
            lin[s: s + m] -= lam
            for a in range(m):
                upper[s + a, s + a + 1: s + m] += 2.0 * lam
        else:
            for k in range(m - 1):
                lin[s + k + 1] += lam
                upper[s + k, s + k + 1] -= lam
    return QuboProblem.from_upper(lin, upper, offset), emap


def encode_one_hot(problem: CfnProblem, lam: Optional[float] = None) -> tuple[QuboProblem, EncodingMap]:
    return _encode_exact(problem, "one_hot", lam)


def encode_domain_wall(problem: CfnProblem, lam: Optional[float] = None) -> tuple[QuboProblem, EncodingMap]:
    return _encode_exact(problem, "domain_wall", lam)


# --- approximate binary ----------------------------------------------------

@lru_cache(maxsize=None)
def _patterns(m: int) -> np.ndarray:
    """All m-bit patterns, row v is v written most-significant bit first."""
    v = np.arange(2**m)
    return ((v[:, None] >> np.arange(m - 1, -1, -1)[None, :]) & 1).astype(float)


@lru_cache(maxsize=None)
def _design(mi: int, mj: int):
    """Quadratic-monomial design matrix over all patterns of an (mi, mj)-bit pair,
    its pseudo-inverse, and the monomial list (() const, (k,) linear, (k, l) pair)."""
    pi, pj = _patterns(mi), _patterns(mj)
    X = np.concatenate([np.repeat(pi, len(pj), axis=0), np.tile(pj, (len(pi), 1))], axis=1)
    m = mi + mj
    monos = [()] + [(k,) for k in range(m)] + list(itertools.combinations(range(m), 2))
    cols = [np.ones(len(X))] + [X[:, k] for k in range(m)] + [X[:, k] * X[:, l] for k, l in monos[m + 1:]]
    F = np.stack(cols, axis=1)
    return F, np.linalg.pinv(F), monos


def encode_approx_binary(problem: CfnProblem) -> tuple[QuboProblem, EncodingMap, float]:
    """Least-squares quadratic fit of every cost table over the binary codes.

    Returns the QUBO, the encoding map and the summed per-table RMS residual.
    """
    emap = _make_map(problem, "approx_binary")
    nb = emap.bit_count
    lin = np.zeros(nb)
    upper = np.zeros((nb, nb))
    offset = problem.constant_offset
    residual = 0.0
    counts = problem.choice_counts

    def decoded(i):
        return np.arange(2 ** emap.lengths[i]) % counts[i]

    def scatter(coef, monos, bit_ids, scale):
        nonlocal offset
        # round-off from the pseudo-inverse would otherwise leave ~1e-14 couplings
        coef = np.where(np.abs(coef) < 1e-10 * max(scale, 1.0), 0.0, coef)
        for c, mono in zip(coef, monos):
            if not mono:
                offset += c
            elif len(mono) == 1:
                lin[bit_ids[mono[0]]] += c
            else:
                a, b = sorted((bit_ids[mono[0]], bit_ids[mono[1]]))
                upper[a, b] += c

    def bits_of(i):
        return list(range(emap.starts[i], emap.starts[i] + emap.lengths[i]))

    for i, alpha in enumerate(problem.one_node):
        F, Finv, monos = _design(emap.lengths[i], 0)
        target = alpha[decoded(i)]
        coef = Finv @ target
        residual += float(np.sqrt(np.mean((F @ coef - target) ** 2)))
        scatter(coef, monos, bits_of(i), float(np.abs(target).max(initial=0.0)))
    for i, j in problem.interacting_pairs():
        beta = problem.pair_block(i, j)
        F, Finv, monos = _design(emap.lengths[i], emap.lengths[j])
        target = beta[np.ix_(decoded(i), decoded(j))].ravel()
        coef = Finv @ target
        residual += float(np.sqrt(np.mean((F @ coef - target) ** 2)))
        scatter(coef, monos, bits_of(i) + bits_of(j), float(np.abs(target).max(initial=0.0)))
    return QuboProblem.from_upper(lin, upper, offset), emap, residual


def encode(problem: CfnProblem, encoding: Encoding, lam: Optional[float] = None):
    """Dispatch to an encoder; returns ``(qubo, map)``."""
    if encoding == "one_hot":
        return encode_one_hot(problem, lam)
    if encoding == "domain_wall":
        return encode_domain_wall(problem, lam)
    if encoding == "approx_binary":
        q, emap, _ = encode_approx_binary(problem)
        return q, emap
    raise ValueError(f"unknown encoding {encoding!r}")


# --- bits <-> assignments --------------------------------------------------

def encode_assignment(emap: EncodingMap, a: Assignment) -> np.ndarray:
    """Canonical bitstring for a valid assignment."""
    bits = np.zeros(emap.bit_count, dtype=np.uint8)
    for i, c in enumerate(a):
        s, m = emap.starts[i], emap.lengths[i]
        if emap.encoding == "one_hot":
            bits[s + c] = 1
        elif emap.encoding == "domain_wall":
            bits[s: s + c] = 1
        else:
            bits[s: s + m] = [(c >> (m - 1 - k)) & 1 for k in range(m)]
    return bits


def decode_bits(emap: EncodingMap, bits) -> Optional[Assignment]:
    """Assignment encoded by ``bits``, or ``None`` for an invalid string."""
    bits = np.asarray(bits)
    if bits.shape != (emap.bit_count,):
        raise ValueError(f"expected {emap.bit_count} bits, got {bits.shape}")
    out = []
    for i in range(len(emap.lengths)):
        x = emap.node_bits(bits, i)
        if emap.encoding == "one_hot":
            hot = np.flatnonzero(x)
            if len(hot) != 1:
                return None
            out.append(int(hot[0]))
        elif emap.encoding == "domain_wall":
            if np.any(np.diff(x.astype(int)) > 0):
                return None
            out.append(int(x.sum()))
        else:
            v = 0
            for b in x:
                v = 2 * v + int(b)
            out.append(v % emap.choice_counts[i])
    return Assignment(out)


def penalty_energy(emap: EncodingMap, bits) -> float:
    """The constraint-penalty part of the energy (zero on valid strings)."""
    if emap.encoding == "approx_binary" or emap.strength is None:
        return 0.0
    bits = np.asarray(bits, dtype=int)
    total = 0
    for i in range(len(emap.lengths)):
        x = emap.node_bits(bits, i)
        if emap.encoding == "one_hot":
            total += (int(x.sum()) - 1) ** 2
        else:
            total += int(np.sum(x[1:] * (1 - x[:-1])))
    return emap.strength * total


# --- sampling ---------------------------------------------------------------

@dataclass(frozen=True)
class BitSample:
    bits: tuple[int, ...]
    energy: float
    multiplicity: int


class Sampler(Protocol):
    def __call__(self, q: QuboProblem, shots: int, seed: int) -> list[BitSample]: ...


def _aggregate(q: QuboProblem, raw: np.ndarray) -> list[BitSample]:
    counts = Counter(tuple(int(b) for b in row) for row in raw)
    out = [BitSample(bits, qubo_energy(q, bits), k) for bits, k in counts.items()]
    out.sort(key=lambda s: (s.energy, s.bits))
    return out


def beta_range(q: QuboProblem) -> tuple[float, float]:
    """Hot/cold inverse temperatures: a worst-case flip is accepted half the time
    at the start, the smallest coefficient 1% of the time at the end."""
    field = np.abs(q.linear).copy()
    coefs = [abs(v) for v in q.linear]
    for (a, b), v in q.quadratic.items():
        field[a] += abs(v)
        field[b] += abs(v)
        coefs.append(abs(v))
    hi = float(field.max()) if q.bit_count else 1.0
    hi = hi if hi > 0 else 1.0
    significant = [v for v in coefs if v > 1e-9 * hi]
    lo = min(significant) if significant else 1.0
    beta_hot = math.log(2.0) / hi
    beta_cold = max(math.log(100.0) / lo, beta_hot)
    return beta_hot, beta_cold


@dataclass(frozen=True)
class AnnealingSampler:
    """Independent single-bit-flip Metropolis anneal per shot, geometric in beta."""

    sweeps: int = 1000

    def __call__(self, q: QuboProblem, shots: int, seed: int) -> list[BitSample]:
        if shots < 1:
            raise ValueError("shots must be >= 1")
        if q.bit_count == 0:
            return [BitSample((), q.constant_offset, shots)]
        hot, cold = beta_range(q)
        ptr, idx, val = q.csr()
        raw = _kernels.anneal_qubo(seed % 2**32, shots, max(1, self.sweeps), hot, cold,
                                   q.linear, ptr, idx, val)
        return _aggregate(q, raw)


@dataclass(frozen=True)
class RandomSampler:
    """Uniform random bitstrings; a floor for comparing samplers."""

    def __call__(self, q: QuboProblem, shots: int, seed: int) -> list[BitSample]:
        rng = np.random.default_rng(seed)
        return _aggregate(q, rng.integers(0, 2, size=(shots, q.bit_count)))


SAMPLERS: dict[str, Callable[..., Sampler]] = {
    "anneal": AnnealingSampler,
    "random": lambda sweeps=None: RandomSampler(),
}


def register_sampler(name: str, factory: Callable[..., Sampler]) -> None:
    """Make a backend selectable by name; ``factory(sweeps=...)`` must return a sampler."""
    SAMPLERS[name] = factory


def make_sampler(name: str = "anneal", sweeps: int = 1000) -> Sampler:
    try:
        return SAMPLERS[name](sweeps=sweeps)
    except KeyError:
        raise ValueError(f"unknown sampler {name!r}; choose from {', '.join(SAMPLERS)}") from None


def sample_qubo(q: QuboProblem, shots: int, sweeps: int, seed: int) -> list[BitSample]:
    return AnnealingSampler(sweeps)(q, shots, seed)


@dataclass
class QuboSolveResult:
    best: Optional[SolutionRecord]
    valid: int
    invalid: int
    distinct: int
    encoding: Encoding
    qubits: int
    # distinct valid assignments -> shot count
    decoded: dict[tuple[int, ...], int] = field(default_factory=dict)
    fit_residual: float = 0.0

    @property
    def no_valid_solution(self) -> bool:
        return self.valid == 0

    @property
    def valid_fraction(self) -> float:
        total = self.valid + self.invalid
        return self.valid / total if total else 0.0


def solve_via_qubo(problem: CfnProblem, encoding: Encoding, shots: int, seed: int = 0,
                   sweeps: int = 1000, lam: Optional[float] = None,
                   sampler: Optional[Sampler] = None) -> QuboSolveResult:
    """Encode, sample, decode and re-score with the CFN evaluator."""
    residual = 0.0
    if encoding == "approx_binary":
        q, emap, residual = encode_approx_binary(problem)
    else:
        q, emap = encode(problem, encoding, lam)
    sampler = sampler or AnnealingSampler(sweeps)
    samples = sampler(q, shots, seed)
    decoded: dict[tuple[int, ...], int] = {}
    valid = invalid = 0
    for s in samples:
        a = decode_bits(emap, np.array(s.bits, dtype=np.uint8))
        if a is None:
            invalid += s.multiplicity
        else:
            valid += s.multiplicity
            decoded[a.choice_index] = decoded.get(a.choice_index, 0) + s.multiplicity
    best = None
    if decoded:
        scored = sorted((evaluate(problem, Assignment(c)), c) for c in decoded)
        best = SolutionRecord.from_assignment(problem, Assignment(scored[0][1]),
                                              ENCODING_TAGS[encoding], seed, shots)
    return QuboSolveResult(best, valid, invalid, len(samples), encoding, emap.bit_count,
                           decoded, residual)
