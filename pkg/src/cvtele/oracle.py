"""
Brute-force multimode linear optics in a sparse occupation-number basis.

Used to check the closed-form teleporter: an N-splitter spreads the input
over N modes, each mode is cut down to {|0>, |1>} (an ideal single-rail
qubit teleporter), the adjoint N-splitter recombines them, and vacuum in
the N-1 ancilla ports heralds success.

Beam-splitter convention (real, acting on creation operators):

    a_i^dag -> sqrt(t) a_i^dag - sqrt(1-t) a_j^dag
    a_j^dag -> sqrt(1-t) a_i^dag + sqrt(t) a_j^dag

With this convention BS(i, j, t)^dag == BS(j, i, t).
"""

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from cvtele.exceptions import CutoffOverflow, InvalidQubit, ZeroOutput
from cvtele.fockspace import FockVector
from cvtele.teleporter import BellModel, TeleportReport, teleport_pure

PRUNE = 1e-15
MAX_ORACLE_MODES = 6
MAX_ORACLE_CUTOFF = 10


@dataclass(frozen=True)
class MultiModeState:
    """Sparse pure state: occupation tuple -> complex amplitude."""

    n_modes: int
    terms: dict
    total_cutoff: int

    def __post_init__(self):
        if self.n_modes < 1:
            raise ValueError("need at least one mode")
        clean = {}
        for occ, amp in self.terms.items():
            occ = tuple(int(n) for n in occ)
            if len(occ) != self.n_modes or min(occ) < 0:
                raise ValueError(f"bad occupation tuple {occ}")
            if abs(amp) <= PRUNE:
                continue
            if sum(occ) > self.total_cutoff and abs(amp) > 1e-10:
                raise CutoffOverflow(f"{occ} exceeds total cutoff {self.total_cutoff}")
            clean[occ] = complex(amp)
        object.__setattr__(self, "terms", clean)
        if self.norm2 > 1 + 1e-12:
            raise ValueError("squared norm exceeds 1")

    @property
    def norm2(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.terms.values()))

    def photon_numbers(self) -> set:
        return {sum(occ) for occ in self.terms}

    @classmethod
    def product(cls, modes, total_cutoff: int) -> "MultiModeState":
        """Tensor product of single-mode FockVectors (first = mode 0)."""
        terms = {(): 1.0 + 0j}
        for mode in modes:
            terms = {
                occ + (k,): amp * a
                for occ, amp in terms.items()
                for k, a in enumerate(mode.amps)
                if abs(amp * a) > PRUNE
            }
        return cls(len(modes), terms, total_cutoff)

    @classmethod
    def embed(cls, state: FockVector, n_modes: int, total_cutoff: int, mode: int = 0):
        """Single-mode state in ``mode``, vacuum elsewhere."""
        terms = {}
        for k, a in enumerate(state.amps):
            if k > total_cutoff:
                break
            occ = [0] * n_modes
            occ[mode] = k
            terms[tuple(occ)] = a
        return cls(n_modes, terms, total_cutoff)

    def amplitude(self, occ) -> complex:
        return self.terms.get(tuple(occ), 0j)


@lru_cache(maxsize=4096)
def _bs_block(total: int, t: float) -> np.ndarray:
    """Beam-splitter matrix on the (total+1)-dim block |n, total-n>.

    Column n holds the image of |n, total - n>.
    """
    st, sr = math.sqrt(t), math.sqrt(1 - t)
    out = np.zeros((total + 1, total + 1))
    for ni in range(total + 1):
        nj = total - ni
        norm_in = 0.5 * (math.lgamma(ni + 1) + math.lgamma(nj + 1))
        # (st ai - sr aj)^ni (sr ai + st aj)^nj
        for p in range(ni + 1):
            cp = math.comb(ni, p) * st**p * (-sr) ** (ni - p)
            if cp == 0:
                continue
            for q in range(nj + 1):
                cq = math.comb(nj, q) * sr**q * st ** (nj - q)
                if cq == 0:
                    continue
                mi = p + q
                mj = total - mi
                log_norm = 0.5 * (math.lgamma(mi + 1) + math.lgamma(mj + 1)) - norm_in
                out[mi, ni] += cp * cq * math.exp(log_norm)
    return out


def _check_mode(state, mode):
    if not 0 <= mode < state.n_modes:
        raise IndexError(f"mode {mode} out of range for {state.n_modes} modes")


def apply_beam_splitter(state: MultiModeState, mode_i: int, mode_j: int, t: float) -> MultiModeState:
    """Real beam splitter with transmissivity ``t`` between two modes."""
    _check_mode(state, mode_i)
    _check_mode(state, mode_j)
    if mode_i == mode_j:
        raise ValueError("beam splitter needs two distinct modes")
    if not 0 <= t <= 1:
        raise ValueError("transmissivity must lie in [0, 1]")
    if t == 1:
        return state
    out = {}
    for occ, amp in state.terms.items():
        ni, nj = occ[mode_i], occ[mode_j]
        total = ni + nj
        col = _bs_block(total, t)[:, ni]
        for mi in np.flatnonzero(col):
            new = list(occ)
            new[mode_i] = int(mi)
            new[mode_j] = total - int(mi)
            key = tuple(new)
            out[key] = out.get(key, 0j) + amp * col[mi]
    return MultiModeState(state.n_modes, out, state.total_cutoff)


def nsplitter_steps(modes):
    """(target, source, t) for the cascade splitting modes[0] evenly into all."""
    N = len(modes)
    return [(modes[m], modes[0], 1 - 1 / (N - m + 1)) for m in range(1, N)]


def apply_nsplitter(state: MultiModeState, modes, inverse: bool = False) -> MultiModeState:
    """Even N-way split of ``modes[0]`` via N-1 beam splitters.

    Step m couples the source with ``modes[m]`` at t = 1 - 1/(N-m+1); the
    source keeps sqrt(t) and the target receives +sqrt(1-t), so a coherent
    |alpha> becomes |alpha/sqrt(N)>^N. ``inverse`` applies the exact adjoint.
    """
    modes = list(modes)
    if len(modes) < 1 or len(set(modes)) != len(modes):
        raise ValueError("modes must be distinct and nonempty")
    steps = nsplitter_steps(modes)
    if not inverse:
        for target, source, t in steps:
            state = apply_beam_splitter(state, target, source, t)
    else:
        for target, source, t in reversed(steps):
            state = apply_beam_splitter(state, source, target, t)
    return state


def truncate_mode_to_qubit(state: MultiModeState, mode: int) -> MultiModeState:
    """Project ``mode`` onto span{|0>, |1>} (sub-normalizing)."""
    _check_mode(state, mode)
    terms = {occ: a for occ, a in state.terms.items() if occ[mode] <= 1}
    return MultiModeState(state.n_modes, terms, state.total_cutoff)


def herald_vacuum(state: MultiModeState, modes) -> tuple[FockVector, float]:
    """Project ``modes`` onto vacuum; return the normalized remaining mode and
    the squared norm of the projection."""
    modes = set(modes)
    rest = [m for m in range(state.n_modes) if m not in modes]
    if len(rest) != 1:
        raise ValueError("exactly one mode must be left unheralded")
    keep = rest[0]
    amps = np.zeros(state.total_cutoff + 1, dtype=complex)
    for occ, a in state.terms.items():
        if all(occ[m] == 0 for m in modes):
            amps[occ[keep]] += a
    p = float(np.sum(np.abs(amps) ** 2))
    if p < 1e-15:
        raise ZeroOutput("no amplitude left after heralding")
    return FockVector(amps / math.sqrt(p)), p


def oracle_teleport(
    state: FockVector, N: int, cutoff: int = 8, ancilla_order=None
) -> TeleportReport:
    """Teleport ``state`` by explicit multimode simulation.

    Input components above ``cutoff`` photons are dropped before the split;
    with cutoff >= N this is exact, since more than N photons cannot all
    survive N single-photon truncations. ``ancilla_order`` relabels the
    N-1 ancilla modes (defaults to 1..N-1).
    """
    if int(N) != N or N < 1:
        raise ValueError("N must be an integer >= 1")
    if N > MAX_ORACLE_MODES or cutoff > MAX_ORACLE_CUTOFF:
        raise ValueError(f"oracle limited to N <= {MAX_ORACLE_MODES}, cutoff <= {MAX_ORACLE_CUTOFF}")
    if cutoff < N:
        raise ValueError("cutoff must be >= N")
    if abs(state.norm2 - 1) > 1e-9:
        raise ValueError("input state must be normalized")

    ancillas = list(range(1, N)) if ancilla_order is None else list(ancilla_order)
    if sorted(ancillas) != list(range(1, N)):
        raise ValueError("ancilla_order must be a permutation of 1..N-1")
    modes = [0] + ancillas

    mm = MultiModeState.embed(state, N, cutoff)
    mm = apply_nsplitter(mm, modes)
    for m in modes:
        mm = truncate_mode_to_qubit(mm, m)
    kept = mm.norm2
    mm = apply_nsplitter(mm, modes, inverse=True)
    out, p = herald_vacuum(mm, ancillas)
    fid = abs(np.vdot(state.padded(max(state.cutoff, out.cutoff))[: out.cutoff + 1], out.amps)) ** 2
    return TeleportReport(
        output=out,
        p_success=p,
        fidelity_vs_input=float(min(1.0, fid)),
        n_resources=int(N),
        bell_model=BellModel.DETERMINISTIC,
        meta={"p_after_truncation": kept, "cutoff": cutoff, "n_terms": len(mm.terms)},
    )


def compare_with_closed_form(state: FockVector, N: int, cutoff: int = 8) -> dict:
    """Deviations between oracle_teleport and teleport_pure for one case.

    A case where both routes herald nothing (e.g. |2> with N = 1) counts as
    agreement with p_success 0 and no fidelity.
    """
    failures = []
    try:
        brute = oracle_teleport(state, N, cutoff)
    except ZeroOutput:
        brute = None
        failures.append("oracle")
    try:
        closed = teleport_pure(state, N)
    except ZeroOutput:
        closed = None
        failures.append("closed")
    if failures:
        p_other = (brute or closed).p_success if len(failures) == 1 else 0.0
        return {
            "n_resources": int(N),
            "p_success_oracle": 0.0 if brute is None else brute.p_success,
            "p_success_closed": 0.0 if closed is None else closed.p_success,
            "p_success_dev": p_other,
            "fidelity_oracle": None,
            "fidelity_closed": None,
            "fidelity_dev": 0.0 if len(failures) == 2 else 1.0,
            "output_overlap_infidelity": 0.0 if len(failures) == 2 else 1.0,
        }
    n = max(brute.output.cutoff, closed.output.cutoff)
    a = np.zeros(n + 1, dtype=complex)
    b = np.zeros(n + 1, dtype=complex)
    a[: brute.output.amps.size] = brute.output.amps
    b[: closed.output.amps.size] = closed.output.amps
    return {
        "n_resources": int(N),
        "p_success_oracle": brute.p_success,
        "p_success_closed": closed.p_success,
        "p_success_dev": abs(brute.p_success - closed.p_success),
        "fidelity_oracle": brute.fidelity_vs_input,
        "fidelity_closed": closed.fidelity_vs_input,
        "fidelity_dev": abs(brute.fidelity_vs_input - closed.fidelity_vs_input),
        "output_overlap_infidelity": max(0.0, 1 - abs(np.vdot(a, b)) ** 2),
    }


# -- explicit single-rail Bell measurement ----------------------------------


class BellLabel(str, enum.Enum):
    PHI_PLUS = "phi_plus"
    PHI_MINUS = "phi_minus"
    ZERO_ZERO = "zero_zero"
    ONE_ONE = "one_one"


# projectors on (input mode, near resource mode) as {(n0, n1): amplitude}
_BELL_VECTORS = {
    BellLabel.PHI_PLUS: {(0, 1): 1 / math.sqrt(2), (1, 0): 1 / math.sqrt(2)},
    BellLabel.PHI_MINUS: {(0, 1): 1 / math.sqrt(2), (1, 0): -1 / math.sqrt(2)},
    BellLabel.ZERO_ZERO: {(0, 0): 1.0},
    BellLabel.ONE_ONE: {(1, 1): 1.0},
}


@dataclass(frozen=True)
class BellOutcome:
    label: BellLabel
    probability: float
    conditioned_state: FockVector

    @property
    def success(self) -> bool:
        return self.label in (BellLabel.PHI_PLUS, BellLabel.PHI_MINUS)


def resource_state() -> MultiModeState:
    """(|10> + |01>)/sqrt(2) on two modes: one photon split on a 50:50 splitter."""
    split = apply_nsplitter(MultiModeState(2, {(1, 0): 1.0}, 1), [0, 1])
    return split


def simulate_qubit_teleporter(qubit: FockVector, outcome) -> BellOutcome:
    """Teleport a0|0> + a1|1> through the single-photon resource, conditioned
    on one Bell outcome of (input, near resource mode).

    Mode 0 holds the input, modes 1-2 hold the resource; mode 2 is the
    receiver. The phi_minus branch gets a phase flip on |1>. The returned
    conditioned state is unnormalized; its squared norm is the probability.
    """
    label = BellLabel(outcome)
    amps = qubit.amps
    if np.any(np.abs(amps[2:]) > 1e-12):
        raise InvalidQubit("input has support above one photon")
    if abs(qubit.norm2 - 1) > 1e-9:
        raise ValueError("qubit must be normalized")
    q = np.zeros(2, dtype=complex)
    q[: min(2, amps.size)] = amps[:2]

    resource = resource_state()
    terms = {
        (n0, r1, r2): q[n0] * b
        for n0 in range(2)
        for (r1, r2), b in resource.terms.items()
    }
    full = MultiModeState(3, terms, 3)

    out = np.zeros(2, dtype=complex)
    for (n0, n1), v in _BELL_VECTORS[label].items():
        for (m0, m1, m2), a in full.terms.items():
            if (m0, m1) == (n0, n1):
                out[m2] += v * a
    if label is BellLabel.PHI_MINUS:
        out[1] = -out[1]
    return BellOutcome(label, float(np.sum(np.abs(out) ** 2)), FockVector(out))


def bell_outcomes(qubit: FockVector) -> dict:
    return {label: simulate_qubit_teleporter(qubit, label) for label in BellLabel}
