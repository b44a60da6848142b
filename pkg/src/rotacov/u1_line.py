"""Phase-covariant (U(1)) transformation criteria and the interferometer study.

Covers three related computations:

* deterministic reachability between states with nonnegative amplitudes on
  the number ladder, decided by exact polynomial deconvolution;
* the analogous criterion for superpositions of aligned spin-coherent
  states, a triangular system over half-integer shifts;
* the two-mode interferometer: Laurent coefficients of characteristic
  functions of coherent / weakly-squeezed states, the probabilistic
  extraction bound min_k C_k / P_k with a verified tail, and the
  phase-estimation uncertainty from photon-number-difference statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .halfint import HalfInt


class ProbSeq:
    """Finitely supported nonnegative sequence over (half-)integer indices."""

    def __init__(self, values, prune=0.0):
        vals = {}
        for k, p in dict(values).items():
            k = HalfInt.of(k)
            p = float(p)
            if p < -1e-12:
                raise ValueError(f"negative weight {p} at index {k}")
            if p > prune:
                vals[k] = p
        self.values = vals

    def total(self) -> float:
        return sum(self.values.values())

    def support(self) -> list:
        return sorted(self.values)

    def get(self, k, default=0.0) -> float:
        return self.values.get(HalfInt.of(k), default)

    def is_distribution(self, tol=1e-9) -> bool:
        return bool(self.values) and abs(self.total() - 1.0) <= tol

    def convolve(self, other: "ProbSeq") -> "ProbSeq":
        out = {}
        for k1, p1 in self.values.items():
            for k2, p2 in other.values.items():
                k = k1 + k2
                out[k] = out.get(k, 0.0) + p1 * p2
        return ProbSeq(out)

    def __repr__(self):
        inner = ", ".join(f"{k}: {p:.6g}" for k, p in sorted(self.values.items()))
        return f"ProbSeq({{{inner}}})"


def _poly_divide(num, den, tol=1e-9):
    """Divide coefficient arrays (ascending powers). Returns (quotient, max |rem|)."""
    num = list(map(float, num))
    den = list(map(float, den))
    dn, dd = len(num) - 1, len(den) - 1
    if dd > dn:
        return [], max(map(abs, num), default=0.0)
    q = [0.0] * (dn - dd + 1)
    rem = num[:]
    for k in range(dn - dd, -1, -1):
        q[k] = rem[dd + k] / den[dd]
        for i in range(dd + 1):
            rem[i + k] -= q[k] * den[i]
    return q, max(map(abs, rem), default=0.0)


def u1_deterministic_feasible(p: ProbSeq, q: ProbSeq, tol=1e-9):
    """Decide whether sum sqrt(p_n)|n> maps covariantly to sum sqrt(q_n)|n>.

    Feasible iff the shifted sequence p is an exact convolution of q with
    some distribution w: the generating polynomial of q must divide that of
    p (up to an index shift delta absorbing the invariant ladder offset)
    with a nonnegative quotient.  Divisibility by the shift monomial is
    monotone in delta, so only the minimal delta = max(0, min q - min p)
    needs checking.

    Returns (feasible, delta, w) with w clamped to >= 0 and renormalized.
    """
    for name, s in (("p", p), ("q", q)):
        if not s.is_distribution(tol):
            raise ValueError(f"{name} must be finitely supported and sum to 1")
        if any(k.twice % 2 for k in s.values):
            raise ValueError(f"{name} must be indexed by integers")
    sp, sq = p.support(), q.support()
    lo_p, hi_p = sp[0].twice // 2, sp[-1].twice // 2
    lo_q, hi_q = sq[0].twice // 2, sq[-1].twice // 2
    delta = max(0, lo_q - lo_p)
    if (hi_p - lo_p) < (hi_q - lo_q):
        return False, delta, None
    num = [p.get(lo_p + i) for i in range(hi_p - lo_p + 1)]
    den = [q.get(lo_q + i) for i in range(hi_q - lo_q + 1)]
    quot, rem = _poly_divide(num, den, tol)
    if rem > tol or any(c < -tol for c in quot):
        return False, delta, None
    off = delta + lo_p - lo_q  # lowest index of w
    w = {off + i: max(c, 0.0) for i, c in enumerate(quot)}
    total = sum(w.values())
    w = ProbSeq({k: c / total for k, c in w.items()}, prune=1e-15)
    return True, delta, w


def su2_coherent_line_feasible(p: ProbSeq, q: ProbSeq, tol=1e-9):
    """Reachability between aligned coherent-superposition states.

    The source state (spin distribution p) reaches the target (distribution
    q) covariantly iff p is an exact convolution of q with a distribution
    xi over nonnegative half-integer shifts: p_j = sum_J xi_J q_{j-J}.
    Unlike the number-ladder case no free offset exists (the only invariant
    pure ancilla is the singlet), so the target's top spin cannot exceed
    the source's and the division is checked on absolute indices.

    Returns (feasible, xi).
    """
    for name, s in (("p", p), ("q", q)):
        if not s.is_distribution(tol):
            raise ValueError(f"{name} must be finitely supported and sum to 1")
    top_p = p.support()[-1].twice
    top_q = q.support()[-1].twice
    if top_q > top_p:
        return False, None   # shifts only lower the top spin
    num = [p.values.get(HalfInt(k), 0.0) for k in range(top_p + 1)]
    den = [q.values.get(HalfInt(k), 0.0) for k in range(top_q + 1)]
    quot, rem = _poly_divide(num, den, tol)
    if rem > tol or any(c < -tol for c in quot):
        return False, None
    xi = ProbSeq({HalfInt(i): max(c, 0.0) for i, c in enumerate(quot)}, prune=1e-15)
    return True, xi


# --------------------------------------------------------------------------
# interferometer: Laurent coefficients, extraction probability, uncertainty
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class InterferometerSpec:
    """Inputs of the two-arm experiment: |gamma> in one arm, and the target
    |gamma (1 - epsilon)> |tau>, with tau the weak-squeezing angle of
    cos(tau)|0> - sin(tau)|2> and theta the interferometer phase."""

    gamma: complex
    epsilon: float = 0.0
    tau: float = 0.0
    theta: float = math.pi / 4

    def __post_init__(self):
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError("epsilon must lie in [0, 1)")
        if not 0.0 <= self.tau < math.pi / 2:
            raise ValueError("tau must lie in [0, pi/2)")

    @property
    def damped_gamma(self) -> complex:
        return complex(self.gamma) * (1.0 - self.epsilon)


@dataclass(frozen=True)
class LaurentCoeffs:
    """Symmetric window of Fourier coefficients f(theta) = sum_k c_k e^(ik theta)."""

    values: dict
    bound: int

    def get(self, k, default=0.0) -> float:
        return self.values.get(k, default)

    def total(self) -> float:
        return sum(self.values.values())


def bessel_i(k: int, x: float) -> float:
    """Modified Bessel function I_k(x), x >= 0, by its power series.

    Terms are accumulated until the ratio drops below 1e-16; a first term
    that underflows to zero short-circuits (the value is below 1e-300).
    """
    k = abs(int(k))
    if x < 0:
        raise ValueError("series implemented for x >= 0")
    if x == 0:
        return 1.0 if k == 0 else 0.0
    term = 1.0
    for i in range(1, k + 1):
        term *= (x / 2) / i
        if term == 0.0:
            return 0.0
    total, m = term, 0
    while term > 1e-16 * total:
        m += 1
        term *= (x / 2) ** 2 / (m * (m + k))
        total += term
    return total


def coherent_charfun_coeffs(gamma, K: int) -> LaurentCoeffs:
    """C_k = exp(-|gamma|^2) I_k(|gamma|^2) for |k| <= K."""
    if K < 1:
        raise ValueError("K must be >= 1")
    x = abs(complex(gamma)) ** 2
    scale = math.exp(-x)
    vals = {}
    for k in range(0, K + 1):
        c = scale * bessel_i(k, x)
        vals[k] = c
        vals[-k] = c
    return LaurentCoeffs(vals, K)


def _correction_window(gamma, tau: float) -> dict:
    """Nine-term window A_{-4..4} multiplying the coherent characteristic
    function to produce that of |gamma>|tau>."""
    g = complex(gamma)
    g2 = abs(g) ** 2
    s2 = math.sin(tau) ** 2
    a4 = g2 ** 2 * s2 / 32
    a3 = g2 * s2 / 4
    a2 = (-2 * (g2 ** 2 - 2) * s2
          + 2 * (g ** 2).real * math.sqrt(max(0.0, 1 - math.cos(4 * tau)))) / 16
    a1 = -g2 * s2 / 4
    a0 = 1 - 2 * (a1 + a2 + a3 + a4)
    return {-4: a4, -3: a3, -2: a2, -1: a1, 0: a0, 1: a1, 2: a2, 3: a3, 4: a4}


def squeezed_target_coeffs(spec: InterferometerSpec, K: int) -> LaurentCoeffs:
    """P_k of the damped, weakly squeezed target state, |k| <= K.

    Convolution of the coherent coefficients at gamma (1 - epsilon) with the
    nine-term correction window at the same amplitude.
    """
    if K < 5:
        raise ValueError("K must be >= 5")
    gd = spec.damped_gamma
    base = coherent_charfun_coeffs(gd, K + 4)
    win = _correction_window(gd, spec.tau)
    vals = {k: sum(win[l] * base.get(k - l) for l in range(-4, 5))
            for k in range(-K, K + 1)}
    return LaurentCoeffs(vals, K)


class ExtractionResult(float):
    """Extraction probability; carries the window bound that certified it."""

    def __new__(cls, p: float, kmax: int):
        obj = super().__new__(cls, p)
        obj.kmax = kmax
        return obj


def extraction_probability(spec: InterferometerSpec, K=None,
                           max_doublings=6) -> ExtractionResult:
    """Largest p with C_k = p P_k + (1-p) Q_k, Q_k >= 0: min_k C_k / P_k.

    The infimum over all k is certified by requiring the ratio sequence to
    be monotone over the last ten indices on each side of the window (the
    C/P ratio grows like (1-epsilon)^(-2|k|) up to polynomial factors, so a
    monotone tail dominates everything beyond it).  If the tail is not yet
    monotone the window is doubled; a persistently non-monotone tail raises.
    """
    if spec.epsilon == 0.0 and spec.tau == 0.0:
        return ExtractionResult(1.0, K or 0)   # identity transformation
    if spec.epsilon <= 0.0:
        raise ValueError("extraction requires epsilon > 0")
    g2 = abs(complex(spec.gamma)) ** 2
    if K is None:
        K = math.ceil(4 * g2) + 40
    for _ in range(max_doublings + 1):
        C = coherent_charfun_coeffs(spec.gamma, K)
        P = squeezed_target_coeffs(spec, K)
        ratios = {}
        for k in range(-K, K + 1):
            ck, pk = C.get(k), P.get(k)
            if pk < -1e-10:
                raise ValueError(f"target coefficient P_{k} = {pk} is negative")
            if pk > 1e-300 and ck > 0.0:
                ratios[k] = ck / pk
        ks = sorted(ratios)
        pos = [ratios[k] for k in ks if k >= 0][-10:]
        neg = [ratios[k] for k in ks if k <= 0][:10]
        monotone = (len(pos) == 10 and len(neg) == 10
                    and all(b > a for a, b in zip(pos, pos[1:]))
                    and all(a > b for a, b in zip(neg, neg[1:])))
        if monotone:
            return ExtractionResult(min(ratios.values()), K)
        K *= 2
    raise ValueError(f"ratio tail not monotone up to K = {K}; "
                     "window too small for these parameters")


def _mean_derivative(spec: InterferometerSpec) -> float:
    g2 = abs(complex(spec.gamma)) ** 2
    return -2 * math.sin(2 * spec.theta) * (1 - g2 - math.cos(2 * spec.tau))


def photon_difference_mean(spec: InterferometerSpec) -> float:
    """<dN> of the output photon-number difference for |gamma>|tau>."""
    g2 = abs(complex(spec.gamma)) ** 2
    return math.cos(2 * spec.theta) * (1 - g2 - math.cos(2 * spec.tau))


def photon_difference_variance(spec: InterferometerSpec) -> float:
    """Variance of the output photon-number difference for |gamma>|tau>."""
    g = complex(spec.gamma)
    g2 = abs(g) ** 2
    th, ta = spec.theta, spec.tau
    out = -(2 * (g ** 2).real) * math.sin(2 * th) ** 2 * math.sin(2 * ta) / math.sqrt(2)
    out -= 2 * g2 * (math.sin(2 * th) ** 2 * math.cos(2 * ta)
                     + math.cos(4 * th) / 2 - 1)
    out += 2 * math.sin(ta) ** 2 * (math.cos(2 * th) ** 2 * math.cos(2 * ta) + 1)
    return out


def phase_uncertainty(spec: InterferometerSpec) -> float:
    """Delta theta = sqrt(var dN) / |d<dN>/d theta| at the given settings."""
    d = _mean_derivative(spec)
    if abs(d) < 1e-12:
        raise ValueError("mean photon difference is stationary here; "
                         "uncertainty diverges")
    return math.sqrt(max(photon_difference_variance(spec), 0.0)) / abs(d)


def variance_oracle(spec: InterferometerSpec, n_cutoff: int):
    """Truncated two-mode number-basis check of the mean/variance formulas.

    Builds annihilation operators on Fock ladders, rotates them by the
    beam-splitter angle theta, and evaluates <dN> and var(dN) on the product
    of the squeezing approximation (arm 1) with the coherent state (arm 2).
    n_cutoff truncates the coherent mode; the squeezing mode is exactly
    supported on photon numbers {0, 2} and quadratic observables reach at
    most 4, so it gets a fixed small ladder.  A truncated coherent state
    losing more than 1e-8 of its norm is rejected as an undersized cutoff.
    """
    from scipy import sparse

    g = complex(spec.gamma)
    need = 4 * abs(g) ** 2 + 40
    if n_cutoff < need:
        raise ValueError(f"n_cutoff must be at least 4|gamma|^2 + 40 = {need:.0f}")
    dim2 = n_cutoff + 1   # coherent mode
    dim1 = 9              # squeezing mode: support {0, 2} plus headroom
    lad1 = sparse.diags(np.sqrt(np.arange(1, dim1)), 1)
    lad2 = sparse.diags(np.sqrt(np.arange(1, dim2)), 1)
    a1 = sparse.kron(lad1, sparse.eye(dim2), format="csr")
    a2 = sparse.kron(sparse.eye(dim1), lad2, format="csr")
    c, s = math.cos(spec.theta), math.sin(spec.theta)
    b1 = c * a1 - s * a2
    b2 = s * a1 + c * a2
    dN = (b1.conj().T @ b1 - b2.conj().T @ b2).tocsr()
    coh = np.zeros(dim2, dtype=complex)
    if abs(g) == 0:
        coh[0] = 1.0
    else:
        phase = g / abs(g)
        for n in range(dim2):
            coh[n] = phase ** n * math.exp(
                -abs(g) ** 2 / 2 + n * math.log(abs(g)) - math.lgamma(n + 1) / 2)
    deficit = abs(1.0 - np.vdot(coh, coh).real)
    if deficit > 1e-8:
        raise ValueError(f"cutoff too small: coherent norm deficit {deficit:.2e}")
    squeezed = np.zeros(dim1, dtype=complex)
    squeezed[0] = math.cos(spec.tau)
    squeezed[2] = -math.sin(spec.tau)
    psi = np.kron(squeezed, coh)
    dpsi = dN @ psi
    mean = np.vdot(psi, dpsi).real
    return mean, np.vdot(dpsi, dpsi).real - mean ** 2
