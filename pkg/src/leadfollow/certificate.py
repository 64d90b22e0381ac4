"""Common quadratic Lyapunov certificates for the switched error system,
and ultimate-bound analysis under bounded disturbances.

For gains (l, k) with the default observer coupling k0 = l/k**2, the error
system in each jointly connected mode p satisfies

    d/dt (z' P z) = -z' Q_p z,    Q_p = -(F_p' P + P F_p)

for one fixed matrix P built from k alone.  When P and every Q_p are
positive definite, V(z) = z' P z decays at rate at least

    beta = min_p lambda_min(Q_p) / (2 lambda_max(P))

on every connected interval, uniformly over switching.  On intervals whose
mode is not jointly connected V can grow; the disturbance analysis combines
per-window growth and contraction into a contraction factor epsilon and,
when epsilon < 1, an ultimate bound on V and hence on every tracking error.

The growth and injection constants are conservative but sound:

  * alpha bounds dV/dt <= alpha V on disconnected modes via the largest
    eigenvalue of F' P + P F against lambda_min(P);
  * alpha0 = beta0 bound the disturbance injection 2 z' P d by completing
    the square, using |d|^2 <= 2 n Delta^2 per spatial dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import Trajectory, error_system_matrix
from .gains import Gains
from .spectral import DEFAULT_PD_TOL, eigenvalues_sym
from .topology import SwitchingSchedule, Topology, coupling_matrix, is_jointly_connected, segments

#: max-norm threshold for the algebraic identity Q = -(F'P + PF)
IDENTITY_TOL = 1e-10


class InternalConsistencyError(RuntimeError):
    """The decay identity failed: indicates an implementation bug."""


def clf_matrix(g: Gains, n: int) -> np.ndarray:
    """Common Lyapunov matrix P (3n x 3n), a function of k alone."""
    if n < 1:
        raise ValueError("agent count must be positive")
    k = g.k
    I = np.eye(n)
    return np.block(
        [
            [k * I, I, -(k / 2.0) * I],
            [I, I, -0.5 * I],
            [-(k / 2.0) * I, -0.5 * I, (k / 2.0) * I],
        ]
    )


def decay_matrix(topo: Topology, g: Gains) -> np.ndarray:
    """Mode decay matrix Q with -d/dt(z'Pz) = z'Qz along the error system.

    Built for the default observer gain; the (1,1) block 2lH - lH is kept in
    the construction's original arithmetic and equals lH.
    """
    _require_default_k0(g)
    H = coupling_matrix(topo)
    k, l = g.k, g.l
    n = topo.n
    I = np.eye(n)
    upper_left = 2.0 * l * H - l * H
    cross = l * H - (l / (2.0 * k)) * H
    return np.block(
        [
            [upper_left, cross, -I],
            [cross, 2.0 * (k - 1.0) * I, -I],
            [-I, -I, I],
        ]
    )


def decay_witness_matrix(topo: Topology, g: Gains, tol: float = DEFAULT_PD_TOL) -> np.ndarray:
    """Two-block witness whose positive definiteness implies Q's.

    Requires the mode coupling matrix to be positive definite (the witness
    involves its inverse); a singular H means the mode is not jointly
    connected and has no witness.
    """
    H = coupling_matrix(topo)
    vals, vecs = eigenvalues_sym(H, with_vectors=True)
    if vals[0] <= tol:
        raise ValueError(
            f"coupling matrix not positive definite (min eigenvalue {vals[0]:.3e}): "
            "mode is not jointly connected"
        )
    H_inv = (vecs / vals) @ vecs.T
    k, l = g.k, g.l
    n = topo.n
    I = np.eye(n)
    return np.block(
        [
            [2.0 * (k - 1.0) * I - ((2.0 - 1.0 / k) ** 2 / 4.0) * l * H,
             -((4.0 - 1.0 / k) / 2.0) * I],
            [-((4.0 - 1.0 / k) / 2.0) * I, I - (1.0 / l) * H_inv],
        ]
    )


def _require_default_k0(g: Gains) -> None:
    if not g.is_default_k0:
        raise ValueError(
            "certificates cover only the default observer gain k0 = l/k**2; "
            "other gains get simulation-only verdicts"
        )


@dataclass(frozen=True)
class CertCheck:
    name: str
    passed: bool
    value: float
    threshold: float


@dataclass(frozen=True)
class LyapunovCertificate:
    """Common-Lyapunov verdict for a topology family under fixed gains.

    ``Q`` maps each jointly connected mode index to its decay matrix.
    ``valid`` requires P and every Q to be positive definite at ``tol``;
    ``beta`` is then a certified exponential rate for V along the switched
    system restricted to connected modes.
    """

    P: np.ndarray
    Q: dict[int, np.ndarray]
    beta: float
    valid: bool
    checks: tuple[CertCheck, ...]
    gains: Gains
    n: int
    connected_modes: tuple[int, ...]
    tol: float
    lambda_min_P: float
    lambda_max_P: float


def certify(
    topo_family: list[Topology], g: Gains, tol: float = DEFAULT_PD_TOL
) -> LyapunovCertificate:
    """Build P and the per-mode decay matrices, and check the certificate.

    Modes that are not jointly connected are skipped (they cannot decay);
    at least one connected mode is required.  The algebraic identity
    Q = -(F'P + PF) is verified entrywise against IDENTITY_TOL as an
    internal-consistency trap.
    """
    _require_default_k0(g)
    if not topo_family:
        raise ValueError("topology family must be nonempty")
    n = topo_family[0].n
    connected = tuple(
        i for i, topo in enumerate(topo_family) if is_jointly_connected(topo)
    )
    if not connected:
        raise ValueError("no jointly connected mode in the family")

    P = clf_matrix(g, n)
    p_vals = eigenvalues_sym(P)
    checks = [
        CertCheck("P_positive_definite", p_vals[0] > tol, float(p_vals[0]), tol)
    ]

    Q: dict[int, np.ndarray] = {}
    q_min = math.inf
    for i in connected:
        Qi = decay_matrix(topo_family[i], g)
        Fi = error_system_matrix(topo_family[i], g)
        residual = float(np.abs(Qi + (Fi.T @ P + P @ Fi)).max())
        if residual > IDENTITY_TOL:
            raise InternalConsistencyError(
                f"decay identity residual {residual:.3e} exceeds {IDENTITY_TOL:.0e} "
                f"for mode {i}"
            )
        checks.append(
            CertCheck(f"decay_identity_residual[{i}]", True, residual, IDENTITY_TOL)
        )
        q_vals = eigenvalues_sym(Qi)
        checks.append(
            CertCheck(
                f"Q_positive_definite[{i}]", q_vals[0] > tol, float(q_vals[0]), tol
            )
        )
        Q[i] = Qi
        q_min = min(q_min, float(q_vals[0]))

    valid = all(c.passed for c in checks)
    beta = q_min / (2.0 * float(p_vals[-1]))
    return LyapunovCertificate(
        P=P,
        Q=Q,
        beta=beta,
        valid=valid,
        checks=tuple(checks),
        gains=g,
        n=n,
        connected_modes=connected,
        tol=tol,
        lambda_min_P=float(p_vals[0]),
        lambda_max_P=float(p_vals[-1]),
    )


def lyapunov_value(cert: LyapunovCertificate, z: np.ndarray) -> float:
    """Quadratic form z' P z, summed over spatial-dimension blocks."""
    z = np.asarray(z, dtype=float)
    width = 3 * cert.n
    if z.ndim != 1 or z.size % width != 0:
        raise ValueError(
            f"error vector length {z.shape} incompatible with 3n={width}"
        )
    total = 0.0
    for d in range(z.size // width):
        blk = z[width * d : width * (d + 1)]
        total += float(blk @ cert.P @ blk)
    return total


def attach_lyapunov(cert: LyapunovCertificate, traj: Trajectory) -> Trajectory:
    """Trajectory copy with V(z) evaluated at every sample.

    Vectorized over samples; agrees with evaluating
    :func:`lyapunov_value` on :func:`error_coordinates` samplewise.
    """
    k = cert.gains.k
    vals = np.zeros(traj.n_samples)
    for d in range(traj.m):
        xi = traj.x[:, :, d] - traj.x0[:, d : d + 1]
        eta = traj.v[:, :, d] - traj.v0[:, d : d + 1]
        zeta = k * (traj.vhat[:, :, d] - traj.v0[:, d : d + 1])
        Z = np.hstack([xi, eta, zeta])  # (S, 3n)
        vals += np.einsum("si,ij,sj->s", Z, cert.P, Z)
    return replace(traj, V=vals)


@dataclass(frozen=True)
class DecayReport:
    """Samplewise check of V(z(t)) <= V(z(0)) exp(-2 beta t)."""

    passed: bool
    worst_margin: float  # max over samples of V/bound - 1 (0 when V(0)=0)
    worst_time: float
    n_samples: int
    beta: float


def decay_check(
    traj: Trajectory, cert: LyapunovCertificate, rtol: float = 1e-6
) -> DecayReport:
    """Verify the certified exponential envelope on a noise-free run.

    Every sample must satisfy V(t) <= V(0) exp(-2 beta t) (1 + rtol).
    Meaningful only when all modes visited are connected and no noise was
    injected; the caller is responsible for that context.
    """
    traj = traj if traj.V is not None else attach_lyapunov(cert, traj)
    v0 = float(traj.V[0])
    worst_margin = -math.inf
    worst_time = 0.0
    passed = True
    for s in range(traj.n_samples):
        bound = v0 * math.exp(-2.0 * cert.beta * float(traj.times[s]))
        v = float(traj.V[s])
        if bound == 0.0:
            margin = 0.0 if v == 0.0 else math.inf
        else:
            margin = v / bound - 1.0
        if margin > worst_margin:
            worst_margin = margin
            worst_time = float(traj.times[s])
        if margin > rtol:
            passed = False
    return DecayReport(
        passed=passed,
        worst_margin=worst_margin,
        worst_time=worst_time,
        n_samples=traj.n_samples,
        beta=cert.beta,
    )


@dataclass(frozen=True)
class NoisyBoundAnalysis:
    """Window-contraction analysis under bounded disturbances.

    ``epsilon`` is the per-window contraction factor; the analysis is only
    conclusive when epsilon < 1, in which case ``v_ultimate`` bounds the
    asymptotic Lyapunov value and ``c_delta`` the asymptotic magnitude of
    every per-agent position and velocity tracking error.  ``c_delta``
    scales exactly linearly in the disturbance bound delta.
    """

    alpha: float
    alpha0: float
    beta0: float
    T: float
    t_d: float
    subintervals: int
    epsilon: float
    g_bar: float
    v_ultimate: float
    c_delta: float
    delta: float
    contractive: bool
    note: str


def _safe_exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _window_stats(
    sched: SwitchingSchedule,
    connected: list[bool],
    T: float,
    n_windows: int,
) -> tuple[float, int]:
    """Max disconnected time and max subinterval count over n_windows
    windows of length T."""
    horizon = n_windows * T
    if not sched.cycle:
        horizon = min(horizon, sched.period)
        n_windows = max(1, math.ceil(horizon / T - 1e-12))
    fuzz = 1e-12 * max(T, 1.0)
    t_d = [0.0] * n_windows
    counts = [0] * n_windows
    for seg_start, seg_end, mode in segments(sched, horizon):
        w_first = int(seg_start // T)
        w_last = min(int((seg_end - fuzz) // T), n_windows - 1)
        for w in range(w_first, w_last + 1):
            overlap = min(seg_end, (w + 1) * T) - max(seg_start, w * T)
            if overlap > fuzz:
                counts[w] += 1
                if not connected[mode]:
                    t_d[w] += overlap
    return max(t_d), max(counts)


def noisy_bound(
    cert: LyapunovCertificate,
    topo_family: list[Topology],
    sched: SwitchingSchedule,
    T: float,
    delta: float,
    subintervals: int | None = None,
    n_windows: int | None = None,
) -> NoisyBoundAnalysis:
    """Ultimate bound on tracking errors under |disturbance| <= delta.

    The schedule is scanned in windows of length T to find t_d, the largest
    per-window total of disconnected time, and the largest per-window count
    of constant-topology subintervals.  The geometric accumulation factor of
    ``g_bar`` uses that subinterval count; pass ``subintervals`` to override
    it.  Requires a valid certificate.
    """
    if not cert.valid:
        raise ValueError("certificate is not valid; no bound can be derived")
    if T <= 0.0:
        raise ValueError("window length T must be positive")
    if delta < 0.0:
        raise ValueError("delta must be nonnegative")
    sched.validate_indices(len(topo_family))
    connected = [is_jointly_connected(topo) for topo in topo_family]

    # growth rate on disconnected intervals: dV/dt <= alpha V (+ injection)
    alpha = 0.0
    for i, topo in enumerate(topo_family):
        if connected[i]:
            continue
        F = error_system_matrix(topo, cert.gains)
        S = F.T @ cert.P + cert.P @ F
        alpha = max(alpha, float(eigenvalues_sym(S)[-1]) / cert.lambda_min_P)

    beta = cert.beta
    n = cert.n
    alpha0 = 2.0 * n * cert.lambda_max_P**2 / (beta * cert.lambda_min_P)
    beta0 = alpha0

    if n_windows is None:
        n_windows = max(1, min(1000, math.ceil(10.0 * sched.period / T)))
    t_d, n_sub_measured = _window_stats(sched, connected, T, n_windows)
    n_sub = subintervals if subintervals is not None else n_sub_measured

    epsilon = _safe_exp(-beta * (T - t_d) + alpha * t_d)

    if t_d <= 0.0:
        growth = 0.0
        prefactor = float(n_sub + 1)
    else:
        growth = alpha0 * t_d if alpha <= 0.0 else (alpha0 / alpha) * (
            _safe_exp(alpha * t_d) - 1.0
        )
        denom = _safe_exp(t_d) - 1.0
        prefactor = (_safe_exp((n_sub + 1) * t_d) - 1.0) / denom
    g_bar = prefactor * max(beta0, growth)

    contractive = epsilon < 1.0
    if contractive:
        v_ultimate = g_bar * delta**2 / (1.0 - epsilon)
        # delta factored out so the bound is exactly linear in it
        c_delta = delta * math.sqrt(g_bar / ((1.0 - epsilon) * cert.lambda_min_P))
        note = "contractive"
    else:
        v_ultimate = math.inf
        c_delta = math.inf
        note = "not contractive: connected fraction too small"
    return NoisyBoundAnalysis(
        alpha=alpha,
        alpha0=alpha0,
        beta0=beta0,
        T=T,
        t_d=t_d,
        subintervals=n_sub,
        epsilon=epsilon,
        g_bar=g_bar,
        v_ultimate=v_ultimate,
        c_delta=c_delta,
        delta=delta,
        contractive=contractive,
        note=note,
    )
