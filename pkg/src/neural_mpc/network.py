"""Firing-rate network dynamics: single-layer, regularized, and multilayer forms.

The single-layer network integrates

    eta * d(lam)/dt = -lam + relu(gamma @ lam - eps(t) * lam - m_map @ x0 - bias)

whose equilibria are dual solutions of the condensed QP; the first control
action is recovered as  u = -u_dual_map @ lam - u_feedback @ x0.  The
regularizer eps(t) = eps0 / (1 + t/eta) vanishes over time (non-increasing,
integral divergent, bounded derivative) and steers the state toward the
minimal-norm dual solution when eps0 > 0.  Time in the schedule is measured in
units of the network time constant eta.

The multilayer form evolves a hidden state with weights (omega1, omega2, psi)
obtained from factorizing the stacked matrix [gamma; -u_dual_map]; its hidden
state may be negative, so no orthant invariance is claimed for it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .condenser import NetworkData


def relu(v: np.ndarray) -> np.ndarray:
    """Elementwise max with zero."""
    return np.maximum(v, 0.0)


@dataclass
class FiringRateNetwork:
    """Single-layer firing-rate network with mutable state ``lam``.

    Parameters
    ----------
    data : NetworkData
        Synaptic matrix, input map, bias and control read-out maps (may be the
        slack-augmented variant).
    eta : float
        Network time constant in seconds.
    eps0 : float
        Initial value of the vanishing regularizer; 0 disables it.
    """

    data: NetworkData
    eta: float = 1e-3
    eps0: float = 0.0
    lam: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.eps0 < 0:
            raise ValueError("eps0 must be nonnegative")
        if self.lam is None:
            self.lam = np.zeros(self.data.size)
        else:
            self.lam = np.asarray(self.lam, dtype=float).copy()

    def reset(self):
        """Cold start: zero the firing rates."""
        self.lam = np.zeros(self.data.size)

    def epsilon(self, t: float) -> float:
        """Regularizer value at elapsed time t (seconds)."""
        return self.eps0 / (1.0 + t / self.eta)


def step_single_layer(
    net: FiringRateNetwork, x0: np.ndarray, dt: float, t: float = 0.0
) -> np.ndarray:
    """One forward-Euler step of the single-layer dynamics; returns updated lam.

    Requires dt <= eta/2 for stability of the explicit scheme.  With lam >= 0
    and dt <= eta the update is a convex combination of lam and a nonnegative
    term, so the nonnegative orthant is forward invariant.
    """
    if dt <= 0 or dt / net.eta > 0.5:
        raise ValueError(f"step size must satisfy 0 < dt/eta <= 0.5, got {dt / net.eta}")
    d = net.data
    drive = d.gamma @ net.lam - net.epsilon(t) * net.lam - d.m_map @ x0 - d.bias
    net.lam = net.lam + (dt / net.eta) * (-net.lam + relu(drive))
    return net.lam


def settle(
    net: FiringRateNetwork,
    x0: np.ndarray,
    tol: float = 1e-8,
    max_time: float = 0.02,
    dt: float | None = None,
    record: bool = False,
):
    """Integrate until the update rate is below tol or max_time elapses.

    The stopping metric is the sup-norm of the state update rate measured per
    time constant, ||-lam + relu(drive)||_inf; with a vanishing regularizer the
    equilibrium drifts, so the flag may stay False even near convergence.

    Returns
    -------
    (lam, settled) or (lam, settled, times, traj) when ``record`` is True;
    ``times`` are in seconds and ``traj`` has one row of lam per step.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    dt = net.eta / 20.0 if dt is None else dt
    if dt / net.eta > 0.5:
        raise ValueError("dt must satisfy dt/eta <= 0.5")
    d = net.data
    x0 = np.asarray(x0, dtype=float)
    bias_in = d.m_map @ x0 + d.bias
    gamma = d.gamma
    lam = net.lam
    step = dt / net.eta
    n_steps = max(1, int(round(max_time / dt)))
    settled = False
    times = [0.0] if record else None
    traj = [lam.copy()] if record else None
    t = 0.0
    for k in range(n_steps):
        eps = net.epsilon(t)
        rate = -lam + relu(gamma @ lam - eps * lam - bias_in)
        if np.max(np.abs(rate)) <= tol:
            settled = True
            break
        lam = lam + step * rate
        t = (k + 1) * dt
        if record:
            times.append(t)
            traj.append(lam.copy())
    net.lam = lam
    if record:
        return lam, settled, np.array(times), np.array(traj)
    return lam, settled


def extract_control(net: FiringRateNetwork, lam: np.ndarray, x0: np.ndarray) -> np.ndarray:
    """First control action  u = -u_dual_map @ lam - u_feedback @ x0.

    The state-feedback term is computable with lam = 0, preserving the split
    into an offline unconstrained feedback and the online network correction.
    """
    d = net.data
    return -d.u_dual_map @ lam - d.u_feedback @ np.asarray(x0, dtype=float)


@dataclass
class MultilayerNetwork:
    """Two-layer realization with hidden state ``tilde_lam`` (sign-unconstrained)."""

    omega1: np.ndarray
    omega2: np.ndarray
    psi: np.ndarray
    eta: float = 1e-3
    residual: float = 0.0
    tilde_lam: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        k = self.psi.shape[0]
        if self.omega1.shape[1] != k or self.omega2.shape[1] != k:
            raise ValueError("omega1/omega2 column counts must match psi rows")
        if self.tilde_lam is None:
            self.tilde_lam = np.zeros(k)
        else:
            self.tilde_lam = np.asarray(self.tilde_lam, dtype=float).copy()

    def reset(self):
        self.tilde_lam = np.zeros(self.psi.shape[0])


def step_multilayer(
    net: MultilayerNetwork, aux: NetworkData, x0: np.ndarray, dt: float
) -> np.ndarray:
    """One forward-Euler step of the multilayer dynamics; returns updated state."""
    if dt <= 0 or dt / net.eta > 0.5:
        raise ValueError(f"step size must satisfy 0 < dt/eta <= 0.5, got {dt / net.eta}")
    drive = net.omega1 @ net.tilde_lam - aux.m_map @ x0 - aux.bias
    net.tilde_lam = net.tilde_lam + (dt / net.eta) * (-net.tilde_lam + net.psi @ relu(drive))
    return net.tilde_lam


def settle_multilayer(
    net: MultilayerNetwork,
    aux: NetworkData,
    x0: np.ndarray,
    tol: float = 1e-8,
    max_time: float = 0.02,
    dt: float | None = None,
):
    """Integrate the multilayer dynamics until quiescent; returns (state, settled)."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    dt = net.eta / 20.0 if dt is None else dt
    if dt / net.eta > 0.5:
        raise ValueError("dt must satisfy dt/eta <= 0.5")
    x0 = np.asarray(x0, dtype=float)
    bias_in = aux.m_map @ x0 + aux.bias
    state = net.tilde_lam
    step = dt / net.eta
    n_steps = max(1, int(round(max_time / dt)))
    settled = False
    for _ in range(n_steps):
        rate = -state + net.psi @ relu(net.omega1 @ state - bias_in)
        if np.max(np.abs(rate)) <= tol:
            settled = True
            break
        state = state + step * rate
    net.tilde_lam = state
    return state, settled


def extract_control_multilayer(
    net: MultilayerNetwork, aux: NetworkData, x0: np.ndarray
) -> np.ndarray:
    """Control read-out  u = omega2 @ tilde_lam - u_feedback @ x0."""
    return net.omega2 @ net.tilde_lam - aux.u_feedback @ np.asarray(x0, dtype=float)
