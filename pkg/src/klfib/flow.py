"""Mean curvature flow for positive sections: explicit Euler volume ascent.

The flow moves interior nodes by the normal-projected mean curvature,
dh/dtau = m_perp(h), leaving the Dirichlet boundary untouched.  Steps obey a
parabolic restriction dt <= safety * hstep^2 * (smallest metric eigenvalue)
and are rejected (with dt halved) when positivity fails or the 3-volume
decreases beyond a small slack: the continuous flow strictly ascends the
volume, so a decrease signals an overlong step.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .sections import (
    SectionGrid,
    flow_state,
    induced_metric,
    is_positive_section,
    mean_curvature,
    max_mnorm,
)


@dataclass(frozen=True)
class FlowParams:
    dt_initial: float = 0.0  # 0 = choose from the stability rule
    dt_safety: float = 0.2
    max_steps: int = 100_000
    stop_mnorm: float = 1e-6  # relative to the initial max ||m_perp||
    record_every: int = 10
    growth: float = 1.25
    volume_slack: float = 1e-10  # relative per-step decrease tolerance
    dt_min: float = 1e-15

    def __post_init__(self):
        if not (0 < self.dt_safety <= 1 and self.max_steps > 0
                and self.stop_mnorm > 0 and self.record_every > 0
                and self.growth >= 1 and self.dt_min > 0):
            raise ValueError("invalid flow parameters")


@dataclass
class FlowTrace:
    """Per-recorded-step diagnostics of a flow run."""

    steps: list = field(default_factory=list)
    times: list = field(default_factory=list)
    volumes: list = field(default_factory=list)
    mnorms: list = field(default_factory=list)
    margins: list = field(default_factory=list)

    def record(self, step, time, volume, mnorm, margin):
        self.steps.append(int(step))
        self.times.append(float(time))
        self.volumes.append(float(volume))
        self.mnorms.append(float(mnorm))
        self.margins.append(float(margin))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("step,time,volume,mnorm,margin\n")
        for row in zip(self.steps, self.times, self.volumes, self.mnorms, self.margins):
            buf.write("%d,%.17g,%.17g,%.17g,%.17g\n" % row)
        return buf.getvalue()


class PositivityLostError(RuntimeError):
    """The flow cannot proceed without leaving the positive cone."""

    def __init__(self, msg, state=None, trace=None):
        super().__init__(msg)
        self.state = state
        self.trace = trace


class NoConvergenceError(RuntimeError):
    """Step budget exhausted before reaching the target residual."""

    def __init__(self, msg, state=None, trace=None):
        super().__init__(msg)
        self.state = state
        self.trace = trace


def stable_dt(h: SectionGrid, safety: float) -> float:
    """Parabolic step bound: safety * hstep^2 * min eigenvalue of g."""
    g, _ = induced_metric(h)
    lam_min = float(np.linalg.eigvalsh(g)[..., 0].min())
    return safety * h.hstep ** 2 * lam_min


def mcf_step(h: SectionGrid, dt: float) -> SectionGrid:
    """One explicit Euler step; raises PositivityLostError on a bad result."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    h2 = h.with_values(h.values + dt * mean_curvature(h))
    ok, margin, bad = is_positive_section(h2)
    if not ok:
        raise PositivityLostError(
            f"positivity lost after step dt={dt:.3e} (margin {margin:.3e}, "
            f"first offenders {bad[:3]})", state=h)
    return h2


def mcf_run(h0: SectionGrid, p: FlowParams = FlowParams()):
    """Iterate the flow until max ||m_perp|| <= stop_mnorm * initial value.

    Adaptive stepping: rejected steps (positivity loss or volume decrease
    beyond the slack) halve dt; accepted steps grow it back toward the
    stability bound.  Returns (final grid, FlowTrace).  The recorded volume
    column is non-decreasing by construction of the acceptance rule.
    """
    trace = FlowTrace()
    h = h0
    m, vol, margin = flow_state(h)
    if m is None:
        raise PositivityLostError(f"initial section not positive (margin {margin:.3e})")
    mnorm = max_mnorm(h, m)
    target = p.stop_mnorm * mnorm
    dt = p.dt_initial if p.dt_initial > 0 else p.dt_safety * h.hstep ** 2 * margin
    t = 0.0
    trace.record(0, t, vol, mnorm, margin)
    if mnorm <= target:
        return h, trace
    for step in range(1, p.max_steps + 1):
        accepted = False
        while dt >= p.dt_min:
            h2 = h.with_values(h.values + dt * m)
            m2, vol2, margin2 = flow_state(h2)
            if m2 is not None and vol2 >= vol - p.volume_slack * abs(vol):
                accepted = True
                break
            dt *= 0.5
        if not accepted:
            raise PositivityLostError(
                f"step size underflow at step {step}", state=h, trace=trace)
        t += dt
        h, m, vol, margin = h2, m2, vol2, margin2
        mnorm = max_mnorm(h, m)
        if step % p.record_every == 0 or mnorm <= target:
            trace.record(step, t, vol, mnorm, margin)
        if mnorm <= target:
            return h, trace
        dt = min(dt * p.growth, p.dt_safety * h.hstep ** 2 * margin)
    if trace.steps[-1] != p.max_steps:
        trace.record(p.max_steps, t, vol, mnorm, margin)
    raise NoConvergenceError(
        f"no convergence in {p.max_steps} steps (mnorm {mnorm:.3e}, target {target:.3e})",
        state=h, trace=trace)
