"""Immutable record of one closed-loop run."""

from dataclasses import dataclass, field

import numpy as np

from ..model import OUTPUT


@dataclass(frozen=True, eq=False)
class SimulationTrace:
    """Every array has ``steps + 1`` rows, one per time index 0..steps.

    Controls are evaluated at every index, including the last one, even though
    the input at ``steps`` is never applied.  ``E_hat`` has shape
    ``(steps + 1, N, D)``; it is ``None`` for runs without distributed observers.
    """

    kind: str
    mode: str
    scenario_name: str
    leader: np.ndarray
    states: tuple
    outputs: tuple
    leader_output: np.ndarray
    u_ff: tuple
    u_fb: tuple
    E: np.ndarray
    E_hat: np.ndarray = None
    extras: dict = field(default_factory=dict)

    @property
    def steps(self):
        return self.leader.shape[0] - 1

    @property
    def N(self):
        return len(self.states)

    @property
    def controls(self):
        return tuple(a + b for a, b in zip(self.u_ff, self.u_fb))

    @property
    def u_bar(self):
        """Stacked feedback inputs, shape ``(steps + 1, sum m_i)``."""
        return np.hstack(self.u_fb)

    @property
    def E_tilde(self):
        """Observer errors E - E_hat_i; zeros when no observers ran."""
        if self.E_hat is None:
            return np.zeros((self.E.shape[0], self.N, self.E.shape[1]))
        return self.E[:, None, :] - self.E_hat

    @property
    def z(self):
        """Rows [E(k); E_tilde_1(k); ...; E_tilde_N(k)]."""
        et = self.E_tilde
        return np.hstack([self.E, et.reshape(et.shape[0], -1)])

    def deviations(self):
        """max_i ||x_i - x_0|| (state mode) or max_i ||y_i - y_0|| (output mode), per step."""
        if self.mode == OUTPUT:
            diffs = [y - self.leader_output for y in self.outputs]
        else:
            diffs = [x - self.leader for x in self.states]
        return np.max(np.stack([np.linalg.norm(d, axis=1) for d in diffs]), axis=0)

    def columns(self):
        """Column names and the matching 2-D data block for CSV export."""
        names = ["step"]
        blocks = [np.arange(self.steps + 1, dtype=float)[:, None]]

        def add(prefix, arr):
            arr = np.asarray(arr)
            if arr.ndim == 1:
                names.append(prefix)
                blocks.append(arr[:, None])
                return
            names.extend(f"{prefix}[{c}]" for c in range(arr.shape[1]))
            blocks.append(arr)

        add("x0", self.leader)
        if self.mode == OUTPUT:
            add("y0", self.leader_output)
        for i in range(self.N):
            add(f"x{i + 1}", self.states[i])
            if self.mode == OUTPUT:
                add(f"y{i + 1}", self.outputs[i])
            add(f"u_ff{i + 1}", self.u_ff[i])
            add(f"u_fb{i + 1}", self.u_fb[i])
        add("E", self.E)
        if self.E_hat is not None:
            for i in range(self.N):
                add(f"E_tilde{i + 1}", self.E_tilde[:, i, :])
        for key in sorted(self.extras):
            add(key, self.extras[key])
        add("deviation", self.deviations())
        return names, np.hstack(blocks)
