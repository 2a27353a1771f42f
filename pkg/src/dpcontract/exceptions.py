"""Exception hierarchy shared by all dpcontract modules."""


class DPContractError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(DPContractError, ValueError):
    """Array shapes or chart dimensions do not match."""


class UnsupportedChartError(DPContractError, ValueError):
    """No closed-form geodesic distance (or ball sampler) exists for the chart."""


class ScheduleError(DPContractError, ValueError):
    """An epsilon or noise schedule is malformed or does not cover a step."""


class HypothesisError(DPContractError, ValueError):
    """A hypothesis required by a noise-design result fails numerically."""


class NumericalError(DPContractError, ArithmeticError):
    """A numerical routine failed (divergence, ill-conditioning, disagreement)."""


class DivergenceError(NumericalError):
    """A simulated trajectory left the finite region."""

    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or f"trajectory diverged at step k={step}")
