"""Error hierarchy shared by all modules."""


class UavChannelGanError(Exception):
    """Base class for package errors."""


class ConfigError(UavChannelGanError, ValueError):
    """Invalid or unreadable configuration (CLI exit status 2)."""


class InfeasibleError(UavChannelGanError, RuntimeError):
    """No topology satisfies the communication constraints (CLI exit status 3)."""


class FormationError(InfeasibleError):
    """Network formation preconditions failed; the UAVs must relocate."""


class RingNotFoundError(InfeasibleError):
    """No Hamiltonian cycle exists inside the feasible sets."""


class ContractViolation(UavChannelGanError, ValueError):
    """An operation was called outside its precondition."""


class SingularBeamformingError(UavChannelGanError, ZeroDivisionError):
    """Beamforming coefficient is zero, so the gain cannot be recovered."""


class GraphConnectivityError(UavChannelGanError, ValueError):
    """Graph is not strongly connected."""

    def __init__(self, source: int, target: int):
        super().__init__(f"Node {target} is unreachable from node {source}")
        self.source = source
        self.target = target


class RegimeError(UavChannelGanError, ValueError):
    """Recursion oracle queried outside the gamma-free regime."""


class CompletionNotAttainedError(UavChannelGanError, RuntimeError):
    """Completion confidence not reached within the iteration cap."""

    def __init__(self, cap: int, probability: float, confidence: float):
        super().__init__(
            f"p_G({cap}) = {probability:.6f} is below the confidence target {confidence}"
        )
        self.cap = cap
        self.probability = probability
        self.confidence = confidence


class ProtocolError(UavChannelGanError, RuntimeError):
    """Learning protocol invoked on an inconsistent network state."""
