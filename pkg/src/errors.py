"""
Exceptions raised by the library. Input problems are ValueErrors,
numerical failures are RuntimeErrors.
"""


class LayoutError(ValueError):
    pass


class LabelCollisionError(LayoutError):
    def __init__(self, labels):
        self.labels = tuple(labels)
        super().__init__(f"Subsystem labels collide: {list(self.labels)}")


class UnknownLabelError(LayoutError):
    def __init__(self, label, known):
        self.label = label
        super().__init__(f"Unknown subsystem label {label!r}. Labels seen: {list(known)}")


class PermutationError(LayoutError):
    pass


class ShapeMismatchError(ValueError):
    pass


class NotHermitianError(ValueError):
    pass


class NotPSDError(ValueError):
    pass


class InvalidStateError(ValueError):
    pass


class NotUnitaryError(ValueError):
    pass


class StateFormatError(ValueError):
    pass


class CapacityError(ValueError):
    """Requested dimension exceeds a configured resource cap."""

    def __init__(self, what: str, requested: int, allowed: int):
        self.requested = requested
        self.allowed = allowed
        super().__init__(f"{what} needs dimension {requested}, cap is {allowed}")


class NonConvergenceError(RuntimeError):
    """Iterative minimizer stopped without meeting its tolerance."""

    def __init__(self, message: str, best_value: float, step_size: float):
        self.best_value = best_value
        self.step_size = step_size
        super().__init__(f"{message} (best value {best_value!r}, last step {step_size:.3e})")
