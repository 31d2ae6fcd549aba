"""
Error types raised by the laboratory modules
"""

from typing import Iterable, Optional


class LabError(Exception):
    """Base class; ``module`` names the owning module for CLI messages"""

    module = "lab"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class SizeOverflow(LabError):
    module = "qubit_algebra"


class DimensionMismatch(LabError):
    module = "qubit_algebra"


class NonHermitianDrift(LabError):
    module = "qubit_algebra"


class UnnormalizedFactor(LabError):
    module = "qubit_algebra"


class InvalidInstance(LabError):
    module = "hamiltonian_builder"


class InstanceFormatError(LabError):
    """Malformed instance file; ``line`` is 1-based when known"""

    module = "hamiltonian_builder"

    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InvalidSchedule(LabError):
    module = "hamiltonian_builder"


class EigensolverFailure(LabError):
    module = "spectral_analyzer"

    def __init__(self, message: str, s: Optional[float] = None):
        if s is not None:
            message = f"{message} (s={s:.6g})"
        super().__init__(message)
        self.s = s


class DegenerateGap(LabError):
    module = "spectral_analyzer"


class InsufficientData(LabError):
    module = "spectral_analyzer"


class StepTooCoarse(LabError):
    module = "adiabatic_engine"


class ScanCapExceeded(LabError):
    """Threshold scan passed its cap; ``last_time`` is the last scanned T"""

    module = "adiabatic_engine"

    def __init__(self, last_time: float, cap: float, success: float):
        super().__init__(
            f"threshold beyond cap: success {success:.4f} at T={last_time:.6g}, cap {cap:.6g}"
        )
        self.last_time = last_time
        self.cap = cap
        self.success = success


class InvalidObservable(LabError):
    module = "tomography_lab"


class InconsistentRecords(LabError):
    module = "tomography_lab"


class MissingPauliStrings(LabError):
    module = "tomography_lab"

    def __init__(self, missing: Iterable[str]):
        self.missing = sorted(missing)
        shown = ", ".join(self.missing[:16])
        more = f" (+{len(self.missing) - 16} more)" if len(self.missing) > 16 else ""
        super().__init__(f"missing Pauli expectations: {shown}{more}")


class PartitionCapExceeded(LabError):
    module = "reality_oracle"


class RejectionSamplingExhausted(LabError):
    module = "morphism_ledger"


class LedgerDataError(LabError):
    module = "morphism_ledger"


class ReportFormatError(LabError):
    module = "morphism_ledger"


class StateFileError(LabError):
    """State or report input to a command could not be used"""

    module = "cli"
