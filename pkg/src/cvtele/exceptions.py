class CvteleError(Exception):
    """Base class for errors raised by this package."""


class TailTooHeavy(CvteleError):
    """The truncated photon-number tail exceeds the allowed mass; raise the cutoff."""


class ZeroOutput(CvteleError):
    """Conditioning produced a state with (numerically) zero norm."""


class CutoffOverflow(CvteleError):
    """A multimode term carries more photons than the state's total cutoff."""


class InvalidQubit(CvteleError):
    """A single-rail qubit input has support above one photon."""
