"""Fock-space simulation of CV teleportation with N single-photon entangled resources."""

from cvtele.exceptions import CutoffOverflow, InvalidQubit, TailTooHeavy, ZeroOutput
from cvtele.fockspace import (
    FockVector,
    TwoModeDiagonal,
    WignerGrid,
    cat_even,
    coherent,
    epr,
    fidelity,
    fock,
    mean_photon,
    quad_combo_variance,
    vacuum,
    wigner,
)
from cvtele.teleporter import (
    BellModel,
    TeleportReport,
    coherent_success,
    epr_fidelity_closed,
    filter_coeff,
    teleport_epr,
    teleport_pure,
    vt_teleported,
)

__version__ = "0.1.0"
