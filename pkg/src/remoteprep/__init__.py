"""Remote state preparation and measurement along a Bloch-sphere longitude,
simulated on two qubits and compiled to NMR pulse sequences."""

from .bloch import QubitParams
from .locc import new_session, run_rsm, run_rsp_coherent, run_rsp_measured
from .qcore import Slot

__all__ = ["QubitParams", "Slot", "new_session", "run_rsm", "run_rsp_coherent", "run_rsp_measured"]
__version__ = "0.1.0"
