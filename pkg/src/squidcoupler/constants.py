"""Physical constants and the project-wide unit system.

Device quantities are carried in "device units" everywhere in this package:
currents in uA, inductances in pH, capacitances in fF, flux in units of the
flux quantum, energies as frequencies in GHz (E/h), and times in ns.  All
conversions to SI happen through the factors defined here.
"""

from scipy.constants import h as PLANCK_H  # J s
from scipy.constants import hbar as HBAR  # J s
from scipy.constants import k as K_B  # J / K
from scipy.constants import physical_constants

#: Magnetic flux quantum, Wb (CODATA).
PHI0 = physical_constants["mag. flux quantum"][0]

#: Flux quantum expressed in uA * pH (1 uA * 1 pH = 1e-18 Wb).
PHI0_UA_PH = PHI0 / 1e-18

UA = 1e-6  # A per uA
PH = 1e-12  # H per pH
FF = 1e-15  # F per fF
GHZ = 1e9  # Hz per GHz
NS = 1e-9  # s per ns
KOHM = 1e3  # Ohm per kOhm


def joule_to_ghz(energy: float) -> float:
    """Convert an energy in J to a frequency E/h in GHz."""
    return energy / PLANCK_H / GHZ
