from pathlib import Path

import numpy as np
import pytest

from qfci.guess import hf_determinant
from qfci.hamiltonian import build_second_quantized, exact_eigensolve
from qfci.integrals import parse_fcidump, to_spin_orbitals
from qfci.propagator import EvolutionWindow

FIXTURES = Path(__file__).parent / "fixtures"

# Resolved full-CI spectrum of the bundled H2/STO-3G file in the (1,1)
# sector, computed once with a standalone 2x2/1x1 CI script and frozen.
H2_SECTOR_11_EIGENVALUES = (
    -1.13726983728903,
    -0.532515695638215,
    -0.16993471043801311,
    0.47976494327251384,
)


@pytest.fixture(scope="session")
def h2_path() -> Path:
    return FIXTURES / "h2_sto3g_r1.4011.fcidump"


@pytest.fixture(scope="session")
def h2_mol(h2_path):
    return parse_fcidump(h2_path)


@pytest.fixture(scope="session")
def h2_soi(h2_mol):
    return to_spin_orbitals(h2_mol)


@pytest.fixture(scope="session")
def h2_terms(h2_soi):
    return build_second_quantized(h2_soi)


@pytest.fixture(scope="session")
def h2_spectrum_11(h2_terms, h2_soi):
    return exact_eigensolve(h2_terms, h2_soi.n_so, (1, 1))


@pytest.fixture(scope="session")
def h2_all_spectra(h2_terms, h2_soi):
    return [
        exact_eigensolve(h2_terms, h2_soi.n_so, (a, b))
        for a in range(3)
        for b in range(3)
    ]


@pytest.fixture(scope="session")
def h2_hf_state(h2_mol):
    return hf_determinant(h2_mol.n_orb, 1, 1).to_statevector()


@pytest.fixture(scope="session")
def window():
    # brackets the fixture's (1,1) spectrum [-1.138, 0.480] comfortably
    return EvolutionWindow(e_max=1.0, e_min=-1.5)
